import json

import numpy as np
import pytest

from lakernel import distributional as dist
from lakernel import evaluation as ev
from lakernel import substitution as sub
from lakernel import svm
from lakernel import synthetic as syn
from lakernel.kernels import LocalAlignmentKernel, compute_gram, normalize_gram


def block_gram(labels, within=1.0, across=0.0):
    y = np.asarray(labels)
    same = y[:, None] == y[None, :]
    return np.where(same, within, across).astype(float)


class TestFolds:
    def test_singletons(self):
        plan = ev.kfold_split(10, 10, seed=0)
        assert plan.sizes() == [1] * 10

    def test_deterministic(self):
        a, b = ev.kfold_split(37, 5, seed=4), ev.kfold_split(37, 5, seed=4)
        assert np.array_equal(a.assignment, b.assignment) and a.digest() == b.digest()
        assert not np.array_equal(a.assignment, ev.kfold_split(37, 5, seed=5).assignment)

    def test_balanced_sizes(self):
        assert sorted(ev.kfold_split(23, 10, seed=1).sizes()) == [2] * 7 + [3] * 3

    def test_errors(self):
        with pytest.raises(ValueError):
            ev.kfold_split(5, 10)
        with pytest.raises(ValueError):
            ev.kfold_split(5, 1)

    def test_partition_invariants(self):
        rng = np.random.default_rng(0)
        for seed in range(1000):
            n = int(rng.integers(2, 120))
            k = int(rng.integers(2, min(n, 12) + 1))
            plan = ev.kfold_split(n, k, seed)
            tests = np.sort(np.concatenate([plan.test_indices(f) for f in range(k)]))
            assert np.array_equal(tests, np.arange(n))
            sizes = plan.sizes()
            assert max(sizes) - min(sizes) <= 1
            for f in range(k):
                assert len(plan.train_indices(f)) + sizes[f] == n

    def test_stratified(self):
        labels = [1] * 20 + [0] * 80
        plan = ev.kfold_split(100, 10, seed=3, stratify=True, labels=labels)
        assert plan.sizes() == [10] * 10
        assert all(sum(labels[i] for i in plan.test_indices(f)) == 2 for f in range(10))

    def test_dataset_input(self):
        ds = syn.separable_dataset(12)
        assert len(ev.kfold_split(ds, 3, 0)) == 12


class TestMetrics:
    def test_examples(self):
        m = ev.metrics_from_counts(10, 0, 0, 5)
        assert (m.precision, m.recall, m.f_score) == (1.0, 1.0, 1.0)
        m = ev.metrics_from_counts(3, 1, 2, 4)
        assert m.precision == 0.75 and m.recall == 0.6 and m.f_score == pytest.approx(2 / 3)
        m = ev.metrics_from_counts(0, 0, 0, 7)
        assert (m.precision, m.recall, m.f_score) == (0.0, 0.0, 0.0)

    def test_negative_counts(self):
        with pytest.raises(ValueError):
            ev.metrics_from_counts(-1, 0, 0, 0)

    def test_addition_and_predictions(self):
        m = ev.metrics_from_predictions([1, 1, 0, 0], [1, -1, 1, -1])
        assert (m.tp, m.fn, m.fp, m.tn) == (1, 1, 1, 1)
        assert (m + m).tp == 2

    def test_default_grid(self):
        assert len(ev.DEFAULT_C_GRID) == 10
        assert ev.DEFAULT_C_GRID[0] == 2.0 ** -6 and ev.DEFAULT_C_GRID[-1] == 2.0 ** 12


class TestCrossValidate:
    def test_separable_ceiling(self):
        labels = np.array([1, 0] * 20)
        plan = ev.kfold_split(40, 10, seed=1)
        r = ev.cross_validate(block_gram(labels, 1.0, 0.1) + 0.2 * np.eye(40), labels, plan)
        assert r.aggregate.f_score == 1.0

    def test_accounting(self):
        labels = np.array([1] * 15 + [0] * 25)
        rng = np.random.default_rng(2)
        X = rng.normal(size=(40, 4)) + labels[:, None]
        plan = ev.kfold_split(40, 5, seed=2)
        r = ev.cross_validate(X @ X.T, labels, plan, c_grid=[0.1, 1.0, 10.0])
        assert sum(len(f.test_indices) for f in r.folds) == 40
        total = ev.Metrics()
        for f in r.folds:
            total = total + f.metrics
        assert total == r.aggregate
        assert all(f.C in (0.1, 1.0, 10.0) for f in r.folds)

    def test_constant_kernel(self):
        labels = np.array([1] * 12 + [0] * 28)
        plan = ev.kfold_split(40, 5, seed=0)
        r = ev.cross_validate(np.ones((40, 40)), labels, plan, c_grid=[1.0], weighting=svm.NONE)
        assert r.aggregate.recall in (0.0, 1.0)
        if r.aggregate.recall == 1.0:
            assert r.aggregate.precision == pytest.approx(12 / 40)

    def test_single_class_fold(self):
        labels = np.array([1, 1, 0, 0, 0, 0])
        plan = ev.FoldPlan(3, 0, np.array([0, 0, 1, 1, 2, 2]), np.arange(6))
        r = ev.cross_validate(np.eye(6), labels, plan, c_grid=[1.0])
        assert [f.constant for f in r.folds] == [True, False, False]
        assert r.folds[0].metrics == ev.metrics_from_counts(0, 0, 2, 0)

    def test_order_invariance(self):
        labels = np.array([1] * 14 + [0] * 22)
        rng = np.random.default_rng(5)
        X = rng.normal(size=(36, 5)) + 0.8 * labels[:, None]
        K = X @ X.T
        plan = ev.kfold_split(36, 6, seed=5)
        base = ev.cross_validate(K, labels, plan, c_grid=[0.25, 1.0, 4.0])
        perm = rng.permutation(36)
        moved = ev.cross_validate(K[np.ix_(perm, perm)], labels[perm], plan.permuted(perm),
                                  c_grid=[0.25, 1.0, 4.0])
        assert moved.aggregate == base.aggregate
        assert [f.C for f in moved.folds] == [f.C for f in base.folds]
        assert np.array_equal(moved.predictions, base.predictions[perm])

    def test_input_checks(self):
        with pytest.raises(ValueError):
            ev.cross_validate(np.eye(4), [1, 0, 1, 0], ev.kfold_split(4, 2), c_grid=[])
        with pytest.raises(ValueError):
            ev.cross_validate(np.eye(4), [1, 0, 1], ev.kfold_split(4, 2))


class TestTTest:
    def test_fixture(self):
        r = ev.paired_ttest([2.2, 1.8, 2.0, 2.4, 1.6], [1.0] * 5)
        assert r.t == pytest.approx(7.071, abs=1e-3)
        assert r.p == pytest.approx(0.0021, abs=1e-3)
        assert r.significant

    def test_equal(self):
        r = ev.paired_ttest([0.1, 0.2], [0.1, 0.2])
        assert (r.t, r.p, r.significant) == (0.0, 1.0, False)

    def test_zero_variance(self):
        r = ev.paired_ttest([2, 3, 4, 5, 6], [1, 2, 3, 4, 5])
        assert r.t == float("inf") and r.p == 0.0 and r.significant

    def test_antisymmetric(self):
        a, b = [0.7, 0.9, 0.4, 0.8], [0.6, 0.5, 0.45, 0.7]
        r1, r2 = ev.paired_ttest(a, b), ev.paired_ttest(b, a)
        assert r1.t == -r2.t and r1.p == r2.p

    def test_errors(self):
        with pytest.raises(ValueError):
            ev.paired_ttest([1, 2], [1])
        with pytest.raises(ValueError):
            ev.paired_ttest([1], [1])


def synonym_data(seed, n):
    cfg = syn.MotifConfig(n=n, motif_strays=True)
    ds = syn.motif_dataset(seed, cfg)
    vocab = ds.word_vocabulary()
    counts = dist.count_contexts(syn.motif_corpus(seed, cfg), vocab)
    return ds, sub.build(dist.build_word_scores(counts, vocab, "dice"))


@pytest.fixture(scope="module")
def synonym_set():
    return synonym_data(1, 200)


class TestSweep:
    def test_rows_and_single_cell(self, synonym_set):
        ds, m = synonym_set
        plan = ev.kfold_split(ds, 5, seed=0)
        rows = ev.parameter_sweep(ds, m, [0.5, 1.0], [(1.2, 0.2), (1.0, 1.0)], plan=plan, c_grid=[1.0])
        assert len(rows) == 4 and rows[0].cell == "beta=0.5 gap=1.2/0.2"
        one = ev.parameter_sweep(ds, m, [1.0], [(1.2, 0.2)], plan=plan, c_grid=[1.0])[0]
        g = normalize_gram(compute_gram(ds, LocalAlignmentKernel(m)))
        direct = ev.cross_validate(g, ds.labels, plan, c_grid=[1.0])
        assert one.metrics == direct.aggregate

    @pytest.mark.slow
    def test_small_beta_hurts(self):
        ds, m = synonym_data(2, 300)
        rows = ev.parameter_sweep(ds, m, [0.125, 1.0], [(1.2, 0.2)], k=10, seed=2)
        assert rows[1].metrics.f_score >= rows[0].metrics.f_score

    def test_empty_grid(self, synonym_set):
        ds, m = synonym_set
        with pytest.raises(ValueError):
            ev.parameter_sweep(ds, m, [], [(1.2, 0.2)])

    def test_parse_gap(self):
        assert ev.parse_gap("1.2/0.2") == (1.2, 0.2)
        with pytest.raises(ValueError):
            ev.parse_gap("1.2")


class TestLearningCurve:
    def test_rows(self, synonym_set):
        ds, m = synonym_set
        train, test = ds[:140], ds[140:]
        kern = LocalAlignmentKernel(m)
        points = ev.learning_curve(train, test, kern, [35, 70, 105, 140], seed=0, c_grid=[1.0, 16.0])
        assert [p.size for p in points] == [35, 70, 105, 140]
        assert points[-1].metrics.f_score > 0.8

    def test_full_size_is_plain_evaluation(self, synonym_set):
        ds, m = synonym_set
        train, test = ds[:60], ds[60:100]
        kern = LocalAlignmentKernel(m)
        point = ev.learning_curve(train, test, kern, [60], c_grid=[4.0])[0]
        g = normalize_gram(compute_gram(list(train.paths) + list(test.paths), kern)).values
        model = svm.train(g[:60, :60], train.labels, svm.TrainConfig(4.0, svm.INVERSE, tolerance=1e-3))
        pred = svm.predict_many(model, g[60:, :60])
        assert point.metrics == ev.metrics_from_predictions(test.labels, pred)

    def test_all_negative_row(self, synonym_set):
        ds, m = synonym_set
        negatives = [i for i, lab in enumerate(ds.labels) if lab == 0]
        train = ds.subset(negatives[:10] + [i for i, lab in enumerate(ds.labels) if lab][:30])
        points = ev.learning_curve(train, ds[150:], LocalAlignmentKernel(m), [3], seed=0, c_grid=[1.0])
        # tiny prefixes may hold one class; the row is still reported
        assert len(points) == 1
        mt = points[0].metrics
        if mt.tp + mt.fp == 0:
            assert (mt.precision, mt.recall, mt.f_score) == (0.0, 0.0, 0.0)

    def test_size_checks(self, synonym_set):
        ds, m = synonym_set
        with pytest.raises(ValueError):
            ev.learning_curve(ds[:10], ds[10:20], LocalAlignmentKernel(m), [5, 3])
        with pytest.raises(ValueError):
            ev.learning_curve(ds[:10], ds[10:20], LocalAlignmentKernel(m), [11])


class TestReports:
    def test_format(self):
        text = ev.format_report([("a/b", ev.metrics_from_counts(3, 1, 2, 4))])
        lines = text.splitlines()
        assert lines[0] == "cell\tprecision\trecall\tf_score"
        assert lines[1].split("\t") == ["a/b", "0.750000", "0.600000", "0.666667"]

    def test_manifest(self, tmp_path):
        path = tmp_path / "m.json"
        ev.write_manifest(path, seed=3, grid=[1, 2])
        assert json.loads(path.read_text()) == {"seed": 3, "grid": [1, 2]}
