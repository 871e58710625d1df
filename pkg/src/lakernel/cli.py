"""Command-line entry point: ``lakernel <subcommand> ...``.

Every subcommand writes its main output to ``--out`` and a JSON run
manifest next to it (``<out>.manifest.json``), then prints both paths.
"""

from __future__ import annotations

import argparse
import hashlib
import io
import sys
from pathlib import Path

import numpy as np

from . import __version__
from . import distributional as dist
from . import evaluation as ev
from . import substitution as sub
from . import svm
from . import taxonomy as tax
from .kernels import (AlignParams, GapWeightedKernel, GramMatrix, LocalAlignmentKernel,
                      ShortestPathKernel, compute_cross, compute_gram, load_gram_file,
                      min_eigenvalue, normalize_cross, normalize_gram, save_gram_file,
                      self_kernels)
from .sequences import read_instances


class CommandError(Exception):
    pass


def _digest(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 16), b""):
            h.update(block)
    return h.hexdigest()


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _gaps(text: str) -> list[tuple[float, float]]:
    try:
        return [ev.parse_gap(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _finish(args, outputs: dict, extra: dict | None = None) -> Path:
    out = Path(args.out)
    manifest = Path(str(out) + ".manifest.json")
    params = {k: v for k, v in vars(args).items() if k not in ("func",)}
    inputs = {}
    for key in ("instances", "train", "test", "corpus", "taxonomy", "subst", "gram", "model"):
        path = getattr(args, key, None)
        if path:
            inputs[key] = {"path": str(path), "sha256": _digest(path)}
    ev.write_manifest(manifest, command=args.command, version=__version__,
                      seed=getattr(args, "seed", None), parameters=params,
                      inputs=inputs, outputs=outputs, **(extra or {}))
    for label, path in outputs.items():
        print(f"{label}: {path}")
    print(f"manifest: {manifest}")
    return manifest


def _kernel(args):
    if args.kernel == "la":
        if not args.subst:
            raise CommandError("the la kernel needs --subst")
        return LocalAlignmentKernel(sub.load_file(args.subst),
                                    AlignParams(args.beta, args.gap_open, args.gap_extend))
    if args.kernel == "shortest-path":
        return ShortestPathKernel()
    return GapWeightedKernel(args.n, args.lam)


def _labels_for(gram: GramMatrix, ds) -> np.ndarray:
    by_id = {inst.id: inst.label for inst in ds}
    missing = [i for i in gram.ids if i not in by_id]
    if missing:
        raise CommandError(f"instance {missing[0]!r} from the Gram file is missing in the instances file")
    return np.array([by_id[i] for i in gram.ids])


def taxonomy_scores(ds, t: tax.Taxonomy, measure: str) -> dict[tuple[str, str], float]:
    """Measure scores for annotated word pairs; exact match elsewhere."""
    words = ds.words()
    concept_of = {k: tok.annotation for k, tok in words.items()
                  if tok.annotation is not None and tok.annotation in t}
    scores = tax.concept_scores(t, set(concept_of.values()), measure)
    table = {}
    keys = sorted(concept_of)
    for i, a in enumerate(keys):
        for b in keys[i + 1:]:
            ca, cb = concept_of[a], concept_of[b]
            table[(a, b)] = 1.0 if ca == cb else scores[tuple(sorted((ca, cb)))]
    return table


def cmd_build_subst(args) -> int:
    ds = read_instances(args.instances)
    vocab = ds.word_vocabulary()
    if args.source == "random":
        if args.seed is None:
            raise CommandError("--source random needs --seed")
        matrix = sub.random_matrix(vocab, args.seed)
    elif args.source == "distributional":
        if not args.corpus:
            raise CommandError("--source distributional needs --corpus")
        if args.measure not in dist.MEASURES:
            raise CommandError(f"unknown distributional measure {args.measure!r}")
        words = ds.words()
        surface = {k: tok.surface for k, tok in words.items()}
        counts = dist.count_contexts(dist.read_corpus(args.corpus), set(surface.values()),
                                     dist.WindowSpec(args.window))
        matrix = sub.build(dist.build_word_scores(counts, vocab, args.measure, surface))
    else:
        if not args.taxonomy:
            raise CommandError("--source taxonomy needs --taxonomy")
        if args.measure not in tax.MEASURES:
            raise CommandError(f"unknown taxonomy measure {args.measure!r}")
        matrix = sub.build(taxonomy_scores(ds, tax.load_taxonomy(args.taxonomy), args.measure))
    sub.save_file(matrix, args.out)
    _finish(args, {"matrix": args.out})
    return 0


def cmd_gram(args) -> int:
    ds = read_instances(args.instances)
    g = compute_gram(ds, _kernel(args), workers=args.threads)
    if args.normalize:
        g = normalize_gram(g)
    save_gram_file(g, args.out)
    _finish(args, {"gram": args.out})
    return 0


def _plan(args, n, labels):
    return ev.kfold_split(n, args.folds, args.seed, stratify=args.stratify, labels=labels)


def cmd_cv(args) -> int:
    g = load_gram_file(args.gram)
    labels = _labels_for(g, read_instances(args.instances))
    plan = _plan(args, len(g), labels)
    result = ev.cross_validate(g, labels, plan, args.c_grid, args.weighting)
    Path(args.out).write_text(ev.format_report(ev.cv_report_rows(result)), encoding="utf-8")
    _finish(args, {"report": args.out}, {
        "fold_plan_digest": plan.digest(),
        "selected_C": [f.C for f in result.folds],
        "constant_folds": [f.fold for f in result.folds if f.constant],
        "fold_f_scores": result.fold_f_scores,
        "significance_unit": "per-fold F-score",
    })
    return 0


def cmd_sweep(args) -> int:
    ds = read_instances(args.instances)
    if not args.subst:
        raise CommandError("sweep needs --subst")
    plan = _plan(args, len(ds), ds.labels)
    rows = ev.parameter_sweep(ds, sub.load_file(args.subst), args.beta, args.gaps, plan=plan,
                              c_grid=args.c_grid, weighting=args.weighting, workers=args.threads)
    Path(args.out).write_text(ev.format_report((r.cell, r.metrics) for r in rows), encoding="utf-8")
    _finish(args, {"report": args.out}, {
        "fold_plan_digest": plan.digest(),
        "fold_f_scores": {r.cell: r.result.fold_f_scores for r in rows},
    })
    return 0


def cmd_curve(args) -> int:
    train, test = read_instances(args.train), read_instances(args.test)
    points = ev.learning_curve(train, test, _kernel(args), args.sizes, seed=args.seed,
                               c_grid=args.c_grid, weighting=args.weighting, workers=args.threads)
    Path(args.out).write_text(ev.format_report((f"size={p.size}", p.metrics) for p in points),
                              encoding="utf-8")
    _finish(args, {"report": args.out}, {"selected_C": [p.C for p in points]})
    return 0


def cmd_train(args) -> int:
    g = load_gram_file(args.gram)
    labels = _labels_for(g, read_instances(args.instances))
    cfg = svm.TrainConfig(C=args.C, class_weighting=args.weighting, tolerance=args.tolerance)
    model = svm.train(g, labels, cfg, ids=g.ids)
    with open(args.out, "w", encoding="utf-8") as fh:
        svm.save_model(model, fh)
    _finish(args, {"model": args.out}, {"normalized_gram": g.normalized,
                                         "iterations": model.iterations, "converged": model.converged})
    return 0


def cmd_predict(args) -> int:
    with open(args.model, encoding="utf-8") as fh:
        model = svm.load_model(fh)
    train, test = read_instances(args.train), read_instances(args.instances)
    by_id = {inst.id: inst.path for inst in train}
    missing = [i for i in model.ids if i not in by_id]
    if missing:
        raise CommandError(f"training instance {missing[0]!r} is missing in --train")
    kernel = _kernel(args)
    train_paths = [by_id[i] for i in model.ids]
    rows = compute_cross(test.paths, train_paths, kernel, workers=args.threads)
    if args.normalize:
        rows = normalize_cross(rows, self_kernels(test.paths, kernel), self_kernels(train_paths, kernel))
    values = svm.decision_function(model, rows)
    buf = io.StringIO()
    buf.write("id\tprediction\tdecision\n")
    for inst, f in zip(test, values):
        buf.write(f"{inst.id}\t{'+1' if f > 0 else '-1'}\t{f!r}\n")
    Path(args.out).write_text(buf.getvalue(), encoding="utf-8")
    if args.report:
        m = ev.metrics_from_predictions(test.labels, values > 0)
        Path(args.report).write_text(ev.format_report([("test", m)]), encoding="utf-8")
        _finish(args, {"predictions": args.out, "report": args.report})
    else:
        _finish(args, {"predictions": args.out})
    return 0


def cmd_export(args) -> int:
    g = load_gram_file(args.gram)
    labels = _labels_for(g, read_instances(args.instances))
    with open(args.out, "w", encoding="utf-8") as fh:
        svm.export_precomputed(g, labels, fh)
    _finish(args, {"export": args.out})
    return 0


def cmd_psd_check(args) -> int:
    g = load_gram_file(args.gram)
    lam = min_eigenvalue(g, args.bound)
    text = f"min_eigenvalue\t{lam!r}\npsd\t{int(lam >= -args.tolerance)}\n"
    Path(args.out).write_text(text, encoding="utf-8")
    sys.stdout.write(text)
    _finish(args, {"report": args.out})
    return 0


def _add_kernel_args(p, default="la"):
    p.add_argument("--kernel", choices=("la", "shortest-path", "gap-weighted"), default=default)
    p.add_argument("--subst", help="substitution matrix file (la kernel)")
    _add_align_args(p)
    p.add_argument("--n", type=int, default=4, help="subsequence length (gap-weighted)")
    p.add_argument("--lam", type=float, default=0.5, help="gap decay (gap-weighted)")


def _add_align_args(p):
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--gap-open", type=float, default=1.2)
    p.add_argument("--gap-extend", type=float, default=0.2)


def _add_training_args(p):
    p.add_argument("--c-grid", type=_floats, default=list(ev.DEFAULT_C_GRID))
    p.add_argument("--weighting", choices=(svm.NONE, svm.INVERSE), default=svm.INVERSE)


def _add_fold_args(p):
    p.add_argument("--folds", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--stratify", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lakernel",
                                     description="Local alignment kernels for relation extraction.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("build-subst", help="build a substitution matrix")
    p.add_argument("--source", choices=("distributional", "taxonomy", "random"), required=True)
    p.add_argument("--instances", required=True)
    p.add_argument("--measure")
    p.add_argument("--corpus")
    p.add_argument("--window", type=int, default=2)
    p.add_argument("--taxonomy")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_build_subst)

    p = subs.add_parser("gram", help="compute a Gram matrix")
    p.add_argument("--instances", required=True)
    _add_kernel_args(p)
    p.add_argument("--normalize", action="store_true")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gram)

    p = subs.add_parser("cv", help="cross-validate on a precomputed Gram matrix")
    p.add_argument("--gram", required=True)
    p.add_argument("--instances", required=True, help="labels, matched by id")
    _add_fold_args(p)
    _add_training_args(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_cv)

    p = subs.add_parser("sweep", help="cross-validate over beta and gap grids")
    p.add_argument("--instances", required=True)
    p.add_argument("--subst", required=True)
    p.add_argument("--beta", type=_floats, default=[1.0])
    p.add_argument("--gaps", type=_gaps, default=[(1.2, 0.2)])
    _add_fold_args(p)
    _add_training_args(p)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sweep)

    p = subs.add_parser("curve", help="learning curve on a fixed test set")
    p.add_argument("--train", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--sizes", type=_ints, required=True)
    p.add_argument("--seed", type=int, default=0)
    _add_kernel_args(p)
    _add_training_args(p)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_curve)

    p = subs.add_parser("train", help="train an SVM on a precomputed Gram matrix")
    p.add_argument("--gram", required=True)
    p.add_argument("--instances", required=True)
    p.add_argument("--C", type=float, default=1.0)
    p.add_argument("--weighting", choices=(svm.NONE, svm.INVERSE), default=svm.NONE)
    p.add_argument("--tolerance", type=float, default=1e-6)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train)

    p = subs.add_parser("predict", help="apply a trained model to new instances")
    p.add_argument("--model", required=True)
    p.add_argument("--train", required=True, help="training instances the model refers to")
    p.add_argument("--instances", required=True)
    _add_kernel_args(p)
    p.add_argument("--normalize", action="store_true")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--report", help="also score against the instance labels")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_predict)

    p = subs.add_parser("export", help="export a Gram matrix for external SVM tools")
    p.add_argument("--gram", required=True)
    p.add_argument("--instances", required=True)
    p.add_argument("--format", choices=("precomputed",), default="precomputed")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_export)

    p = subs.add_parser("psd-check", help="report the smallest eigenvalue of a Gram matrix")
    p.add_argument("--gram", required=True)
    p.add_argument("--bound", type=int, default=2000)
    p.add_argument("--tolerance", type=float, default=1e-9)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_psd_check)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "threads", 1) < 1:
        parser.error("--threads must be >= 1")
    try:
        return args.func(args)
    except (CommandError, ValueError, KeyError, OSError, svm.SingleClassError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"lakernel {args.command}: error: {msg}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
