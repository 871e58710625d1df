from __future__ import annotations

import numpy as np


class Kernel:
    """Pairwise kernel over paths.

    Subclasses implement ``__call__``. Those with a compiled batch path
    override :meth:`prepare` and :meth:`evaluate_pairs`; the defaults fall
    back to calling the kernel pair by pair.
    """

    name = "kernel"

    def __call__(self, x, y) -> float:
        raise NotImplementedError

    def prepare(self, paths):
        return list(paths)

    def evaluate_pairs(self, state, I, J) -> np.ndarray:
        return np.array([self(state[i], state[j]) for i, j in zip(I, J)], dtype=np.float64)

    def describe(self) -> dict:
        return {"kernel": self.name}


class FunctionKernel(Kernel):
    """Adapter for a plain ``(x, y) -> float`` function."""

    def __init__(self, fn, name: str = "custom"):
        self.fn = fn
        self.name = name

    def __call__(self, x, y) -> float:
        return float(self.fn(x, y))


def as_kernel(kernel) -> Kernel:
    if isinstance(kernel, Kernel):
        return kernel
    if callable(kernel):
        return FunctionKernel(kernel, getattr(kernel, "__name__", "custom"))
    raise TypeError(f"not a kernel: {kernel!r}")
