from .alignment import nw_score, sw_score
from .base import FunctionKernel, Kernel, as_kernel
from .baselines import (GapWeightedKernel, ShortestPathKernel, gap_weighted_bruteforce,
                        gap_weighted_kernel, shortest_path_kernel)
from .gram import (GramMatrix, compute_cross, compute_gram, compute_gram_sequential, load_gram,
                   load_gram_file, min_eigenvalue, normalize_cross, normalize_gram, save_gram,
                   save_gram_file, self_kernels)
from .local_alignment import AlignParams, LocalAlignmentKernel, la_kernel, la_kernel_bruteforce

__all__ = [
    "AlignParams", "FunctionKernel", "GapWeightedKernel", "GramMatrix", "Kernel",
    "LocalAlignmentKernel", "ShortestPathKernel", "as_kernel", "compute_cross", "compute_gram",
    "compute_gram_sequential", "gap_weighted_bruteforce", "gap_weighted_kernel", "la_kernel",
    "la_kernel_bruteforce", "load_gram", "load_gram_file", "min_eigenvalue", "normalize_cross",
    "normalize_gram", "nw_score", "save_gram", "save_gram_file", "self_kernels",
    "shortest_path_kernel", "sw_score",
]
