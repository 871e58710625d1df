"""Local alignment kernels for relation recognition over dependency paths."""

__version__ = "0.1.0"
