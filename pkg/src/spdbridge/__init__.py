"""Anchor shortest-path encodings as a surrogate for truncated diffusion geometry.

Submodules
----------
graph         CSR graphs, BFS, random regular / molecule-like generators
spectral      normalized Laplacian, eigensystem, heat kernel, diffusion distances
linkage       isotonic hop-to-diffusion link and its residuals
trilateration anchor systems, reconstruction, bound checks
nystrom       anchor Nystrom kernel approximation and diagnostics
encodings     DE / LapPE / RWSE / HKS feature tables
experiments   pipelines used by the ``spdbridge`` CLI
"""
__version__ = "0.1.0"

from ._backend import BACKEND  # noqa: E402,F401
