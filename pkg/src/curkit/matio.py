"""Matrix file I/O: Matrix Market (array and coordinate) and headerless CSV.

Formats are chosen by file extension: ``.mtx``/``.mm`` for Matrix Market,
anything else is treated as comma-separated rows.  Written files round-trip
to full float64 precision.
"""

from __future__ import annotations

import os

import numpy as np
import scipy.io
import scipy.sparse

from .linalg import as_matrix

__all__ = ["read_matrix", "write_matrix", "matching_format"]

_MM_EXTS = {".mtx", ".mm"}


def matching_format(path: str) -> str:
    """Return ``"matrixmarket"`` or ``"csv"`` for the given file name."""
    ext = os.path.splitext(str(path))[1].lower()
    return "matrixmarket" if ext in _MM_EXTS else "csv"


def read_matrix(path) -> np.ndarray:
    """Load a dense matrix from a Matrix Market or CSV file."""
    if matching_format(path) == "matrixmarket":
        a = scipy.io.mmread(path)
        if scipy.sparse.issparse(a):
            a = a.toarray()
    else:
        a = np.loadtxt(path, delimiter=",", ndmin=2)
    return as_matrix(a)


def write_matrix(path, a) -> None:
    """Write a dense matrix in the format implied by ``path``'s extension."""
    m = as_matrix(a)
    if matching_format(path) == "matrixmarket":
        scipy.io.mmwrite(path, m, field="real", precision=17)
    else:
        np.savetxt(path, m, delimiter=",", fmt="%.17g")
