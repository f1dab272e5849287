"""Symmetric-matrix core: Cholesky with an explicit failure contract,
log-determinants, eigenvalue utilities, PSD projection, and the plain-text
matrix format shared by the command line tools.

Everything operates on dense float64 numpy arrays. ``as_sym`` is the single
validation gate (square, dimension >= 2, finite, symmetric to 1e-9 relative)
and returns an exactly symmetric copy, so numerical code further down never
re-checks its inputs. LAPACK does the heavy lifting through numpy/scipy; the
wrappers here pin down what the raw calls leave implementation-defined:
which exception is raised, at what pivot threshold, and what is guaranteed
about the output.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable

import numpy as np
import scipy.linalg

from .errors import (
    DimensionMismatchError,
    FormatError,
    NotPositiveDefiniteError,
    ParameterDomainError,
)

__all__ = [
    "DiagMode",
    "PrecisionMatrix",
    "as_sym",
    "cholesky",
    "log_det",
    "min_eigenvalue",
    "nearest_psd",
    "frobenius_dist_sq",
    "pd_inverse",
    "save_matrix",
    "load_matrix",
]

# Relative symmetry tolerance accepted by as_sym, and the relative pivot
# threshold below which a factorization is reported as not positive definite.
SYMMETRY_RTOL = 1e-9
PIVOT_RTOL = 1e-12


def as_sym(m, *, name: str = "matrix") -> np.ndarray:
    """Validate ``m`` and return an exactly symmetric float64 copy.

    Accepts anything array-like, including PrecisionMatrix. Rejects
    non-square or sub-2x2 arrays (DimensionMismatchError), non-finite
    entries, and asymmetry beyond 1e-9 relative to the largest entry
    (ParameterDomainError). The returned array always satisfies
    ``a == a.T`` bit for bit.
    """
    a = np.array(m, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatchError(f"{name} must be square, got shape {a.shape}")
    if a.shape[0] < 2:
        raise DimensionMismatchError(f"{name} must have dimension >= 2, got {a.shape[0]}")
    if not np.all(np.isfinite(a)):
        raise ParameterDomainError(f"{name} contains non-finite entries")
    skew = float(np.max(np.abs(a - a.T)))
    scale = float(np.max(np.abs(a)))
    if skew > SYMMETRY_RTOL * scale:
        raise ParameterDomainError(
            f"{name} is not symmetric: max |a - a.T| = {skew:.3g} with scale {scale:.3g}"
        )
    return (a + a.T) * 0.5


class DiagMode(Enum):
    """How estimation code treats the diagonal of a precision matrix."""

    FREE = "free"
    FIXED_UNIT = "fixed"


@dataclass(frozen=True, eq=False)
class PrecisionMatrix:
    """A validated symmetric matrix tagged with its diagonal convention.

    The array is copied, exactly symmetrized, and frozen (numpy writeable
    flag cleared), so instances are immutable and safe to share across
    threads and worker processes. FIXED_UNIT additionally requires every
    diagonal entry to equal 1 and pins it exactly.
    """

    values: np.ndarray
    diag_mode: DiagMode = DiagMode.FREE

    def __post_init__(self):
        a = as_sym(self.values, name="precision matrix")
        if self.diag_mode is DiagMode.FIXED_UNIT:
            if not np.allclose(np.diagonal(a), 1.0, rtol=0.0, atol=1e-9):
                raise ParameterDomainError(
                    "FIXED_UNIT precision matrix must have a unit diagonal"
                )
            np.fill_diagonal(a, 1.0)
        a.setflags(write=False)
        object.__setattr__(self, "values", a)

    @property
    def p(self) -> int:
        return self.values.shape[0]

    def __array__(self, dtype=None, copy=None):
        arr = self.values
        if dtype is not None:
            return arr.astype(dtype, copy=True)
        if copy:
            return arr.copy()
        return arr


def cholesky(m, *, validate: bool = True) -> np.ndarray:
    """Lower Cholesky factor L with ``m == L @ L.T``.

    Raises NotPositiveDefiniteError when LAPACK fails outright or when any
    pivot (squared diagonal of L) is <= PIVOT_RTOL times the largest
    diagonal entry of ``m``. Pass ``validate=False`` only for arrays already
    produced by this module's own routines; it skips the as_sym gate.
    """
    a = as_sym(m) if validate else m
    try:
        lower = np.linalg.cholesky(a)
    except np.linalg.LinAlgError:
        raise NotPositiveDefiniteError(
            "Cholesky factorization failed: matrix is not positive definite"
        ) from None
    tol = PIVOT_RTOL * float(np.max(np.diagonal(a)))
    piv_min = float(np.min(np.diagonal(lower))) ** 2
    if piv_min <= tol:
        raise NotPositiveDefiniteError(
            f"Cholesky pivot {piv_min:.3g} at or below tolerance {tol:.3g}"
        )
    return lower


def log_det(m, *, validate: bool = True) -> float:
    """log det of a positive definite matrix, via the Cholesky diagonal."""
    lower = cholesky(m, validate=validate)
    return 2.0 * float(np.sum(np.log(np.diagonal(lower))))


def min_eigenvalue(m) -> float:
    """Smallest eigenvalue of a symmetric matrix (LAPACK, ~1e-10 relative)."""
    return float(np.linalg.eigvalsh(as_sym(m))[0])


def nearest_psd(m) -> np.ndarray:
    """Frobenius-nearest positive semidefinite matrix to ``m``.

    Eigendecomposes, clips negative eigenvalues at zero, and reassembles.
    The result is exactly symmetric with smallest eigenvalue >= -1e-10 (the
    tiny slack is reassembly rounding); applying the projection twice gives
    the same matrix up to that rounding.
    """
    a = as_sym(m)
    w, v = np.linalg.eigh(a)
    if w[0] >= 0.0:
        return a
    b = (v * np.maximum(w, 0.0)) @ v.T
    return (b + b.T) * 0.5


def frobenius_dist_sq(a, b) -> float:
    """Squared Frobenius distance between two symmetric matrices."""
    x = as_sym(a, name="first matrix")
    y = as_sym(b, name="second matrix")
    if x.shape != y.shape:
        raise DimensionMismatchError(f"shape mismatch: {x.shape} vs {y.shape}")
    d = x - y
    return float(np.sum(d * d))


def pd_inverse(m, *, validate: bool = True) -> np.ndarray:
    """Inverse of a positive definite matrix via its Cholesky factor."""
    lower = cholesky(m, validate=validate)
    inv = scipy.linalg.cho_solve((lower, True), np.eye(lower.shape[0]), check_finite=False)
    return (inv + inv.T) * 0.5


def save_matrix(path, m, *, comments: Iterable[str] = ()) -> None:
    """Write a symmetric matrix in the shared text format.

    Format: optional leading '#' comment lines, one line holding the
    dimension p, then p lines of p space-separated values. Values use
    '%.17g', which round-trips float64 exactly.
    """
    a = as_sym(m)
    p = a.shape[0]
    with open(path, "w", encoding="ascii") as fh:
        for c in comments:
            fh.write(f"# {c}\n")
        fh.write(f"{p}\n")
        for row in a:
            fh.write(" ".join(format(x, ".17g") for x in row))
            fh.write("\n")


def load_matrix(path) -> np.ndarray:
    """Read a matrix written by save_matrix; validates shape and symmetry."""
    with open(path, encoding="ascii") as fh:
        body = [ln.strip() for ln in fh if ln.strip() and not ln.lstrip().startswith("#")]
    if not body:
        raise FormatError(f"{path}: no matrix content")
    try:
        p = int(body[0])
    except ValueError:
        raise FormatError(f"{path}: first non-comment line must be the dimension") from None
    if len(body) != p + 1:
        raise FormatError(f"{path}: expected {p} rows, found {len(body) - 1}")
    rows = []
    for k, ln in enumerate(body[1:], start=1):
        parts = ln.split()
        if len(parts) != p:
            raise FormatError(f"{path}: row {k} has {len(parts)} values, expected {p}")
        try:
            rows.append([float(x) for x in parts])
        except ValueError:
            raise FormatError(f"{path}: row {k} contains a non-numeric token") from None
    return as_sym(np.array(rows), name=str(path))
