"""Dense symmetric-matrix kernel: validation, eigenstructure, norms, spectral maps.

Every covariance-like object in this package is a plain float64 ndarray that
has passed :func:`as_symmetric`.  Construction either repairs roundoff-level
asymmetry by averaging with the transpose or rejects the input outright, so
downstream code can assume exact symmetry bit for bit.
"""

from __future__ import annotations

import math
from typing import Callable, NamedTuple

import numpy as np

from .errors import AsymmetryError, DomainError, EigenError, NormOrderError

# Asymmetry beyond rtol * (1 + max |entry|) is treated as a caller bug, not noise.
ASYMMETRY_RTOL = 1e-12


def as_symmetric(a, *, rtol: float = ASYMMETRY_RTOL) -> np.ndarray:
    """Validate a square real matrix and return its symmetrized float64 copy.

    Parameters
    ----------
    a : array_like
        Square matrix with finite real entries.
    rtol : float
        Relative asymmetry tolerance, scaled by ``1 + max |entry|``.

    Returns
    -------
    ndarray
        ``(A + A.T) / 2`` as a fresh float64 array.

    Raises
    ------
    AsymmetryError
        If the worst asymmetry ``max |A - A.T|`` exceeds the tolerance.
    ValueError
        If the input is not a square 2-d array of finite reals.
    """
    arr = np.asarray(a, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {arr.shape}")
    if arr.shape[0] < 1:
        raise ValueError("matrix dimension must be at least 1")
    if not np.all(np.isfinite(arr)):
        raise ValueError("matrix entries must be finite")
    gap = float(np.max(np.abs(arr - arr.T))) if arr.size else 0.0
    tol = rtol * (1.0 + float(np.max(np.abs(arr))))
    if gap > tol:
        raise AsymmetryError(
            f"matrix asymmetry {gap:.3e} exceeds tolerance {tol:.3e}; "
            "symmetrize explicitly if this is intended"
        )
    return (arr + arr.T) / 2.0


class EigenDecomposition(NamedTuple):
    """Eigenvalues in descending order with eigenvector columns aligned."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def sym_eigen(a) -> EigenDecomposition:
    """Full symmetric eigendecomposition, eigenvalues sorted descending.

    The orthonormality and reconstruction quality are the contract here:
    ``V @ diag(w) @ V.T`` reproduces the input to roughly 1e-10 relative in
    Frobenius norm and ``V.T @ V`` is the identity to 1e-10 per entry.
    """
    mat = as_symmetric(a)
    try:
        w, v = np.linalg.eigh(mat)
    except np.linalg.LinAlgError as exc:
        raise EigenError(f"symmetric eigensolver did not converge: {exc}") from exc
    return EigenDecomposition(w[::-1].copy(), v[:, ::-1].copy())


def operator_norm(a, w) -> float:
    """Exact operator norm of a symmetric matrix for order w in {1, 2, inf}.

    Orders 1 and inf are the maximum absolute column sum (equal for symmetric
    input and computed by the same code path, so they agree exactly).  Order 2
    is the spectral radius ``max |eigenvalue|``.

    Raises
    ------
    NormOrderError
        For any other order; use :func:`operator_norm_bound` there.
    """
    mat = as_symmetric(a)
    if w in (1, 1.0, np.inf) or w == math.inf:
        return float(np.max(np.sum(np.abs(mat), axis=0)))
    if w in (2, 2.0):
        return float(np.max(np.abs(np.linalg.eigvalsh(mat))))
    raise NormOrderError(
        f"no exact formula for operator norm of order {w!r}; "
        "operator_norm_bound covers general orders in [1, inf]"
    )


def operator_norm_bound(a, w) -> float:
    """Upper bound on the order-w operator norm, any w in [1, inf].

    Interpolation gives ``|||A|||_w <= max(|||A|||_1, |||A|||_2, |||A|||_inf)``
    for symmetric A.  The bound is tight at w in {1, 2, inf}.
    """
    wf = float(w)
    if not (wf >= 1.0):
        raise NormOrderError(f"norm order must satisfy w >= 1, got {w!r}")
    return max(operator_norm(a, 1), operator_norm(a, 2))


def frobenius_norm(a) -> float:
    """Square root of the sum of squared entries."""
    mat = as_symmetric(a)
    return float(np.sqrt(np.sum(mat * mat)))


def matrix_function(a, f: Callable[[float], float]) -> np.ndarray:
    """Apply a scalar map to a symmetric matrix through its eigenvalues.

    Computes ``V @ diag(f(w)) @ V.T``.  The map is evaluated one eigenvalue at
    a time; an exception from ``f`` or a non-finite result raises a
    :class:`DomainError` naming the offending eigenvalue.
    """
    eig = sym_eigen(a)
    vals = np.empty_like(eig.eigenvalues)
    with np.errstate(all="ignore"):
        for i, lam in enumerate(eig.eigenvalues):
            try:
                y = float(f(float(lam)))
            except Exception as exc:
                raise DomainError(
                    f"scalar map failed at eigenvalue {lam!r}: {exc}"
                ) from exc
            if not math.isfinite(y):
                raise DomainError(f"scalar map is not finite at eigenvalue {lam!r}")
            vals[i] = y
    v = eig.eigenvectors
    out = (v * vals) @ v.T
    return (out + out.T) / 2.0


def save_matrix_csv(path, a) -> None:
    """Write one matrix row per CSV line with 17 significant digits."""
    mat = as_symmetric(a)
    np.savetxt(path, mat, fmt="%.17g", delimiter=",")


def load_matrix_csv(path) -> np.ndarray:
    """Read a matrix written by :func:`save_matrix_csv` and re-symmetrize."""
    arr = np.loadtxt(path, delimiter=",", ndmin=2)
    return as_symmetric(arr)
