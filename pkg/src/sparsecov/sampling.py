"""Gaussian sampling and the centered 1/n sample covariance."""

from __future__ import annotations

import numpy as np

from .errors import NotPSDError
from .matrices import as_symmetric, sym_eigen
from .rng import RngSeed

# Eigenvalues more negative than -PSD_RTOL * max|eigenvalue| reject the matrix;
# anything between there and zero is clamped as roundoff.
PSD_RTOL = 1e-10


def sqrt_psd(sigma) -> np.ndarray:
    """Symmetric eigen square root of a PSD matrix.

    Raises
    ------
    NotPSDError
        If the smallest eigenvalue is materially negative.
    """
    eig = sym_eigen(sigma)
    scale = float(np.max(np.abs(eig.eigenvalues))) if eig.eigenvalues.size else 0.0
    lo = float(eig.eigenvalues[-1])
    if lo < -PSD_RTOL * max(scale, 1.0):
        raise NotPSDError(
            f"matrix is not positive semidefinite: min eigenvalue {lo:.3e}"
        )
    w = np.clip(eig.eigenvalues, 0.0, None)
    v = eig.eigenvectors
    root = (v * np.sqrt(w)) @ v.T
    return (root + root.T) / 2.0


def sample_gaussian(
    sigma, n: int, seed: RngSeed, *, sqrt_factor: np.ndarray | None = None
) -> np.ndarray:
    """Draw n iid mean-zero Gaussian rows with the given covariance.

    Parameters
    ----------
    sigma : array_like
        PSD covariance, p x p.
    n : int
        Number of rows, at least 1.
    seed : RngSeed
        Stream to draw from; equal seeds give bit-identical output.
    sqrt_factor : ndarray, optional
        Precomputed :func:`sqrt_psd` of sigma.  Passing it skips the
        eigendecomposition but never changes the sampled values.

    Returns
    -------
    ndarray of shape (n, p)
    """
    if n < 1:
        raise ValueError(f"n must be at least 1, got {n}")
    root = sqrt_psd(sigma) if sqrt_factor is None else sqrt_factor
    rng = seed.generator()
    z = rng.standard_normal((n, root.shape[0]))
    return z @ root


def mle_covariance(x) -> np.ndarray:
    """Centered second-moment matrix with divisor n (not n - 1).

    Always centers at the sample mean; with a single row the result is the
    zero matrix.
    """
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 2:
        raise ValueError(f"expected a 2-d data matrix, got shape {arr.shape}")
    n = arr.shape[0]
    if n < 1:
        raise ValueError("data matrix must contain at least one row")
    centered = arr - arr.mean(axis=0)
    s = centered.T @ centered / n
    return (s + s.T) / 2.0


def tail_probe(
    sigma, n: int, t: float, replicates: int, seed: RngSeed
) -> np.ndarray:
    """Entrywise exceedance frequencies of the sample covariance error.

    For each entry (i, j), estimates P(|sigma*_ij - sigma_ij| > t) over the
    given number of replicates, each drawn from its own sub-stream so the
    result is independent of evaluation order.
    """
    if replicates < 1:
        raise ValueError("replicates must be at least 1; nothing to estimate")
    if not t > 0.0:
        raise ValueError(f"threshold t must be positive, got {t}")
    mat = as_symmetric(sigma)
    root = sqrt_psd(mat)
    counts = np.zeros_like(mat)
    for ridx in range(replicates):
        x = sample_gaussian(mat, n, seed.substream(ridx), sqrt_factor=root)
        err = np.abs(mle_covariance(x) - mat)
        counts += err > t
    return counts / replicates


def save_data_csv(path, x) -> None:
    """Write a data matrix, one observation per CSV line, 17 significant digits."""
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 2:
        raise ValueError(f"expected a 2-d data matrix, got shape {arr.shape}")
    np.savetxt(path, arr, fmt="%.17g", delimiter=",")


def load_data_csv(path) -> np.ndarray:
    """Read a data matrix written by :func:`save_data_csv`."""
    arr = np.loadtxt(path, delimiter=",", ndmin=2)
    if not np.all(np.isfinite(arr)):
        raise ValueError("data matrix entries must be finite")
    return arr
