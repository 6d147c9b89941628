"""Eigenvalues, eigenvectors, spectral distances and Green functions.

Dense symmetric diagonalization below ``hamiltonian.DENSE_LIMIT``;
Lanczos (ARPACK) with shift-invert above.  Green columns come from a
single symmetric solve of (A - E) g = delta_x with a residual check.
"""

from __future__ import annotations

import weakref
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import SingularResolventError, SolverError
from .hamiltonian import AssembledOperator
from .lattice import ParticleConfig

#: Resolvent is treated as singular below this spectral distance.
SINGULAR_TOL = 1e-12

_EIG_CACHE: "weakref.WeakKeyDictionary" = weakref.WeakKeyDictionary()


@dataclass(frozen=True)
class SpectralResult:
    """Ascending eigenvalues and (optionally) matching orthonormal columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray | None = None

    def __post_init__(self):
        w = np.asarray(self.eigenvalues, dtype=np.float64)
        if np.any(np.diff(w) < 0):
            raise ValueError("eigenvalues must be ascending")
        object.__setattr__(self, "eigenvalues", w)

    def __len__(self) -> int:
        return self.eigenvalues.size

    @property
    def is_empty(self) -> bool:
        return self.eigenvalues.size == 0


def dense_eigh(op: AssembledOperator):
    """Full (eigenvalues, eigenvectors) of a dense-eligible operator, cached."""
    cached = _EIG_CACHE.get(op)
    if cached is None:
        w, v = np.linalg.eigh(op.dense())
        cached = (w, v)
        _EIG_CACHE[op] = cached
    return cached


def lowest_eigenpair(op: AssembledOperator) -> tuple[float, np.ndarray]:
    """Ground-state energy and normalized eigenvector.

    Shares the cached dense decomposition with the window queries, so a
    window pinned at the returned energy always includes the pair.
    """
    if op.dim == 1:
        return float(op.matrix[0, 0]), np.ones(1)
    if op.is_dense_eligible():
        w, v = dense_eigh(op)
        return float(w[0]), v[:, 0]
    try:
        # all operators here are PSD, so the eigenvalue nearest -0.5 is E0
        w, v = spla.eigsh(op.matrix, k=1, sigma=-0.5, which="LM")
    except spla.ArpackNoConvergence as exc:
        raise SolverError(
            f"Lanczos failed to converge for dim {op.dim}",
            iterations=getattr(exc, "iterations", None),
        ) from exc
    return float(w[0]), v[:, 0]


def lowest_eigenvalue(op: AssembledOperator) -> float:
    return lowest_eigenpair(op)[0]


def full_spectrum(op: AssembledOperator, vectors: bool = True) -> SpectralResult:
    """Every eigenpair; dense-eligible operators only."""
    if not op.is_dense_eligible():
        raise SolverError(f"full spectrum requested for dim {op.dim} > dense limit")
    w, v = dense_eigh(op)
    return SpectralResult(w, v if vectors else None)


def spectrum_in_window(op: AssembledOperator, window) -> SpectralResult:
    """All eigenpairs with eigenvalue in the closed interval [a, b]."""
    a, b = float(window[0]), float(window[1])
    if a > b:
        raise ValueError(f"window [{a}, {b}] is empty")
    if op.is_dense_eligible():
        w, v = dense_eigh(op)
        keep = (w >= a) & (w <= b)
        return SpectralResult(w[keep], v[:, keep])
    return _sparse_window(op, a, b)


def _sparse_window(op: AssembledOperator, a: float, b: float) -> SpectralResult:
    """Shift-invert around the window center, growing k until bracketed."""
    center = 0.5 * (a + b)
    k = min(16, op.dim - 1)
    while True:
        try:
            w, v = spla.eigsh(op.matrix, k=k, sigma=center, which="LM")
        except spla.ArpackNoConvergence as exc:
            raise SolverError(
                f"windowed Lanczos failed (k={k})",
                iterations=getattr(exc, "iterations", None),
            ) from exc
        order = np.argsort(w)
        w, v = w[order], v[:, order]
        bracketed = (w[0] < a or k >= op.dim - 1) and (w[-1] > b or k >= op.dim - 1)
        if bracketed:
            keep = (w >= a) & (w <= b)
            return SpectralResult(w[keep], v[:, keep])
        k = min(2 * k, op.dim - 1)


def dist_to_spectrum(op: AssembledOperator, energy: float) -> float:
    """min_j |lambda_j - E|."""
    if op.is_dense_eligible():
        w, _ = dense_eigh(op)
        return float(np.min(np.abs(w - energy)))
    try:
        w, _ = spla.eigsh(op.matrix, k=1, sigma=energy, which="LM")
        return float(abs(w[0] - energy))
    except RuntimeError:
        # factorization of (A - E) failed: E is numerically in the spectrum
        return 0.0


def green_column(op: AssembledOperator, energy: float, x) -> np.ndarray:
    """Column G(E; ., x) of (H - E)^(-1), by solving (A - E) g = delta_x.

    ``x`` may be a ParticleConfig or a row index.  Raises
    SingularResolventError when E sits within SINGULAR_TOL of the
    spectrum, SolverError when the solve misses its residual tolerance.
    """
    col = op.cube.index_of(x) if isinstance(x, ParticleConfig) else int(x)
    if not 0 <= col < op.dim:
        raise ValueError(f"column index {col} out of range for dim {op.dim}")
    if dist_to_spectrum(op, energy) < SINGULAR_TOL:
        raise SingularResolventError(
            f"energy {energy} lies within {SINGULAR_TOL} of the spectrum"
        )

    rhs = np.zeros(op.dim)
    rhs[col] = 1.0
    if op.is_dense_eligible():
        dense = op.dense() - energy * np.eye(op.dim)
        g = sla.solve(dense, rhs, assume_a="sym")
        residual = dense @ g - rhs
        if np.linalg.norm(residual) > 1e-10:
            g = g - sla.solve(dense, residual, assume_a="sym")
    else:
        shifted = (op.matrix - energy * sp.identity(op.dim, format="csr")).tocsc()
        try:
            lu = spla.splu(shifted)
        except RuntimeError as exc:
            raise SingularResolventError(str(exc)) from exc
        g = lu.solve(rhs)
        residual = shifted @ g - rhs
        if np.linalg.norm(residual) > 1e-10:
            g = g - lu.solve(residual)

    final = (op.matrix @ g) - energy * g - rhs
    if np.linalg.norm(final) > 1e-10:
        raise SolverError(
            f"green column residual {np.linalg.norm(final):.3e} above 1e-10"
        )
    return g
