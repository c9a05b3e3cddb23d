"""PCA subcarrier fusion: correlate streams, eigendecompose, project.

The stream matrix is mean-centered per column, correlated as R = Xc^T Xc,
and decomposed with cyclic Jacobi rotations. The fused representation is
the projection of the centered streams onto selected eigenvectors; the
first principal component is discarded by the surrounding pipeline, which
consumes components two and three.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import InvalidValue, NumericalError
from .validation import as_float_2d

_OFF_DIAG_TOL = 1e-10
_MAX_SWEEPS = 100


@dataclass(frozen=True)
class EigenDecomposition:
    """Eigenvalues sorted descending with column-aligned eigenvectors."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.eigenvalues, dtype=np.float64)
        vecs = np.asarray(self.eigenvectors, dtype=np.float64)
        if vecs.ndim != 2 or vecs.shape[0] != vecs.shape[1] or vals.shape != (vecs.shape[0],):
            raise InvalidValue("eigenvalues/eigenvectors shapes are inconsistent")
        if np.any(np.diff(vals) > 0):
            raise InvalidValue("eigenvalues must be sorted in descending order")
        vals.setflags(write=False)
        vecs.setflags(write=False)
        object.__setattr__(self, "eigenvalues", vals)
        object.__setattr__(self, "eigenvectors", vecs)


@dataclass(frozen=True)
class PrincipalComponents:
    """Projected component time series (columns) plus eigenvalue metadata."""

    series: np.ndarray
    explained_variance: tuple[float, ...]
    source_indices: tuple[int, ...] = (2, 3)

    def __post_init__(self):
        series = np.asarray(self.series, dtype=np.float64)
        if series.ndim != 2 or series.shape[1] != len(self.source_indices):
            raise InvalidValue("series must have one column per source index")
        scale = max(1.0, float(np.max(np.abs(series), initial=0.0)))
        if np.any(np.abs(series.mean(axis=0)) > 1e-9 * scale):
            raise InvalidValue("component columns must be zero-mean")
        if any(ev < 0 for ev in self.explained_variance):
            raise InvalidValue("explained_variance entries must be >= 0")
        series.setflags(write=False)
        object.__setattr__(self, "series", series)
        object.__setattr__(self, "explained_variance", tuple(self.explained_variance))


def center_streams(x) -> np.ndarray:
    """Remove each column's mean."""
    x = as_float_2d(x, "stream matrix")
    if x.shape[0] < 2:
        raise InvalidValue("need at least 2 time samples to center")
    return x - x.mean(axis=0, keepdims=True)


def correlation_matrix(xc) -> np.ndarray:
    """Auto-correlation R = Xc^T Xc of a centered stream matrix."""
    xc = as_float_2d(xc, "centered matrix")
    r = xc.T @ xc
    return (r + r.T) / 2.0


@lru_cache(maxsize=32)
def _round_robin(n: int) -> tuple[tuple[np.ndarray, np.ndarray], ...]:
    """Cyclic rotation schedule: rounds of pairwise-disjoint (p, q) pairs.

    Disjoint pairs within a round commute, so the round can be applied as
    one vectorized block rotation while every pair is still visited exactly
    once per sweep (circle scheduling).
    """
    players = list(range(n)) + ([-1] if n % 2 else [])
    m = len(players)
    rounds = []
    for _ in range(m - 1):
        ps, qs = [], []
        for i in range(m // 2):
            a, b = players[i], players[m - 1 - i]
            if a != -1 and b != -1:
                ps.append(min(a, b))
                qs.append(max(a, b))
        rounds.append((np.array(ps, dtype=np.intp), np.array(qs, dtype=np.intp)))
        players = [players[0], players[-1]] + players[1:-1]
    return tuple(rounds)


def eigen_decompose(r, max_sweeps: int = _MAX_SWEEPS) -> EigenDecomposition:
    """Symmetric eigendecomposition by cyclic Jacobi rotations.

    Sweeps until the off-diagonal Frobenius norm falls below 1e-10 times
    the matrix norm. Eigenvectors get a deterministic sign (first nonzero
    entry positive) and equal eigenvalues keep the rotation output order.
    """
    a = as_float_2d(r, "matrix").copy()
    n = a.shape[0]
    if a.shape[1] != n:
        raise InvalidValue(f"matrix must be square, got {a.shape}")
    scale = float(np.max(np.abs(a), initial=0.0))
    if scale > 0 and float(np.max(np.abs(a - a.T))) > 1e-8 * scale:
        raise InvalidValue("matrix is not symmetric within 1e-8")
    a = (a + a.T) / 2.0

    v = np.eye(n)
    norm = float(np.linalg.norm(a))
    if n == 1 or norm == 0.0:
        return _ordered(np.diag(a).copy(), v)

    skip_tol = 1e-13 * norm
    off_diag = np.empty_like(a)
    for _ in range(max_sweeps):
        np.copyto(off_diag, a)
        np.fill_diagonal(off_diag, 0.0)
        if float(np.linalg.norm(off_diag)) <= _OFF_DIAG_TOL * norm:
            return _ordered(np.diag(a).copy(), v)
        for ps, qs in _round_robin(n):
            apq = a[ps, qs]
            live = np.abs(apq) > skip_tol
            if not np.any(live):
                continue
            p, q, apq = ps[live], qs[live], apq[live]
            theta = (a[q, q] - a[p, p]) / (2.0 * apq)
            t = np.sign(theta) / (np.abs(theta) + np.sqrt(theta * theta + 1.0))
            t = np.where(theta == 0.0, 1.0, t)  # sign(0) = 0 would stall the rotation
            c = 1.0 / np.sqrt(t * t + 1.0)
            s = t * c
            col_p, col_q = a[:, p], a[:, q]
            a[:, p] = c * col_p - s * col_q
            a[:, q] = s * col_p + c * col_q
            row_p, row_q = a[p, :], a[q, :]
            a[p, :] = c[:, None] * row_p - s[:, None] * row_q
            a[q, :] = s[:, None] * row_p + c[:, None] * row_q
            a[p, q] = 0.0
            a[q, p] = 0.0
            vec_p, vec_q = v[:, p], v[:, q]
            v[:, p] = c * vec_p - s * vec_q
            v[:, q] = s * vec_p + c * vec_q
    raise NumericalError(
        f"Jacobi iteration did not converge within {max_sweeps} sweeps (n={n})"
    )


def _ordered(eigenvalues: np.ndarray, eigenvectors: np.ndarray) -> EigenDecomposition:
    order = np.argsort(-eigenvalues, kind="stable")
    vals = eigenvalues[order]
    vecs = eigenvectors[:, order].copy()
    for j in range(vecs.shape[1]):
        col = vecs[:, j]
        nonzero = np.nonzero(np.abs(col) > 1e-12)[0]
        if nonzero.size and col[nonzero[0]] < 0:
            vecs[:, j] = -col
    return EigenDecomposition(eigenvalues=vals, eigenvectors=vecs)


def principal_components(x, indices: tuple[int, ...] = (2, 3)) -> PrincipalComponents:
    """Project centered streams onto the eigenvectors named by one-based ``indices``.

    The projection Xc v_k is the component time series; its population
    variance times T equals the corresponding eigenvalue.
    """
    x = as_float_2d(x, "stream matrix")
    if not indices:
        raise InvalidValue("need at least one component index")
    if any(i < 1 for i in indices):
        raise InvalidValue(f"component indices are one-based, got {indices}")
    if x.shape[1] < max(indices):
        raise InvalidValue(
            f"matrix has {x.shape[1]} streams, cannot take component {max(indices)}"
        )
    xc = center_streams(x)
    decomp = eigen_decompose(correlation_matrix(xc))
    total = float(np.sum(np.clip(decomp.eigenvalues, 0.0, None)))
    cols = []
    explained = []
    for idx in indices:
        vec = decomp.eigenvectors[:, idx - 1]
        cols.append(xc @ vec)
        lam = max(0.0, float(decomp.eigenvalues[idx - 1]))
        explained.append(lam / total if total > 0 else 0.0)
    return PrincipalComponents(
        series=np.column_stack(cols),
        explained_variance=tuple(explained),
        source_indices=tuple(indices),
    )
