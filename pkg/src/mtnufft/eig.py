"""Dense eigensolvers and the cubic spline used by the taper constructors.

The generalized problem ``A w = lam M w`` is reduced with a regularized
Cholesky factor ``M = L L*`` to the standard Hermitian problem
``L^-1 A L^-* y = lam y``; LAPACK does the standard solve.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy import linalg
from scipy.interpolate import make_interp_spline

from .errors import ConditioningError, ExtrapolationError, SpectralRangeError

__all__ = [
    "EigenPairs",
    "CholeskyMetric",
    "tridiagonal_eigen",
    "generalized_hermitian_eigen",
    "cubic_spline",
    "SplineEvaluator",
]

log = logging.getLogger(__name__)

RIDGES = (1e-12, 1e-9)
CLIP_TOL = 1e-8
RANGE_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class EigenPairs:
    """Eigenvalues in descending order with eigenvectors as columns."""

    values: np.ndarray
    vectors: np.ndarray | None
    metric_tag: str = "identity"

    def __len__(self):
        return int(self.values.size)


def _fix_signs(vectors: np.ndarray) -> np.ndarray:
    # rotate each column so its largest-magnitude entry is real and positive
    idx = np.argmax(np.abs(vectors), axis=0)
    pivot = vectors[idx, np.arange(vectors.shape[1])]
    if np.iscomplexobj(vectors):
        phase = np.conj(pivot) / np.abs(pivot)
    else:
        phase = np.sign(pivot)
    phase[pivot == 0] = 1
    return vectors * phase


def tridiagonal_eigen(diag, offdiag, k_top: int, vectors: bool = True) -> EigenPairs:
    """Top ``k_top`` eigenpairs of a real symmetric tridiagonal matrix."""
    d = np.asarray(diag, dtype=float)
    e = np.asarray(offdiag, dtype=float)
    n = d.size
    if e.size != n - 1:
        raise ValueError("offdiag must have length len(diag) - 1")
    if not (np.all(np.isfinite(d)) and np.all(np.isfinite(e))):
        raise ValueError("tridiagonal entries must be finite")
    if not 1 <= k_top <= n:
        raise ValueError(f"k_top must lie in [1, {n}]")
    if n == 1:
        return EigenPairs(d.copy(), np.ones((1, 1)) if vectors else None)
    sel = (n - k_top, n - 1)
    if vectors:
        w, v = linalg.eigh_tridiagonal(d, e, select="i", select_range=sel,
                                          check_finite=False, lapack_driver="stemr")
        return EigenPairs(w[::-1], _fix_signs(v[:, ::-1]))
    w = linalg.eigh_tridiagonal(d, e, eigvals_only=True, select="i", select_range=sel,
                                  check_finite=False)
    return EigenPairs(w[::-1], None)


class CholeskyMetric:
    """Regularized lower Cholesky factor of a positive definite metric ``M``.

    A ridge of ``1e-12 * trace(M) / N`` is added before factoring, with one
    retry at ``1e-9 * trace(M) / N``. The factor can be shared by every
    generalized solve that uses the same metric.
    """

    def __init__(self, M):
        M = np.asarray(M)
        n = M.shape[0]
        if M.shape != (n, n):
            raise ValueError("metric must be square")
        scale = float(np.real(np.trace(M))) / n
        last_err = None
        for ridge in RIDGES:
            try:
                L = np.linalg.cholesky(M + (ridge * scale) * np.eye(n))
            except np.linalg.LinAlgError as err:
                last_err = err
                continue
            if np.all(np.isfinite(L)):
                self.factor = L
                self.ridge = ridge * scale
                self.n = n
                return
        raise ConditioningError(
            f"Cholesky factorization failed after ridge {RIDGES[-1]:g}*trace/N"
        ) from last_err

    def reduce(self, A) -> np.ndarray:
        """``L^-1 A L^-*``, Hermitian-symmetrized."""
        L = self.factor
        X = linalg.solve_triangular(L, A, lower=True, check_finite=False)
        C = linalg.solve_triangular(L, X.conj().T, lower=True, check_finite=False)
        C = C.conj().T
        return 0.5 * (C + C.conj().T)

    def back_transform(self, Y) -> np.ndarray:
        """``L^-* Y``."""
        return linalg.solve_triangular(
            self.factor.conj().T, Y, lower=False, check_finite=False
        )


def _check_range(values: np.ndarray) -> np.ndarray:
    low, high = values.min(), values.max()
    if low < -RANGE_TOL or high > 1 + RANGE_TOL:
        raise SpectralRangeError(
            f"eigenvalues outside [0, 1]: min={low:.3e}, max={high:.3e}"
        )
    if low < -CLIP_TOL or high > 1 + CLIP_TOL:
        log.warning("clipping eigenvalues in [%.3e, %.3e] to [0, 1]", low, high)
    return np.clip(values, 0.0, 1.0)


def generalized_hermitian_eigen(A, M=None, k_top: int | None = None, *,
                                metric: CholeskyMetric | None = None,
                                vectors: bool = True,
                                bounded: bool = True) -> EigenPairs:
    """Top ``k_top`` solutions of ``A w = lam M w`` for Hermitian ``A`` and SPD ``M``.

    Parameters
    ----------
    A : array_like
        Hermitian matrix.
    M : array_like, optional
        Positive definite metric. May be omitted when ``metric`` is given.
    k_top : int, optional
        Number of leading pairs to return (all by default).
    metric : CholeskyMetric, optional
        Precomputed factor of ``M``; reused across bands sharing one metric.
    vectors : bool
        Skip the eigenvectors when False.
    bounded : bool
        Enforce the concentration-ratio range ``0 <= lam <= 1``: excursions up
        to 1e-6 are clipped, larger ones raise ``SpectralRangeError``.

    Returns
    -------
    EigenPairs
        Descending eigenvalues; vectors are ``M``-orthonormal columns.
    """
    A = np.asarray(A)
    if metric is None:
        if M is None:
            raise ValueError("either M or metric is required")
        metric = CholeskyMetric(M)
    n = metric.n
    if A.shape != (n, n):
        raise ValueError("A and M must have the same shape")
    k = n if k_top is None else int(k_top)
    if not 1 <= k <= n:
        raise ValueError(f"k_top must lie in [1, {n}]")
    C = metric.reduce(A)
    sel = [n - k, n - 1]
    if vectors:
        w, Y = linalg.eigh(C, subset_by_index=sel, check_finite=False)
        W = metric.back_transform(Y[:, ::-1])
        W = _fix_signs(W)
    else:
        w = linalg.eigh(C, subset_by_index=sel, eigvals_only=True, check_finite=False)
        W = None
    w = w[::-1].copy()
    if bounded:
        w = _check_range(w)
    return EigenPairs(w, W, "metric")


class SplineEvaluator:
    """Callable not-a-knot cubic spline with an extrapolation guard.

    Points up to half a knot interval outside ``[x_0, x_last]`` are clamped to
    the end knots; anything further raises ``ExtrapolationError``.
    """

    def __init__(self, x_knots, y_knots):
        x = np.asarray(x_knots, dtype=float)
        y = np.asarray(y_knots)
        if x.ndim != 1 or x.size < 4:
            raise ValueError("a cubic spline needs at least four knots")
        if np.any(np.diff(x) <= 0):
            raise ValueError("knots must be strictly increasing")
        self.x = x
        self.y = y
        # k=3 with default boundary handling is the not-a-knot interpolant
        self._spline = make_interp_spline(x, y, k=3, axis=0)
        self.guard = 0.5 * float(min(x[1] - x[0], x[-1] - x[-2]))

    def __call__(self, points):
        p = np.asarray(points, dtype=float)
        lo, hi = self.x[0], self.x[-1]
        if np.any(p < lo - self.guard) or np.any(p > hi + self.guard):
            raise ExtrapolationError(
                f"evaluation outside [{lo:g}, {hi:g}] beyond the half-interval guard"
            )
        out = self._spline(np.clip(p, lo, hi))
        # knots return their data exactly, not the rounded B-spline sum
        j = np.clip(np.searchsorted(self.x, p), 0, self.x.size - 1)
        hit = self.x[j] == p
        if np.any(hit):
            out[hit] = self.y[j[hit]]
        return out


def cubic_spline(x_knots, y_knots) -> SplineEvaluator:
    """Not-a-knot cubic interpolant through ``(x_knots, y_knots)``.

    ``y_knots`` may be 2-D with knots along the first axis, which fits
    several sequences on the same knots in one solve.
    """
    return SplineEvaluator(x_knots, y_knots)
