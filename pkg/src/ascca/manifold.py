"""Generalized Stiefel manifold kernel.

Points are p-by-r matrices U with U^T B U = I_r for a symmetric
positive-definite metric matrix B (here: a possibly regularized Gram
matrix).  The module provides tangent projection, the B-polar
retraction, projection vector transport, Riemannian gradients under
the B-induced metric <eta, xi>_U = tr(eta^T B xi), and the product of
two such manifolds.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray
from scipy.linalg import cho_factor, cho_solve, solve_triangular

from .exceptions import DimensionMismatch, NotPositiveDefinite, RankDeficientStep

# Tolerances used by the invariant checks (about 100x unit roundoff
# at the matrix sizes this package targets).
FEASIBILITY_TOL = 1e-10
TANGENCY_TOL = 1e-9


class MetricMatrix:
    """Symmetric positive-definite metric with cached factorizations.

    Parameters
    ----------
    B : (p, p) ndarray
        Symmetric positive definite matrix. Construct through
        :func:`make_metric` to get symmetrization and ridge blending.
    """

    def __init__(self, B: NDArray) -> None:
        B = np.asarray(B, dtype=float)
        if B.ndim != 2 or B.shape[0] != B.shape[1]:
            raise DimensionMismatch(f"metric must be square, got {B.shape}")
        self.B = (B + B.T) / 2.0
        evals, evecs = np.linalg.eigh(self.B)
        # relative threshold: numerically singular metrics are unusable
        p = B.shape[0]
        tol = 100.0 * p * np.finfo(float).eps * max(evals[-1], 0.0)
        if evals[0] <= tol:
            raise NotPositiveDefinite(
                f"metric has min eigenvalue {evals[0]:.3e}; "
                "increase the ridge weight alpha"
            )
        try:
            self._chol = cho_factor(self.B, lower=True, check_finite=False)
        except np.linalg.LinAlgError as exc:  # pragma: no cover - eigh guard first
            raise NotPositiveDefinite(str(exc)) from exc
        self._evals = evals
        self._evecs = evecs

    @property
    def dim(self) -> int:
        return self.B.shape[0]

    @property
    def eig_max(self) -> float:
        return float(self._evals[-1])

    @property
    def eig_min(self) -> float:
        return float(self._evals[0])

    def mul(self, A: NDArray) -> NDArray:
        """B @ A."""
        return self.B @ A

    def solve(self, rhs: NDArray) -> NDArray:
        """B^{-1} @ rhs via the cached Cholesky factor."""
        return cho_solve(self._chol, rhs, check_finite=False)

    def inv_sqrt_apply(self, A: NDArray) -> NDArray:
        """B^{-1/2} @ A via the cached eigendecomposition."""
        coeff = self._evecs.T @ A
        coeff /= np.sqrt(self._evals)[:, None]
        return self._evecs @ coeff

    def sqrt_apply(self, A: NDArray) -> NDArray:
        """B^{1/2} @ A."""
        coeff = self._evecs.T @ A
        coeff *= np.sqrt(self._evals)[:, None]
        return self._evecs @ coeff


def make_metric(gram: NDArray, alpha: float = 0.0) -> MetricMatrix:
    """Blend a Gram matrix with the identity and wrap it as a metric.

    Returns the metric (1 - alpha) * gram + alpha * I, which is positive
    definite whenever alpha > 0, or whenever the Gram matrix itself is.

    Raises
    ------
    NotPositiveDefinite
        If the blended matrix still has a nonpositive eigenvalue.
    """
    gram = np.asarray(gram, dtype=float)
    if gram.ndim != 2 or gram.shape[0] != gram.shape[1]:
        raise DimensionMismatch(f"gram must be square, got {gram.shape}")
    if not 0.0 <= alpha < 1.0:
        raise ValueError(f"alpha must lie in [0, 1), got {alpha}")
    sym = (gram + gram.T) / 2.0
    B = (1.0 - alpha) * sym
    if alpha > 0.0:
        B = B + alpha * np.eye(gram.shape[0])
    return MetricMatrix(B)


@dataclass(frozen=True)
class GStiefelPoint:
    """A point U on the generalized Stiefel manifold {U : U^T B U = I}."""

    U: NDArray
    metric: MetricMatrix

    @property
    def r(self) -> int:
        return self.U.shape[1]

    def feasibility_error(self) -> float:
        G = self.U.T @ self.metric.mul(self.U)
        return float(np.linalg.norm(G - np.eye(self.r)))


@dataclass(frozen=True)
class TangentVector:
    """A tangent direction xi anchored at a manifold point."""

    xi: NDArray
    point: GStiefelPoint

    def tangency_error(self) -> float:
        # tangency means U^T B xi is skew-symmetric
        S = self.point.U.T @ self.point.metric.mul(self.xi)
        return float(np.linalg.norm(S + S.T))


@dataclass(frozen=True)
class ProductPoint:
    """A point on the product of two generalized Stiefel manifolds."""

    u_part: GStiefelPoint
    v_part: GStiefelPoint


@dataclass(frozen=True)
class ProductTangent:
    """Tangent direction on the product manifold (plain array parts)."""

    u: NDArray
    v: NDArray

    def __add__(self, other: "ProductTangent") -> "ProductTangent":
        return ProductTangent(self.u + other.u, self.v + other.v)

    def __sub__(self, other: "ProductTangent") -> "ProductTangent":
        return ProductTangent(self.u - other.u, self.v - other.v)

    def __rmul__(self, c: float) -> "ProductTangent":
        return ProductTangent(c * self.u, c * self.v)


def _check_shape(x: GStiefelPoint, xi: NDArray) -> NDArray:
    xi = np.asarray(xi, dtype=float)
    if xi.shape != x.U.shape:
        raise DimensionMismatch(
            f"direction shape {xi.shape} does not match point shape {x.U.shape}"
        )
    return xi


def project_tangent(x: GStiefelPoint, xi: NDArray) -> TangentVector:
    """Orthogonal projection onto the tangent space at x (B metric).

    Computes xi - U * sym(U^T B xi), with sym(A) = (A + A^T)/2.
    """
    xi = _check_shape(x, xi)
    S = x.U.T @ x.metric.mul(xi)
    sym = (S + S.T) / 2.0
    return TangentVector(xi - x.U @ sym, x)


def riemannian_grad(x: GStiefelPoint, egrad: NDArray) -> TangentVector:
    """Riemannian gradient under the B metric from a Euclidean gradient.

    The returned tangent vector g satisfies <g, xi>_B = tr(egrad^T xi)
    for every tangent xi at x.
    """
    egrad = _check_shape(x, egrad)
    return project_tangent(x, x.metric.solve(egrad))


def retract(x: GStiefelPoint, xi: TangentVector) -> GStiefelPoint:
    """B-polar retraction R_x(xi) = (U + xi) ((U+xi)^T B (U+xi))^{-1/2}.

    Exactly feasible up to roundoff; first-order rigid at xi = 0.

    Raises
    ------
    RankDeficientStep
        If U + xi loses rank, i.e. the step was too large; callers
        should shrink the step and retry.
    """
    W = x.U + _check_shape(x, xi.xi)
    # two normalization passes keep feasibility at machine precision
    # even when the step is long enough to make W^T B W ill conditioned
    for _ in range(2):
        M = W.T @ x.metric.mul(W)
        evals, Q = np.linalg.eigh((M + M.T) / 2.0)
        if evals[0] <= 1e-14 * max(evals[-1], 1.0):
            raise RankDeficientStep(
                f"retraction step lost rank (min eig {evals[0]:.3e})"
            )
        inv_half = (Q / np.sqrt(evals)) @ Q.T
        W = W @ inv_half
    return GStiefelPoint(W, x.metric)


def transport(
    from_point: GStiefelPoint, to_point: GStiefelPoint, xi: TangentVector
) -> TangentVector:
    """Projection vector transport: re-project xi onto T_{to_point}."""
    return project_tangent(to_point, xi.xi)


def inner(x: GStiefelPoint, a: NDArray, b: NDArray) -> float:
    """Metric inner product tr(a^T B b) at x."""
    return float(np.sum(a * x.metric.mul(b)))


def norm(x: GStiefelPoint, a: NDArray) -> float:
    return float(np.sqrt(max(inner(x, a, a), 0.0)))


def b_orthonormalize(metric: MetricMatrix, A: NDArray) -> NDArray:
    """Gram-Schmidt in the B inner product (Cholesky form).

    Returns Q with the same column span as A and Q^T B Q = I.
    Raises numpy.linalg.LinAlgError when A is numerically rank
    deficient in the B inner product.
    """
    Q = np.asarray(A, dtype=float)
    # two Cholesky-QR passes; one pass loses digits when A^T B A is
    # ill conditioned
    for _ in range(2):
        G = Q.T @ metric.mul(Q)
        L = np.linalg.cholesky((G + G.T) / 2.0)
        # Q <- Q L^{-T}, i.e. Q^T <- L^{-1} Q^T
        Q = solve_triangular(L, Q.T, lower=True, check_finite=False).T
    return Q


def random_point(metric: MetricMatrix, r: int, seed: int) -> GStiefelPoint:
    """Random feasible point: Gaussian matrix, B-orthonormalized."""
    if r > metric.dim:
        raise DimensionMismatch(f"r={r} exceeds ambient dimension {metric.dim}")
    rng = np.random.default_rng(seed)
    while True:
        A = rng.standard_normal((metric.dim, r))
        try:
            Q = b_orthonormalize(metric, A)
        except np.linalg.LinAlgError:
            continue  # rank-deficient draw, probability ~ 0
        return GStiefelPoint(Q, metric)


# ---------------------------------------------------------------------------
# product manifold M1 x M2


def product_inner(x: ProductPoint, a: ProductTangent, b: ProductTangent) -> float:
    """Sum of the two per-factor metric inner products."""
    return inner(x.u_part, a.u, b.u) + inner(x.v_part, a.v, b.v)


def product_norm(x: ProductPoint, a: ProductTangent) -> float:
    return float(np.sqrt(max(product_inner(x, a, a), 0.0)))


def product_project(x: ProductPoint, a: ProductTangent) -> ProductTangent:
    return ProductTangent(
        project_tangent(x.u_part, a.u).xi, project_tangent(x.v_part, a.v).xi
    )


def product_retract(x: ProductPoint, a: ProductTangent) -> ProductPoint:
    return ProductPoint(
        retract(x.u_part, TangentVector(a.u, x.u_part)),
        retract(x.v_part, TangentVector(a.v, x.v_part)),
    )


def product_transport(
    from_point: ProductPoint, to_point: ProductPoint, a: ProductTangent
) -> ProductTangent:
    return product_project(to_point, a)
