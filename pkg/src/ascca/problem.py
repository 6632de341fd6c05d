"""Problem assembly for sparse CCA with trace-Lasso penalties.

Holds the preprocessed data pair, the penalized objective

    (1/2) ||X U - Y V||_F^2
        + lambda_u ||A_X(U)||_* + lambda_v ||A_Y(V)||_*
    s.t.  U^T Gx U = I_r,  V^T Gy V = I_r,

and the augmented-Lagrangian machinery used by the solver: after
splitting A_X(U) = P, A_Y(V) = Q, partially minimizing the augmented
Lagrangian over (P, Q) in closed form (a Moreau envelope per block)
leaves the smooth surrogate psi(U, V) whose value and gradient are
computed here from singular value decompositions of the shifted
operator images.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
from numpy.typing import NDArray

from . import manifold as mf
from .exceptions import DegenerateColumn, DimensionMismatch
from .tracelasso import TraceLassoOp, nuclear_norm, svt


class DataPair:
    """Centered (optionally column-normalized) data with cached metrics.

    Attributes
    ----------
    X, Y : ndarray
        Preprocessed data matrices, n rows each.
    gx, gy : MetricMatrix
        Regularized Gram matrices (1-alpha) X^T X + alpha I.
    x_scale, y_scale : ndarray
        Column scales divided out by normalization (ones when off).
        Estimates in preprocessed coordinates map back to the raw
        coordinate system via U_raw = U / x_scale[:, None].
    """

    def __init__(
        self,
        Xraw: NDArray,
        Yraw: NDArray,
        normalize: bool = False,
        alpha: float = 0.0,
    ) -> None:
        X = np.atleast_2d(np.asarray(Xraw, dtype=float)).copy()
        Y = np.atleast_2d(np.asarray(Yraw, dtype=float)).copy()
        if X.shape[0] != Y.shape[0]:
            raise DimensionMismatch(
                f"X has {X.shape[0]} rows but Y has {Y.shape[0]}"
            )
        if X.shape[0] < 2:
            raise DimensionMismatch("need at least 2 observations")
        X -= X.mean(axis=0)
        Y -= Y.mean(axis=0)
        self.x_scale = np.ones(X.shape[1])
        self.y_scale = np.ones(Y.shape[1])
        if normalize:
            self.x_scale = self._column_scales(X, "X")
            self.y_scale = self._column_scales(Y, "Y")
            X /= self.x_scale
            Y /= self.y_scale
        self.X = X
        self.Y = Y
        self.normalize = bool(normalize)
        self.alpha = float(alpha)
        self.gx = mf.make_metric(X.T @ X, alpha)
        self.gy = mf.make_metric(Y.T @ Y, alpha)

    @staticmethod
    def _column_scales(M: NDArray, name: str) -> NDArray:
        norms = np.linalg.norm(M, axis=0)
        bad = np.flatnonzero(norms <= 1e-12 * np.sqrt(M.shape[0]))
        if bad.size:
            raise DegenerateColumn(
                f"column {bad[0]} of {name} is constant; cannot normalize"
            )
        return norms

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]

    @property
    def q(self) -> int:
        return self.Y.shape[1]


def preprocess(
    Xraw: NDArray, Yraw: NDArray, normalize: bool = False, alpha: float = 0.0
) -> DataPair:
    """Center, optionally normalize, and attach regularized metrics."""
    return DataPair(Xraw, Yraw, normalize=normalize, alpha=alpha)


class AsccaProblem:
    """The penalized CCA problem on a fixed preprocessed data pair."""

    def __init__(
        self, data: DataPair, r: int, lambda_u: float, lambda_v: float
    ) -> None:
        if not 1 <= r <= min(data.p, data.q, data.n):
            raise DimensionMismatch(
                f"r={r} must lie in [1, min(p, q, n)={min(data.p, data.q, data.n)}]"
            )
        if lambda_u < 0 or lambda_v < 0:
            raise ValueError("penalty weights must be nonnegative")
        self.data = data
        self.r = int(r)
        self.lambda_u = float(lambda_u)
        self.lambda_v = float(lambda_v)
        self.op_x = TraceLassoOp(data.X)
        self.op_y = TraceLassoOp(data.Y)

    @property
    def alpha(self) -> float:
        return self.data.alpha

    def objective(self, U: NDArray, V: NDArray) -> float:
        """The penalized objective (no splitting, no multipliers)."""
        fit = 0.5 * np.linalg.norm(self.data.X @ U - self.data.Y @ V) ** 2
        pen = 0.0
        if self.lambda_u > 0:
            pen += self.lambda_u * nuclear_norm(self.op_x.apply(U))
        if self.lambda_v > 0:
            pen += self.lambda_v * nuclear_norm(self.op_y.apply(V))
        return float(fit + pen)


@dataclass(frozen=True)
class Multipliers:
    """Dual variables for the two splitting constraints."""

    L1: NDArray
    L2: NDArray

    @staticmethod
    def zeros(prob: AsccaProblem) -> "Multipliers":
        n, p, q, r = prob.data.n, prob.data.p, prob.data.q, prob.r
        return Multipliers(np.zeros((n, p * r)), np.zeros((n, q * r)))

    def clipped(self, lo: float, hi: float) -> "Multipliers":
        return Multipliers(np.clip(self.L1, lo, hi), np.clip(self.L2, lo, hi))


def _singular_values(M: NDArray) -> NDArray:
    """Singular values via the smaller Gram eigenproblem.

    Loses ~sqrt(eps) absolute accuracy on the smallest values, which is
    harmless for the thresholded sums used in psi_value.
    """
    n, m = M.shape
    G = M @ M.T if n <= m else M.T @ M
    try:
        evals = scipy.linalg.eigvalsh(G, check_finite=False)
    except scipy.linalg.LinAlgError:
        return np.linalg.svd(M, compute_uv=False)
    return np.sqrt(np.clip(evals[::-1], 0.0, None))


def aug_lagrangian(
    prob: AsccaProblem,
    U: NDArray,
    V: NDArray,
    P: NDArray,
    Q: NDArray,
    mult: Multipliers,
    rho: float,
) -> float:
    """Augmented Lagrangian of the split problem, term by term.

    f(U,V) + lambda_u ||P||_* + lambda_v ||Q||_*
      - <L1, A_X(U) - P> - <L2, A_Y(V) - Q>
      + (rho/2) (||A_X(U) - P||_F^2 + ||A_Y(V) - Q||_F^2)
    """
    if rho <= 0:
        raise ValueError(f"rho must be positive, got {rho}")
    R1 = prob.op_x.apply(U) - P
    R2 = prob.op_y.apply(V) - Q
    value = 0.5 * np.linalg.norm(prob.data.X @ U - prob.data.Y @ V) ** 2
    value += prob.lambda_u * nuclear_norm(P)
    value += prob.lambda_v * nuclear_norm(Q)
    value -= float(np.sum(mult.L1 * R1)) + float(np.sum(mult.L2 * R2))
    value += 0.5 * rho * (np.linalg.norm(R1) ** 2 + np.linalg.norm(R2) ** 2)
    return float(value)


def _envelope_terms(
    op: TraceLassoOp,
    W: NDArray,
    L: NDArray,
    lam: float,
    rho: float,
) -> tuple[float, float]:
    """(prox objective value, multiplier constant) of one Moreau block.

    Value is lam * ||P*||_* + (rho/2) ||M - P*||_F^2 evaluated through
    the spectrum of M = A(W) - L/rho only; P* itself is not formed.
    """
    if lam == 0.0:
        # prox is the identity shift: P* = M, both terms vanish
        return 0.0, float(np.sum(L * L)) / (2.0 * rho)
    M = op.apply(W)
    M -= L / rho
    s = _singular_values(M)
    tau = lam / rho
    value = lam * float(np.clip(s - tau, 0.0, None).sum())
    value += 0.5 * rho * float((np.minimum(s, tau) ** 2).sum())
    return value, float(np.sum(L * L)) / (2.0 * rho)


def psi_value(
    prob: AsccaProblem, U: NDArray, V: NDArray, mult: Multipliers, rho: float
) -> float:
    """The Moreau-eliminated surrogate psi(U, V) = inf_{P,Q} L_rho.

    Equals aug_lagrangian at the prox-recovered (P*, Q*); computed from
    singular values alone, so it is cheap enough for line searches.
    """
    if rho <= 0:
        raise ValueError(f"rho must be positive, got {rho}")
    fit = 0.5 * np.linalg.norm(prob.data.X @ U - prob.data.Y @ V) ** 2
    vx, cx = _envelope_terms(prob.op_x, U, mult.L1, prob.lambda_u, rho)
    vy, cy = _envelope_terms(prob.op_y, V, mult.L2, prob.lambda_v, rho)
    return float(fit + vx + vy - cx - cy)


def _envelope_egrad(
    op: TraceLassoOp, W: NDArray, L: NDArray, lam: float, rho: float
) -> NDArray | None:
    """Euclidean gradient contribution rho * A^*(M - prox(M)) of one block."""
    if lam == 0.0:
        return None
    M = op.apply(W)
    if np.any(L):
        M -= L / rho
    # M - svt(M, tau) caps the singular values at tau; build it from the
    # smaller-side Gram instead of a full SVD.  The scaling min(1, tau/s)
    # is bounded by 1, so near-zero singular values are harmless.
    tau = lam / rho
    n, m = M.shape
    floor = np.finfo(M.dtype).tiny
    if n <= m:
        evals, B = scipy.linalg.eigh(M @ M.T, check_finite=False)
        s = np.sqrt(np.clip(evals, 0.0, None))
        ratio = np.minimum(1.0, tau / np.maximum(s, floor))
        D = B @ (ratio[:, None] * (B.T @ M))
    else:
        evals, B = scipy.linalg.eigh(M.T @ M, check_finite=False)
        s = np.sqrt(np.clip(evals, 0.0, None))
        ratio = np.minimum(1.0, tau / np.maximum(s, floor))
        D = ((M @ B) * ratio[None, :]) @ B.T
    return rho * op.adjoint(D)


def psi_egrad(
    prob: AsccaProblem, U: NDArray, V: NDArray, mult: Multipliers, rho: float
) -> tuple[NDArray, NDArray]:
    """Euclidean gradient of psi in (U, V).

    grad_U = X^T (XU - YV) + rho A_X^*(M_x - svt(M_x, lambda_u/rho)),
    with M_x = A_X(U) - L1/rho, and symmetrically for V with the
    coupling sign flipped.
    """
    if rho <= 0:
        raise ValueError(f"rho must be positive, got {rho}")
    common = prob.data.X @ U - prob.data.Y @ V
    gu = prob.data.X.T @ common
    gv = -(prob.data.Y.T @ common)
    eu = _envelope_egrad(prob.op_x, U, mult.L1, prob.lambda_u, rho)
    if eu is not None:
        gu += eu
    ev = _envelope_egrad(prob.op_y, V, mult.L2, prob.lambda_v, rho)
    if ev is not None:
        gv += ev
    return gu, gv


class PsiOracle:
    """psi evaluator that shares work between value and gradient calls.

    The backtracking pattern evaluates the value at a trial point and,
    once accepted, the gradient at the same point.  Both need the prox
    argument M = A(W) - L/rho and its smaller-side Gram, so those are
    kept for the most recent point (compared by identity).  Results are
    bit-identical to psi_value / psi_egrad given the same inputs.
    """

    def __init__(self, prob: AsccaProblem, mult: Multipliers, rho: float) -> None:
        if rho <= 0:
            raise ValueError(f"rho must be positive, got {rho}")
        self.prob = prob
        self.mult = mult
        self.rho = rho
        # per-block multiplier constants, kept separate so the value sums
        # in the same order as psi_value
        self._cx = float(np.sum(mult.L1 * mult.L1)) / (2.0 * rho)
        self._cy = float(np.sum(mult.L2 * mult.L2)) / (2.0 * rho)
        self._key: object | None = None
        self._common: NDArray | None = None
        self._blocks: list[tuple[NDArray, NDArray] | None] = [None, None]

    def _ensure(self, pt) -> None:
        if pt is self._key:
            return
        U = pt.u_part.U
        V = pt.v_part.U
        prob = self.prob
        self._common = prob.data.X @ U - prob.data.Y @ V
        self._blocks = [
            self._build(prob.op_x, U, self.mult.L1, prob.lambda_u),
            self._build(prob.op_y, V, self.mult.L2, prob.lambda_v),
        ]
        self._key = pt

    def _build(
        self, op: TraceLassoOp, W: NDArray, L: NDArray, lam: float
    ) -> tuple[NDArray, NDArray] | None:
        if lam == 0.0:
            return None
        M = op.apply(W)
        if np.any(L):
            M -= L / self.rho
        n, m = M.shape
        G = M @ M.T if n <= m else M.T @ M
        return M, G

    def _block_value(self, block: tuple[NDArray, NDArray] | None, lam: float) -> float:
        if block is None:
            return 0.0
        M, G = block
        try:
            evals = scipy.linalg.eigvalsh(G, check_finite=False)
            s = np.sqrt(np.clip(evals[::-1], 0.0, None))
        except scipy.linalg.LinAlgError:
            s = np.linalg.svd(M, compute_uv=False)
        tau = lam / self.rho
        value = lam * float(np.clip(s - tau, 0.0, None).sum())
        value += 0.5 * self.rho * float((np.minimum(s, tau) ** 2).sum())
        return value

    def value(self, pt) -> float:
        self._ensure(pt)
        fit = 0.5 * np.linalg.norm(self._common) ** 2
        vx = self._block_value(self._blocks[0], self.prob.lambda_u)
        vy = self._block_value(self._blocks[1], self.prob.lambda_v)
        return float(fit + vx + vy - self._cx - self._cy)

    def egrads(self, pt) -> tuple[NDArray, NDArray]:
        self._ensure(pt)
        gu = self.prob.data.X.T @ self._common
        gv = -(self.prob.data.Y.T @ self._common)
        parts = []
        for block, op, lam in zip(
            self._blocks,
            (self.prob.op_x, self.prob.op_y),
            (self.prob.lambda_u, self.prob.lambda_v),
        ):
            if block is None:
                parts.append(None)
                continue
            M, G = block
            tau = lam / self.rho
            floor = np.finfo(M.dtype).tiny
            evals, B = scipy.linalg.eigh(G, check_finite=False)
            s = np.sqrt(np.clip(evals, 0.0, None))
            ratio = np.minimum(1.0, tau / np.maximum(s, floor))
            if G.shape[0] == M.shape[0]:
                D = B @ (ratio[:, None] * (B.T @ M))
            else:
                D = ((M @ B) * ratio[None, :]) @ B.T
            parts.append(self.rho * op.adjoint(D))
        if parts[0] is not None:
            gu += parts[0]
        if parts[1] is not None:
            gv += parts[1]
        return gu, gv


def recover_pq(
    prob: AsccaProblem, U: NDArray, V: NDArray, mult: Multipliers, rho: float
) -> tuple[NDArray, NDArray]:
    """Closed-form minimizers of the augmented Lagrangian over (P, Q)."""
    if rho <= 0:
        raise ValueError(f"rho must be positive, got {rho}")
    P = svt(prob.op_x.apply(U) - mult.L1 / rho, prob.lambda_u / rho)
    Q = svt(prob.op_y.apply(V) - mult.L2 / rho, prob.lambda_v / rho)
    return P, Q


def kkt_residuals(
    prob: AsccaProblem,
    U: NDArray,
    V: NDArray,
    P: NDArray,
    Q: NDArray,
    mult: Multipliers,
) -> tuple[float, float, float]:
    """(feas1, feas2, stat) at a candidate primal-dual point.

    feas1/feas2 are max-abs entries of the splitting residuals.  stat
    adds the Riemannian gradient norm of the (smooth part of the)
    Lagrangian at (U, V) to the dual feasibility gaps, measured through
    the prox characterization of the nuclear-norm subdifferential:
    -L is a subgradient at P exactly when P = svt(P - L, lam).
    """
    R1 = prob.op_x.apply(U) - P
    R2 = prob.op_y.apply(V) - Q
    feas1 = float(np.max(np.abs(R1))) if R1.size else 0.0
    feas2 = float(np.max(np.abs(R2))) if R2.size else 0.0

    common = prob.data.X @ U - prob.data.Y @ V
    lag_u = prob.data.X.T @ common - prob.op_x.adjoint(mult.L1)
    lag_v = -(prob.data.Y.T @ common) - prob.op_y.adjoint(mult.L2)
    xu = mf.GStiefelPoint(U, prob.data.gx)
    xv = mf.GStiefelPoint(V, prob.data.gy)
    gu = mf.riemannian_grad(xu, lag_u)
    gv = mf.riemannian_grad(xv, lag_v)
    stat = float(
        np.sqrt(mf.inner(xu, gu.xi, gu.xi) + mf.inner(xv, gv.xi, gv.xi))
    )
    stat += float(np.linalg.norm(P - svt(P - mult.L1, prob.lambda_u)))
    stat += float(np.linalg.norm(Q - svt(Q - mult.L2, prob.lambda_v)))
    return feas1, feas2, stat
