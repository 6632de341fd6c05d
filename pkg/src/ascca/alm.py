"""Inexact augmented Lagrangian loop for the penalized CCA problem.

Each outer iteration minimizes the Moreau-eliminated surrogate psi over
the product manifold with the BB inner solver (to a tolerance that
tightens geometrically down to a floor), recovers the split variables
(P, Q) by their closed-form prox, updates the clipped multipliers, and
grows the penalty whenever the feasibility residuals stall.
"""

from __future__ import annotations

import json
import sys
import time
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from . import manifold as mf
from . import rbb
from .exceptions import InfeasibleInit
from .problem import (
    AsccaProblem,
    Multipliers,
    PsiOracle,
    kkt_residuals,
    recover_pq,
)

RESIDUAL_TOL = "ResidualTol"
MAX_OUTER = "MaxOuter"

INIT_STRATEGIES = ("random", "spectral", "screen")


@dataclass(frozen=True)
class AlmConfig:
    """Outer-loop settings.

    rho0 = None picks max(eig_max(Gx), eig_max(Gy)).  The inner
    tolerance schedule is eps_k = max(eps_floor, eps_decay^k); the loop
    stops once both squared residual norms fall below outer_tol and the
    inner solver has actually reached the schedule floor (so a run with
    trivially satisfied constraints still polishes the subproblem).
    """

    rho0: float | None = None
    tau: float = 0.99
    gamma: float = 1.05
    eps_floor: float = 1e-3
    eps_decay: float = 0.9
    outer_tol: float = 1e-8
    max_outer: int = 500
    inner_max: int = 100
    clip_lo: float = -100.0
    clip_hi: float = 100.0

    def __post_init__(self) -> None:
        if self.rho0 is not None and self.rho0 <= 0:
            raise ValueError("rho0 must be positive")
        if not 0 < self.tau < 1:
            raise ValueError("tau must lie in (0, 1)")
        if self.gamma <= 1:
            raise ValueError("gamma must exceed 1")
        if self.eps_floor <= 0 or not 0 < self.eps_decay < 1:
            raise ValueError("bad inner tolerance schedule")
        if self.outer_tol <= 0:
            raise ValueError("outer_tol must be positive")
        if self.max_outer < 1 or self.inner_max < 1:
            raise ValueError("iteration budgets must be at least 1")
        if self.clip_lo >= self.clip_hi:
            raise ValueError("clip_lo must be below clip_hi")

    def eps_schedule(self, k: int) -> float:
        return max(self.eps_floor, self.eps_decay**k)


@dataclass(frozen=True)
class OuterRecord:
    """One outer iteration of the loop, for logs and diagnostics."""

    k: int
    rho: float
    eps_k: float
    inner_iters: int
    psi: float
    grad_norm: float
    res1_inf: float
    res2_inf: float
    res_sq_max: float


@dataclass
class AsccaSolution:
    """Final iterate with diagnostics."""

    U: np.ndarray
    V: np.ndarray
    P: np.ndarray
    Q: np.ndarray
    multipliers: Multipliers
    rho: float
    objective: float
    feas1: float
    feas2: float
    stat: float
    grad_norm: float
    outer_iters: int
    inner_iters: int
    wall_time: float
    termination: str
    history: list[OuterRecord] = field(default_factory=list)


def default_init(
    prob: AsccaProblem, strategy: str = "spectral", seed: int = 0
) -> mf.ProductPoint:
    """Feasible starting point.

    "random": independent B-orthonormalized Gaussian factors (seeds
    seed and seed + 1).  "spectral": top-r singular triplets of the
    whitened cross-product Gx^{-1/2} X^T Y Gy^{-1/2}, mapped back
    through the metric square roots (the classical regularized CCA
    directions); deterministic, seed unused.  "screen": the spectral
    start computed on a reduced problem that keeps only the
    max(2r, ceil(sqrt(min(p, q)))) rows and columns of X^T Y with the
    largest norms, then embedded back at full size with zeros
    elsewhere; deterministic, seed unused.  When design columns are
    strongly correlated the dense spectral directions can sit in a
    poor attraction basin, and starting from a hard-thresholded
    support avoids it.
    """
    kind = strategy.lower()
    data = prob.data
    if kind == "random":
        return mf.ProductPoint(
            mf.random_point(data.gx, prob.r, seed=seed),
            mf.random_point(data.gy, prob.r, seed=seed + 1),
        )
    if kind == "spectral":
        C = data.X.T @ data.Y
        K = data.gx.inv_sqrt_apply(C)
        K = data.gy.inv_sqrt_apply(K.T).T
        Pl, _, Prt = np.linalg.svd(K, full_matrices=False)
        U0 = data.gx.inv_sqrt_apply(Pl[:, : prob.r])
        V0 = data.gy.inv_sqrt_apply(Prt[: prob.r].T)
        # polish roundoff so the feasibility invariant holds strictly
        U0 = mf.b_orthonormalize(data.gx, U0)
        V0 = mf.b_orthonormalize(data.gy, V0)
        return mf.ProductPoint(
            mf.GStiefelPoint(U0, data.gx), mf.GStiefelPoint(V0, data.gy)
        )
    if kind == "screen":
        C = data.X.T @ data.Y
        k = max(2 * prob.r, int(np.ceil(np.sqrt(min(C.shape)))))
        k = min(k, C.shape[0], C.shape[1])
        # stable sorts keep ties deterministic across platforms
        rows = np.sort(
            np.argsort(-np.linalg.norm(C, axis=1), kind="stable")[:k]
        )
        cols = np.sort(
            np.argsort(-np.linalg.norm(C, axis=0), kind="stable")[:k]
        )
        # principal submatrices of a positive-definite metric stay
        # positive definite, so the reduced metrics always build
        gxs = mf.MetricMatrix(data.gx.B[np.ix_(rows, rows)])
        gys = mf.MetricMatrix(data.gy.B[np.ix_(cols, cols)])
        Ks = gxs.inv_sqrt_apply(C[np.ix_(rows, cols)])
        Ks = gys.inv_sqrt_apply(Ks.T).T
        Pl, _, Prt = np.linalg.svd(Ks, full_matrices=False)
        U0 = np.zeros((C.shape[0], prob.r))
        V0 = np.zeros((C.shape[1], prob.r))
        U0[rows] = gxs.inv_sqrt_apply(Pl[:, : prob.r])
        V0[cols] = gys.inv_sqrt_apply(Prt[: prob.r].T)
        # the restriction of the full metric to the kept indices is
        # exactly the reduced metric, so the embedded point is already
        # feasible up to roundoff; polish it anyway
        U0 = mf.b_orthonormalize(data.gx, U0)
        V0 = mf.b_orthonormalize(data.gy, V0)
        return mf.ProductPoint(
            mf.GStiefelPoint(U0, data.gx), mf.GStiefelPoint(V0, data.gy)
        )
    raise ValueError(f"unknown init strategy {strategy!r}")


def solve(
    prob: AsccaProblem,
    init: mf.ProductPoint | None = None,
    cfg: AlmConfig | None = None,
    rbb_cfg: rbb.RbbConfig | None = None,
    callback: Callable[[OuterRecord, mf.ProductPoint], None] | None = None,
    verbose: bool = False,
) -> AsccaSolution:
    """Run the outer loop from init (default: spectral start)."""
    start = time.perf_counter()
    cfg = cfg or AlmConfig()
    rbb_cfg = rbb_cfg or rbb.RbbConfig()
    x = init if init is not None else default_init(prob)
    tol = mf.FEASIBILITY_TOL * prob.r * 100
    if x.u_part.feasibility_error() > tol or x.v_part.feasibility_error() > tol:
        raise InfeasibleInit("initial point violates a manifold constraint")

    rho = cfg.rho0 if cfg.rho0 is not None else max(
        prob.data.gx.eig_max, prob.data.gy.eig_max
    )
    mult = Multipliers.zeros(prob)
    prev1 = prev2 = np.inf
    history: list[OuterRecord] = []
    total_inner = 0
    termination = MAX_OUTER
    outer_done = 0

    for k in range(cfg.max_outer):
        eps_k = cfg.eps_schedule(k)
        inner_cfg = replace(rbb_cfg, eps=eps_k, max_iters=cfg.inner_max)

        oracle = PsiOracle(prob, mult, rho)

        def cost(pt):
            return oracle.value(pt)

        def grad(pt):
            gu, gv = oracle.egrads(pt)
            return mf.ProductTangent(
                mf.riemannian_grad(pt.u_part, gu).xi,
                mf.riemannian_grad(pt.v_part, gv).xi,
            )

        rep = rbb.minimize(cost, grad, x, inner_cfg)
        x = rep.point
        total_inner += rep.iterations
        U, V = x.u_part.U, x.v_part.U

        P, Q = recover_pq(prob, U, V, mult, rho)
        R1 = prob.op_x.apply(U) - P
        R2 = prob.op_y.apply(V) - Q
        inf1 = float(np.max(np.abs(R1))) if R1.size else 0.0
        inf2 = float(np.max(np.abs(R2))) if R2.size else 0.0
        res_sq = max(np.linalg.norm(R1) ** 2, np.linalg.norm(R2) ** 2)
        mult = Multipliers(mult.L1 - rho * R1, mult.L2 - rho * R2).clipped(
            cfg.clip_lo, cfg.clip_hi
        )

        record = OuterRecord(
            k=k,
            rho=rho,
            eps_k=eps_k,
            inner_iters=rep.iterations,
            psi=rep.trajectory[-1],
            grad_norm=rep.grad_norm,
            res1_inf=inf1,
            res2_inf=inf2,
            res_sq_max=float(res_sq),
        )
        history.append(record)
        if callback is not None:
            callback(record, x)
        if verbose:
            print(json.dumps(record.__dict__), file=sys.stderr)
        outer_done = k + 1

        if res_sq <= cfg.outer_tol and rep.grad_norm <= cfg.eps_floor:
            termination = RESIDUAL_TOL
            break
        if not (inf1 <= cfg.tau * prev1 and inf2 <= cfg.tau * prev2):
            rho *= cfg.gamma
        prev1, prev2 = inf1, inf2

    feas1, feas2, stat = kkt_residuals(prob, U, V, P, Q, mult)
    return AsccaSolution(
        U=U,
        V=V,
        P=P,
        Q=Q,
        multipliers=mult,
        rho=rho,
        objective=prob.objective(U, V),
        feas1=feas1,
        feas2=feas2,
        stat=stat,
        grad_norm=rep.grad_norm,
        outer_iters=outer_done,
        inner_iters=total_inner,
        wall_time=time.perf_counter() - start,
        termination=termination,
        history=history,
    )
