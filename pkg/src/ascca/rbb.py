"""Riemannian Barzilai-Borwein gradient method with backtracking.

Minimizes a smooth cost on the product of two generalized Stiefel
manifolds.  Each iteration backtracks from a spectral (BB) trial step
until the Armijo condition holds, retracts, and rebuilds the BB step
from the transported gradient displacement.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import manifold as mf
from .exceptions import RankDeficientStep

GRAD_TOL = "GradTol"
MAX_ITERS = "MaxIters"
LINE_SEARCH_STALL = "LineSearchStall"


@dataclass(frozen=True)
class RbbConfig:
    """Tuning knobs for the BB inner solver.

    bb_convention selects which displacement plays the numerator in the
    spectral step ss/sy: "paper" uses the gradient difference
    s = g_new - T(g_old) with y = T(-step * g_old); "classical" swaps
    the two labels (the textbook BB1 step).  Safeguards and the line
    search keep both well defined.
    """

    eps: float = 1e-6
    max_iters: int = 200
    alpha0: float | None = None  # None: 1/||g(x0)||, clamped
    alpha_min: float = 1e-10
    alpha_max: float = 1e10
    ls_decrease: float = 1e-4
    ls_contract: float = 0.5
    ls_max_backtracks: int = 50
    bb_convention: str = "paper"

    def __post_init__(self) -> None:
        if not 0 < self.alpha_min <= self.alpha_max:
            raise ValueError("need 0 < alpha_min <= alpha_max")
        if not 0 < self.ls_contract < 1:
            raise ValueError("ls_contract must lie in (0, 1)")
        if not 0 < self.ls_decrease < 1:
            raise ValueError("ls_decrease must lie in (0, 1)")
        if self.eps <= 0:
            raise ValueError("eps must be positive")
        if self.bb_convention not in ("paper", "classical"):
            raise ValueError(f"unknown bb_convention {self.bb_convention!r}")


@dataclass(frozen=True)
class StepRecord:
    """One accepted iteration, for post-hoc line-search replay."""

    f_before: float
    f_after: float
    step: float  # accepted sigma^h * alpha_bb
    grad_norm_sq: float
    alpha_bb: float  # trial step the backtracking started from
    curvature: float  # <s, y> at the end of the iteration


@dataclass
class RbbReport:
    point: mf.ProductPoint
    grad_norm: float
    iterations: int
    trajectory: list[float] = field(default_factory=list)
    termination: str = MAX_ITERS
    steps: list[StepRecord] = field(default_factory=list)


def _clamp(value: float, lo: float, hi: float) -> float:
    return min(hi, max(lo, value))


def minimize(
    cost: Callable[[mf.ProductPoint], float],
    grad: Callable[[mf.ProductPoint], mf.ProductTangent],
    x0: mf.ProductPoint,
    cfg: RbbConfig,
) -> RbbReport:
    """Run the BB descent from x0 until ||g|| < eps or budget runs out.

    cost and grad must be pure; grad returns the Riemannian gradient
    as a product tangent vector.
    """
    x = x0
    g = grad(x)
    gnorm2 = mf.product_inner(x, g, g)
    gnorm = float(np.sqrt(max(gnorm2, 0.0)))
    f = cost(x)
    report = RbbReport(point=x, grad_norm=gnorm, iterations=0, trajectory=[f])
    if gnorm < cfg.eps:
        report.termination = GRAD_TOL
        return report
    if cfg.alpha0 is not None:
        alpha_bb = _clamp(cfg.alpha0, cfg.alpha_min, cfg.alpha_max)
    else:
        alpha_bb = _clamp(1.0 / gnorm, cfg.alpha_min, cfg.alpha_max)

    for _ in range(cfg.max_iters):
        # backtracking line search from the BB trial step
        t = alpha_bb
        accepted = None
        f_new = np.inf
        for _h in range(cfg.ls_max_backtracks + 1):
            try:
                candidate = mf.product_retract(x, (-t) * g)
            except RankDeficientStep:
                t *= cfg.ls_contract  # step too long for the retraction
                continue
            f_new = cost(candidate)
            if f_new <= f - cfg.ls_decrease * t * gnorm2:
                accepted = candidate
                break
            t *= cfg.ls_contract
        if accepted is None:
            report.termination = LINE_SEARCH_STALL
            break

        g_new = grad(accepted)
        tg = mf.product_transport(x, accepted, g)
        diff = g_new - tg  # gradient displacement
        move = (-t) * tg  # transported step T(-t g); transport is linear
        if cfg.bb_convention == "paper":
            s, y = diff, move
        else:
            s, y = move, diff
        sy = mf.product_inner(accepted, s, y)
        if sy > 0:
            ss = mf.product_inner(accepted, s, s)
            next_alpha = _clamp(ss / sy, cfg.alpha_min, cfg.alpha_max)
        else:
            next_alpha = cfg.alpha_max

        report.steps.append(
            StepRecord(
                f_before=f,
                f_after=f_new,
                step=t,
                grad_norm_sq=gnorm2,
                alpha_bb=alpha_bb,
                curvature=sy,
            )
        )
        x, g, f = accepted, g_new, f_new
        alpha_bb = next_alpha
        gnorm2 = mf.product_inner(x, g, g)
        gnorm = float(np.sqrt(max(gnorm2, 0.0)))
        report.trajectory.append(f)
        report.iterations += 1
        if gnorm < cfg.eps:
            report.termination = GRAD_TOL
            break

    report.point = x
    report.grad_norm = gnorm
    return report
