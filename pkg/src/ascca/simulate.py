"""Synthetic benchmark generator and evaluation metrics.

Ground truth is a pair of sparse loading matrices with a shared support,
orthonormalized in the covariance inner product so that the population
canonical correlations equal the prescribed spectrum exactly.  Data are
joint Gaussian draws from the assembled block covariance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
from numpy.typing import NDArray

from .exceptions import (
    DegenerateDraw,
    DimensionMismatch,
    NotPositiveDefinite,
    RankDeficient,
    ZeroVariance,
)
from .manifold import MetricMatrix, b_orthonormalize
from .problem import DataPair

COV_IDENTITY = "identity"
COV_TOEPLITZ = "toeplitz"
COV_CORRELATED = "corr"
COV_KINDS = (COV_IDENTITY, COV_TOEPLITZ, COV_CORRELATED)

DEFAULT_SUPPORT = (0, 5, 10, 15, 20)
TOEPLITZ_BASE = 0.3
PSD_SLACK = -1e-10


@dataclass(frozen=True)
class SimulationDesign:
    """One benchmark cell: sizes, covariance family, and signal."""

    n: int
    p: int
    q: int
    r: int = 2
    cov_kind: str = COV_IDENTITY
    sigma: float = 0.3
    support: tuple[int, ...] = DEFAULT_SUPPORT
    spectrum: tuple[float, ...] = (0.9, 0.8)
    seed: int = 0

    def __post_init__(self) -> None:
        if min(self.n, self.p, self.q, self.r) < 1:
            raise ValueError("n, p, q, r must be positive")
        if self.cov_kind not in COV_KINDS:
            raise ValueError(f"unknown covariance kind {self.cov_kind!r}")
        if self.cov_kind == COV_CORRELATED and not 0 < self.sigma < 1:
            raise ValueError("sigma must lie in (0, 1)")
        if len(self.spectrum) != self.r:
            raise ValueError("spectrum must have exactly r entries")
        lam = np.asarray(self.spectrum, dtype=float)
        if np.any(lam <= 0) or np.any(lam >= 1) or np.any(np.diff(lam) >= 0):
            raise ValueError("spectrum must be strictly decreasing inside (0, 1)")
        if len(self.support) < self.r:
            raise ValueError("support must hold at least r indices")
        if len(set(self.support)) != len(self.support):
            raise ValueError("support indices must be distinct")
        if min(self.support) < 0 or max(self.support) >= min(self.p, self.q):
            raise ValueError("support indices must fit inside both views")


@dataclass(frozen=True, eq=False)
class GroundTruth:
    """Population loadings and covariance blocks of one design."""

    U: NDArray
    V: NDArray
    sigma_x: NDArray
    sigma_y: NDArray
    sigma_xy: NDArray
    spectrum: tuple[float, ...]

    def joint_covariance(self) -> NDArray:
        return np.block(
            [[self.sigma_x, self.sigma_xy], [self.sigma_xy.T, self.sigma_y]]
        )


def make_covariance(
    kind: str,
    dim: int,
    support: tuple[int, ...] = DEFAULT_SUPPORT,
    sigma: float = 0.3,
) -> NDArray:
    """One population covariance block of the given family."""
    if kind == COV_IDENTITY:
        return np.eye(dim)
    if kind == COV_TOEPLITZ:
        idx = np.arange(dim)
        return TOEPLITZ_BASE ** np.abs(idx[:, None] - idx[None, :])
    if kind == COV_CORRELATED:
        if max(support) >= dim:
            raise ValueError("support does not fit inside the block")
        cov = np.eye(dim)
        rows = np.asarray(support)
        cov[np.ix_(rows, rows)] = sigma
        cov[rows, rows] = 1.0
        # 1 + (|S|-1) sigma and 1 - sigma are the block eigenvalues, so
        # sigma in (0,1) keeps this PD; guard anyway
        if np.linalg.eigvalsh(cov).min() <= 0:
            raise NotPositiveDefinite("correlated design block is not PD")
        return cov
    raise ValueError(f"unknown covariance kind {kind!r}")


def _draw_loadings(
    rng: np.random.Generator, dim: int, r: int, support: tuple[int, ...]
) -> NDArray:
    """Sparse integer loadings on the support rows, full column rank."""
    rows = np.asarray(support)
    for _ in range(100):
        block = rng.integers(-2, 3, size=(len(rows), r)).astype(float)
        if np.any(np.all(block == 0.0, axis=0)):
            continue
        if np.linalg.matrix_rank(block) < r:
            continue
        out = np.zeros((dim, r))
        out[rows] = block
        return out
    raise DegenerateDraw("could not draw rank-r loadings in 100 attempts")


def make_truth(design: SimulationDesign) -> GroundTruth:
    """Assemble ground-truth loadings and the joint covariance."""
    rng = np.random.default_rng(design.seed)
    sigma_x = make_covariance(design.cov_kind, design.p, design.support, design.sigma)
    sigma_y = make_covariance(design.cov_kind, design.q, design.support, design.sigma)
    mx = MetricMatrix(sigma_x)
    my = MetricMatrix(sigma_y)
    # orthonormalization combines columns, so the support rows survive
    U = b_orthonormalize(mx, _draw_loadings(rng, design.p, design.r, design.support))
    V = b_orthonormalize(my, _draw_loadings(rng, design.q, design.r, design.support))
    lam = np.diag(np.asarray(design.spectrum, dtype=float))
    sigma_xy = sigma_x @ U @ lam @ V.T @ sigma_y
    truth = GroundTruth(
        U=U,
        V=V,
        sigma_x=sigma_x,
        sigma_y=sigma_y,
        sigma_xy=sigma_xy,
        spectrum=design.spectrum,
    )
    floor = np.linalg.eigvalsh(truth.joint_covariance()).min()
    if floor < PSD_SLACK:
        raise NotPositiveDefinite(f"joint covariance min eigenvalue {floor:.3e}")
    return truth


def sample_data(
    truth: GroundTruth,
    n: int,
    seed: int,
    normalize: bool = False,
    alpha: float = 0.0,
) -> DataPair:
    """n joint Gaussian draws, centered (and optionally normalized)."""
    joint = truth.joint_covariance()
    evals, vecs = scipy.linalg.eigh(joint, check_finite=False)
    if evals.min() < PSD_SLACK:
        raise NotPositiveDefinite("joint covariance is not PSD")
    root = vecs * np.sqrt(np.clip(evals, 0.0, None))
    rng = np.random.default_rng(seed)
    Z = rng.standard_normal((n, joint.shape[0])) @ root.T
    p = truth.sigma_x.shape[0]
    return DataPair(Z[:, :p], Z[:, p:], normalize=normalize, alpha=alpha)


def subspace_loss(Utrue: NDArray, Uhat: NDArray) -> float:
    """Squared Frobenius distance between column-space projectors."""
    A = np.atleast_2d(np.asarray(Utrue, dtype=float))
    B = np.atleast_2d(np.asarray(Uhat, dtype=float))
    if A.shape[0] != B.shape[0]:
        raise DimensionMismatch("row dimensions differ")
    qa = _orthobasis(A)
    qb = _orthobasis(B)
    cross = qa.T @ qb
    loss = qa.shape[1] + qb.shape[1] - 2.0 * np.linalg.norm(cross) ** 2
    return float(max(loss, 0.0))


def _orthobasis(A: NDArray) -> NDArray:
    q, rfac = np.linalg.qr(A)
    diag = np.abs(np.diag(rfac))
    if diag.min() <= A.shape[0] * np.finfo(float).eps * max(diag.max(), 1e-300):
        raise RankDeficient("argument does not have full column rank")
    return q


def pearson_columns(a: NDArray, b: NDArray) -> NDArray:
    """Columnwise sample Pearson correlation."""
    ac = a - a.mean(axis=0)
    bc = b - b.mean(axis=0)
    na = np.linalg.norm(ac, axis=0)
    nb = np.linalg.norm(bc, axis=0)
    scale = np.sqrt(a.shape[0])
    if np.any(na <= 1e-12 * scale) or np.any(nb <= 1e-12 * scale):
        raise ZeroVariance("a projected column has no variance")
    return np.sum(ac * bc, axis=0) / (na * nb)


def sample_canonical_correlations(data: DataPair, U: NDArray, V: NDArray) -> NDArray:
    """Per-pair sample correlations of the projected views."""
    return pearson_columns(data.X @ U, data.Y @ V)
