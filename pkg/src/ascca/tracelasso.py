"""Matrix trace-Lasso operator, nuclear norm, and its proximal map.

For a data matrix X (n x p) and a loading matrix W (p x r), the linear
operator stacks the column-scaled copies

    A_X(W) = [ X * Diag(W_col1), ..., X * Diag(W_colr) ]   (n x p*r)

whose nuclear norm is the regularizer.  Its adjoint collects
diag(X^T M_i) per block.  The nuclear-norm prox is singular value
soft thresholding.
"""

from __future__ import annotations

import numpy as np
from numpy.typing import NDArray

from .exceptions import DimensionMismatch, SvdFailure


class TraceLassoOp:
    """The block-diagonal-scaling operator A_X and its adjoint.

    Parameters
    ----------
    X : (n, p) ndarray
        Data matrix; columns may or may not be unit-normalized
        (normalization is the caller's preprocessing decision).
    """

    def __init__(self, X: NDArray) -> None:
        X = np.asarray(X, dtype=float)
        if X.ndim != 2:
            raise DimensionMismatch(f"X must be 2-d, got shape {X.shape}")
        self.X = X
        self.n, self.p = X.shape

    def apply(self, W: NDArray) -> NDArray:
        """A_X(W): block i is X scaled columnwise by W[:, i].

        Returns an n x (p*r) matrix; block i occupies columns
        [i*p, (i+1)*p).
        """
        W = np.asarray(W, dtype=float)
        if W.ndim != 2 or W.shape[0] != self.p:
            raise DimensionMismatch(
                f"W has shape {W.shape}, expected ({self.p}, r)"
            )
        r = W.shape[1]
        # out[:, i*p + j] = X[:, j] * W[j, i]
        out = self.X[:, None, :] * W.T[None, :, :]
        return out.reshape(self.n, r * self.p)

    def adjoint(self, M: NDArray) -> NDArray:
        """A*_X(M): column i is diag(X^T M_i) for block M_i."""
        M = np.asarray(M, dtype=float)
        if M.ndim != 2 or M.shape[0] != self.n or M.shape[1] % self.p != 0:
            raise DimensionMismatch(
                f"M has shape {M.shape}, expected ({self.n}, {self.p}*r)"
            )
        r = M.shape[1] // self.p
        blocks = M.reshape(self.n, r, self.p)
        return np.einsum("nj,nij->ji", self.X, blocks)


def nuclear_norm(M: NDArray) -> float:
    """Sum of singular values."""
    try:
        s = np.linalg.svd(np.asarray(M, dtype=float), compute_uv=False)
    except np.linalg.LinAlgError as exc:
        raise SvdFailure(str(exc)) from exc
    return float(s.sum())


def svt(Y: NDArray, tau: float) -> NDArray:
    """Singular value soft thresholding: prox of tau * nuclear norm.

    Returns the unique minimizer of (1/2)||Z - Y||_F^2 + tau ||Z||_*.
    """
    P, _ = svt_with_spectrum(Y, tau)
    return P


def svt_with_spectrum(Y: NDArray, tau: float) -> tuple[NDArray, NDArray]:
    """svt(Y, tau) together with the singular values of Y.

    The spectrum lets callers evaluate nuclear norms and prox residual
    norms without a second decomposition:
    ||svt(Y)||_* = sum (s - tau)_+ and ||Y - svt(Y)||_F^2 = sum min(s, tau)^2.
    """
    Y = np.asarray(Y, dtype=float)
    if tau < 0:
        raise ValueError(f"tau must be nonnegative, got {tau}")
    if tau == 0.0:
        try:
            s = np.linalg.svd(Y, compute_uv=False)
        except np.linalg.LinAlgError as exc:
            raise SvdFailure(str(exc)) from exc
        return Y.copy(), s
    try:
        U, s, Vt = np.linalg.svd(Y, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise SvdFailure(str(exc)) from exc
    shrunk = s - tau
    keep = shrunk > 0
    if not np.any(keep):
        return np.zeros_like(Y), s
    P = (U[:, keep] * shrunk[keep]) @ Vt[keep]
    return P, s
