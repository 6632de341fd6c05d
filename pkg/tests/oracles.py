"""Independent reference implementations used by the test suite.

Everything here is deliberately written with different algorithms or
different library code paths than the package under test, so the two
sides of each comparison cannot share a bug.
"""

import numpy as np
import scipy.linalg


def nuclear_norm_gesvd(M):
    """Nuclear norm through LAPACK gesvd (package uses gesdd)."""
    return float(scipy.linalg.svd(M, compute_uv=False, lapack_driver="gesvd").sum())


def inv_sqrt_psd(S):
    """Inverse square root of an SPD matrix via eigendecomposition."""
    evals, evecs = scipy.linalg.eigh(S)
    if evals.min() <= 0:
        raise np.linalg.LinAlgError("matrix not positive definite")
    return (evecs / np.sqrt(evals)) @ evecs.T


def cca_whitening(X, Y, r):
    """Classical CCA by explicit whitening; X, Y centered, Grams PD.

    Returns (U, V, sigma) where columns solve
        max tr(U^T X^T Y V)  s.t.  U^T X^T X U = I, V^T Y^T Y V = I
    and sigma holds the top-r singular values of the whitened
    cross-product, i.e. the sample canonical correlations.
    """
    wx = inv_sqrt_psd(X.T @ X)
    wy = inv_sqrt_psd(Y.T @ Y)
    K = wx @ (X.T @ Y) @ wy
    Pl, s, Prt = scipy.linalg.svd(K)
    U = wx @ Pl[:, :r]
    V = wy @ Prt[:r].T
    return U, V, s[:r]


def population_canonical_correlations(Sx, Sxy, Sy, r):
    """Top-r canonical correlations of a joint Gaussian covariance.

    Square roots of the eigenvalues of Sx^{-1} Sxy Sy^{-1} Sxy^T.
    """
    M = np.linalg.solve(Sx, Sxy) @ np.linalg.solve(Sy, Sxy.T)
    evals = np.sort(np.linalg.eigvals(M).real)[::-1]
    return np.sqrt(np.clip(evals[:r], 0.0, None))


def pearson_columns(A, B):
    """Columnwise Pearson correlations of two score matrices."""
    A = A - A.mean(axis=0)
    B = B - B.mean(axis=0)
    num = np.sum(A * B, axis=0)
    den = np.linalg.norm(A, axis=0) * np.linalg.norm(B, axis=0)
    return num / den


def projected_gradient_stiefel(C, U0, steps=5000, lr=0.1, tol=1e-10):
    """Minimize (1/2)||U - C||_F^2 on the standard Stiefel manifold.

    Plain projected gradient with QR re-orthonormalization; intentionally
    naive and slow, used only as a reference optimum.  The analytic
    solution is the polar factor of C, so the projected-gradient run and
    the polar factor cross-check each other.
    """
    U = U0.copy()
    prev = np.inf
    for _ in range(steps):
        G = U - C
        # project onto tangent space of the Stiefel manifold at U
        S = U.T @ G
        G = G - U @ (S + S.T) / 2.0
        Q, R = np.linalg.qr(U - lr * G)
        U = Q * np.sign(np.diag(R))
        val = 0.5 * np.linalg.norm(U - C) ** 2
        if abs(prev - val) < tol * max(1.0, abs(val)):
            break
        prev = val
    return U, 0.5 * np.linalg.norm(U - C) ** 2


def polar_factor(C):
    """Closest orthonormal-column matrix to C (analytic optimum)."""
    Pl, _, Prt = np.linalg.svd(C, full_matrices=False)
    return Pl @ Prt
