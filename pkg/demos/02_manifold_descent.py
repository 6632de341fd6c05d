"""Minimizing a smooth function under a Gram-matrix orthogonality constraint.

The inner solver never leaves the feasible set {U : U^T B U = I}:
every iterate is produced by a retraction, so the constraint is exact
at all times and only the smooth objective needs attention.  This
script minimizes the Rayleigh-style quadratic -trace(U^T A U) over
that set (one factor of the product manifold; the other is pinned to a
trivial copy), whose optimum is spanned by the top eigenvectors of the
pencil (A, B), then checks both the objective and the feasibility of
the final iterate.
"""

import numpy as np
import scipy.linalg

from ascca import manifold as mf
from ascca import rbb

rng = np.random.default_rng(7)
p, r = 40, 3

A = rng.standard_normal((p, p))
A = (A + A.T) / 2
B_half = rng.standard_normal((p, p + 5))
B = B_half @ B_half.T / (p + 5) + 0.5 * np.eye(p)
metric = mf.make_metric(B)

# the solver works on a product of two factors; make the second factor
# a tiny fixed problem with zero gradient so all action is in the first
other = mf.make_metric(np.eye(2))


def cost(x):
    return -float(np.sum(x.u_part.U * (A @ x.u_part.U)))


def grad(x):
    gu = mf.riemannian_grad(x.u_part, -2.0 * A @ x.u_part.U)
    return mf.ProductTangent(gu.xi, np.zeros((2, 1)))


x0 = mf.ProductPoint(
    mf.random_point(metric, r, seed=1), mf.random_point(other, 1, seed=2)
)
report = rbb.minimize(cost, grad, x0, rbb.RbbConfig(eps=1e-6, max_iters=3000))

evals = scipy.linalg.eigh(A, B, eigvals_only=True)
best = -float(evals[-r:].sum())
final = report.point

print(f"iterations          : {report.iterations}")
print(f"termination         : {report.termination}")
print(f"final gradient norm : {report.grad_norm:.2e}")
print(f"objective reached   : {report.trajectory[-1]:.10f}")
print(f"pencil optimum      : {best:.10f}")
print(f"gap                 : {abs(report.trajectory[-1] - best):.2e}")
print(f"feasibility of the final point: {final.u_part.feasibility_error():.2e}")
