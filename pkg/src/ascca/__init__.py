"""Adaptive sparse canonical correlation analysis.

Sparse CCA with a matrix trace-Lasso regularizer, solved by an inexact
augmented Lagrangian method whose smooth subproblems are minimized with
a Riemannian Barzilai-Borwein method on generalized Stiefel manifolds.

The top level re-exports the everyday surface: build a problem from
two data matrices, solve it, cross-validate the penalty scale, and
generate synthetic benchmarks.  The submodules hold the full kernels
(tracelasso, manifold, rbb, problem, alm, simulate, select, cli).
"""

from . import exceptions
from .alm import (
    INIT_STRATEGIES,
    AlmConfig,
    AsccaSolution,
    OuterRecord,
    default_init,
    solve,
)
from .manifold import MetricMatrix, make_metric
from .problem import (
    AsccaProblem,
    DataPair,
    Multipliers,
    kkt_residuals,
    preprocess,
    psi_egrad,
    psi_value,
    recover_pq,
)
from .rbb import RbbConfig
from .select import (
    DEFAULT_B_GRID,
    CvPlan,
    CvReport,
    cross_validate,
    fold_assignments,
    lambda_from_b,
)
from .simulate import (
    GroundTruth,
    SimulationDesign,
    make_covariance,
    make_truth,
    pearson_columns,
    sample_canonical_correlations,
    sample_data,
    subspace_loss,
)
from .tracelasso import TraceLassoOp, nuclear_norm, svt

__version__ = "0.1.0"

__all__ = [
    "AlmConfig",
    "AsccaProblem",
    "AsccaSolution",
    "CvPlan",
    "CvReport",
    "DEFAULT_B_GRID",
    "DataPair",
    "GroundTruth",
    "INIT_STRATEGIES",
    "MetricMatrix",
    "Multipliers",
    "OuterRecord",
    "RbbConfig",
    "SimulationDesign",
    "TraceLassoOp",
    "cross_validate",
    "default_init",
    "exceptions",
    "fold_assignments",
    "kkt_residuals",
    "lambda_from_b",
    "make_covariance",
    "make_metric",
    "make_truth",
    "nuclear_norm",
    "pearson_columns",
    "preprocess",
    "psi_egrad",
    "psi_value",
    "recover_pq",
    "sample_canonical_correlations",
    "sample_data",
    "solve",
    "subspace_loss",
    "svt",
    "__version__",
]
