"""A miniature replicate sweep: generate, cross-validate, fit, score.

Each replicate draws a fresh sample from the same sparse canonical
design, picks the penalty scale b by warm-started k-fold CV, fits the
final model, and compares the recovered subspaces and correlations
against the spectral starting point.  The medians at the bottom are
the quantities a larger benchmark would report.  The same sweep is
available from the command line:

    ascca simulate --case toeplitz --n 150 --p 20 --q 20 \
        --replicates 4 --kappa 3 --threads 1 --out-dir /tmp/sweep
"""

import numpy as np

from ascca.cli import run_replicate
from ascca.simulate import SimulationDesign

design = SimulationDesign(
    n=150,
    p=20,
    q=20,
    r=2,
    cov_kind="toeplitz",
    support=(0, 5, 10, 15),
    spectrum=(0.9, 0.8),
    seed=2,
)

print(f"design: {design.cov_kind}, "
      f"(n,p,q,r)=({design.n},{design.p},{design.q},{design.r})")
print(f"true support rows: {list(design.support)}")
print()
print("rep    b      lossu  lossv  rho1   rho2   | init lossu/lossv")

rows = []
for rep in range(4):
    row = run_replicate(design, rep, kappa=3)
    rows.append(row)
    print(
        f"{rep}    {row['selected_b']:<6.3g} {row['lossu']:<6.3f} "
        f"{row['lossv']:<6.3f} {row['rho_1']:<6.3f} {row['rho_2']:<6.3f} "
        f"| {row['init_lossu']:.3f} / {row['init_lossv']:.3f}"
    )

print()
for key in ("lossu", "lossv", "rho_1", "rho_2"):
    med = float(np.median([r[key] for r in rows]))
    print(f"median {key}: {med:.4f}")
