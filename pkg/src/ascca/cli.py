"""Command-line runs: single solves, simulation sweeps, CV selection.

Three subcommands cover the library surface:

  solve     fit one penalized CCA model from two CSV matrices
  cv        pick the penalty scale b by k-fold cross-validation
  simulate  replicate generate -> select -> solve -> evaluate sweeps

Matrices travel as comma-separated CSV with a header line and '.'
decimals; structured reports are JSON.  Every output directory gets a
config echo (seed included) so a run can be reproduced exactly.  Exit
codes: 0 success, 1 numerical failure, 2 bad configuration or input.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import alm, rbb
from .exceptions import AsccaError, ConfigError, FoldTooSmall, ParseError
from .problem import AsccaProblem, DataPair
from .select import DEFAULT_B_GRID, CvPlan, cross_validate
from .simulate import (
    COV_KINDS,
    DEFAULT_SUPPORT,
    SimulationDesign,
    make_truth,
    sample_canonical_correlations,
    sample_data,
    subspace_loss,
)

# Sweep pipeline settings, calibrated so a (200, 200, 200) x 20 sweep
# finishes in well under an hour on one core: ridge-blended Gram,
# column normalization, warm-started descending b chain inside CV, and
# looser inner budgets for the fold solves than for the final fit.
SWEEP_RIDGE = 0.1
SWEEP_CV_SOLVER = alm.AlmConfig(
    eps_decay=0.5,
    eps_floor=1e-2,
    outer_tol=1e-5,
    gamma=1.25,
    max_outer=25,
    inner_max=50,
)
SWEEP_FINAL_SOLVER = alm.AlmConfig(
    eps_decay=0.5,
    eps_floor=1e-2,
    outer_tol=1e-6,
    gamma=1.25,
    max_outer=60,
    inner_max=100,
)
SWEEP_RBB = rbb.RbbConfig(bb_convention="classical")


def _fmt(v) -> str:
    return f"{float(v):.17g}"


def _read_matrix(path: str) -> np.ndarray:
    """Parse a header-line CSV of floats; errors name the bad line."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise ParseError(f"{path}: {exc.strerror or exc}") from exc
    width = None
    rows: list[list[float]] = []
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        parts = line.split(",")
        if width is None:
            # header line; only its field count is used
            width = len(parts)
            continue
        if len(parts) != width:
            raise ParseError(
                f"{path}:{lineno}: expected {width} fields, got {len(parts)}"
            )
        try:
            rows.append([float(tok) for tok in parts])
        except ValueError:
            bad = next(t for t in parts if not _is_number(t))
            raise ParseError(f"{path}:{lineno}: not a number: {bad.strip()!r}")
    if width is None:
        raise ParseError(f"{path}: empty file")
    if not rows:
        raise ParseError(f"{path}: no data rows after the header")
    return np.array(rows, dtype=float)


def _is_number(tok: str) -> bool:
    try:
        float(tok)
    except ValueError:
        return False
    return True


def _write_matrix(path: str, W: np.ndarray, prefix: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(f"{prefix}{j + 1}" for j in range(W.shape[1])) + "\n")
        for row in W:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _write_json(path: str, payload: dict) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _config_echo(args: argparse.Namespace) -> dict:
    echo = {k: v for k, v in vars(args).items() if k != "func"}
    echo["subcommand"] = args.func.__name__.removeprefix("cmd_")
    return echo


def _load_pair(args: argparse.Namespace) -> DataPair:
    X = _read_matrix(args.x)
    Y = _read_matrix(args.y)
    if X.shape[0] != Y.shape[0]:
        raise ParseError(
            f"{args.x} has {X.shape[0]} data rows but {args.y} has {Y.shape[0]}"
        )
    if not 0.0 <= args.alpha < 1.0:
        raise ConfigError(f"alpha must lie in [0, 1), got {args.alpha}")
    return DataPair(X, Y, normalize=args.normalize == "on", alpha=args.alpha)


def _alm_config(args: argparse.Namespace) -> alm.AlmConfig:
    kw = {}
    if args.rho0 is not None:
        kw["rho0"] = args.rho0
    for name in ("tau", "gamma", "outer_tol", "max_outer", "inner_max"):
        val = getattr(args, name)
        if val is not None:
            kw[name] = val
    if args.clip is not None:
        kw["clip_lo"] = -args.clip
        kw["clip_hi"] = args.clip
    try:
        return alm.AlmConfig(**kw)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _check(cond: bool, msg: str) -> None:
    if not cond:
        raise ConfigError(msg)


def _out_path(args: argparse.Namespace, name: str) -> str:
    os.makedirs(args.out_dir, exist_ok=True)
    return os.path.join(args.out_dir, name)


# --- solve -----------------------------------------------------------------


def cmd_solve(args: argparse.Namespace) -> int:
    data = _load_pair(args)
    _check(1 <= args.r <= min(data.p, data.q), "r must satisfy 1 <= r <= min(p, q)")
    cfg = _alm_config(args)
    rcfg = rbb.RbbConfig()

    given = (args.lambda_u is not None, args.lambda_v is not None)
    if given == (True, False) or given == (False, True):
        raise ConfigError("give both --lambda-u and --lambda-v, or neither")
    cv_echo = None
    if given == (False, False):
        # no penalties supplied: tune the shared scale b first
        try:
            plan = CvPlan(seed=args.seed, init_strategy=args.init)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        report = cross_validate(data, args.r, plan, alm_cfg=cfg, rbb_cfg=rcfg)
        lam_u, lam_v = report.lambda_u, report.lambda_v
        cv_echo = report.to_dict()
    else:
        lam_u, lam_v = args.lambda_u, args.lambda_v
        _check(lam_u >= 0 and lam_v >= 0, "penalties must be nonnegative")

    prob = AsccaProblem(data, args.r, lam_u, lam_v)
    init = alm.default_init(prob, args.init, seed=args.seed)
    sol = alm.solve(prob, init=init, cfg=cfg, rbb_cfg=rcfg, verbose=args.verbose)

    u_path = _out_path(args, "U.csv")
    v_path = _out_path(args, "V.csv")
    _write_matrix(u_path, sol.U, "u")
    _write_matrix(v_path, sol.V, "v")
    _write_json(
        _out_path(args, "report.json"),
        {
            "config": _config_echo(args),
            "n": data.n,
            "p": data.p,
            "q": data.q,
            "r": args.r,
            "lambda_u": lam_u,
            "lambda_v": lam_v,
            "cv": cv_echo,
            "objective": sol.objective,
            "feas1": sol.feas1,
            "feas2": sol.feas2,
            "stat": sol.stat,
            "grad_norm": sol.grad_norm,
            "rho": sol.rho,
            "outer_iters": sol.outer_iters,
            "inner_iters": sol.inner_iters,
            "termination": sol.termination,
            "wall_time": sol.wall_time,
            "files": {"U": "U.csv", "V": "V.csv"},
        },
    )
    if args.verbose:
        print(f"wrote {u_path}, {v_path}", file=sys.stderr)
    return 0


# --- cv ----------------------------------------------------------------------


def _parse_grid(text: str | None) -> tuple[float, ...]:
    if text is None:
        return DEFAULT_B_GRID
    try:
        grid = tuple(float(tok) for tok in text.split(","))
    except ValueError as exc:
        raise ConfigError(f"bad --b-grid entry: {exc}") from exc
    return grid


def cmd_cv(args: argparse.Namespace) -> int:
    data = _load_pair(args)
    _check(1 <= args.r <= min(data.p, data.q), "r must satisfy 1 <= r <= min(p, q)")
    try:
        plan = CvPlan(
            kappa=args.kappa,
            b_grid=_parse_grid(args.b_grid),
            seed=args.seed,
            absolute=args.absolute,
            warm_start=args.warm_start,
            init_strategy=args.init,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    report = cross_validate(
        data, args.r, plan, alm_cfg=_alm_config(args), rbb_cfg=rbb.RbbConfig()
    )
    payload = report.to_dict()
    payload["config"] = _config_echo(args)
    _write_json(_out_path(args, "cv_report.json"), payload)
    if report.scores is not None:
        path = _out_path(args, "cv_scores.csv")
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            folds = ",".join(f"fold_{j + 1}" for j in range(report.kappa))
            fh.write(f"b,{folds},average\n")
            for bi, b in enumerate(report.b_grid):
                cells = ",".join(_fmt(s) for s in report.scores[bi])
                fh.write(f"{_fmt(b)},{cells},{_fmt(report.averages[bi])}\n")
    if args.verbose:
        print(f"selected b = {report.selected_b:.6g}", file=sys.stderr)
    return 0


# --- simulate ----------------------------------------------------------------


def _sweep_design(args: argparse.Namespace) -> SimulationDesign:
    _check(args.r <= 8, "r must be at most 8 (spectrum runs 0.9 down by 0.1)")
    support = tuple(i for i in DEFAULT_SUPPORT if i < min(args.p, args.q))
    spectrum = tuple(0.9 - 0.1 * j for j in range(args.r))
    try:
        return SimulationDesign(
            n=args.n,
            p=args.p,
            q=args.q,
            r=args.r,
            cov_kind=args.case,
            sigma=args.sigma,
            support=support,
            spectrum=spectrum,
            seed=args.seed,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _limit_blas_threads() -> None:
    # each replicate worker sticks to one BLAS thread; the pool is the
    # parallel axis
    try:
        from threadpoolctl import threadpool_limits

        threadpool_limits(1)
    except ImportError:
        pass


def run_replicate(
    design: SimulationDesign,
    rep: int,
    kappa: int = 5,
    init_strategy: str = "spectral",
) -> dict:
    """One generate -> select -> solve -> evaluate pass.

    The replicate's data seed is derived as design.seed + 1000*(rep+1),
    so rows are reproducible independently of worker scheduling.  The
    recovered correlations are reported nonnegative (a canonical pair
    is sign-indeterminate) and sorted in decreasing order.

    init_strategy picks the starting point for the fold chains and the
    final fit.  The init_* columns always measure the plain spectral
    start, so runs under different initializers stay comparable
    against the same reference.
    """
    rep_seed = design.seed + 1000 * (rep + 1)
    row: dict = {"replicate": rep, "seed": rep_seed, "status": "ok"}
    nan = float("nan")
    fields = ["selected_b", "lossu", "lossv"]
    fields += [f"rho_{i + 1}" for i in range(design.r)]
    fields += ["init_lossu", "init_lossv"]
    fields += [f"init_rho_{i + 1}" for i in range(design.r)]
    for f in fields:
        row[f] = nan
    try:
        truth = make_truth(design)
        data = sample_data(
            truth, design.n, seed=rep_seed, normalize=True, alpha=SWEEP_RIDGE
        )
        plan = CvPlan(
            kappa=kappa,
            seed=rep_seed,
            warm_start=True,
            init_strategy=init_strategy,
        )
        report = cross_validate(
            data, design.r, plan, alm_cfg=SWEEP_CV_SOLVER, rbb_cfg=SWEEP_RBB
        )
        prob = AsccaProblem(data, design.r, report.lambda_u, report.lambda_v)
        base = alm.default_init(prob, "spectral")
        init = base if init_strategy == "spectral" else alm.default_init(
            prob, init_strategy, seed=rep_seed
        )
        sol = alm.solve(prob, init=init, cfg=SWEEP_FINAL_SOLVER, rbb_cfg=SWEEP_RBB)
    except AsccaError as exc:
        row["status"] = f"failed:{type(exc).__name__}"
        return row

    def sorted_abs_rho(U, V):
        rho = np.abs(sample_canonical_correlations(data, U, V))
        return np.sort(rho)[::-1]

    row["selected_b"] = report.selected_b
    # losses compare raw-coordinate loading spans; divide the column
    # scaling back out before projecting
    row["lossu"] = subspace_loss(truth.U, sol.U / data.x_scale[:, None])
    row["lossv"] = subspace_loss(truth.V, sol.V / data.y_scale[:, None])
    for i, v in enumerate(sorted_abs_rho(sol.U, sol.V)):
        row[f"rho_{i + 1}"] = float(v)
    row["init_lossu"] = subspace_loss(truth.U, base.u_part.U / data.x_scale[:, None])
    row["init_lossv"] = subspace_loss(truth.V, base.v_part.U / data.y_scale[:, None])
    for i, v in enumerate(sorted_abs_rho(base.u_part.U, base.v_part.U)):
        row[f"init_rho_{i + 1}"] = float(v)
    return row


def _replicate_columns(r: int) -> list[str]:
    cols = ["replicate", "seed", "status", "selected_b", "lossu", "lossv"]
    cols += [f"rho_{i + 1}" for i in range(r)]
    cols += ["init_lossu", "init_lossv"]
    cols += [f"init_rho_{i + 1}" for i in range(r)]
    return cols


def cmd_simulate(args: argparse.Namespace) -> int:
    _check(args.replicates >= 1, "need at least one replicate")
    _check(args.kappa >= 2, "kappa must be at least 2")
    _check(args.threads >= 1, "threads must be at least 1")
    design = _sweep_design(args)

    rows: list[dict] = []
    if args.threads > 1:
        with ProcessPoolExecutor(
            max_workers=args.threads, initializer=_limit_blas_threads
        ) as pool:
            futures = [
                pool.submit(run_replicate, design, rep, args.kappa, args.init)
                for rep in range(args.replicates)
            ]
            for rep, fut in enumerate(futures):
                t0 = time.perf_counter()
                row = fut.result()
                rows.append(row)
                if args.verbose:
                    _progress(row, time.perf_counter() - t0)
    else:
        for rep in range(args.replicates):
            t0 = time.perf_counter()
            row = run_replicate(design, rep, args.kappa, args.init)
            rows.append(row)
            if args.verbose:
                _progress(row, time.perf_counter() - t0)

    cols = _replicate_columns(design.r)
    csv_path = _out_path(args, "replicates.csv")
    with open(csv_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(cols) + "\n")
        for row in rows:
            cells = []
            for c in cols:
                v = row[c]
                cells.append(str(v) if c in ("replicate", "seed", "status") else _fmt(v))
            fh.write(",".join(cells) + "\n")

    ok = [row for row in rows if row["status"] == "ok"]
    medians = None
    if ok:
        medians = {
            c: float(np.median([row[c] for row in ok]))
            for c in cols
            if c not in ("replicate", "seed", "status")
        }
    _write_json(
        _out_path(args, "summary.json"),
        {
            "config": _config_echo(args),
            "design": {
                "case": design.cov_kind,
                "sigma": design.sigma,
                "n": design.n,
                "p": design.p,
                "q": design.q,
                "r": design.r,
                "support": list(design.support),
                "spectrum": list(design.spectrum),
            },
            "replicates": args.replicates,
            "completed": len(ok),
            "failed": args.replicates - len(ok),
            "medians": medians,
            "files": {"replicates": "replicates.csv"},
        },
    )
    if args.verbose:
        print(f"wrote {csv_path}", file=sys.stderr)
    return 0


def _progress(row: dict, seconds: float) -> None:
    print(
        f"replicate {row['replicate']}: {row['status']}"
        f" b={row['selected_b']:.4g}"
        f" lossu={row['lossu']:.4g} lossv={row['lossv']:.4g}"
        f" ({seconds:.1f}s)",
        file=sys.stderr,
    )


# --- parser ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--seed", type=int, default=0, help="global RNG seed")
    shared.add_argument(
        "--threads",
        type=int,
        default=os.cpu_count() or 1,
        help="worker pool size for replicate sweeps",
    )
    shared.add_argument("--out-dir", default=".", help="directory for output files")
    shared.add_argument("--verbose", action="store_true", help="progress to stderr")

    solver = argparse.ArgumentParser(add_help=False)
    solver.add_argument("--x", required=True, help="CSV matrix of X observations")
    solver.add_argument("--y", required=True, help="CSV matrix of Y observations")
    solver.add_argument("--r", type=int, required=True, help="number of pairs")
    solver.add_argument(
        "--normalize",
        choices=("on", "off"),
        default="off",
        help="divide columns by their sample scale",
    )
    solver.add_argument(
        "--alpha", type=float, default=0.0, help="ridge blend weight of the Grams"
    )
    solver.add_argument(
        "--init",
        choices=alm.INIT_STRATEGIES,
        default="spectral",
        help="starting-point strategy",
    )
    solver.add_argument("--rho0", type=float, default=None, help="initial penalty")
    solver.add_argument(
        "--tau", type=float, default=None, help="residual decrease factor"
    )
    solver.add_argument(
        "--gamma", type=float, default=None, help="penalty growth factor"
    )
    solver.add_argument(
        "--outer-tol", type=float, default=None, help="residual tolerance"
    )
    solver.add_argument("--max-outer", type=int, default=None, help="outer cap")
    solver.add_argument("--inner-max", type=int, default=None, help="inner cap")
    solver.add_argument(
        "--clip", type=float, default=None, help="multiplier clip half-width"
    )

    parser = argparse.ArgumentParser(
        prog="ascca",
        description="Sparse CCA with a matrix trace-Lasso penalty.",
    )
    sub = parser.add_subparsers(required=True)

    p_solve = sub.add_parser(
        "solve", parents=[shared, solver], help="fit one model from CSV inputs"
    )
    p_solve.add_argument(
        "--lambda-u", type=float, default=None, help="X-side penalty (omit to CV)"
    )
    p_solve.add_argument(
        "--lambda-v", type=float, default=None, help="Y-side penalty (omit to CV)"
    )
    p_solve.set_defaults(func=cmd_solve)

    p_cv = sub.add_parser(
        "cv", parents=[shared, solver], help="cross-validate the penalty scale"
    )
    p_cv.add_argument("--kappa", type=int, default=10, help="number of folds")
    p_cv.add_argument(
        "--b-grid", default=None, help="comma-separated scales (default 11-point)"
    )
    p_cv.add_argument(
        "--absolute", action="store_true", help="score with absolute correlations"
    )
    p_cv.add_argument(
        "--warm-start",
        action="store_true",
        help="chain each fold's grid from large b down",
    )
    p_cv.set_defaults(func=cmd_cv)

    p_sim = sub.add_parser(
        "simulate", parents=[shared], help="replicate sweep over a synthetic design"
    )
    p_sim.add_argument("--case", required=True, choices=COV_KINDS, help="covariance")
    p_sim.add_argument(
        "--sigma", type=float, default=0.3, help="off-diagonal level (corr case)"
    )
    p_sim.add_argument("--n", type=int, required=True, help="sample size")
    p_sim.add_argument("--p", type=int, required=True, help="X dimension")
    p_sim.add_argument("--q", type=int, required=True, help="Y dimension")
    p_sim.add_argument("--r", type=int, default=2, help="number of pairs")
    p_sim.add_argument(
        "--replicates", type=int, default=20, help="independent repetitions"
    )
    p_sim.add_argument(
        "--kappa", type=int, default=5, help="CV folds inside each replicate"
    )
    p_sim.add_argument(
        "--init",
        choices=alm.INIT_STRATEGIES,
        default="spectral",
        help="starting point for fold chains and final fits",
    )
    p_sim.set_defaults(func=cmd_simulate)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ParseError, ConfigError, FoldTooSmall) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except AsccaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
