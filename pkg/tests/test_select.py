"""Cross-validation plumbing: the lambda map, folds, and selection."""

import math

import numpy as np
import pytest

from ascca.alm import AlmConfig
from ascca.exceptions import FoldTooSmall
from ascca.problem import DataPair
from ascca.select import (
    DEFAULT_B_GRID,
    CvPlan,
    cross_validate,
    fold_assignments,
    lambda_from_b,
)
from ascca.simulate import SimulationDesign, make_truth, sample_data

# a light solver budget keeps the CV unit tests quick; selection only
# needs the relative ordering of the b values
FAST_CFG = AlmConfig(eps_floor=1e-2, outer_tol=1e-6, max_outer=20, inner_max=40)


def toy_data(seed=0, n=60, p=8, q=6):
    design = SimulationDesign(
        n=n, p=p, q=q, r=2, support=(0, 3), spectrum=(0.9, 0.8), seed=seed
    )
    return sample_data(make_truth(design), n, seed=seed + 1)


def test_lambda_identity_point():
    # r + log p = 4 with p = e^2, so at n = 4 both penalties equal b
    p = math.exp(2)
    lam_u, lam_v = lambda_from_b(1.0, 2, p, p, 4)
    assert abs(lam_u - 1.0) <= 1e-14
    assert abs(lam_v - 1.0) <= 1e-14


def test_lambda_linear_in_b():
    assert lambda_from_b(0.0, 2, 100, 50, 30) == (0.0, 0.0)
    lu1, lv1 = lambda_from_b(1.0, 2, 100, 50, 30)
    lu3, lv3 = lambda_from_b(3.0, 2, 100, 50, 30)
    assert abs(lu3 - 3 * lu1) <= 1e-14
    assert abs(lv3 - 3 * lv1) <= 1e-14


def test_lambda_reference_value():
    lam_u, lam_v = lambda_from_b(0.5, 2, 200, 200, 200)
    want = 0.5 * math.sqrt((2 + math.log(200)) / 200)
    assert lam_u == want and lam_v == want
    assert abs(lam_u - 0.0959) <= 1e-3


def test_lambda_validation():
    with pytest.raises(ValueError):
        lambda_from_b(-0.1, 2, 10, 10, 10)
    with pytest.raises(ValueError):
        lambda_from_b(1.0, 0, 10, 10, 10)


def test_default_grid_shape():
    assert len(DEFAULT_B_GRID) == 11
    assert abs(DEFAULT_B_GRID[0] - 0.05) <= 1e-12
    assert abs(DEFAULT_B_GRID[-1] - 2.0) <= 1e-12
    assert all(a < b for a, b in zip(DEFAULT_B_GRID, DEFAULT_B_GRID[1:]))


def test_plan_validation():
    with pytest.raises(ValueError):
        CvPlan(kappa=1)
    with pytest.raises(ValueError):
        CvPlan(b_grid=())
    with pytest.raises(ValueError):
        CvPlan(b_grid=(0.5, 0.2))
    with pytest.raises(ValueError):
        CvPlan(b_grid=(-0.1, 0.2))
    with pytest.raises(ValueError):
        CvPlan(init_strategy="fancy")


def test_fold_partition_properties():
    for n, kappa in [(20, 3), (21, 3), (50, 10), (10, 10)]:
        folds = fold_assignments(n, kappa, seed=5)
        sizes = [len(f) for f in folds]
        assert max(sizes) - min(sizes) <= 1
        merged = np.sort(np.concatenate(folds))
        assert np.array_equal(merged, np.arange(n))
    a = fold_assignments(30, 4, seed=1)
    b = fold_assignments(30, 4, seed=1)
    assert all(np.array_equal(x, y) for x, y in zip(a, b))
    c = fold_assignments(30, 4, seed=2)
    assert not all(np.array_equal(x, y) for x, y in zip(a, c))


def test_single_b_shortcut():
    data = toy_data()
    plan = CvPlan(kappa=3, b_grid=(0.7,))
    report = cross_validate(data, 2, plan, alm_cfg=FAST_CFG)
    assert report.selected_b == 0.7
    assert report.scores is None
    lu, lv = lambda_from_b(0.7, 2, data.p, data.q, data.n)
    assert report.lambda_u == lu and report.lambda_v == lv


def test_fold_too_small():
    data = toy_data(n=60)
    with pytest.raises(FoldTooSmall):
        cross_validate(data, 2, CvPlan(kappa=25), alm_cfg=FAST_CFG)


def test_kappa_above_n_rejected():
    design = SimulationDesign(
        n=8, p=6, q=6, r=2, support=(0, 3), spectrum=(0.9, 0.8), seed=2
    )
    data = sample_data(make_truth(design), 8, seed=3)
    with pytest.raises(FoldTooSmall):
        cross_validate(data, 2, CvPlan(kappa=12), alm_cfg=FAST_CFG)


def test_report_table_complete_and_selection_consistent():
    data = toy_data(seed=4)
    plan = CvPlan(kappa=3, b_grid=(0.05, 0.3, 1.5), seed=9)
    report = cross_validate(data, 2, plan, alm_cfg=FAST_CFG)
    assert report.scores.shape == (3, 3)
    assert np.all(np.isfinite(report.scores))
    assert np.allclose(report.averages, report.scores.mean(axis=1))
    assert report.selected_index == int(np.argmax(report.averages))
    assert report.selected_b == plan.b_grid[report.selected_index]
    lu, lv = lambda_from_b(report.selected_b, 2, data.p, data.q, data.n)
    assert report.lambda_u == lu and report.lambda_v == lv
    assert sum(report.fold_sizes) == data.n
    d = report.to_dict()
    assert d["selected_b"] == report.selected_b
    assert len(d["scores"]) == 3 and len(d["scores"][0]) == 3


def test_cross_validate_deterministic():
    data = toy_data(seed=6)
    plan = CvPlan(kappa=3, b_grid=(0.1, 0.6), seed=11)
    r1 = cross_validate(data, 2, plan, alm_cfg=FAST_CFG)
    r2 = cross_validate(data, 2, plan, alm_cfg=FAST_CFG)
    assert np.array_equal(r1.scores, r2.scores)
    assert r1.selected_b == r2.selected_b


def test_absolute_flag_scores_nonnegative():
    data = toy_data(seed=8)
    plan = CvPlan(kappa=3, b_grid=(0.1, 0.6), seed=13, absolute=True)
    report = cross_validate(data, 2, plan, alm_cfg=FAST_CFG)
    assert np.all(report.scores >= 0.0)


def test_strong_signal_prefers_moderate_b():
    # clear sparse signal: the useless extremes of the grid should not
    # win (tiny b overfits dense noise, huge b kills the signal)
    design = SimulationDesign(n=150, p=12, q=12, r=2, support=(0, 5), seed=21)
    data = sample_data(make_truth(design), 150, seed=22)
    plan = CvPlan(kappa=5, b_grid=(0.01, 0.3, 5.0), seed=15)
    report = cross_validate(data, 2, plan, alm_cfg=FAST_CFG)
    assert np.all(np.isfinite(report.averages))
    assert report.averages[1] >= report.averages[2] - 0.05


def test_warm_start_chain_scores_and_determinism():
    data = toy_data(seed=10)
    plan = CvPlan(kappa=3, b_grid=(0.05, 0.3, 1.5), seed=17, warm_start=True)
    r1 = cross_validate(data, 2, plan, alm_cfg=FAST_CFG)
    assert r1.scores.shape == (3, 3)
    assert np.all(np.isfinite(r1.scores))
    assert r1.warm_start is True
    assert r1.to_dict()["warm_start"] is True
    r2 = cross_validate(data, 2, plan, alm_cfg=FAST_CFG)
    assert np.array_equal(r1.scores, r2.scores)
    assert r1.selected_b == r2.selected_b


def test_warm_start_agrees_with_cold_on_strong_signal():
    # chained starts bias individual scores a little; on a clearly
    # separated grid the winner must not change
    design = SimulationDesign(n=150, p=12, q=12, r=2, support=(0, 5), seed=23)
    data = sample_data(make_truth(design), 150, seed=24)
    cold = CvPlan(kappa=4, b_grid=(0.01, 0.3, 5.0), seed=19)
    warm = CvPlan(kappa=4, b_grid=(0.01, 0.3, 5.0), seed=19, warm_start=True)
    rc = cross_validate(data, 2, cold, alm_cfg=FAST_CFG)
    rw = cross_validate(data, 2, warm, alm_cfg=FAST_CFG)
    assert rw.selected_b == rc.selected_b


def test_screen_init_strategy_runs_and_reports():
    data = toy_data(seed=12)
    plan = CvPlan(
        kappa=3, b_grid=(0.05, 0.3, 1.5), seed=21, init_strategy="screen"
    )
    rep = cross_validate(data, 2, plan, alm_cfg=FAST_CFG)
    assert rep.init_strategy == "screen"
    assert rep.to_dict()["init_strategy"] == "screen"
    assert rep.scores.shape == (3, 3)
    assert np.all(np.isfinite(rep.scores))
    again = cross_validate(data, 2, plan, alm_cfg=FAST_CFG)
    assert np.array_equal(rep.scores, again.scores)


def test_interior_selection_monte_carlo():
    # strong sparse signal on the default grid: the winning scale
    # should sit strictly inside the grid for most fresh samples; an
    # endpoint pile-up would flag a degenerate grid
    from ascca.cli import SWEEP_CV_SOLVER, SWEEP_RBB, SWEEP_RIDGE

    design = SimulationDesign(
        n=200, p=50, q=50, r=2,
        support=(0, 5, 10, 15, 20), spectrum=(0.9, 0.8), seed=0,
    )
    truth = make_truth(design)
    interior = 0
    for rep in range(10):
        data = sample_data(
            truth, 200, seed=1000 + rep, normalize=True, alpha=SWEEP_RIDGE
        )
        plan = CvPlan(kappa=5, seed=rep, warm_start=True)
        rep_report = cross_validate(
            data, 2, plan, alm_cfg=SWEEP_CV_SOLVER, rbb_cfg=SWEEP_RBB
        )
        if 0 < rep_report.selected_index < len(DEFAULT_B_GRID) - 1:
            interior += 1
    assert interior >= 7
