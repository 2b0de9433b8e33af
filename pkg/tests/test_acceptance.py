"""End-to-end acceptance checks, one test per criterion.

Each test records a PASS/FAIL line that is repeated in the pytest terminal
summary.  The reference sweep is the slowest part (a few minutes on one core).
"""

import numpy as np
import pytest

from pilotlab import oracles
from pilotlab.diagnostics import lie_bracket_check, rate_fit, sign_flips
from pilotlab.harness.config import build_config
from pilotlab.harness.experiment import best_row, run_sweep
from pilotlab.harness.verify import (
    check_closed_form,
    check_grad_mse,
    check_grad_R,
    check_inv_hessian,
    kkt_checkpoints,
    mirror_ratio,
)
from pilotlab.numerics import make_rng
from pilotlab.optimizers import resolve_problem, run_training
from pilotlab.potentials import l1_asymptote_ratio
from pilotlab.problems import gen_underdetermined

# final mean distance of PILoT's best schedule in the reference sweep,
# committed from the first run of this module; exact runs are deterministic
PILOT_REFERENCE_DISTANCE = 8.219632126427168e-06
REFERENCE_RTOL = 1e-6


@pytest.fixture(scope="module")
def reference_sweeps():
    out = {}
    for method in ("pilot", "spred", "lasso"):
        cfg = build_config({"method": method, "seeds": (1, 2, 3, 4, 5)})
        out[method] = run_sweep(cfg, write=False)
    return out


@pytest.mark.slow
def test_c01_dln_ordering(reference_sweeps, criterion):
    best = {m: best_row(rows) for m, rows in reference_sweeps.items()}
    dist = {m: b.final_mean_distance for m, b in best.items()}
    truth = np.linalg.norm(resolve_problem(build_config({})).x_star)
    ordering = dist["pilot"] < dist["lasso"] < dist["spred"]
    kinds = best["pilot"].decaying and not best["spred"].decaying and not best["lasso"].decaying
    close = dist["pilot"] < 0.05 * truth
    pinned = np.isclose(dist["pilot"], PILOT_REFERENCE_DISTANCE, rtol=REFERENCE_RTOL)
    ok = ordering and kinds and close and pinned
    detail = ", ".join(f"{m} {best[m].label}={dist[m]:.4g}" for m in ("pilot", "lasso", "spred"))
    criterion(1, "DLN best-schedule ordering", ok, f"{detail}; threshold {0.05 * truth:.4g}")
    assert ordering, detail
    assert kinds, detail
    assert close, detail
    assert pinned, f"pilot {dist['pilot']!r} vs reference {PILOT_REFERENCE_DISTANCE!r}"


def test_c02_spred_sign_invariance(criterion):
    schedules = [("constant", 0.01), ("constant", 0.1), ("harmonic", 2.0), ("quadratic", 2.0), ("geometric", 2.0)]
    total = 0
    for i in range(20):
        kind, a0 = schedules[i % len(schedules)]
        cfg = build_config(dict(method="spred", T=100_000, record_every=1000, schedule=kind, alpha0=a0,
                                epoch_len=500, problem_seed=100 + i, seeds=(i + 1,)))
        tr = run_training(cfg)
        total += int(np.sum(sign_flips(tr)))
    criterion(2, "spred sign invariance", total == 0, f"{total} flips over 20 instances x 1e5 steps")
    assert total == 0


@pytest.mark.slow
def test_c03_mirror_first_order(criterion):
    cfg = build_config({"seeds": (1,)})
    r1, r2 = mirror_ratio(cfg)
    ratio = r1 / r2
    ok = 1.6 <= ratio <= 2.4
    criterion(3, "mirror-flow residual ratio", ok, f"{r1:.3g} / {r2:.3g} = {ratio:.3f} in [1.6, 2.4]")
    assert ok


def test_c04_closed_form_oracle(criterion):
    check = check_closed_form()
    criterion(4, "closed form vs RK4", check.passed, f"sup {check.value:.2g} <= 1e-6, {check.note}")
    assert check.passed


def test_c05_analytic_gradients(criterion):
    a, b = check_grad_mse(), check_grad_R()
    ok = a.passed and b.passed
    criterion(5, "analytic gradients", ok, f"grad_mse {a.value:.2g}, grad_timedep_R {b.value:.2g} <= 1e-6")
    assert ok


def test_c06_inverse_hessian(criterion):
    check = check_inv_hessian()
    criterion(6, "inverse Hessian identity", check.passed, f"max rel {check.value:.2g} <= 1e-4, {check.note}")
    assert check.passed


def test_c07_kkt(criterion):
    # converged run: the linear-rate configuration, continued to 4T
    cfg = build_config(dict(T=400_000, record_every=2000, schedule="geometric", alpha0=1.0, epoch_len=200, seeds=(1,)))
    problem = resolve_problem(cfg)
    tr = run_training(cfg, problem=problem)
    series = kkt_checkpoints(tr, problem, fractions=(0.25, 0.5, 1.0))
    mono = all(b <= 1.10 * a for a, b in zip(series, series[1:]))
    ok = max(series) < 1e-3 and mono
    criterion(7, "KKT optimality", ok, "residual at T, 2T, 4T = " + ", ".join(f"{v:.3g}" for v in series))
    assert max(series) < 1e-3
    assert mono


def test_c08_l1_asymptote(criterion):
    rng = make_rng(8)
    ratios = [l1_asymptote_ratio(rng.uniform(0.5, 2, 10) * rng.choice([-1, 1], 10), 1e-10) for _ in range(100)]
    lo, hi = min(ratios), max(ratios)
    ok = 0.95 <= lo and hi <= 1.05
    criterion(8, "L1 asymptote", ok, f"ratios in [{lo:.4f}, {hi:.4f}]")
    assert ok


def test_c09_linear_convergence(criterion):
    cfg = build_config(dict(T=400_000, record_every=2000, schedule="geometric", alpha0=1.0, epoch_len=200, seeds=(1,)))
    tr = run_training(cfg)
    slope, r2 = rate_fit(tr.loss, tail_fraction=0.25, steps=tr.step)
    rises = np.flatnonzero(np.diff(tr.loss) > 1e-12)
    t0 = int(tr.step[rises[-1] + 1]) if rises.size else 0
    ok = r2 >= 0.99 and slope < 0 and t0 < tr.step[-1]
    criterion(9, "PL linear convergence", ok, f"slope {slope:.3g}/step, r2 {r2:.6f}, non-increasing from step {t0}")
    assert r2 >= 0.99 and slope < 0
    assert t0 < tr.step[-1]


def test_c10_lie_bracket(criterion):
    rng = make_rng(10)
    zeros = [lie_bracket_check(0.0, rng.standard_normal(5)), lie_bracket_check(1.3, np.zeros(5))]
    vals = [lie_bracket_check(float(rng.uniform(0.1, 2)), rng.standard_normal(5)) for _ in range(100)]
    ok = max(zeros) <= 1e-12 and min(vals) > 1e-6
    criterion(10, "Lie bracket", ok, f"degenerate {max(zeros):.2g}, generic min {min(vals):.3g}")
    assert ok


def test_c11_small_instance_l1(criterion):
    cfg = build_config(dict(n=8, d=3, k=2, T=200_000, record_every=20_000, eta=1e-3, alpha0=1.0, epoch_len=200))
    devs = []
    for i in range(10):
        pr = gen_underdetermined(100 + i, 8, 3, 2)
        tr = run_training(cfg, problem=pr)
        best = np.abs(oracles.min_l1_bruteforce(pr)).sum()
        devs.append(abs(np.abs(tr.xs[-1]).sum() / best - 1))
    ok = max(devs) <= 0.05
    criterion(11, "small-instance implicit L1", ok, f"max relative L1 gap {max(devs):.4f} <= 0.05")
    assert ok
