import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pilotlab import oracles
from pilotlab.errors import StepSizeError
from pilotlab.harness.config import build_config
from pilotlab.numerics import make_rng
from pilotlab.optimizers import (
    PairState,
    StrState,
    init_pair,
    lasso_step,
    run_training,
    sigmoid,
    step_effective,
    step_pair,
    str_effective,
    str_step,
)
from pilotlab.problems import RegressionProblem, gen_underdetermined, grad_mse


def test_init_pair_examples():
    st0 = init_pair(np.array([0.0]), 1.0)
    assert st0.m[0] == 1.0 and st0.w[0] == 0.0
    st1 = init_pair(np.array([4.0]), 0.0)
    assert st1.m[0] == pytest.approx(2.0) and st1.w[0] == pytest.approx(2.0)
    st2 = init_pair(np.array([3.0]), 1.0)
    assert st2.m[0] ** 2 == pytest.approx((1 + np.sqrt(37)) / 2)
    st3 = init_pair(np.array([0.0, -1.0]), 0.0)
    np.testing.assert_array_equal(st3.m, [0.0, 1.0])
    np.testing.assert_array_equal(st3.w, [0.0, -1.0])
    with pytest.raises(ValueError):
        init_pair(np.ones(2), -0.1)


@settings(max_examples=100, deadline=None)
@given(seed=st.integers(0, 2**31), beta=st.sampled_from([0.0, 0.5, 1.0, 2.0]))
def test_init_pair_invariants(seed, beta):
    x = 2 * make_rng(seed).standard_normal(20)
    s = init_pair(x, beta)
    np.testing.assert_allclose(s.m * s.w, x, rtol=0, atol=1e-12 * max(1, np.max(np.abs(x))))
    np.testing.assert_allclose(s.m**2 - s.w**2, beta, atol=1e-12 * max(1, np.max(x**2)))
    assert np.all(s.m >= 0)


def test_step_pair_trivial_cases(rng):
    s = PairState(rng.standard_normal(4), rng.standard_normal(4))
    same = step_pair(s, np.zeros(4), 0.0, 1e-2)
    np.testing.assert_array_equal(same.m, s.m)
    decay = step_pair(s, np.zeros(4), 0.5, 1e-2)
    np.testing.assert_allclose(decay.m, s.m * (1 - 2 * 1e-2 * 0.5))
    np.testing.assert_allclose(decay.x, s.x * (1 - 2 * 1e-2 * 0.5) ** 2)
    np.testing.assert_array_equal(decay.x, decay.m * decay.w)


def test_step_pair_is_simultaneous():
    s = PairState(np.array([1.0]), np.array([0.5]))
    out = step_pair(s, np.array([2.0]), 0.0, 0.1)
    assert out.m[0] == pytest.approx(1.0 - 0.1 * 2.0 * 0.5)
    assert out.w[0] == pytest.approx(0.5 - 0.1 * 2.0 * 1.0)


def test_step_pair_flags_overflow():
    s = PairState(np.array([1.0, 1e154]), np.array([1.0, 1e154]))
    with pytest.raises(StepSizeError) as ei:
        step_pair(s, np.array([0.0, 1e308]), 0.0, 10.0)
    assert ei.value.index == 1


def _local_error(eta, m0, w0, g_at, alpha):
    ode = oracles.lifted_ode(g_at, lambda t: alpha)
    _, ref = oracles.rk4_integrate(ode, np.concatenate([m0, w0]), eta, eta / 4)
    s = step_pair(PairState(m0, w0), g_at(m0 * w0), alpha, eta)
    return np.max(np.abs(np.concatenate([s.m, s.w]) - ref[-1]))


def test_step_pair_local_error_is_second_order(rng):
    Z = rng.standard_normal((3, 5))
    Y = rng.standard_normal(3)
    g_at = lambda x: Z.T @ (Z @ x - Y) / 3
    m0, w0 = rng.uniform(0.8, 1.2, 5), rng.uniform(-0.3, 0.3, 5)
    e1 = _local_error(1e-2, m0, w0, g_at, 0.3)
    e2 = _local_error(5e-3, m0, w0, g_at, 0.3)
    assert 3.5 < e1 / e2 < 4.5


def test_step_effective_reductions(rng):
    x = rng.standard_normal(5)
    g = rng.standard_normal(5)
    al, eta = 0.2, 1e-2
    spred = step_effective(x, np.zeros(5), g, al, eta)
    np.testing.assert_allclose(spred, x - eta * 2 * np.abs(x) * (g + 2 * al * np.sign(x)))
    a = np.full(5, 0.5)
    np.testing.assert_allclose(step_effective(np.zeros(5), a, g, al, eta), -eta * 2 * a * g)
    with pytest.raises(ValueError):
        step_effective(x, -a, g, al, eta)


def test_effective_rate_at_origin_is_eta_beta():
    # at x0 = 0 the lifted pair has w0 = 0, m0 = sqrt(beta); one step moves x by -eta*beta*g
    beta, eta, g = 1.7, 1e-3, np.array([0.4])
    s = step_pair(init_pair(np.zeros(1), beta), g, 0.0, eta)
    assert s.x[0] == pytest.approx(-eta * beta * g[0], rel=1e-3)
    a0 = 0.5 * beta
    assert step_effective(np.zeros(1), np.array([a0]), g, 0.0, eta)[0] == pytest.approx(-eta * beta * g[0])


def _pair_vs_effective(eta, seed=3):
    pr = gen_underdetermined(seed, 5, 2, 2)
    x = 0.3 * make_rng(seed).standard_normal(5)
    s = init_pair(x, 1.0)
    a0 = 0.5 * (s.m**2 - s.w**2)
    xe, A, alpha = x.copy(), 0.0, 0.2
    worst = 0.0
    for _ in range(int(round(1.0 / eta))):
        g_pair = grad_mse(pr, s.x)
        ge = grad_mse(pr, xe)
        s = step_pair(s, g_pair, alpha, eta)
        xe = step_effective(xe, a0 * np.exp(-4 * A), ge, alpha, eta)
        A += eta * alpha
        worst = max(worst, np.max(np.abs(s.x - xe)))
    return worst


def test_effective_tracks_pair_at_first_order():
    e1 = _pair_vs_effective(2e-3)
    e2 = _pair_vs_effective(1e-3)
    assert e1 < 1e-2
    assert 1.6 < e1 / e2 < 2.4


def test_lasso_step_examples():
    x = np.array([1.0, -1.0, 0.0])
    out = lasso_step(x, np.zeros(3), 0.1, 0.1)
    np.testing.assert_allclose(out, [1 - 0.02, -1 + 0.02, 0.0])
    g = np.array([0.3, -0.2, 0.5])
    np.testing.assert_allclose(lasso_step(x, g, 0.0, 0.1), x - 0.1 * g)


def test_lasso_soft_threshold_fixed_point():
    x = np.array([0.0])
    for _ in range(5000):
        x = lasso_step(x, x - 1.0, 0.1, 0.01)
    assert x[0] == pytest.approx(0.8, abs=0.05)


def test_str_effective_and_dead_zone(rng):
    w = rng.standard_normal(6)
    np.testing.assert_allclose(str_effective(w, np.full(6, -200.0)), w, atol=1e-80)
    s = np.full(6, 5.0)  # threshold ~ 0.993
    w = rng.uniform(-0.5, 0.5, 6)
    out = str_step(StrState(w, s), lambda x: np.ones_like(x), 0.1, 0.01)
    np.testing.assert_allclose(out.w, w * (1 - 0.01 * 0.1))
    np.testing.assert_allclose(out.s, s * (1 - 0.01 * 0.1))


def test_str_global_threshold_shares_update(rng):
    w = rng.standard_normal(4) + 2
    out = str_step(StrState(w, np.zeros(4)), lambda x: x, 0.0, 0.1, global_threshold=True)
    assert np.ptp(out.s) == 0


def test_str_weight_decay_raises_sparsity():
    pr = gen_underdetermined(2, 8, 3, 2)
    w0 = 0.3 * make_rng(5).standard_normal(8)
    sp = []
    for wd in (0.0, 0.2, 1.0):
        s = StrState(w0.copy(), np.full(8, -3.0))
        for _ in range(3000):
            s = str_step(s, lambda x: grad_mse(pr, x), wd, 0.05)
        sp.append(np.mean(np.abs(s.x) < 1e-6))
    assert sp[0] <= sp[1] <= sp[2] and sp[0] < sp[2]


def _cfg(**kw):
    base = dict(n=12, d=5, k=2, T=2000, record_every=100, seeds=(1,), eta=1e-3)
    base.update(kw)
    return build_config(base)


def test_run_training_zero_steps():
    cfg = _cfg(T=0, record_every=1)
    tr = run_training(cfg)
    assert len(tr) == 1
    pr = gen_underdetermined(cfg.problem_seed, 12, 5, 2)
    x0 = tr.xs[0]
    assert tr.loss[0] == pytest.approx(np.sum((pr.Z @ x0 - pr.Y) ** 2) / 10)


@pytest.mark.parametrize("method", ["pilot", "spred", "lasso", "str", "effective"])
def test_run_training_shapes_and_time(method):
    tr = run_training(_cfg(method=method))
    assert len(tr) == 2000 // 100 + 1
    np.testing.assert_allclose(tr.time, tr.step * 1e-3)
    assert np.all(np.diff(tr.time) > 0)
    assert np.all(np.isfinite(tr.loss))
    assert np.all(np.diff(tr.A) >= 0)


def test_run_training_matches_reference_steps():
    cfg = _cfg(method="pilot", T=300, record_every=300, schedule="constant", alpha0=0.05)
    tr = run_training(cfg)
    pr = gen_underdetermined(cfg.problem_seed, 12, 5, 2)
    s = init_pair(tr.xs[0], 1.0)
    for _ in range(300):
        s = step_pair(s, grad_mse(pr, s.x), 0.05, 1e-3)
    np.testing.assert_allclose(tr.xs[-1], s.x, rtol=1e-12, atol=1e-14)


def test_run_training_lasso_and_str_match_reference():
    pr = gen_underdetermined(0, 12, 5, 2)
    tr = run_training(_cfg(method="lasso", T=200, record_every=200, alpha0=0.05))
    x = tr.xs[0].copy()
    for _ in range(200):
        x = lasso_step(x, grad_mse(pr, x), 0.05, 1e-3)
    np.testing.assert_allclose(tr.xs[-1], x, rtol=1e-12, atol=1e-14)
    tr = run_training(_cfg(method="str", T=200, record_every=200, alpha0=0.05, str_s0=-2.0))
    s = StrState(tr.init["x0"].copy(), np.full(12, -2.0))
    for _ in range(200):
        s = str_step(s, lambda v: grad_mse(pr, v), 0.05, 1e-3)
    np.testing.assert_allclose(tr.xs[-1], s.x, rtol=1e-12, atol=1e-14)


def test_divergence_truncates_trace():
    tr = run_training(_cfg(method="lasso", eta=50.0, T=400, record_every=1, alpha0=0.0))
    assert tr.diverged
    assert len(tr) < 401
    assert np.all(np.isfinite(tr.loss))


def test_spred_never_flips():
    tr = run_training(_cfg(method="spred", T=20000, record_every=1000, alpha0=0.02))
    assert np.all(tr.flips == 0)
    signs = np.sign(tr.xs[0])
    assert np.all((np.sign(tr.xs) == signs) | (tr.xs == 0))
