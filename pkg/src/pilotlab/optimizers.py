"""Euler discretizations of the lifted, effective, LASSO and STR dynamics.

The single-step functions here are the reference semantics; ``run_training``
drives the fused loop in ``pilotlab.kernels`` which implements the same
updates.
"""

from dataclasses import dataclass, field

import numpy as np

from pilotlab import kernels
from pilotlab.errors import ConfigError, StepSizeError
from pilotlab.numerics import gaussian_vector
from pilotlab.potentials import PotentialParams
from pilotlab.problems import gen_underdetermined
from pilotlab.schedules import alpha_sequence


@dataclass
class PairState:
    m: np.ndarray
    w: np.ndarray
    x: np.ndarray = None

    def __post_init__(self):
        self.m = np.asarray(self.m, dtype=float)
        self.w = np.asarray(self.w, dtype=float)
        self.x = self.m * self.w


@dataclass
class StrState:
    w: np.ndarray
    s: np.ndarray

    @property
    def x(self):
        return str_effective(self.w, self.s)


def sigmoid(s):
    return 1.0 / (1.0 + np.exp(-np.asarray(s, dtype=float)))


def str_effective(w, s):
    return np.sign(w) * np.maximum(np.abs(w) - sigmoid(s), 0.0)


def init_pair(x_init, beta):
    """Lifted init with ``m0 * w0 = x_init`` and ``m0^2 - w0^2 = beta``, ``m0 >= 0``."""
    if beta < 0:
        raise ValueError(f"beta must be >= 0, got {beta}")
    x = np.asarray(x_init, dtype=float)
    m2 = 0.5 * (beta + np.sqrt(beta * beta + 4.0 * x * x))
    m = np.sqrt(m2)
    w = np.divide(x, m, out=np.zeros_like(x), where=m > 0)
    return PairState(m, w)


def _finite_or_raise(v, what):
    bad = np.flatnonzero(~np.isfinite(v))
    if bad.size:
        raise StepSizeError(f"non-finite {what} at coordinate {bad[0]}; step size too large?", int(bad[0]))
    return v


def step_pair(state, grad, alpha, eta):
    if not eta > 0:
        raise ValueError("eta must be positive")
    if alpha < 0:
        raise ValueError("alpha must be >= 0")
    g = np.asarray(grad, dtype=float)
    with np.errstate(over="ignore", invalid="ignore"):
        m = state.m - eta * (g * state.w + 2 * alpha * state.m)
        w = state.w - eta * (g * state.m + 2 * alpha * state.w)
    _finite_or_raise(m, "m")
    _finite_or_raise(w, "w")
    return PairState(m, w)


def step_effective(x, a, grad, alpha, eta):
    """One Euler step of ``dx = -2 sqrt(x^2 + a^2) grad f - 4 alpha x``.

    This is the lifted pair flow written in ``x`` alone; ``a`` is the current
    potential scale ``(m0^2 - w0^2)/2 * exp(-4A)``.
    """
    if not eta > 0:
        raise ValueError("eta must be positive")
    a = np.asarray(a, dtype=float)
    if np.any(a < 0):
        raise ValueError("scale a must be >= 0")
    x = np.asarray(x, dtype=float)
    return x - eta * (2.0 * np.hypot(x, a) * grad + 4.0 * alpha * x)


def lasso_step(x, grad, alpha, eta):
    """Subgradient step on ``f + 2 alpha ||x||_1`` with ``sign(0) = 0``."""
    if not eta > 0:
        raise ValueError("eta must be positive")
    x = np.asarray(x, dtype=float)
    return x - eta * (grad + 2.0 * alpha * np.sign(x))


def str_step(state, problem_grad_at, weight_decay, eta, global_threshold=False):
    """Soft-threshold reparameterization step with learnable threshold ``sigmoid(s)``."""
    if not eta > 0:
        raise ValueError("eta must be positive")
    w, s = state.w, state.s
    thr = sigmoid(s)
    g = problem_grad_at(str_effective(w, s))
    active = np.abs(w) > thr
    ds = np.where(active, -g * np.sign(w) * thr * (1.0 - thr), 0.0)
    if global_threshold:
        ds = np.full_like(ds, ds.sum())
    w_new = w - eta * (np.where(active, g, 0.0) + weight_decay * w)
    s_new = s - eta * (ds + weight_decay * s)
    return StrState(w_new, s_new)


TRACE_COLUMNS = ("step", "time", "loss", "dist_to_truth", "l1", "sparsity", "alpha", "A", "mirror_residual")


@dataclass
class Trace:
    step: np.ndarray
    time: np.ndarray
    loss: np.ndarray
    dist_to_truth: np.ndarray
    l1: np.ndarray
    sparsity: np.ndarray
    alpha: np.ndarray
    A: np.ndarray
    mirror_residual: np.ndarray
    xs: np.ndarray = None
    grad_integral: np.ndarray = None
    flips: np.ndarray = None
    max_abs: np.ndarray = None
    diverged: bool = False
    eta: float = 0.0
    method: str = ""
    label: str = ""
    init: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.step)

    def columns(self):
        return {c: getattr(self, c) for c in TRACE_COLUMNS}


def make_initial_x(seed, n, init_scale=None):
    return gaussian_vector(seed, n, init_scale if init_scale is not None else 1.0 / np.sqrt(n))


def resolve_problem(config):
    return gen_underdetermined(config.problem_seed, config.n, config.d, config.k, config.noise)


def run_training(config, seed=None, problem=None, x_init=None):
    """Run one seeded training and return its ``Trace``.

    ``config`` is a ``pilotlab.harness.config.RunConfig`` (any object with the
    same attributes works).  ``seed`` selects the initialization; the problem
    instance comes from ``config.problem_seed`` unless passed in.
    """
    seed = config.seeds[0] if seed is None else seed
    problem = resolve_problem(config) if problem is None else problem
    n = problem.n
    if x_init is None:
        x_init = make_initial_x(seed, n, config.init_scale)
    x_init = np.asarray(x_init, dtype=float)
    method = config.method
    beta = 0.0 if method == "spred" else config.beta
    init = {"x0": x_init.copy()}
    if method in ("pilot", "spred"):
        code = kernels.PAIR
        st = init_pair(x_init, beta)
        s1, s2 = st.m, st.w
        init.update(m0=st.m.copy(), w0=st.w.copy(), beta=beta)
    elif method == "effective":
        code = kernels.EFFECTIVE
        st = init_pair(x_init, beta)
        s1, s2 = x_init.copy(), 0.5 * (st.m**2 - st.w**2)
        init.update(m0=st.m.copy(), w0=st.w.copy(), beta=beta)
    elif method == "lasso":
        code = kernels.LASSO
        s1, s2 = x_init.copy(), np.zeros(n)
    elif method == "str":
        code = kernels.STR
        s1, s2 = x_init.copy(), np.full(n, float(config.str_s0))
    else:
        raise ConfigError(f"unknown method {method!r}")

    spec = config.schedule
    T = int(config.T)
    re = int(config.record_every)
    adaptive = spec.kind == "adaptive"
    alphas = np.zeros(1) if adaptive or T == 0 else alpha_sequence(spec, T)
    R = T // re + 1
    rec = {name: np.full(R, np.nan) for name in ("loss", "dist", "l1", "sp", "alpha", "A")}
    x_r = np.full((R, n), np.nan)
    g_r = np.full((R, n), np.nan)
    flips = np.zeros(n, dtype=np.int64)
    maxabs = np.zeros(n)
    rms = np.sqrt(np.mean(problem.x_star[problem.x_star != 0] ** 2)) if np.any(problem.x_star) else 1.0
    tol = config.sparsity_tol * rms
    written, diverged = kernels.train_loop(
        code, problem.Z, problem.Y, problem.x_star, s1, s2, alphas,
        adaptive, float(spec.alpha0), float(spec.delta), float(spec.K), spec.T / 2 if spec.T else T / 2,
        float(config.eta), T, re, float(tol), bool(config.str_global),
        rec["loss"], rec["dist"], rec["l1"], rec["sp"], rec["alpha"], rec["A"], x_r, g_r, flips, maxabs,
    )
    sl = slice(0, written)
    steps = np.arange(R)[sl] * re
    trace = Trace(
        step=steps,
        time=steps * float(config.eta),
        loss=rec["loss"][sl],
        dist_to_truth=rec["dist"][sl],
        l1=rec["l1"][sl],
        sparsity=rec["sp"][sl],
        alpha=rec["alpha"][sl],
        A=rec["A"][sl],
        mirror_residual=np.full(written, np.nan),
        xs=x_r[sl],
        grad_integral=g_r[sl],
        flips=flips,
        max_abs=maxabs,
        diverged=bool(diverged),
        eta=float(config.eta),
        method=method,
        label=f"{method}/{spec.label}",
        init=init,
    )
    if config.mirror_residual and method in ("pilot", "effective") and beta > 0 and written:
        from pilotlab.oracles import mirror_residual_series

        p0 = PotentialParams.from_init(init["m0"], init["w0"])
        trace.mirror_residual = mirror_residual_series(trace, p0)
    return trace
