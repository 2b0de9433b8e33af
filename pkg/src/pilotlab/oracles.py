"""Independent references the training code is checked against.

Closed-form lifted trajectories, a classical RK4 integrator, the discrete
mirror-flow residual, stationary points of the potential, the KKT residual of
the limiting problem and a brute-force minimum-L1 interpolator.
"""

import itertools
from dataclasses import dataclass, field

import numpy as np

from pilotlab.errors import SaturationError
from pilotlab.numerics import row_space_projection
from pilotlab.potentials import grad_timedep_R

OVERFLOW_EXPONENT = 700.0


@dataclass
class FlowLog:
    L: np.ndarray
    A: float
    times: list = field(default_factory=list)


def _guard(L):
    L = np.asarray(L, dtype=float)
    if np.any(np.abs(2 * L) > OVERFLOW_EXPONENT):
        raise SaturationError("|2L| exceeds the exp overflow range")
    return L


def closed_form_x(m0, w0, L, A, variant="exact"):
    """``x_t`` of the lifted flow from the accumulated gradient ``L`` and strength ``A``.

    ``variant="exact"`` (default) is
    ``(m0^2 + w0^2)/2 sinh(-2L) e^{-4A} + m0 w0 cosh(-2L) e^{-4A}``, which equals
    ``x0`` at ``L = 0, A = 0``.  ``variant="doubled"`` evaluates
    ``u0^2 e^{-2L-4A} - v0^2 e^{2L-4A}``, twice the former; it is kept so the
    factor between the two forms stays pinned by a test.
    """
    m0 = np.asarray(m0, dtype=float)
    w0 = np.asarray(w0, dtype=float)
    L = _guard(L)
    decay = np.exp(-4.0 * A)
    if variant == "doubled":
        u0 = (m0 + w0) / np.sqrt(2)
        v0 = (m0 - w0) / np.sqrt(2)
        return u0**2 * np.exp(-2 * L - 4 * A) - v0**2 * np.exp(2 * L - 4 * A)
    if variant != "exact":
        raise ValueError(f"unknown variant {variant!r}")
    return (0.5 * (m0**2 + w0**2) * np.sinh(-2 * L) + m0 * w0 * np.cosh(-2 * L)) * decay


def closed_form_mw(m0, w0, L, A):
    m0 = np.asarray(m0, dtype=float)
    w0 = np.asarray(w0, dtype=float)
    L = _guard(L)
    c, s = np.cosh(-L), np.sinh(-L)
    decay = np.exp(-2.0 * A)
    return (m0 * c + w0 * s) * decay, (w0 * c + m0 * s) * decay


def rk4_integrate(ode, state0, T, h):
    """Classical fixed-step RK4; returns ``(times, states)`` including ``t = 0``."""
    if not h > 0:
        raise ValueError("h must be positive")
    if T < 0:
        raise ValueError("T must be >= 0")
    steps = int(round(T / h))
    if abs(steps * h - T) > 1e-9 * max(1.0, T):
        raise ValueError("T must be an integer multiple of h")
    y = np.array(state0, dtype=float)
    times = np.arange(steps + 1) * h
    out = np.empty((steps + 1,) + y.shape)
    out[0] = y
    for i in range(steps):
        t = times[i]
        k1 = ode(t, y)
        k2 = ode(t + h / 2, y + h / 2 * k1)
        k3 = ode(t + h / 2, y + h / 2 * k2)
        k4 = ode(t + h, y + h * k3)
        if not np.all(np.isfinite(k4)):
            raise FloatingPointError(f"non-finite derivative at t={t + h}")
        y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        out[i + 1] = y
    return times, out


def trapezoid_cumulative(values, h):
    """Cumulative trapezoid integral along axis 0, starting at zero."""
    values = np.asarray(values, dtype=float)
    out = np.zeros_like(values)
    out[1:] = np.cumsum(0.5 * h * (values[1:] + values[:-1]), axis=0)
    return out


def lifted_ode(grad_at, alpha_at):
    """Right-hand side of the (m, w) flow on a stacked state ``[m, w]``."""

    def rhs(t, y):
        n = y.size // 2
        m, w = y[:n], y[n:]
        g = grad_at(m * w)
        al = alpha_at(t)
        return np.concatenate([-(g * w + 2 * al * m), -(g * m + 2 * al * w)])

    return rhs


def mirror_residual_series(trace, p0, grads=None, eta=None):
    """Per-record ``||grad R_{a_k}(x_k) - grad R_{a_0}(x_0) + eta sum_{j<k} g_j||_inf``."""
    eta = trace.eta if eta is None else eta
    if grads is not None:
        grads = np.asarray(grads, dtype=float)
        csum = np.zeros((len(grads) + 1, grads.shape[1]))
        csum[1:] = eta * np.cumsum(grads, axis=0)
        G = csum[trace.step]
    else:
        G = trace.grad_integral
    base = grad_timedep_R(trace.xs[0], p0.at(trace.A[0]))
    out = np.empty(len(trace))
    for i in range(len(trace)):
        p = p0.at(trace.A[i])
        if p.saturated:
            raise SaturationError(f"potential scale underflowed at record {i}")
        out[i] = np.max(np.abs(grad_timedep_R(trace.xs[i], p) - base + G[i]))
    return out


def mirror_residual(trace, p0, grads=None, eta=None):
    return float(np.max(mirror_residual_series(trace, p0, grads, eta)))


def stationary_point_solve(p, iters=200):
    """Minimizer of ``timedep_R``: root of ``asinh(x/a) = log(u0/v0)`` per coordinate.

    Closed form ``a sinh(log(u0/v0))``, confirmed by bisection on a bracket
    around it; raises if the two disagree.
    """
    target = p.log_ratio
    closed = p.a * np.sinh(target)
    span = np.abs(closed) + p.a
    lo, hi = closed - span, closed + span

    def g(x):
        return np.arcsinh(x / p.a) - target

    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        neg = g(mid) < 0
        lo = np.where(neg, mid, lo)
        hi = np.where(neg, hi, mid)
    bis = 0.5 * (lo + hi)
    if not np.allclose(bis, closed, rtol=1e-10, atol=1e-14 * np.max(span)):
        raise ArithmeticError("bisection disagrees with the closed-form stationary point")
    return closed


def stationary_candidates(p):
    """Max relative error of three closed forms for the minimizer, from ``p``'s init.

    ``m0 w0 e^{-2A}`` and ``2 m0 w0 e^{-2A}`` are the two forms obtained from the
    nominal scale; ``m0 w0 e^{-4A}`` is the one implied by the flow scale.
    """
    x = stationary_point_solve(p)
    prod = p.m0 * p.w0
    cands = {
        "m0*w0*exp(-2A)": prod * np.exp(-2 * p.A),
        "2*m0*w0*exp(-2A)": 2 * prod * np.exp(-2 * p.A),
        "m0*w0*exp(-4A)": prod * np.exp(-4 * p.A),
    }
    scale = np.maximum(np.abs(x), 1e-300)
    return {k: float(np.max(np.abs(v - x) / scale)) for k, v in cands.items()}


def kkt_residual(problem, x_final, p):
    """Share of ``grad R(x_final)`` orthogonal to the row space of ``Z``."""
    g = grad_timedep_R(x_final, p)
    _, resid = row_space_projection(problem.Z, g)
    return float(np.linalg.norm(resid) / max(1.0, np.linalg.norm(g)))


def min_l1_bruteforce(problem, tol=1e-9):
    """Exact ``argmin ||x||_1 s.t. Zx = Y`` by enumerating supports of size <= d."""
    Z, Y = problem.Z, problem.Y
    d, n = Z.shape
    if n > 20:
        raise ValueError(f"brute force limited to n <= 20, got n={n}")
    best, best_val = None, np.inf
    scale = 1.0 + np.linalg.norm(Y)
    if np.linalg.norm(Y) <= tol * scale:
        return np.zeros(n)
    for size in range(1, min(d, n) + 1):
        for S in itertools.combinations(range(n), size):
            ZS = Z[:, S]
            if np.linalg.matrix_rank(ZS) < size:
                continue
            xs, *_ = np.linalg.lstsq(ZS, Y, rcond=None)
            if np.linalg.norm(ZS @ xs - Y) > tol * scale:
                continue
            val = np.abs(xs).sum()
            if val < best_val - 1e-12 * scale:
                best_val = val
                best = np.zeros(n)
                best[list(S)] = xs
    if best is None:
        raise ArithmeticError("no feasible support found")
    return best
