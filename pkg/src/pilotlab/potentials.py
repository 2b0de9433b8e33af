"""Static and time-dependent Bregman potentials of the m*w parameterization.

With ``u0 = (m0 + w0)/sqrt(2)`` and ``v0 = (m0 - w0)/sqrt(2)`` the lifted flow

    dm = -(grad f(x) * w + 2 alpha m) dt,   dw = -(grad f(x) * m + 2 alpha w) dt

keeps ``u * v = u0 * v0 * exp(-4 A)`` with ``A = int alpha dt`` and satisfies the
mirror identity ``d grad R_a(x) = -grad f(x) dt`` for

    R_a(x) = 1/2 sum_i x_i asinh(x_i / a_i) - sqrt(x_i^2 + a_i^2) - x_i log(u0_i / v0_i)

at scale ``a = u0 * v0 * exp(-4 A) = (m0^2 - w0^2)/2 * exp(-4 A)``.  That scale
is what ``PotentialParams.from_init`` uses; any other scale can be passed
explicitly.
"""

from dataclasses import dataclass, field

import numpy as np

from pilotlab.errors import DimensionError

A_FLOOR = 1e-300


@dataclass(frozen=True)
class PotentialParams:
    u0: np.ndarray
    v0: np.ndarray
    A: float
    a: np.ndarray
    saturated: bool = field(default=False, compare=False)

    def __post_init__(self):
        u0 = np.asarray(self.u0, dtype=float)
        v0 = np.asarray(self.v0, dtype=float)
        a = np.broadcast_to(np.asarray(self.a, dtype=float), u0.shape).copy()
        if u0.shape != v0.shape:
            raise DimensionError("u0 and v0 differ in shape")
        if self.A < 0:
            raise ValueError(f"accumulated regularization A must be >= 0, got {self.A}")
        if np.any(a <= 0):
            raise ValueError("potential scale a must be strictly positive")
        sat = bool(np.any(a < A_FLOOR))
        object.__setattr__(self, "u0", u0)
        object.__setattr__(self, "v0", v0)
        object.__setattr__(self, "a", np.maximum(a, A_FLOOR))
        object.__setattr__(self, "saturated", sat or self.saturated)

    @classmethod
    def from_init(cls, m0, w0, A=0.0):
        """Parameters for a lifted initialization (requires |w0| < m0)."""
        m0 = np.asarray(m0, dtype=float)
        w0 = np.asarray(w0, dtype=float)
        if np.any(np.abs(w0) >= m0):
            raise ValueError("need |w0_i| < m0_i for every coordinate")
        u0 = (m0 + w0) / np.sqrt(2.0)
        v0 = (m0 - w0) / np.sqrt(2.0)
        return cls._floored(u0, v0, A)

    def at(self, A):
        """Same initialization, flow scale at accumulated regularization ``A``."""
        return self._floored(self.u0, self.v0, A)

    @classmethod
    def _floored(cls, u0, v0, A):
        a = flow_scale(u0, v0, A)
        sat = bool(np.any(a < A_FLOOR))
        return cls(u0=u0, v0=v0, A=float(A), a=np.maximum(a, A_FLOOR), saturated=sat)

    @property
    def log_ratio(self):
        return np.log(self.u0 / self.v0)

    @property
    def m0(self):
        return (self.u0 + self.v0) / np.sqrt(2.0)

    @property
    def w0(self):
        return (self.u0 - self.v0) / np.sqrt(2.0)


def flow_scale(u0, v0, A):
    u0 = np.asarray(u0, dtype=float)
    v0 = np.asarray(v0, dtype=float)
    return u0 * v0 * np.exp(-4.0 * A)


def _check_scale(a):
    a = np.asarray(a, dtype=float)
    if np.any(a <= 0):
        raise ValueError("scale a must be strictly positive")
    return np.maximum(a, A_FLOOR)


def hyper_entropy(x, a):
    """``sum_i x_i asinh(x_i/a_i) - sqrt(x_i^2 + a_i^2)``."""
    x = np.asarray(x, dtype=float)
    a = np.broadcast_to(_check_scale(a), x.shape)
    return float(np.sum(x * np.arcsinh(x / a) - np.hypot(x, a)))


def static_R(x, u0, v0):
    """Potential of the unregularized flow, quarter prefactor and scale ``2 u0 v0``."""
    x = np.asarray(x, dtype=float)
    u0 = np.asarray(u0, dtype=float)
    v0 = np.asarray(v0, dtype=float)
    if np.any(v0 <= 0) or np.any(u0 <= 0):
        raise ValueError("static potential needs u0, v0 > 0")
    s = 2 * u0 * v0
    return 0.25 * float(np.sum(x * np.arcsinh(x / s) - np.hypot(x, s) - x * np.log(u0 / v0)))


def timedep_R(x, p):
    x = np.asarray(x, dtype=float)
    a = p.a
    return 0.5 * float(np.sum(x * np.arcsinh(x / a) - np.hypot(x, a) - x * p.log_ratio))


def grad_timedep_R(x, p):
    x = np.asarray(x, dtype=float)
    return 0.5 * (np.arcsinh(x / p.a) - p.log_ratio)


def bregman_divergence(x_ref, x, p):
    """``R(x_ref) - R(x) - grad R(x).(x_ref - x)``; nonnegative by convexity."""
    x_ref = np.asarray(x_ref, dtype=float)
    x = np.asarray(x, dtype=float)
    a = p.a
    # the linear log-ratio term cancels exactly, so it is left out
    h_ref = x_ref * np.arcsinh(x_ref / a) - np.hypot(x_ref, a)
    h_x = x * np.arcsinh(x / a) - np.hypot(x, a)
    return 0.5 * float(np.sum(h_ref - h_x - np.arcsinh(x / a) * (x_ref - x)))


def inv_hessian_diag(x, p):
    """Exact inverse Hessian of ``timedep_R``: ``2 sqrt(x^2 + a^2)``.

    This is also ``m^2 + w^2``, the mobility of the lifted flow.
    """
    x = np.asarray(x, dtype=float)
    return 2.0 * np.hypot(x, p.a)


def sigma_bound(p):
    """Guaranteed floor ``z^T H^{-1} z >= sigma ||z||^2``, i.e. ``2 min a``."""
    return 2.0 * float(np.min(p.a))


def l1_asymptote_ratio(x, a_scalar):
    """``hyper_entropy(x, a) / (log(1/a) ||x||_1)``; tends to 1 as ``a -> 0``."""
    if not 0 < a_scalar < 1:
        raise ValueError(f"a must lie in (0, 1), got {a_scalar}")
    x = np.asarray(x, dtype=float)
    l1 = float(np.sum(np.abs(x)))
    if l1 == 0:
        raise ValueError("x must be nonzero")
    return hyper_entropy(x, np.full_like(x, a_scalar)) / (np.log(1.0 / a_scalar) * l1)
