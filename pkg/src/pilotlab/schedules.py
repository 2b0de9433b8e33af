"""Regularization-strength schedules and the adaptive PILoT controller.

Fixed schedules are indexed by an epoch counter ``k >= 1``; a run maps step
``j`` (1-based) to epoch ``(j - 1) // epoch_len + 1``.  The adaptive controller
updates once per optimizer step.
"""

from dataclasses import dataclass

import numpy as np

from pilotlab.errors import ConfigError

FIXED_KINDS = ("constant", "harmonic", "quadratic", "geometric")
KINDS = FIXED_KINDS + ("adaptive",)


@dataclass(frozen=True)
class ScheduleSpec:
    kind: str = "constant"
    alpha0: float = 0.0
    p: float = 0.95
    delta: float = 1.01
    K: float = 0.0
    T: int = 0
    epoch_len: int = 1

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"schedule kind must be one of {KINDS}, got {self.kind!r}")
        if not self.alpha0 >= 0:
            raise ConfigError(f"alpha0 must be >= 0, got {self.alpha0}")
        if self.kind == "geometric" and not 0 < self.p < 1:
            raise ConfigError(f"geometric schedule needs 0 < p < 1, got {self.p}")
        if self.kind == "adaptive" and not self.delta >= 1:
            raise ConfigError(f"adaptive schedule needs delta >= 1, got {self.delta}")
        if self.epoch_len < 1:
            raise ConfigError(f"epoch_len must be >= 1, got {self.epoch_len}")

    @property
    def decaying(self):
        return self.kind in ("harmonic", "quadratic", "geometric")

    @property
    def label(self):
        if self.kind == "constant":
            return f"constant({self.alpha0:g})"
        if self.kind == "geometric":
            return f"geometric({self.alpha0:g},p={self.p:g})"
        if self.kind == "adaptive":
            return f"adaptive({self.alpha0:g},delta={self.delta:g},K={self.K:g})"
        return f"{self.kind}({self.alpha0:g})"


@dataclass
class ControllerState:
    alpha: float
    A: float = 0.0
    best_metric: float = np.inf
    step: int = 0

    @classmethod
    def start(cls, spec):
        return cls(alpha=float(spec.alpha0))


def alpha_at(spec, k):
    if k < 1:
        raise ValueError(f"schedule index starts at 1, got {k}")
    if spec.kind == "adaptive":
        raise ValueError("adaptive schedules are driven by pilot_update")
    if spec.kind == "constant":
        return float(spec.alpha0)
    if spec.kind == "harmonic":
        return spec.alpha0 / k
    if spec.kind == "quadratic":
        return spec.alpha0 / k**2
    return spec.alpha0 * spec.p**k


def alpha_sequence(spec, steps):
    """Strength applied at steps ``1..steps`` of a fixed schedule, as an array."""
    if spec.kind == "adaptive":
        raise ValueError("adaptive schedules have no precomputed sequence")
    k = (np.arange(steps) // spec.epoch_len + 1).astype(float)
    if spec.kind == "constant":
        return np.full(steps, float(spec.alpha0))
    if spec.kind == "harmonic":
        return spec.alpha0 / k
    if spec.kind == "quadratic":
        return spec.alpha0 / k**2
    return spec.alpha0 * spec.p**k


def pilot_update(state, spec, metric_improved, l1_norm, k):
    """One controller decision; grows by ``delta`` or shrinks by it.

    Growth needs progress, an L1 norm still at or above ``K`` and ``k <= T/2``.
    """
    if k < 1:
        raise ValueError(f"step index starts at 1, got {k}")
    if metric_improved and l1_norm >= spec.K and k <= spec.T / 2:
        state.alpha = state.alpha * spec.delta
    else:
        state.alpha = state.alpha / spec.delta
    state.step = k
    return state.alpha


def accumulate(state, alpha_k, eta):
    if not eta > 0:
        raise ValueError("eta must be positive")
    state.A += eta * alpha_k
    return state.A


def scale_a(m0, w0, A):
    """Potential scale along the lifted flow: ``(m0^2 - w0^2)/2 * exp(-4A)``."""
    m0 = np.asarray(m0, dtype=float)
    w0 = np.asarray(w0, dtype=float)
    return 0.5 * (m0**2 - w0**2) * np.exp(-4.0 * A)


def nominal_scale_a(m0, w0, A):
    """The closed form ``(m0^2 - w0^2) exp(-2A)`` as usually written for this flow.

    Kept for comparison only; integrating the lifted ODE gives ``scale_a``.
    """
    m0 = np.asarray(m0, dtype=float)
    w0 = np.asarray(w0, dtype=float)
    return (m0**2 - w0**2) * np.exp(-2.0 * A)


def default_sweep(alpha0, constants=(1e-3, 1e-2, 1e-1, 1.0), p=0.95, epoch_len=1):
    """Four constant strengths plus harmonic, quadratic and geometric decay."""
    specs = [ScheduleSpec("constant", c, epoch_len=epoch_len) for c in constants]
    for kind in ("harmonic", "quadratic", "geometric"):
        specs.append(ScheduleSpec(kind, alpha0, p=p, epoch_len=epoch_len))
    return specs
