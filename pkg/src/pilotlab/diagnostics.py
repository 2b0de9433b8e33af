"""Trace-level measurements and the neuronwise Lie-bracket check."""

from dataclasses import dataclass

import numpy as np

from pilotlab.potentials import PotentialParams

DUST = 1e-14


@dataclass
class RunSummary:
    seed: int
    final_distance: float
    final_sparsity: float
    sign_flip_counts: np.ndarray
    rate_slope: float
    rate_r2: float
    kkt_residual: float
    diverged: bool

    CSV_COLUMNS = (
        "seed", "final_distance", "final_sparsity", "sign_flips_total",
        "sign_flip_counts", "rate_slope", "rate_r2", "kkt_residual", "diverged",
    )

    def csv_row(self):
        return {
            "seed": str(self.seed),
            "final_distance": _fmt(self.final_distance),
            "final_sparsity": _fmt(self.final_sparsity),
            "sign_flips_total": str(int(np.sum(self.sign_flip_counts))),
            "sign_flip_counts": ";".join(str(int(c)) for c in self.sign_flip_counts),
            "rate_slope": _fmt(self.rate_slope),
            "rate_r2": _fmt(self.rate_r2),
            "kkt_residual": _fmt(self.kkt_residual),
            "diverged": "1" if self.diverged else "0",
        }


def _fmt(v):
    return "" if v is None or (isinstance(v, float) and np.isnan(v)) else format(float(v), ".17g")


def sparsity(x, tol):
    if not tol > 0:
        raise ValueError("tol must be positive")
    x = np.asarray(x, dtype=float)
    return float(np.mean(np.abs(x) < tol))


def sign_flips(trace):
    """Per-coordinate count of sign changes ``x_k * x_{k+1} < 0``.

    Accepts a ``Trace`` (uses its every-step counters when present) or a 2-D
    array of recorded iterates.  Coordinates that never exceed 1e-14 in
    magnitude are reported as zero.
    """
    if hasattr(trace, "flips") and trace.flips is not None:
        counts = np.asarray(trace.flips, dtype=np.int64).copy()
        counts[np.asarray(trace.max_abs) < DUST] = 0
        return counts
    xs = trace.xs if hasattr(trace, "xs") else trace
    xs = np.asarray(xs, dtype=float)
    if xs.ndim != 2 or xs.shape[0] == 0:
        raise ValueError("need a non-empty (records, n) array")
    counts = np.sum(xs[1:] * xs[:-1] < 0, axis=0).astype(np.int64)
    counts[np.max(np.abs(xs), axis=0) < DUST] = 0
    return counts


def rate_fit(losses, f_star=0.0, tail_fraction=0.25, steps=None):
    """Least-squares slope of ``log(loss - f_star)`` against step over the tail.

    Returns ``(slope per step, r^2)``.  A perfectly flat tail gives ``(0, 1)``.
    """
    if not 0 < tail_fraction <= 1:
        raise ValueError("tail_fraction must lie in (0, 1]")
    losses = np.asarray(losses, dtype=float)
    steps = np.arange(losses.size, dtype=float) if steps is None else np.asarray(steps, dtype=float)
    start = int(np.floor(losses.size * (1 - tail_fraction)))
    y, t = losses[start:] - f_star, steps[start:]
    if y.size < 3:
        raise ValueError("fewer than 3 points in the fitted tail")
    if np.any(y <= 0):
        raise ValueError("losses must exceed f_star on the fitted tail")
    ly = np.log(y)
    slope, intercept = np.polyfit(t, ly, 1)
    ss_tot = np.sum((ly - ly.mean()) ** 2)
    if ss_tot == 0:
        return 0.0, 1.0
    ss_res = np.sum((ly - (slope * t + intercept)) ** 2)
    return float(slope), float(max(0.0, 1.0 - ss_res / ss_tot))


def lie_bracket_check(m, w):
    """Largest entry of the Jacobian of ``g(m, w) = m w`` applied to bracket directions.

    For each pair ``i != j`` the direction has zero m-component and
    ``w_j e_i - w_i e_j`` in the w-slots; the Jacobian maps it to
    ``m (w_j e_i - w_i e_j)``.  Zero exactly when ``m = 0`` or ``w = 0``.
    """
    w = np.asarray(w, dtype=float)
    n = w.size
    if n < 2:
        raise ValueError("need at least two coordinates")
    J = np.hstack([w[:, None], m * np.eye(n)])
    worst = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            v = np.zeros(n + 1)
            v[1 + i] += w[j]
            v[1 + j] -= w[i]
            worst = max(worst, float(np.max(np.abs(J @ v))))
    return worst


def summarize(trace, problem, seed, tail_fraction=0.25, f_star=0.0):
    from pilotlab.oracles import kkt_residual

    xT = trace.xs[-1]
    try:
        slope, r2 = rate_fit(trace.loss, f_star, tail_fraction, trace.step)
    except ValueError:
        slope, r2 = float("nan"), float("nan")
    kkt = float("nan")
    if trace.init.get("beta", 0) > 0 and trace.method in ("pilot", "effective"):
        p = PotentialParams.from_init(trace.init["m0"], trace.init["w0"]).at(trace.A[-1])
        kkt = kkt_residual(problem, xT, p)
    return RunSummary(
        seed=int(seed),
        final_distance=float(trace.dist_to_truth[-1]),
        final_sparsity=float(trace.sparsity[-1]),
        sign_flip_counts=sign_flips(trace),
        rate_slope=slope,
        rate_r2=r2,
        kkt_residual=kkt,
        diverged=trace.diverged,
    )
