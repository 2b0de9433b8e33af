"""One-command oracle suite: each check reports a measured value and its threshold."""

from dataclasses import dataclass, field

import numpy as np

from pilotlab import oracles
from pilotlab.diagnostics import lie_bracket_check
from pilotlab.errors import SaturationError
from pilotlab.numerics import STREAM_TEST, finite_diff_grad, finite_diff_hessian, make_rng
from pilotlab.optimizers import resolve_problem, run_training
from pilotlab.potentials import (
    PotentialParams,
    grad_timedep_R,
    inv_hessian_diag,
    sigma_bound,
    timedep_R,
)
from pilotlab.problems import RegressionProblem, grad_mse, mse_loss

GRAD_RTOL = 1e-6
HESS_RTOL = 1e-4
CLOSED_FORM_TOL = 1e-6
PRODUCT_TOL = 1e-12
MIRROR_RATIO = (1.6, 2.4)
# first-order scaling only means something while the residual itself is small
MIRROR_ABS = 0.1
KKT_TOL = 1e-3
KKT_SLACK = 1.10
BRACKET_ZERO = 1e-12
BRACKET_NONZERO = 1e-6


@dataclass
class Check:
    name: str
    passed: bool
    value: float
    threshold: str
    note: str = ""

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        extra = f"  ({self.note})" if self.note else ""
        return f"{status}  {self.name:<26} value={self.value:.6g}  threshold {self.threshold}{extra}"


@dataclass
class Report:
    checks: list = field(default_factory=list)

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def add(self, check):
        self.checks.append(check)
        return check

    def text(self):
        lines = [c.line() for c in self.checks]
        lines.append(f"overall: {'PASS' if self.passed else 'FAIL'}")
        return "\n".join(lines) + "\n"


def _rel_err(a, b):
    a, b = np.asarray(a, float), np.asarray(b, float)
    return float(np.max(np.abs(a - b) / np.maximum(np.abs(b), 1.0)))


def _random_params(rng, n):
    m0 = rng.uniform(0.8, 1.6, n)
    w0 = rng.uniform(-0.6, 0.6, n)
    return PotentialParams.from_init(m0, w0, A=float(rng.uniform(0.0, 0.3)))


def check_grad_mse(seed=0, points=100):
    rng = make_rng(seed, STREAM_TEST)
    worst = 0.0
    for _ in range(points):
        d, n = 6, 10
        Z = rng.standard_normal((d, n))
        pr = RegressionProblem(Z, rng.standard_normal(d), np.zeros(n))
        x = rng.standard_normal(n)
        fd = finite_diff_grad(lambda v: mse_loss(pr, v), x)
        worst = max(worst, _rel_err(grad_mse(pr, x), fd))
    return Check("grad_mse finite diff", worst <= GRAD_RTOL, worst, f"<= {GRAD_RTOL:g}")


def check_grad_R(seed=0, points=100):
    rng = make_rng(seed + 1, STREAM_TEST)
    worst = 0.0
    for _ in range(points):
        p = _random_params(rng, 6)
        x = rng.uniform(-2, 2, 6)
        fd = finite_diff_grad(lambda v: timedep_R(v, p), x)
        worst = max(worst, _rel_err(grad_timedep_R(x, p), fd))
    return Check("grad_timedep_R finite diff", worst <= GRAD_RTOL, worst, f"<= {GRAD_RTOL:g}")


def check_inv_hessian(seed=0, points=50, quad_samples=1000):
    rng = make_rng(seed + 2, STREAM_TEST)
    worst = 0.0
    for _ in range(points):
        p = _random_params(rng, 4)
        x = rng.uniform(-2, 2, 4)
        H = finite_diff_hessian(lambda v: timedep_R(v, p), x)
        inv = np.diag(np.linalg.inv(H))
        worst = max(worst, float(np.max(np.abs(inv / inv_hessian_diag(x, p) - 1))))
    p = _random_params(rng, 8)
    x = rng.uniform(-2, 2, 8)
    h = inv_hessian_diag(x, p)
    z = rng.standard_normal((quad_samples, 8))
    quad_ok = bool(np.all((z**2 * h).sum(1) >= sigma_bound(p) * (z**2).sum(1) * (1 - 1e-12)))
    return Check(
        "inverse Hessian", worst <= HESS_RTOL and quad_ok, worst, f"<= {HESS_RTOL:g}",
        "sigma bound holds" if quad_ok else "sigma bound violated",
    )


def check_closed_form(seed=0, problems=10, n=5, T=1.0, h=1e-3):
    rng = make_rng(seed + 3, STREAM_TEST)
    worst = worst_prod = 0.0
    for _ in range(problems):
        d = 3
        Z = rng.standard_normal((d, n)) / np.sqrt(n)
        Y = rng.standard_normal(d)
        m0 = rng.uniform(0.8, 1.4, n)
        w0 = rng.uniform(-0.5, 0.5, n)
        alpha = float(rng.uniform(0.0, 0.5))

        def grad_at(x):
            return Z.T @ (Z @ x - Y) / d

        ode = oracles.lifted_ode(grad_at, lambda t: alpha)
        times, states = oracles.rk4_integrate(ode, np.concatenate([m0, w0]), T, h)
        xs = states[:, :n] * states[:, n:]
        grads = np.array([grad_at(x) for x in xs])
        L = oracles.trapezoid_cumulative(grads, h)[-1]
        x_cf = oracles.closed_form_x(m0, w0, L, alpha * T)
        worst = max(worst, float(np.max(np.abs(x_cf - xs[-1]))))
        m, w = oracles.closed_form_mw(m0, w0, L, alpha * T)
        worst_prod = max(worst_prod, float(np.max(np.abs(m * w - x_cf))))
    ok = worst <= CLOSED_FORM_TOL and worst_prod <= PRODUCT_TOL
    return Check(
        "closed form vs RK4", ok, worst, f"<= {CLOSED_FORM_TOL:g}",
        f"product identity {worst_prod:.2g}",
    )


def mirror_ratio(config, problem=None, seed=None):
    """Sup residual at ``eta`` over sup residual at ``eta/2`` across the same horizon."""
    problem = resolve_problem(config) if problem is None else problem
    coarse = config.with_updates(method="pilot", mirror_residual=True)
    fine = coarse.with_updates(
        eta=config.eta / 2, T=2 * config.T, record_every=2 * config.record_every,
        schedule=_halved(config.schedule),
    )
    r1 = float(np.max(run_training(coarse, seed=seed, problem=problem).mirror_residual))
    r2 = float(np.max(run_training(fine, seed=seed, problem=problem).mirror_residual))
    return r1, r2


def _halved(spec):
    """The same continuous-time schedule on a grid twice as fine."""
    from dataclasses import replace

    return replace(spec, epoch_len=2 * spec.epoch_len, T=2 * spec.T)


def check_mirror(config, problem=None):
    try:
        r1, r2 = mirror_ratio(config, problem)
    except SaturationError as exc:
        # the scale left floating-point range, so the residual has no meaning
        return Check("mirror residual ratio", False, float("nan"),
                     f"in [{MIRROR_RATIO[0]}, {MIRROR_RATIO[1]}] with residual <= {MIRROR_ABS:g}", str(exc))
    ratio = r1 / r2 if r2 > 0 else float("inf")
    ok = MIRROR_RATIO[0] <= ratio <= MIRROR_RATIO[1] and r1 <= MIRROR_ABS
    return Check(
        "mirror residual ratio", ok, ratio,
        f"in [{MIRROR_RATIO[0]}, {MIRROR_RATIO[1]}] with residual <= {MIRROR_ABS:g}",
        f"sup residual {r1:.3g} at eta, {r2:.3g} at eta/2",
    )


def kkt_checkpoints(trace, problem, fractions=(0.25, 0.5, 1.0)):
    """KKT residual at recorded checkpoints (fractions of the run length)."""
    p0 = PotentialParams.from_init(trace.init["m0"], trace.init["w0"])
    out = []
    for f in fractions:
        i = int(round(f * (len(trace) - 1)))
        out.append(oracles.kkt_residual(problem, trace.xs[i], p0.at(trace.A[i])))
    return out


def check_kkt(config, problem=None):
    problem = resolve_problem(config) if problem is None else problem
    trace = run_training(config.with_updates(method="pilot"), problem=problem)
    series = kkt_checkpoints(trace, problem)
    mono = all(b <= a * KKT_SLACK for a, b in zip(series, series[1:]))
    final = series[-1]
    ok = final < KKT_TOL and mono
    return Check(
        "KKT residual", ok, final, f"< {KKT_TOL:g}",
        "checkpoints " + ", ".join(f"{v:.3g}" for v in series) + ("" if mono else " (increasing)"),
    )


def check_lie_bracket(seed=0, samples=100):
    rng = make_rng(seed + 4, STREAM_TEST)
    zero = max(lie_bracket_check(0.0, rng.standard_normal(4)), lie_bracket_check(1.7, np.zeros(4)))
    low = min(
        lie_bracket_check(float(rng.uniform(0.1, 2) * rng.choice([-1, 1])), rng.standard_normal(5))
        for _ in range(samples)
    )
    ok = zero <= BRACKET_ZERO and low > BRACKET_NONZERO
    return Check("Lie bracket", ok, low, f"> {BRACKET_NONZERO:g}", f"degenerate inputs give {zero:.2g}")


def verify(config, seed=0):
    """Run every oracle check against ``config``; returns a ``Report``."""
    problem = resolve_problem(config)
    report = Report()
    for fn in (check_grad_mse, check_grad_R, check_inv_hessian, check_closed_form, check_lie_bracket):
        report.add(fn(seed))
    report.add(check_mirror(config, problem))
    if config.noise == 0:
        report.add(check_kkt(config, problem))
    return report
