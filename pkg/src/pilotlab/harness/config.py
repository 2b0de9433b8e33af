"""Flat ``key=value`` run configuration.

One setting per line, ``#`` starts a comment, blank lines are ignored.  Lists
are comma separated; integer ranges may be written ``1..5``.  Unknown keys are
an error.
"""

from dataclasses import dataclass, field, replace
from pathlib import Path

from pilotlab.errors import ConfigError
from pilotlab.schedules import KINDS, ScheduleSpec

METHODS = ("pilot", "spred", "lasso", "str", "effective")

DEFAULT_DECAY_ALPHA0 = 5.0
DEFAULT_CONSTANT_ALPHA0 = 0.01
DEFAULT_SWEEP_CONSTANTS = (1e-3, 1e-2, 1e-1, 1.0)


@dataclass(frozen=True)
class RunConfig:
    method: str = "pilot"
    n: int = 100
    d: int = 40
    k: int = 5
    noise: float = 0.0
    eta: float = 1e-4
    T: int = 1_000_000
    beta: float = 1.0
    schedule: ScheduleSpec = field(default_factory=lambda: ScheduleSpec("geometric", DEFAULT_DECAY_ALPHA0, epoch_len=2000))
    seeds: tuple = (1, 2, 3, 4, 5)
    problem_seed: int = 0
    init_scale: float = None
    record_every: int = 1000
    sparsity_tol: float = 1e-3
    output_dir: str = "runs"
    str_s0: float = -200.0
    str_global: bool = False
    mirror_residual: bool = False
    sweep_constants: tuple = DEFAULT_SWEEP_CONSTANTS
    workers: int = 1

    def with_schedule(self, spec):
        return replace(self, schedule=spec)

    def with_updates(self, **kw):
        return replace(self, **kw)


def _bool(v):
    s = v.strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {v!r}")


def _int(v):
    f = float(v)
    if f != int(f):
        raise ValueError(f"not an integer: {v!r}")
    return int(f)


def _int_list(v):
    out = []
    for part in v.split(","):
        part = part.strip()
        if not part:
            continue
        if ".." in part:
            lo, hi = part.split("..", 1)
            out.extend(range(_int(lo), _int(hi) + 1))
        else:
            out.append(_int(part))
    return tuple(out)


def _float_list(v):
    return tuple(float(p) for p in v.split(",") if p.strip())


def _optional_float(v):
    return None if v.strip().lower() in ("", "none", "auto") else float(v)


# schedule, alpha0, p, delta, K, schedule_T and epoch_len are folded into ScheduleSpec
_PARSERS = {
    "method": str,
    "n": _int,
    "d": _int,
    "k": _int,
    "noise": float,
    "eta": float,
    "T": _int,
    "beta": float,
    "seeds": _int_list,
    "problem_seed": _int,
    "init_scale": _optional_float,
    "record_every": _int,
    "sparsity_tol": float,
    "output_dir": str,
    "str_s0": float,
    "str_global": _bool,
    "mirror_residual": _bool,
    "sweep_constants": _float_list,
    "workers": _int,
    "schedule": str,
    "alpha0": float,
    "p": float,
    "delta": float,
    "K": float,
    "schedule_T": _int,
    "epoch_len": _int,
}


def parse_config(text):
    """Parse and validate a configuration document into a ``RunConfig``."""
    raw = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {line!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in _PARSERS:
            raise ConfigError(f"unknown key {key!r} (line {lineno})")
        if key in raw:
            raise ConfigError(f"duplicate key {key!r} (line {lineno})")
        try:
            raw[key] = _PARSERS[key](value)
        except ValueError as exc:
            raise ConfigError(f"key {key!r}: {exc}") from None
    return build_config(raw)


def build_config(raw):
    raw = dict(raw)
    method = raw.get("method", "pilot")
    if method not in METHODS:
        raise ConfigError(f"key 'method' must be one of {METHODS}, got {method!r}")

    if method == "spred":
        if raw.get("beta", 0.0) != 0.0:
            raise ConfigError("key 'beta': spred forces beta=0")
        if raw.get("delta", 1.0) != 1.0:
            raise ConfigError("key 'delta': spred forces delta=1")
        raw["beta"] = 0.0
        raw.setdefault("delta", 1.0)
    raw.setdefault("beta", 1.0)

    kind = raw.pop("schedule", "geometric" if method == "pilot" else "constant")
    if kind not in KINDS:
        raise ConfigError(f"key 'schedule' must be one of {KINDS}, got {kind!r}")
    decaying = kind in ("harmonic", "quadratic", "geometric", "adaptive")
    sched_kw = dict(
        kind=kind,
        alpha0=raw.pop("alpha0", DEFAULT_DECAY_ALPHA0 if decaying else DEFAULT_CONSTANT_ALPHA0),
        p=raw.pop("p", 0.95),
        delta=raw.pop("delta", 1.01),
        K=raw.pop("K", 0.0),
        T=raw.pop("schedule_T", 0),
        epoch_len=raw.pop("epoch_len", 2000),
    )
    if kind == "geometric" and not 0 < sched_kw["p"] < 1:
        raise ConfigError(f"key 'p': geometric schedule requires 0 < p < 1, got {sched_kw['p']}")
    if sched_kw["alpha0"] < 0:
        raise ConfigError(f"key 'alpha0': must be >= 0, got {sched_kw['alpha0']}")
    if kind == "adaptive" and sched_kw["delta"] < 1:
        raise ConfigError(f"key 'delta': must be >= 1, got {sched_kw['delta']}")
    if sched_kw["epoch_len"] < 1:
        raise ConfigError(f"key 'epoch_len': must be >= 1, got {sched_kw['epoch_len']}")
    schedule = ScheduleSpec(**sched_kw)

    cfg = RunConfig(**{k: v for k, v in raw.items()}, schedule=schedule)
    _validate(cfg)
    return cfg


def _validate(cfg):
    def need(cond, key, what):
        if not cond:
            raise ConfigError(f"key {key!r}: {what}, got {getattr(cfg, key)!r}")

    need(cfg.n >= 1, "n", "must be >= 1")
    need(cfg.d >= 1, "d", "must be >= 1")
    need(1 <= cfg.k <= cfg.n, "k", "must satisfy 1 <= k <= n")
    need(cfg.noise >= 0, "noise", "must be >= 0")
    need(cfg.eta > 0, "eta", "must be > 0")
    need(cfg.T >= 0, "T", "must be >= 0")
    need(cfg.beta >= 0, "beta", "must be >= 0")
    need(cfg.record_every >= 1, "record_every", "must be >= 1")
    need(cfg.T % cfg.record_every == 0, "record_every", "must divide T")
    need(cfg.sparsity_tol > 0, "sparsity_tol", "must be > 0")
    need(len(cfg.seeds) >= 1 and all(s >= 0 for s in cfg.seeds), "seeds", "must be a non-empty list of non-negative integers")
    need(cfg.problem_seed >= 0, "problem_seed", "must be >= 0")
    need(cfg.init_scale is None or cfg.init_scale > 0, "init_scale", "must be > 0")
    need(cfg.workers >= 1, "workers", "must be >= 1")
    need(len(cfg.sweep_constants) >= 1 and all(c >= 0 for c in cfg.sweep_constants), "sweep_constants", "must be non-negative")


def load_config(path):
    return parse_config(Path(path).read_text(encoding="utf-8"))


def format_config(cfg):
    """Render the effective configuration back to ``key=value`` text."""
    s = cfg.schedule
    lines = [
        "# effective configuration (defaults resolved)",
        f"method={cfg.method}",
        f"n={cfg.n}",
        f"d={cfg.d}",
        f"k={cfg.k}",
        f"noise={cfg.noise!r}",
        f"eta={cfg.eta!r}",
        f"T={cfg.T}",
        f"beta={cfg.beta!r}",
        f"schedule={s.kind}",
        f"alpha0={s.alpha0!r}",
        f"p={s.p!r}",
        f"delta={s.delta!r}",
        f"K={s.K!r}",
        f"schedule_T={s.T}",
        f"epoch_len={s.epoch_len}",
        f"seeds={','.join(str(x) for x in cfg.seeds)}",
        f"problem_seed={cfg.problem_seed}",
        f"init_scale={'auto' if cfg.init_scale is None else repr(cfg.init_scale)}",
        f"record_every={cfg.record_every}",
        f"sparsity_tol={cfg.sparsity_tol!r}",
        f"output_dir={cfg.output_dir}",
        f"str_s0={cfg.str_s0!r}",
        f"str_global={'true' if cfg.str_global else 'false'}",
        f"mirror_residual={'true' if cfg.mirror_residual else 'false'}",
        f"sweep_constants={','.join(repr(c) for c in cfg.sweep_constants)}",
        f"workers={cfg.workers}",
    ]
    if s.kind != "adaptive" and s.kind != "constant":
        from pilotlab.schedules import alpha_sequence

        total = float(alpha_sequence(s, cfg.T).sum() * cfg.eta) if cfg.T else 0.0
        lines.append(
            f"# step j uses epoch index k=(j-1)//{s.epoch_len}+1; "
            f"accumulated strength after T steps A_T={total!r}"
        )
    return "\n".join(lines) + "\n"
