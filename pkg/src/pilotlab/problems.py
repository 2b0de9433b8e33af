"""Underdetermined sparse regression instances and their least-squares loss.

The loss is pinned to ``f(x) = ||Zx - Y||^2 / (2d)`` so that
``grad f(x) = Z^T (Zx - Y) / d``.
"""

import csv
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from pilotlab.errors import ConfigError, DimensionError
from pilotlab.numerics import STREAM_NOISE, STREAM_PROBLEM, as_vector, make_rng

SUPPORT_LOW = 0.5
SUPPORT_HIGH = 1.5


@dataclass(frozen=True)
class RegressionProblem:
    Z: np.ndarray
    Y: np.ndarray
    x_star: np.ndarray
    noise: float = 0.0

    @property
    def d(self):
        return self.Z.shape[0]

    @property
    def n(self):
        return self.Z.shape[1]

    @property
    def support(self):
        return np.flatnonzero(self.x_star)

    def __post_init__(self):
        Z = np.atleast_2d(np.asarray(self.Z, dtype=float))
        object.__setattr__(self, "Z", Z)
        object.__setattr__(self, "Y", as_vector(self.Y, "Y", Z.shape[0]))
        object.__setattr__(self, "x_star", as_vector(self.x_star, "x_star", Z.shape[1]))


def gen_underdetermined(seed, n, d, k, noise=0.0):
    """Gaussian design ``Z`` (d x n), k-sparse planted truth, ``Y = Z x* + noise*eps``.

    Nonzeros of ``x*`` are uniform on +-[0.5, 1.5] with independent random signs.
    """
    if not (n > d >= 1):
        raise ConfigError(f"need n > d >= 1 for an underdetermined system, got n={n}, d={d}")
    if not (1 <= k <= n):
        raise ConfigError(f"support size k={k} outside [1, n={n}]")
    if noise < 0:
        raise ConfigError(f"noise must be >= 0, got {noise}")
    rng = make_rng(seed, STREAM_PROBLEM)
    Z = rng.standard_normal((d, n))
    support = np.sort(rng.choice(n, size=k, replace=False))
    mags = rng.uniform(SUPPORT_LOW, SUPPORT_HIGH, size=k)
    signs = rng.choice(np.array([-1.0, 1.0]), size=k)
    x_star = np.zeros(n)
    x_star[support] = signs * mags
    Y = Z @ x_star
    if noise > 0:
        Y = Y + noise * make_rng(seed, STREAM_NOISE).standard_normal(d)
    return RegressionProblem(Z=Z, Y=Y, x_star=x_star, noise=float(noise))


def mse_loss(problem, x):
    x = as_vector(x, "x", problem.n)
    r = problem.Z @ x - problem.Y
    return float(r @ r) / (2 * problem.d)


def grad_mse(problem, x):
    x = as_vector(x, "x", problem.n)
    return problem.Z.T @ (problem.Z @ x - problem.Y) / problem.d


def pl_constant(problem, rtol=1e-10):
    """Polyak-Lojasiewicz constant ``sigma_min+(Z)^2 / d`` of the pinned loss.

    ``||grad f||^2 >= lam * (f - f*)`` holds with this ``lam`` for the
    ``1/(2d)`` normalization once ``Y`` lies in the range of ``Z``.  For a noisy
    instance a ``RuntimeWarning`` is issued because ``f*`` is then the
    least-squares floor rather than the value at ``x*``.

    The bound is valid but loose by a factor 2: for r in range(Z),
    ``||Z^T r||^2 / d^2 >= 2 sigma^2 / d * ||r||^2 / (2d)``.
    """
    if problem.noise > 0:
        warnings.warn("PL certificate is only claimed for noiseless instances", RuntimeWarning)
    s = np.linalg.svd(problem.Z, compute_uv=False)
    s_pos = s[s > rtol * s.max()]
    return float(s_pos.min() ** 2 / problem.d)


def write_bundle(problem, directory):
    """Write ``Z.csv``, ``Y.csv`` and ``xstar.csv`` (17 significant digits)."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    _write_matrix(directory / "Z.csv", problem.Z)
    _write_matrix(directory / "Y.csv", problem.Y[:, None])
    _write_matrix(directory / "xstar.csv", problem.x_star[:, None])
    return directory


def read_bundle(directory, noise=0.0):
    directory = Path(directory)
    Z = _read_matrix(directory / "Z.csv")
    Y = _read_matrix(directory / "Y.csv").ravel()
    x_star = _read_matrix(directory / "xstar.csv").ravel()
    if Z.shape != (Y.size, x_star.size):
        raise DimensionError(f"bundle shapes disagree: Z {Z.shape}, Y {Y.size}, xstar {x_star.size}")
    return RegressionProblem(Z=Z, Y=Y, x_star=x_star, noise=noise)


def _write_matrix(path, M):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        for row in np.atleast_2d(M):
            writer.writerow([format(float(v), ".17g") for v in row])


def _read_matrix(path):
    with open(path, newline="") as fh:
        rows = [[float(v) for v in row] for row in csv.reader(fh) if row]
    return np.array(rows, dtype=float)
