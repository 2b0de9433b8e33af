"""Seeded random draws, row-space projection and finite differences.

Random streams use numpy's Philox4x64 counter-based bit generator keyed by
``(seed, stream)``; normal variates come from ``Generator.standard_normal``
(ziggurat).  A given ``(seed, stream)`` pair therefore reproduces the same
numbers on every platform running the same numpy stream version.
"""

import numpy as np

from pilotlab.errors import DimensionError

# sub-stream ids; one per consumer so adding draws in one place never shifts another
STREAM_PROBLEM = 0
STREAM_INIT = 1
STREAM_NOISE = 2
STREAM_TEST = 7


def make_rng(seed, stream=0):
    """Philox generator keyed by ``(seed, stream)``."""
    seed = int(seed)
    if seed < 0:
        raise ValueError(f"seed must be non-negative, got {seed}")
    key = np.array([seed, int(stream)], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def gaussian_vector(seed, n, scale, stream=STREAM_INIT):
    """``n`` i.i.d. draws from Normal(0, scale**2)."""
    if n < 1:
        raise DimensionError(f"empty dimension: n={n}")
    if not scale > 0:
        raise ValueError(f"scale must be > 0, got {scale}")
    return scale * make_rng(seed, stream).standard_normal(int(n))


def as_vector(v, name="vector", n=None):
    out = np.asarray(v, dtype=float)
    if out.ndim != 1:
        raise DimensionError(f"{name} must be one-dimensional, got shape {out.shape}")
    if n is not None and out.shape[0] != n:
        raise DimensionError(f"{name} has length {out.shape[0]}, expected {n}")
    if not np.all(np.isfinite(out)):
        raise ValueError(f"{name} contains non-finite entries")
    return out


def row_space_projection(Z, v, jitter=1e-12):
    """Split ``v`` into its component in span(rows of Z) and the orthogonal rest.

    Solves the d x d Gram system ``(Z Z^T + jitter*I) c = Z v`` so rank-deficient
    designs still go through; the residual is then re-orthogonalized once
    against the rows to wash out the jitter.
    """
    Z = np.atleast_2d(np.asarray(Z, dtype=float))
    v = as_vector(v, "v", Z.shape[1])
    gram = Z @ Z.T
    gram[np.diag_indices_from(gram)] += jitter * max(1.0, np.trace(gram) / len(gram))
    c = np.linalg.solve(gram, Z @ v)
    proj = Z.T @ c
    resid = v - proj
    # one refinement sweep
    c2 = np.linalg.solve(gram, Z @ resid)
    proj = proj + Z.T @ c2
    resid = v - proj
    return proj, resid


def finite_diff_grad(fn, x, h=1e-6):
    """Central-difference gradient of a scalar function."""
    if not h > 0:
        raise ValueError("h must be positive")
    x = np.asarray(x, dtype=float)
    g = np.empty_like(x)
    e = np.zeros_like(x)
    for i in range(x.size):
        e[i] = h
        fp = fn(x + e)
        fm = fn(x - e)
        if not (np.isfinite(fp) and np.isfinite(fm)):
            raise FloatingPointError(f"non-finite function value near coordinate {i}")
        g[i] = (fp - fm) / (2 * h)
        e[i] = 0.0
    return g


def finite_diff_hessian(fn, x, h=1e-4):
    """Central-difference Hessian (symmetrized)."""
    x = np.asarray(x, dtype=float)
    n = x.size
    H = np.empty((n, n))
    f0 = fn(x)
    eye = np.eye(n) * h
    for i in range(n):
        H[i, i] = (fn(x + eye[i]) - 2 * f0 + fn(x - eye[i])) / h**2
        for j in range(i + 1, n):
            H[i, j] = (
                fn(x + eye[i] + eye[j])
                - fn(x + eye[i] - eye[j])
                - fn(x - eye[i] + eye[j])
                + fn(x - eye[i] - eye[j])
            ) / (4 * h**2)
            H[j, i] = H[i, j]
    return H
