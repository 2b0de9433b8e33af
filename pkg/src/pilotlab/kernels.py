"""Explicit-Euler training loops.

One loop serves every method; the source is numba-compatible and is compiled
with ``numba.njit`` unless ``PILOTLAB_NUMBA=0`` (see ``pilotlab._accel``).  The
un-jitted function stays reachable as ``<kernel>.py_func`` in both modes.

State layout per method code:

* ``PAIR``      s1 = m, s2 = w
* ``EFFECTIVE`` s1 = x, s2 = initial potential scale a0
* ``LASSO``     s1 = x, s2 unused
* ``STR``       s1 = w, s2 = threshold logits s
"""

import numpy as np

from pilotlab._accel import njit

PAIR = 0
EFFECTIVE = 1
LASSO = 2
STR = 3

METHOD_CODES = {"pair": PAIR, "effective": EFFECTIVE, "lasso": LASSO, "str": STR}


@njit
def _effective_x(method, s1, s2):
    if method == PAIR:
        return s1 * s2
    if method == STR:
        thr = 1.0 / (1.0 + np.exp(-s2))
        return np.sign(s1) * np.maximum(np.abs(s1) - thr, 0.0)
    return s1.copy()


@njit
def train_loop(
    method,
    Z,
    Y,
    xstar,
    s1,
    s2,
    alphas,
    adaptive,
    alpha0,
    delta,
    K,
    half_T,
    eta,
    T,
    record_every,
    tol,
    str_global,
    loss_r,
    dist_r,
    l1_r,
    sp_r,
    alpha_r,
    A_r,
    x_r,
    g_r,
    flips,
    maxabs,
):
    """Run ``T`` steps in place; returns ``(records_written, diverged)``.

    Record ``k`` holds the state after ``k`` steps, the strength that step
    ``k + 1`` will use, ``A = eta * sum of strengths used so far`` and the
    running gradient integral ``eta * sum_{j<k} grad f(x_j)``.
    """
    d = Z.shape[0]
    n = Z.shape[1]
    s1 = s1.copy()
    s2 = s2.copy()
    x = _effective_x(method, s1, s2)
    gsum = np.zeros(n)
    A = 0.0
    if adaptive:
        alpha = alpha0
    elif T > 0:
        alpha = alphas[0]
    else:
        alpha = 0.0
    prev_loss = np.inf
    rec = 0
    maxabs[:] = np.maximum(maxabs, np.abs(x))
    for k in range(T + 1):
        r = Z @ x - Y
        loss = (r @ r) / (2.0 * d)
        if not np.isfinite(loss):
            return rec, True
        l1 = np.sum(np.abs(x))
        if adaptive:
            if k >= 1:
                if loss <= prev_loss and l1 >= K and k <= half_T:
                    alpha = alpha * delta
                else:
                    alpha = alpha / delta
                prev_loss = loss
        elif k < T:
            alpha = alphas[k]
        if k % record_every == 0:
            diff = x - xstar
            loss_r[rec] = loss
            dist_r[rec] = np.sqrt(diff @ diff)
            l1_r[rec] = l1
            sp_r[rec] = np.sum(np.abs(x) < tol) / n
            alpha_r[rec] = alpha
            A_r[rec] = A
            x_r[rec, :] = x
            g_r[rec, :] = gsum
            rec += 1
        if k == T:
            break
        g = Z.T @ r / d
        gsum += eta * g
        if method == PAIR:
            m_new = s1 - eta * (g * s2 + 2.0 * alpha * s1)
            s2 = s2 - eta * (g * s1 + 2.0 * alpha * s2)
            s1 = m_new
        elif method == EFFECTIVE:
            a = s2 * np.exp(-4.0 * A)
            s1 = s1 - eta * (2.0 * np.sqrt(s1 * s1 + a * a) * g + 4.0 * alpha * s1)
        elif method == LASSO:
            s1 = s1 - eta * (g + 2.0 * alpha * np.sign(s1))
        else:
            thr = 1.0 / (1.0 + np.exp(-s2))
            active = np.abs(s1) > thr
            ds = np.where(active, -g * np.sign(s1) * thr * (1.0 - thr), 0.0)
            if str_global:
                ds = np.full(n, np.sum(ds))
            s1 = s1 - eta * (np.where(active, g, 0.0) + alpha * s1)
            s2 = s2 - eta * (ds + alpha * s2)
        A += eta * alpha
        x_new = _effective_x(method, s1, s2)
        flips += (x * x_new < 0.0).astype(np.int64)
        maxabs[:] = np.maximum(maxabs, np.abs(x_new))
        x = x_new
    return rec, False


@njit
def pair_trajectory(grad_Z, grad_Y, m, w, alphas, eta):
    """Bare lifted Euler loop returning the final ``(m, w)``; used by benchmarks."""
    d = grad_Z.shape[0]
    for k in range(alphas.shape[0]):
        x = m * w
        g = grad_Z.T @ (grad_Z @ x - grad_Y) / d
        al = alphas[k]
        m_new = m - eta * (g * w + 2.0 * al * m)
        w = w - eta * (g * m + 2.0 * al * w)
        m = m_new
    return m, w
