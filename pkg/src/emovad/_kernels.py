"""Numeric inner-loop kernels with two interchangeable backends.

The hot paths of the trainer and the verifier (logistic forwards, BCE
reductions, AdamW updates, full-batch logistic-regression epochs) are
compiled with numba when available. Setting the environment variable
``EMOVAD_NUMBA=0`` (or numba being uninstalled) selects the pure-numpy
fallback. ``benchmarks/bench_kernels.py`` times both backends.

Batch reductions use adjacent-pair folding (x[0]+x[1], x[2]+x[3], ...
repeated until one value remains) so the floating-point summation order
is fixed and identical in both backends.
"""

from __future__ import annotations

import os

import numpy as np

PROB_CLAMP = 1e-7

_FLAG = os.environ.get("EMOVAD_NUMBA", "1").strip().lower()
_WANT_NUMBA = _FLAG not in ("0", "false", "off", "no")

try:
    if _WANT_NUMBA:
        from numba import njit

        HAS_NUMBA = True
    else:
        HAS_NUMBA = False
except ImportError:
    HAS_NUMBA = False


# -- numpy backend -------------------------------------------------------


def _np_sigmoid(x):
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def _np_pairwise_sum(x):
    buf = np.asarray(x, dtype=np.float64).copy()
    n = buf.shape[0]
    if n == 0:
        return 0.0
    while n > 1:
        half = n // 2
        head = buf[0 : 2 * half : 2] + buf[1 : 2 * half : 2]
        if n % 2:
            buf[:half] = head
            buf[half] = buf[n - 1]
            n = half + 1
        else:
            buf[:half] = head
            n = half
    return float(buf[0])


def _np_bce_mean(y, p):
    q = np.clip(p, PROB_CLAMP, 1.0 - PROB_CLAMP)
    terms = -y * np.log(q) - (1.0 - y) * np.log(1.0 - q)
    return _np_pairwise_sum(terms) / terms.shape[0]


def _np_toy_forward(w_label, b_label, w_vad, b_vad, phi):
    p = _np_sigmoid(w_label @ phi + b_label)
    v = _np_sigmoid(w_vad @ phi + b_vad)
    return p, v


def _np_adamw_update(param, grad, m, v, t, lr, beta1, beta2, eps, weight_decay):
    m *= beta1
    m += (1.0 - beta1) * grad
    v *= beta2
    v += (1.0 - beta2) * grad * grad
    mhat = m / (1.0 - beta1**t)
    vhat = v / (1.0 - beta2**t)
    param -= lr * (mhat / (np.sqrt(vhat) + eps) + weight_decay * param)


def _np_logreg_epoch(x, y, w, b):
    n, _ = x.shape
    m_out = w.shape[0]
    p = _np_sigmoid(x @ w.T + b)
    q = np.clip(p, PROB_CLAMP, 1.0 - PROB_CLAMP)
    terms = (-y * np.log(q) - (1.0 - y) * np.log(1.0 - q)).ravel()
    loss = _np_pairwise_sum(terms) / (n * m_out)
    dz = (p - y) / (n * m_out)
    gw = dz.T @ x
    gb = dz.sum(axis=0)
    return loss, gw, gb


_NUMPY_IMPLS = {
    "sigmoid": _np_sigmoid,
    "pairwise_sum": _np_pairwise_sum,
    "bce_mean": _np_bce_mean,
    "toy_forward": _np_toy_forward,
    "adamw_update": _np_adamw_update,
    "logreg_epoch": _np_logreg_epoch,
}


# -- numba backend -------------------------------------------------------

_NUMBA_IMPLS = None

if HAS_NUMBA:

    @njit(cache=True)
    def _nb_sigmoid(x):
        out = np.empty_like(x)
        for i in range(x.shape[0]):
            xi = x[i]
            if xi >= 0.0:
                out[i] = 1.0 / (1.0 + np.exp(-xi))
            else:
                e = np.exp(xi)
                out[i] = e / (1.0 + e)
        return out

    @njit(cache=True)
    def _nb_pairwise_sum(x):
        n = x.shape[0]
        if n == 0:
            return 0.0
        buf = x.copy()
        while n > 1:
            half = n // 2
            for i in range(half):
                buf[i] = buf[2 * i] + buf[2 * i + 1]
            if n % 2:
                buf[half] = buf[n - 1]
                n = half + 1
            else:
                n = half
        return buf[0]

    @njit(cache=True)
    def _nb_bce_mean(y, p):
        k = y.shape[0]
        terms = np.empty(k)
        for i in range(k):
            q = p[i]
            if q < PROB_CLAMP:
                q = PROB_CLAMP
            elif q > 1.0 - PROB_CLAMP:
                q = 1.0 - PROB_CLAMP
            terms[i] = -y[i] * np.log(q) - (1.0 - y[i]) * np.log(1.0 - q)
        return _nb_pairwise_sum(terms) / k

    @njit(cache=True)
    def _nb_toy_forward(w_label, b_label, w_vad, b_vad, phi):
        k = w_label.shape[0]
        f = phi.shape[0]
        zp = np.empty(k)
        for i in range(k):
            acc = b_label[i]
            for j in range(f):
                acc += w_label[i, j] * phi[j]
            zp[i] = acc
        zv = np.empty(3)
        for i in range(3):
            acc = b_vad[i]
            for j in range(f):
                acc += w_vad[i, j] * phi[j]
            zv[i] = acc
        return _nb_sigmoid(zp), _nb_sigmoid(zv)

    @njit(cache=True)
    def _nb_adamw_update(param, grad, m, v, t, lr, beta1, beta2, eps, weight_decay):
        c1 = 1.0 - beta1**t
        c2 = 1.0 - beta2**t
        for i in range(param.shape[0]):
            g = grad[i]
            m[i] = beta1 * m[i] + (1.0 - beta1) * g
            v[i] = beta2 * v[i] + (1.0 - beta2) * g * g
            mhat = m[i] / c1
            vhat = v[i] / c2
            param[i] -= lr * (mhat / (np.sqrt(vhat) + eps) + weight_decay * param[i])

    @njit(cache=True)
    def _nb_logreg_epoch(x, y, w, b):
        n, f = x.shape
        m_out = w.shape[0]
        gw = np.zeros((m_out, f))
        gb = np.zeros(m_out)
        terms = np.empty(n * m_out)
        scale = 1.0 / (n * m_out)
        for i in range(n):
            for mm in range(m_out):
                z = b[mm]
                for j in range(f):
                    z += w[mm, j] * x[i, j]
                if z >= 0.0:
                    p = 1.0 / (1.0 + np.exp(-z))
                else:
                    e = np.exp(z)
                    p = e / (1.0 + e)
                q = p
                if q < PROB_CLAMP:
                    q = PROB_CLAMP
                elif q > 1.0 - PROB_CLAMP:
                    q = 1.0 - PROB_CLAMP
                terms[i * m_out + mm] = -y[i, mm] * np.log(q) - (1.0 - y[i, mm]) * np.log(
                    1.0 - q
                )
                dz = (p - y[i, mm]) * scale
                for j in range(f):
                    gw[mm, j] += dz * x[i, j]
                gb[mm] += dz
        loss = _nb_pairwise_sum(terms) * scale
        return loss, gw, gb

    _NUMBA_IMPLS = {
        "sigmoid": _nb_sigmoid,
        "pairwise_sum": _nb_pairwise_sum,
        "bce_mean": _nb_bce_mean,
        "toy_forward": _nb_toy_forward,
        "adamw_update": _nb_adamw_update,
        "logreg_epoch": _nb_logreg_epoch,
    }


# -- backend selection ---------------------------------------------------

BACKEND = "numba" if HAS_NUMBA else "numpy"
_ACTIVE = _NUMBA_IMPLS if HAS_NUMBA else _NUMPY_IMPLS

sigmoid = _ACTIVE["sigmoid"]
pairwise_sum = _ACTIVE["pairwise_sum"]
bce_mean = _ACTIVE["bce_mean"]
toy_forward = _ACTIVE["toy_forward"]
adamw_update = _ACTIVE["adamw_update"]
# full-batch logreg is BLAS-bound at real sizes; the numpy path wins there
# (see benchmarks/bench_kernels.py), so it stays active on both backends.
logreg_epoch = _NUMPY_IMPLS["logreg_epoch"]


def pairwise_mean(x) -> float:
    arr = np.asarray(x, dtype=np.float64)
    if arr.shape[0] == 0:
        return 0.0
    return float(pairwise_sum(arr)) / arr.shape[0]


def implementations():
    """Both backends by name, for parity tests and the benchmark."""
    out = {"numpy": _NUMPY_IMPLS}
    if _NUMBA_IMPLS is not None:
        out["numba"] = _NUMBA_IMPLS
    return out
