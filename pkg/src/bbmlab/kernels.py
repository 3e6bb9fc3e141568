"""Hot inner loops, each with a numba and a pure-numpy implementation.

The module-level names dispatch to the backend chosen in :mod:`bbmlab._backend`.
Both implementations stay importable as ``numba_impl`` / ``numpy_impl`` so the
benchmark and the tests can compare them directly.
"""
import math
from types import SimpleNamespace

import numpy as np

from ._backend import BACKEND, HAS_NUMBA, njit

# -- pure numpy ---------------------------------------------------------------


def _rotate_pair_np(a, b, theta):
    c = np.cos(theta)
    s = 1j * np.sin(theta)
    return c * a + s * b, s * a + c * b


def _lam_np(xi):
    return xi / (1.0 + xi * xi)


def _band_combination_min_np(xi1, xi2, ts, tps):
    lam1 = _lam_np(xi1)
    lam2 = _lam_np(xi2)
    lam = _lam_np(xi1 + xi2)
    best = np.inf
    for i in range(ts.shape[0]):
        t = ts[i]
        tp = tps[i][:, None]
        val = (-np.sin(lam * (t - tp)) * np.sin(lam1 * tp) * np.cos(lam2 * tp)
               + 0.5 * np.cos(lam * (t - tp)) * np.cos(lam1 * tp) * np.cos(lam2 * tp))
        best = min(best, float(val.min()))
    return best


def _phase_sum_np(xi, w, t, alpha):
    phase = t * (xi / (1.0 + xi * xi) + alpha * xi)
    return complex(np.sum(w * np.cos(phase)) + 1j * np.sum(w * np.sin(phase)))


def _band_convolution_np(ka, a, kb, b, kmax):
    out = np.zeros(2 * kmax + 1, dtype=np.complex128)
    idx = (ka[:, None] + kb[None, :]).ravel() + kmax
    np.add.at(out, idx, (a[:, None] * b[None, :]).ravel())
    return out


numpy_impl = SimpleNamespace(
    rotate_pair=_rotate_pair_np,
    band_combination_min=_band_combination_min_np,
    phase_sum=_phase_sum_np,
    band_convolution=_band_convolution_np,
)

# -- numba --------------------------------------------------------------------


@njit
def _rotate_pair_nb(a, b, theta):
    n = a.shape[0]
    out_a = np.empty(n, dtype=np.complex128)
    out_b = np.empty(n, dtype=np.complex128)
    for k in range(n):
        c = math.cos(theta[k])
        s = 1j * math.sin(theta[k])
        out_a[k] = c * a[k] + s * b[k]
        out_b[k] = s * a[k] + c * b[k]
    return out_a, out_b


@njit
def _band_combination_min_nb(xi1, xi2, ts, tps):
    best = np.inf
    m = xi1.shape[0]
    for j in range(m):
        x1 = xi1[j]
        x2 = xi2[j]
        x = x1 + x2
        l1 = x1 / (1.0 + x1 * x1)
        l2 = x2 / (1.0 + x2 * x2)
        l0 = x / (1.0 + x * x)
        for i in range(ts.shape[0]):
            t = ts[i]
            for q in range(tps.shape[1]):
                tp = tps[i, q]
                val = (-math.sin(l0 * (t - tp)) * math.sin(l1 * tp) * math.cos(l2 * tp)
                       + 0.5 * math.cos(l0 * (t - tp)) * math.cos(l1 * tp) * math.cos(l2 * tp))
                if val < best:
                    best = val
    return best


@njit
def _phase_sum_nb(xi, w, t, alpha):
    re = 0.0
    im = 0.0
    for j in range(xi.shape[0]):
        x = xi[j]
        ph = t * (x / (1.0 + x * x) + alpha * x)
        re += w[j] * math.cos(ph)
        im += w[j] * math.sin(ph)
    return complex(re, im)


@njit
def _band_convolution_nb(ka, a, kb, b, kmax):
    out = np.zeros(2 * kmax + 1, dtype=np.complex128)
    for i in range(ka.shape[0]):
        for j in range(kb.shape[0]):
            out[ka[i] + kb[j] + kmax] += a[i] * b[j]
    return out


if HAS_NUMBA:
    numba_impl = SimpleNamespace(
        rotate_pair=_rotate_pair_nb,
        band_combination_min=_band_combination_min_nb,
        phase_sum=_phase_sum_nb,
        band_convolution=_band_convolution_nb,
    )
else:  # pragma: no cover
    numba_impl = None

_active = numba_impl if BACKEND == "numba" else numpy_impl


def rotate_pair(a, b, theta):
    """Apply the 2x2 rotation [[cos, i sin], [i sin, cos]] mode by mode."""
    return _active.rotate_pair(np.ascontiguousarray(a, dtype=np.complex128),
                               np.ascontiguousarray(b, dtype=np.complex128),
                               np.ascontiguousarray(theta, dtype=np.float64))


def band_combination_min(xi1, xi2, ts, tps):
    """Minimum over samples of the all-cosine-dominated band multiplier.

    ``xi1``/``xi2`` are paired frequency samples, ``ts`` the outer times and
    ``tps[i]`` the inner times used with ``ts[i]``.
    """
    return float(_active.band_combination_min(
        np.ascontiguousarray(xi1, dtype=np.float64), np.ascontiguousarray(xi2, dtype=np.float64),
        np.ascontiguousarray(ts, dtype=np.float64), np.ascontiguousarray(tps, dtype=np.float64)))


def phase_sum(xi, w, t, alpha):
    """sum_j w_j exp(i t (xi_j/(1+xi_j^2) + alpha xi_j))."""
    return complex(_active.phase_sum(np.ascontiguousarray(xi, dtype=np.float64),
                                     np.ascontiguousarray(w, dtype=np.float64),
                                     float(t), float(alpha)))


def band_convolution(ka, a, kb, b, kmax):
    """Direct discrete convolution of two sparse spectra indexed by integer mode."""
    return _active.band_convolution(np.ascontiguousarray(ka, dtype=np.int64),
                                    np.ascontiguousarray(a, dtype=np.complex128),
                                    np.ascontiguousarray(kb, dtype=np.int64),
                                    np.ascontiguousarray(b, dtype=np.complex128), int(kmax))
