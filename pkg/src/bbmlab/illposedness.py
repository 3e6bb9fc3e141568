"""Norm-explosion probe: band datum, second Picard iterate, multiplier certificate.

The datum puts all of its energy in v, on the grid modes with
|xi| in [N - 1/2, N + 1/2].  Its second iterate A_2 has a high-to-low
interaction landing on |xi| <= 1, and the probe measures how that piece grows
with N while ||u0||_s stays of order one.
"""
from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import kernels
from .errors import BandUnresolved, CertificationFailure
from .nonlinear import QuadratureRule, duhamel_hat, scaled_multiplier
from .propagator import rotate, scaled_lambda
from .spectral_core import (GridSpec, WaveState, pair_norm, sobolev_norm_coeffs, state_from_spectral,
                            state_to_spectral)

CERTIFIED_BOUND = 1.0 / 32.0
MIN_BAND_MODES = 8
_BAND_TOL = 1e-9


def default_probe_grid() -> GridSpec:
    # xi_k = k/16: 17 modes per band half; 2N + 1 = 1025 stays inside the 2/3 cutoff.
    return GridSpec(2 ** 16, 32.0 * np.pi)


@dataclass
class ProbeConfig:
    N_values: list
    s: float = -0.5
    s_prime: float = 0.0
    t_eval: float = 1.0
    grid: GridSpec = field(default_factory=default_probe_grid)
    quadrature: QuadratureRule = field(default_factory=QuadratureRule)
    t_samples: int = 16
    xi_samples: int = 1024

    def __post_init__(self):
        self.N_values = [float(n) for n in self.N_values]
        if len(self.N_values) < 1:
            raise ValueError("N_values is empty")
        if min(self.N_values) < 16:
            raise ValueError("every N must be >= 16 for the multiplier lower bound to apply")
        if self.s > 0:
            raise ValueError("s must be <= 0 (s = 0 is the well-posed control)")
        if not 0 < self.t_eval <= 1:
            raise ValueError("t_eval must lie in (0, 1]")


@dataclass
class ProbeReport:
    s: float
    s_prime: float
    t_eval: float
    N_values: list
    data_norm_s: list
    low_freq_A2_norm: list
    low_freq_A2_sup: list
    full_A2_norm: list
    multiplier_min: list
    fitted_slope: float
    fit_residual: float
    certified: bool
    num_points: int = 0
    domain_length: float = 0.0

    def to_json(self) -> str:
        return json.dumps(asdict(self))

    @classmethod
    def from_json(cls, text: str) -> "ProbeReport":
        return cls(**json.loads(text))


def band_modes(grid: GridSpec, N: float) -> np.ndarray:
    """Positive integer modes k with |xi_k| in [N - 1/2, N + 1/2]."""
    scale = grid.domain_length / (2.0 * np.pi)
    lo = math.ceil((N - 0.5) * scale - _BAND_TOL)
    hi = math.floor((N + 0.5) * scale + _BAND_TOL)
    return np.arange(lo, hi + 1)


def _check_band(grid: GridSpec, N: float, reach: float) -> np.ndarray:
    k = band_modes(grid, N)
    if k.size < MIN_BAND_MODES:
        raise BandUnresolved(f"band around N={N:g} holds {k.size} modes per side; need {MIN_BAND_MODES} "
                             f"(increase domain_length)")
    if reach * grid.domain_length / (2.0 * np.pi) > grid.dealias_cutoff + _BAND_TOL:
        raise BandUnresolved(f"frequency {reach:g} lies beyond the dealiased range "
                             f"{grid.max_resolved_frequency:.6g} (increase num_points)")
    return k


def build_data(N: float, s: float, grid: GridSpec) -> WaveState:
    """eta_0 = 0 and v_0 with coefficient N^-s on every band mode (both signs)."""
    k = _check_band(grid, N, N + 0.5)
    c = np.zeros((2, grid.num_points), dtype=np.complex128)
    amp = float(N) ** (-s)
    c[1, k] = amp
    c[1, -k] = amp
    return state_from_spectral(grid, c)


def _free_provider(grid, uhat0, epsilon):
    return lambda tp: rotate(grid, uhat0, tp, epsilon)


def second_iterate_hat(grid: GridSpec, uhat0: np.ndarray, t: float, rule: QuadratureRule,
                       epsilon: float = 1.0) -> np.ndarray:
    free = _free_provider(grid, uhat0, epsilon)
    return duhamel_hat(grid, free, free, t, rule, epsilon)


def second_iterate(u0: WaveState, t: float, rule: QuadratureRule | None = None,
                   epsilon: float = 1.0) -> WaveState:
    """A_2(u0) = N_2(S(.)u0, S(.)u0) at time t."""
    if not 0 < t <= 1:
        raise ValueError("t must lie in (0, 1]")
    rule = rule or QuadratureRule()
    g = u0.grid
    return state_from_spectral(g, second_iterate_hat(g, state_to_spectral(u0), t, rule, epsilon))


# -- direct convolution oracle ---------------------------------------------------

def _symbols(xi, t):
    lam = scaled_lambda(xi, 1.0) * t
    return np.cos(lam).astype(np.complex128), 1j * np.sin(lam)


def direct_second_iterate(u0: WaveState, t: float, rule: QuadratureRule | None = None,
                          reduced: bool = False, kmax: int | None = None,
                          support_rtol: float = 1e-12) -> dict:
    """A_2 by explicit convolution of the nonzero modes, term by term.

    ``reduced=False`` sums all sixteen products of symbols and data that make
    up the two Duhamel integrands; ``reduced=True`` keeps only the two terms
    built from v0 alone.  Input modes below ``support_rtol`` times the peak
    (transform roundoff) are treated as zero.  Returns the output mode indices
    ``k`` with |k| <= kmax and the two coefficient arrays.
    """
    rule = rule or QuadratureRule()
    g = u0.grid
    c = state_to_spectral(u0)
    tiny = support_rtol * max(float(np.abs(c).max()), np.finfo(float).tiny)
    k_all = np.nonzero((np.abs(c[0]) > tiny) | (np.abs(c[1]) > tiny))[0]
    k_all = g.wavenumbers[k_all].astype(np.int64)
    idx = np.mod(k_all, g.num_points)
    eta0, v0 = c[0, idx], c[1, idx]
    kmax = int(kmax if kmax is not None else 2 * (np.max(np.abs(k_all)) if k_all.size else 0))
    out_k = np.arange(-kmax, kmax + 1)
    xi_out = 2.0 * np.pi * out_k / g.domain_length
    xi_in = 2.0 * np.pi * k_all / g.domain_length
    mult = -scaled_multiplier(xi_out, 1.0)  # +i xi / (1 + xi^2)
    q1 = np.zeros(out_k.size, dtype=np.complex128)
    q2 = np.zeros(out_k.size, dtype=np.complex128)

    def conv(a, b):
        return kernels.band_convolution(k_all, a, k_all, b, kmax)

    for cn, w in zip(rule.nodes, rule.weights):
        tp = t * cn
        L1_in, L2_in = _symbols(xi_in, tp)
        L1_out, L2_out = _symbols(xi_out, t - tp)
        if reduced:
            vv_a = conv(L2_in * v0, L1_in * v0)     # eta_1 v_1 with eta_0 = 0
            vv_b = conv(L1_in * v0, L1_in * v0)     # v_1 v_1 with eta_0 = 0
            q1 += w * t * mult * (L1_out * vv_a + 0.5 * L2_out * vv_b)
            q2 += w * t * mult * (L2_out * vv_a + 0.5 * L1_out * vv_b)
            continue
        # eta_1 = L1 eta0 + L2 v0 and v_1 = L2 eta0 + L1 v0, expanded term by term.
        e_parts = (L1_in * eta0, L2_in * v0)
        v_parts = (L2_in * eta0, L1_in * v0)
        ev = [conv(a, b) for a in e_parts for b in v_parts]
        vv = [conv(a, b) for a in v_parts for b in v_parts]
        for term in ev:
            q1 += w * t * mult * L1_out * term
            q2 += w * t * mult * L2_out * term
        for term in vv:
            q1 += w * t * mult * 0.5 * L2_out * term
            q2 += w * t * mult * 0.5 * L1_out * term
    return {"k": out_k, "eta": q1, "v": q2}


# -- multiplier certificate ------------------------------------------------------

def _band_samples(N: float, xi_samples: int):
    m = max(2, math.ceil(math.sqrt(xi_samples / 4.0)))
    base = np.linspace(N - 0.5, N + 0.5, m)
    a, b = np.meshgrid(base, base, indexing="ij")
    a, b = a.ravel(), b.ravel()
    xi1 = np.concatenate([a, a, -a, -a])
    xi2 = np.concatenate([b, -b, b, -b])
    return xi1, xi2


def multiplier_lower_bound_check(N: float, t_grid, xi_samples: int = 1024, inner_samples: int | None = None,
                                 raise_on_failure: bool = True) -> float:
    """Minimum of L2(xi,t-t')L2(xi1,t')L1(xi-xi1,t') + 1/2 L1 L1 L1 over the sampled hypotheses.

    For each t in ``t_grid`` the inner time runs over t' = t*linspace(0, 1, m)
    (m = len(t_grid) unless ``inner_samples`` is given).  The frequency pairs
    cover all four sign combinations of the band, so both output regions
    |xi| <= 1 and 2N - 1 <= |xi| <= 2N + 1 are sampled.
    """
    if N < 16:
        raise ValueError("the certificate needs N >= 16")
    ts = np.asarray(t_grid, dtype=float)
    if ts.ndim != 1 or ts.size == 0 or ts.min() < 0 or ts.max() > 1:
        raise ValueError("t_grid must be a nonempty list of times in [0, 1]")
    m = inner_samples or ts.size
    tps = ts[:, None] * np.linspace(0.0, 1.0, m)[None, :]
    xi1, xi2 = _band_samples(N, xi_samples)
    value = kernels.band_combination_min(xi1, xi2, ts, tps)
    if raise_on_failure and value < CERTIFIED_BOUND:
        raise CertificationFailure(f"multiplier minimum {value:.6g} < 1/32 at N={N:g}")
    return value


def band_symbol_bounds(N: float, t_grid, xi_samples: int = 1024) -> dict:
    """Intermediate bounds on the band |xi| in [N - 1/2, N + 1/2] for t in [0, 1].

    The sharp upper bound is |lambda| <= 1/(N - 1/2): lambda(N - 1/2) exceeds
    1/N for every N >= 3, so ``upper_1_over_N`` is reported separately and
    ``holds`` uses the sharp form.  The argument of the certificate only needs
    |L2| = O(1/N), which either form gives.
    """
    xi = np.linspace(N - 0.5, N + 0.5, xi_samples)
    ts = np.asarray(t_grid, dtype=float)
    lam = np.abs(scaled_lambda(xi, 1.0))
    ph = np.abs(lam[None, :] * ts[:, None])
    upper = 1.0 / (N - 0.5)
    l2_max = float(np.abs(np.sin(ph)).max())
    return {
        "lambda_min": float(lam.min()), "lambda_max": float(lam.max()), "L2_max": l2_max,
        "L1_min": float(np.cos(ph).min()),
        "upper_1_over_N": bool(lam.max() <= 1.0 / N and l2_max <= 1.0 / N),
        "holds": bool(lam.min() >= 1 / (2 * N) and lam.max() <= upper
                      and l2_max <= upper and np.cos(ph).min() >= 0.5),
    }


# -- sweep -------------------------------------------------------------------

def support_leakage(grid: GridSpec, A2hat: np.ndarray, N: float) -> float:
    """max |coefficient| outside |xi| <= 1 and [2N-1, 2N+1], relative to the peak."""
    xi = np.abs(grid.frequencies)
    inside = (xi <= 1.0 + _BAND_TOL) | ((xi >= 2 * N - 1 - _BAND_TOL) & (xi <= 2 * N + 1 + _BAND_TOL))
    mag = np.abs(A2hat)
    peak = mag.max()
    if peak == 0:
        return 0.0
    return float(mag[:, ~inside].max(initial=0.0) / peak)


def low_frequency_norm(grid: GridSpec, uhat: np.ndarray, s_prime: float) -> float:
    """X^{s'} norm (sum of components) restricted to |xi| <= 1."""
    mask = np.abs(grid.frequencies) <= 1.0 + _BAND_TOL
    return float(np.sum(sobolev_norm_coeffs(grid, uhat * mask, s_prime)))


def fit_loglog(x, y):
    """Least-squares slope of log y against log x and the RMS residual."""
    lx, ly = np.log(np.asarray(x, float)), np.log(np.asarray(y, float))
    coef, res, *_ = np.polyfit(lx, ly, 1, full=True)
    rms = float(np.sqrt(res[0] / len(lx))) if len(res) else 0.0
    return float(coef[0]), rms


def _probe_one(cfg: ProbeConfig, N: float):
    g = cfg.grid
    _check_band(g, N, 2 * N + 1)
    u0 = build_data(N, cfg.s, g)
    uhat0 = state_to_spectral(u0)
    a2 = second_iterate_hat(g, uhat0, cfg.t_eval, cfg.quadrature)
    t_grid = np.linspace(cfg.t_eval / cfg.t_samples, cfg.t_eval, cfg.t_samples)
    sup = max(low_frequency_norm(g, second_iterate_hat(g, uhat0, t, cfg.quadrature), cfg.s_prime)
              for t in t_grid)
    mmin = multiplier_lower_bound_check(N, t_grid, cfg.xi_samples)
    return (pair_norm(u0, cfg.s), low_frequency_norm(g, a2, cfg.s_prime), sup,
            float(np.sum(sobolev_norm_coeffs(g, a2, cfg.s_prime))), mmin)


def norm_explosion_sweep(cfg: ProbeConfig, jobs: int = 1) -> ProbeReport:
    """Per-N norms of the datum and of A_2, plus the log-log slope of the low-frequency part.

    Raises CertificationFailure if any multiplier minimum falls below 1/32.
    """
    if len(cfg.N_values) < 3:
        raise ValueError("the sweep needs at least three values of N")
    if jobs > 1:
        with ThreadPoolExecutor(jobs) as pool:
            rows = list(pool.map(lambda n: _probe_one(cfg, n), cfg.N_values))
    else:
        rows = [_probe_one(cfg, n) for n in cfg.N_values]
    cols = [list(c) for c in zip(*rows)]
    slope, resid = fit_loglog(cfg.N_values, cols[1])
    return ProbeReport(s=cfg.s, s_prime=cfg.s_prime, t_eval=cfg.t_eval, N_values=list(cfg.N_values),
                       data_norm_s=cols[0], low_freq_A2_norm=cols[1], low_freq_A2_sup=cols[2],
                       full_A2_norm=cols[3], multiplier_min=cols[4], fitted_slope=slope,
                       fit_residual=resid, certified=bool(min(cols[4]) >= CERTIFIED_BOUND),
                       num_points=cfg.grid.num_points, domain_length=cfg.grid.domain_length)
