"""Smoothing nonlinearity, the bilinear Duhamel operator and bilinear-constant scans."""
from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from functools import cached_property
from typing import Callable

import numpy as np

from .propagator import rotate
from .spectral_core import (GridSpec, WaveState, random_coefficients, sobolev_norm_coeffs,
                            state_from_spectral, state_to_spectral, to_physical, to_spectral)


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes and weights on [0, 1].

    ``order`` is the node count.  Gauss-Legendre is exact to degree 2*order-1;
    composite Simpson (odd ``order``, equispaced nodes) to degree 3.
    """

    order: int = 8
    kind: str = "gauss-legendre"

    def __post_init__(self):
        if self.kind not in ("gauss-legendre", "composite-simpson"):
            raise ValueError(f"unknown quadrature kind {self.kind!r}")
        if self.order < 1:
            raise ValueError("order must be >= 1")
        if self.kind == "composite-simpson" and (self.order < 3 or self.order % 2 == 0):
            raise ValueError("composite Simpson needs an odd node count >= 3")

    @cached_property
    def _nodes_weights(self):
        if self.kind == "gauss-legendre":
            x, w = np.polynomial.legendre.leggauss(self.order)
            return 0.5 * (x + 1.0), 0.5 * w
        x = np.linspace(0.0, 1.0, self.order)
        h = 1.0 / (self.order - 1)
        w = np.full(self.order, 2.0)
        w[1::2] = 4.0
        w[0] = w[-1] = 1.0
        return x, w * h / 3.0

    @property
    def nodes(self) -> np.ndarray:
        return self._nodes_weights[0]

    @property
    def weights(self) -> np.ndarray:
        return self._nodes_weights[1]

    @property
    def degree(self) -> int:
        return 2 * self.order - 1 if self.kind == "gauss-legendre" else 3

    @property
    def convergence_order(self) -> int:
        return self.degree + 1

    @cached_property
    def integration_matrix(self) -> np.ndarray:
        """a[i, j] = integral over [0, c_i] of the j-th Lagrange basis polynomial.

        Evaluated by an order-point Gauss rule on each [0, c_i] with the basis in
        barycentric form, which is exact for these polynomials.
        """
        c = self.nodes
        q = len(c)
        bw = np.array([1.0 / np.prod([c[j] - c[m] for m in range(q) if m != j]) for j in range(q)])
        gx, gw = np.polynomial.legendre.leggauss(q)
        a = np.zeros((q, q))
        for i in range(q):
            tau = 0.5 * c[i] * (gx + 1.0)
            wts = 0.5 * c[i] * gw
            diff = tau[:, None] - c[None, :]
            terms = bw / diff
            basis = terms / terms.sum(axis=1, keepdims=True)
            a[i] = wts @ basis
        return a


def scaled_multiplier(xi, epsilon: float = 1.0):
    """Symbol of eps (1 - eps d_xx)^-1 d_x, i.e. -i eps xi / (1 + eps xi^2) (d_x <-> -i xi)."""
    xi = np.asarray(xi, dtype=np.float64)
    return -1j * epsilon * xi / (1.0 + epsilon * xi * xi)


def _project(grid: GridSpec, c: np.ndarray) -> np.ndarray:
    return c * grid.dealias_mask


def bilinear_hat(grid: GridSpec, ahat: np.ndarray, bhat: np.ndarray, epsilon: float = 1.0) -> np.ndarray:
    """-1/2 m_eps (a1 b2 + a2 b1, a2 b2) for (2, N) coefficient arrays.

    Products are formed in physical space with 2/3-rule truncation before and
    after multiplication.  ``bilinear_hat(a, a)`` is the nonlinearity N(a).
    """
    pa = to_physical(grid, _project(grid, ahat))
    if bhat is ahat:
        pb = pa
    else:
        pb = to_physical(grid, _project(grid, bhat))
    prod = np.stack([pa[0] * pb[1] + pa[1] * pb[0], pa[1] * pb[1]])
    m = -0.5 * scaled_multiplier(grid.frequencies, epsilon)
    return _project(grid, to_spectral(grid, prod)) * m


def nonlinear_hat(grid: GridSpec, uhat: np.ndarray, epsilon: float = 1.0) -> np.ndarray:
    return bilinear_hat(grid, uhat, uhat, epsilon)


def apply_N(u: WaveState, epsilon: float = 1.0) -> WaveState:
    """N^eps(u) = -eps (1 - eps d_xx)^-1 d_x (eta v, v^2/2)."""
    g = u.grid
    return state_from_spectral(g, nonlinear_hat(g, state_to_spectral(u), epsilon))


Provider = Callable[[float], WaveState]


def duhamel_hat(grid: GridSpec, a_at: Callable[[float], np.ndarray], b_at: Callable[[float], np.ndarray],
                t: float, rule: QuadratureRule, epsilon: float = 1.0) -> np.ndarray:
    if t < 0:
        raise ValueError("duhamel_N2 requires t >= 0")
    out = np.zeros((2, grid.num_points), dtype=np.complex128)
    if t == 0:
        return out
    for c, w in zip(rule.nodes, rule.weights):
        tp = t * c
        integrand = bilinear_hat(grid, a_at(tp), b_at(tp), epsilon)
        out += (t * w) * rotate(grid, integrand, t - tp, epsilon)
    return out


def duhamel_N2(uA: Provider, uB: Provider, t: float, rule: QuadratureRule | None = None,
               epsilon: float = 1.0) -> WaveState:
    """Quadrature of -1/2 int_0^t S(t-t') m (u1 v2 + u2 v1, u2 v2)(t') dt'."""
    rule = rule or QuadratureRule()
    grid = uA(0.0).grid
    out = duhamel_hat(grid, lambda tp: state_to_spectral(uA(tp)), lambda tp: state_to_spectral(uB(tp)),
                      t, rule, epsilon)
    return state_from_spectral(grid, out)


# -- bilinear constant scans -------------------------------------------------------

@dataclass
class BilinearScanReport:
    s: float
    epsilon: float
    sample_count: int
    max_ratio: float
    ratios: list = field(default_factory=list)
    num_points: int = 0
    domain_length: float = 0.0
    seed: int = 0
    family: str = "random"

    def to_json(self) -> str:
        return json.dumps(asdict(self))

    @classmethod
    def from_json(cls, text: str) -> "BilinearScanReport":
        return cls(**json.loads(text))


def _localized_coefficients(grid: GridSpec, rng: np.random.Generator) -> np.ndarray:
    # Gaussian bump with random centre and a width drawn log-uniformly down to a few dx.
    x = grid.x
    width = np.exp(rng.uniform(np.log(4 * grid.dx), np.log(0.05 * grid.domain_length)))
    centre = rng.uniform(-0.25, 0.25) * grid.domain_length
    c = to_spectral(grid, np.exp(-((x - centre) / width) ** 2) * (1.0 + 0.5 * rng.standard_normal()))
    return _project(grid, c)


def bilinear_ratio(grid: GridSpec, uc: np.ndarray, vc: np.ndarray, s: float, epsilon: float) -> float:
    nu = sobolev_norm_coeffs(grid, uc, s)
    nv = sobolev_norm_coeffs(grid, vc, s)
    if nu == 0.0 or nv == 0.0:
        return 0.0
    prod = to_spectral(grid, to_physical(grid, _project(grid, uc)) * to_physical(grid, _project(grid, vc)))
    out = _project(grid, prod) * scaled_multiplier(grid.frequencies, epsilon)
    return float(sobolev_norm_coeffs(grid, out, s) / (np.sqrt(epsilon) * nu * nv))


def bilinear_constant_scan(s: float, epsilon: float, sample_count: int, seed: int,
                           grid: GridSpec | None = None, family: str = "random",
                           jobs: int = 1) -> BilinearScanReport:
    """Empirical constant of ||eps (1-eps d_xx)^-1 d_x (uv)||_s <= C sqrt(eps) ||u||_s ||v||_s.

    ``family="random"`` draws seeded complex Gaussian coefficients with a
    <xi>^-2 envelope; ``family="localized"`` draws Gaussian bumps of random
    width.  Each sample gets its own child seed, so results do not depend on
    ``jobs``.
    """
    if sample_count < 1:
        raise ValueError("sample_count must be >= 1")
    grid = grid or GridSpec(4096, 256.0)
    children = np.random.SeedSequence(seed).spawn(sample_count)

    def one(ss):
        rng = np.random.default_rng(ss)
        if family == "random":
            uc, vc = random_coefficients(grid, rng), random_coefficients(grid, rng)
        elif family == "localized":
            uc, vc = _localized_coefficients(grid, rng), _localized_coefficients(grid, rng)
        else:
            raise ValueError(f"unknown family {family!r}")
        return bilinear_ratio(grid, uc, vc, s, epsilon)

    if jobs > 1:
        with ThreadPoolExecutor(jobs) as pool:
            ratios = list(pool.map(one, children))
    else:
        ratios = [one(c) for c in children]
    positive = [r for r in ratios if r > 0]
    return BilinearScanReport(s=float(s), epsilon=float(epsilon), sample_count=sample_count,
                              max_ratio=max(positive) if positive else 0.0, ratios=ratios,
                              num_points=grid.num_points, domain_length=grid.domain_length,
                              seed=int(seed), family=family)


def multiplier_l2_norm(grid: GridSpec, epsilon: float) -> float:
    """Grid approximation of ||eps xi / (1 + eps xi^2)||_{L2(d xi)}."""
    dxi = 2.0 * np.pi / grid.domain_length
    m = np.abs(scaled_multiplier(grid.frequencies, epsilon))
    return float(np.sqrt(np.sum(m ** 2) * dxi))
