"""Solving u = S(t)u0 + N2(u, u): fixed-point steps, Picard power series, time marching.

Within a step of length dt the unknown is represented by its values at the
quadrature nodes c_i*dt.  The Duhamel integral from 0 to c_i*dt is taken with
the Lagrange integration matrix of the rule, and the free part is propagated
exactly with S, so for Gauss-Legendre nodes this is exponential (integrating
factor) Gauss collocation.  The Picard iterates A_n are computed on the same
nodes, so the series and the fixed point solve the same discrete equations.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import diagnostics
from .errors import BlowUpSuspected, NonContraction, SeriesDivergence
from .nonlinear import QuadratureRule, bilinear_hat
from .propagator import rotate, scaled_lambda
from .spectral_core import (GridSpec, WaveState, pair_norm, sobolev_norm_coeffs, state_from_spectral,
                            state_to_spectral)


@dataclass
class SolverConfig:
    dt: float = 0.5
    t_end: float = 10.0
    tol: float = 1e-10
    max_fp_iters: int = 60
    series_order: int = 6
    epsilon: float = 1.0
    s_track: list = field(default_factory=lambda: [0.0, 1.0])
    quad_order: int = 8
    quad_kind: str = "gauss-legendre"
    save_every: int = 1
    # abort thresholds for integrate()
    min_eta_floor: float = -50.0
    max_abs_v_cap: float = 50.0
    min_vx_floor: float = -1e3
    norm_cap: float = 1e6

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.series_order < 1:
            raise ValueError("series_order must be >= 1")
        if self.save_every < 1:
            raise ValueError("save_every must be >= 1")
        self.s_track = [float(s) for s in self.s_track]

    @property
    def rule(self) -> QuadratureRule:
        return QuadratureRule(self.quad_order, self.quad_kind)

    def to_dict(self) -> dict:
        return asdict(self)


def _x0_norm(grid, uhat):
    return float(np.sum(sobolev_norm_coeffs(grid, uhat, 0.0)))


class _Collocation:
    """Precomputed rotations for one step length."""

    def __init__(self, grid: GridSpec, dt: float, rule: QuadratureRule, epsilon: float):
        self.grid, self.dt, self.rule, self.epsilon = grid, dt, rule, epsilon
        c = rule.nodes
        lam = scaled_lambda(grid.frequencies, epsilon)
        theta = (c[:, None] - c[None, :])[:, :, None] * dt * lam[None, None, :]
        a = rule.integration_matrix[:, :, None]
        self.cos_a = a * np.cos(theta)
        self.sin_a = a * np.sin(theta)
        theta_end = ((1.0 - c)[:, None] * dt) * lam[None, :]
        self.cos_b = rule.weights[:, None] * np.cos(theta_end)
        self.sin_b = rule.weights[:, None] * np.sin(theta_end)

    def free(self, uhat0):
        """S(c_i dt) u0 for every node: (q, 2, N)."""
        return np.stack([rotate(self.grid, uhat0, ci * self.dt, self.epsilon) for ci in self.rule.nodes])

    def integrate_nodes(self, W):
        """dt * sum_j a_ij S((c_i - c_j) dt) W_j for W of shape (q, 2, N)."""
        ca, sa = self.cos_a, self.sin_a
        eta = np.einsum("ijk,jk->ik", ca, W[:, 0]) + 1j * np.einsum("ijk,jk->ik", sa, W[:, 1])
        v = 1j * np.einsum("ijk,jk->ik", sa, W[:, 0]) + np.einsum("ijk,jk->ik", ca, W[:, 1])
        return self.dt * np.stack([eta, v], axis=1)

    def integrate_end(self, W):
        """dt * sum_j b_j S((1 - c_j) dt) W_j."""
        cb, sb = self.cos_b, self.sin_b
        eta = np.sum(cb * W[:, 0] + 1j * sb * W[:, 1], axis=0)
        v = np.sum(1j * sb * W[:, 0] + cb * W[:, 1], axis=0)
        return self.dt * np.stack([eta, v])


def _fixed_point_hat(grid, uhat0, dt, cfg: SolverConfig):
    col = _Collocation(grid, dt, cfg.rule, cfg.epsilon)
    eps = cfg.epsilon
    free = col.free(uhat0)
    U = free.copy()
    scale = max(_x0_norm(grid, uhat0), 1.0)
    residuals = []
    growth = 0
    for it in range(1, cfg.max_fp_iters + 1):
        W = np.stack([bilinear_hat(grid, Ui, Ui, eps) for Ui in U])
        U_new = free + col.integrate_nodes(W)
        res = max(_x0_norm(grid, U_new[i] - U[i]) for i in range(len(U)))
        residuals.append(res)
        U = U_new
        if not math.isfinite(res) or res > 1e6 * scale:
            raise NonContraction(f"fixed-point iterates diverged at iteration {it} (residual {res:.3e})")
        if res <= cfg.tol:
            W = np.stack([bilinear_hat(grid, Ui, Ui, eps) for Ui in U])
            end = rotate(grid, uhat0, dt, eps) + col.integrate_end(W)
            ratios = [residuals[k + 1] / residuals[k] for k in range(len(residuals) - 1) if residuals[k] > 0]
            return end, {"iterations": it, "residuals": residuals, "ratios": ratios}
        if len(residuals) > 1 and res > residuals[-2]:
            growth += 1
            if growth >= 3:
                raise NonContraction(f"fixed-point residual grew for 3 iterations (at {it}, {res:.3e})")
        else:
            growth = 0
    raise NonContraction(f"no convergence in {cfg.max_fp_iters} iterations (residual {residuals[-1]:.3e})")


def step_fixed_point(u0: WaveState, dt: float, cfg: SolverConfig, full_output: bool = False):
    """One step of length dt: the fixed point of F(u) = S(t)u0 + N2(u, u) on [0, dt].

    With ``full_output`` also returns a dict with the iteration count, the
    residual history and the successive residual ratios (the observed
    contraction factors).
    """
    out, info = _fixed_point_hat(u0.grid, state_to_spectral(u0), dt, cfg)
    state = state_from_spectral(u0.grid, out)
    return (state, info) if full_output else state


def picard_terms(u0: WaveState, t: float, order: int, cfg: SolverConfig):
    """Picard iterates A_1..A_order at time t, plus their X^0_T norms (sup over nodes and t).

    Stops early once a term's norm drops below ``cfg.tol``.
    """
    grid = u0.grid
    eps = cfg.epsilon
    col = _Collocation(grid, t, cfg.rule, eps)
    uhat0 = state_to_spectral(u0)
    nodes = [col.free(uhat0)]
    ends = [rotate(grid, uhat0, t, eps)]
    norms = [max(_x0_norm(grid, ends[0]), max(_x0_norm(grid, a) for a in nodes[0]))]
    for n in range(2, order + 1):
        if norms[-1] < cfg.tol:
            break
        q = len(cfg.rule.nodes)
        W = np.zeros((q, 2, grid.num_points), dtype=np.complex128)
        for n1 in range(1, n // 2 + 1):
            n2 = n - n1
            factor = 1.0 if n1 == n2 else 2.0
            for i in range(q):
                W[i] += factor * bilinear_hat(grid, nodes[n1 - 1][i], nodes[n2 - 1][i], eps)
        nodes.append(col.integrate_nodes(W))
        ends.append(col.integrate_end(W))
        norms.append(max(_x0_norm(grid, ends[-1]), max(_x0_norm(grid, a) for a in nodes[-1])))
    return [state_from_spectral(grid, e) for e in ends], norms


def series_solve(u0: WaveState, t: float, order: int, cfg: SolverConfig, full_output: bool = False):
    """Sum of the Picard iterates A_1..A_order at time t.

    Raises SeriesDivergence when the last three term norms do not decrease.
    ``full_output`` adds a dict with the term norms, measured ratio and the
    geometric tail estimate.
    """
    terms, norms = picard_terms(u0, t, order, cfg)
    if len(norms) >= 3 and norms[-1] >= cfg.tol:
        r1, r2 = norms[-2] / norms[-3], norms[-1] / norms[-2]
        if not (r1 < 1.0 and r2 < 1.0):
            raise SeriesDivergence(f"term norms not decaying: ratios {r1:.3g}, {r2:.3g}")
    total = terms[0]
    for a in terms[1:]:
        total = total + a
    if not full_output:
        return total
    ratio = norms[-1] / norms[-2] if len(norms) >= 2 and norms[-2] > 0 else 0.0
    tail = norms[-1] * ratio / (1.0 - ratio) if ratio < 1.0 else math.inf
    return total, {"term_norms": norms, "ratio": ratio, "tail_estimate": tail}


def fit_geometric_constant(term_norms, data_norm: float) -> float:
    """Smallest K with ||A_n|| <= K^n ||u0||^n for all listed n."""
    return max((a ** (1.0 / n)) / data_norm for n, a in enumerate(term_norms, start=1) if a > 0)


def existence_time_estimate(u0: WaveState, s: float, epsilon: float, C_hat: float) -> float:
    """1 / (4 sqrt(eps) C_hat ||u0||_s); +inf for zero data."""
    if not C_hat > 0:
        raise ValueError("C_hat must be positive")
    norm = pair_norm(u0, s)
    if norm == 0.0:
        return math.inf
    return 1.0 / (4.0 * math.sqrt(epsilon) * C_hat * norm)


@dataclass
class Trajectory:
    times: list
    states: list
    records: list
    config: SolverConfig
    abort_reason: str | None = None
    abort_time: float | None = None
    fp_iterations: list = field(default_factory=list)

    @property
    def grid(self) -> GridSpec:
        return self.states[0].grid


def _check_monitors(rec, cfg: SolverConfig):
    if rec.min_eta < cfg.min_eta_floor:
        return "min_eta", rec.min_eta
    if rec.max_abs_v > cfg.max_abs_v_cap:
        return "max_abs_v", rec.max_abs_v
    if rec.min_vx < cfg.min_vx_floor:
        return "min_vx", rec.min_vx
    for s, val in rec.norms.items():
        if not math.isfinite(val) or val > cfg.norm_cap:
            return f"norm_s{s:g}", val
    return None


def integrate(u0: WaveState, cfg: SolverConfig, on_noncontraction: str = "raise") -> Trajectory:
    """March with step_fixed_point from 0 to cfg.t_end, saving every ``save_every`` steps.

    Aborts (recorded on the trajectory) when a blow-up monitor trips.  A
    NonContraction is re-raised, or recorded when ``on_noncontraction="record"``.
    """
    if on_noncontraction not in ("raise", "record"):
        raise ValueError("on_noncontraction must be 'raise' or 'record'")
    grid = u0.grid
    n_steps = max(1, int(round(cfg.t_end / cfg.dt)))
    dt = cfg.t_end / n_steps
    uhat = state_to_spectral(u0)
    traj = Trajectory(times=[0.0], states=[u0], records=[diagnostics.record(u0, 0.0, cfg.s_track)], config=cfg)
    for n in range(1, n_steps + 1):
        t = n * dt
        try:
            uhat, info = _fixed_point_hat(grid, uhat, dt, cfg)
        except NonContraction as exc:
            if on_noncontraction == "raise":
                raise
            traj.abort_reason, traj.abort_time = f"NonContraction: {exc}", t
            break
        traj.fp_iterations.append(info["iterations"])
        state = state_from_spectral(grid, uhat)
        rec = diagnostics.record(state, t, cfg.s_track)
        tripped = _check_monitors(rec, cfg)
        if n % cfg.save_every == 0 or n == n_steps or tripped:
            traj.times.append(t)
            traj.states.append(state)
            traj.records.append(rec)
        if tripped:
            err = BlowUpSuspected(tripped[0], tripped[1], t)
            traj.abort_reason, traj.abort_time = f"BlowUpSuspected({tripped[0]})", t
            traj.blowup = err
            break
    return traj
