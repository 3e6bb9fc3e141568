import math

import numpy as np
import pytest

from bbmlab.diagnostics import (blowup_monitors, energy_identity_residuals, hamiltonian, hamiltonian_bound_holds,
                                identity_terms, invariant_drift, invariants, record)
from bbmlab.picard import SolverConfig, integrate
from bbmlab.spectral_core import GridSpec, WaveState, gaussian_state

GRID = GridSpec(1024, 64.0)


def test_hamiltonian_cases():
    assert hamiltonian(WaveState.zeros(GRID)) == 0.0
    v = np.exp(-GRID.x ** 2)
    assert hamiltonian(WaveState.from_arrays(GRID, 0 * v, v)) == pytest.approx(0.5 * GRID.dx * np.sum(v * v))
    a = 0.3
    g = a * np.exp(-GRID.x ** 2)
    # 1/2 int (2 g^2 + g^3) with int e^{-2x^2} = sqrt(pi/2), int e^{-3x^2} = sqrt(pi/3)
    exact = 0.5 * (2 * a * a * math.sqrt(math.pi / 2) + a ** 3 * math.sqrt(math.pi / 3))
    assert hamiltonian(WaveState.from_arrays(GRID, g, g)) == pytest.approx(exact, abs=1e-10)


def test_invariants_cases():
    assert invariants(WaveState.zeros(GRID)) == (0.0, 0.0, 0.0)
    g = np.exp(-GRID.x ** 2)
    gx = -2 * GRID.x * g
    _, _, cross = invariants(WaveState.from_arrays(GRID, g, g))
    assert cross == pytest.approx(GRID.dx * np.sum(g * g + gx * gx), rel=1e-12)
    coarse = invariants(gaussian_state(GridSpec(512, 64.0), 0.2, 0.1))
    fine = invariants(gaussian_state(GridSpec(1024, 64.0), 0.2, 0.1))
    assert np.allclose(coarse, fine, atol=1e-10, rtol=0)


def test_blowup_monitors():
    assert blowup_monitors(WaveState.zeros(GRID)) == (0.0, 0.0, 0.0)
    k = 5 * 2 * np.pi / GRID.domain_length
    v = np.sin(k * GRID.x)
    min_vx, min_eta, max_v = blowup_monitors(WaveState.from_arrays(GRID, 0 * v, v))
    assert min_vx == pytest.approx(-k, rel=1e-12)
    assert max_v == pytest.approx(1.0, rel=1e-3)


def test_identity_terms_match_formulas():
    u = gaussian_state(GRID, 0.2, 0.3, 1.5)
    t = identity_terms(u)
    assert t["x1_energy"][0] == pytest.approx(t["v_h1_energy"][0] + t["eta_h1_energy"][0])


def test_identities_zero_solution():
    tr = integrate(WaveState.zeros(GRID), SolverConfig(dt=0.5, t_end=2.0))
    assert energy_identity_residuals(tr) == {"x1_energy": 0.0, "v_h1_energy": 0.0, "eta_h1_energy": 0.0}


def test_identities_converge_second_order():
    u0 = gaussian_state(GRID, 0.1, 0.1)
    r1 = energy_identity_residuals(integrate(u0, SolverConfig(dt=0.25, t_end=2.0)))
    r2 = energy_identity_residuals(integrate(u0, SolverConfig(dt=0.125, t_end=2.0)))
    for name in r1:
        assert r1[name] / r2[name] == pytest.approx(4.0, rel=0.1)


def test_identity_with_zero_velocity_data():
    eta = 0.1 * np.exp(-GRID.x ** 2)
    u0 = WaveState.from_arrays(GRID, eta, 0 * eta)
    assert identity_terms(u0)["x1_energy"][1] == 0.0
    tr = integrate(u0, SolverConfig(dt=0.0625, t_end=1.0))
    assert energy_identity_residuals(tr)["x1_energy"] < 1e-6


def test_identity_window_and_short_runs():
    tr = integrate(gaussian_state(GRID), SolverConfig(dt=0.25, t_end=2.0))
    assert set(energy_identity_residuals(tr, (2, 7))) == {"x1_energy", "v_h1_energy", "eta_h1_energy"}
    with pytest.raises(ValueError):
        energy_identity_residuals(tr, slice(0, 2))


def test_drift_and_record():
    u = gaussian_state(GRID)
    r = record(u, 0.0, (0.0, 1.0, 2.0))
    assert set(r.norms) == {0.0, 1.0, 2.0}
    assert r.norm_X1 == r.norms[1.0]
    assert invariant_drift([r, r]) == {k: 0.0 for k in ("hamiltonian", "mass_eta", "mass_v", "cross_invariant")}


def test_hamiltonian_bound_along_run():
    u0 = gaussian_state(GRID, -0.3, 0.3)
    tr = integrate(u0, SolverConfig(dt=0.5, t_end=5.0))
    M = max(0.0, -min(r.min_eta for r in tr.records))
    assert all(hamiltonian_bound_holds(u0, u, M) for u in tr.states)
