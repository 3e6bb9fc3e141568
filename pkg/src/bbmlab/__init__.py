"""Pseudo-spectral lab for the BBM-BBM Boussinesq system

    eta_t - eta_txx + v_x + (eta v)_x = 0,
    v_t   - v_txx   + eta_x + v v_x   = 0

on a truncated periodic domain.
"""
from ._backend import BACKEND
from .errors import (BandUnresolved, BBMLabError, BlowUpSuspected, CertificationFailure, ConfigInvalid,
                     InflectionInInterval, NonContraction, ResolutionInsufficient, SeriesDivergence,
                     SymmetryError, WraparoundWindowExceeded)
from .spectral_core import (GridSpec, RealField, SpectralField, WaveState, apply_multiplier,
                            forward_transform, hilbert_pair_norm, inverse_transform, lambda_symbol,
                            lp_norm, pair_norm, sobolev_norm)
from .propagator import SemigroupSymbol, apply_semigroup, group_compose_check
from .nonlinear import (BilinearScanReport, QuadratureRule, apply_N, bilinear_constant_scan,
                        duhamel_N2)
from .picard import (SolverConfig, Trajectory, existence_time_estimate, integrate, series_solve,
                     step_fixed_point)
from .diagnostics import (DiagnosticsRecord, blowup_monitors, energy_identity_residuals, hamiltonian,
                          invariants)
from .illposedness import (ProbeConfig, ProbeReport, build_data, multiplier_lower_bound_check,
                           norm_explosion_sweep, second_iterate)
from .decay import (DecayReport, PhaseFunction, decay_experiment, oscillatory_integral,
                    sup_alpha_envelope, van_der_corput_check)

__version__ = "0.1.0"
