"""Exact linear group of the BBM-BBM system as a per-frequency 2x2 rotation."""
from dataclasses import dataclass

import numpy as np

from . import kernels
from .spectral_core import (GridSpec, WaveState, state_from_spectral, state_to_spectral,
                            sobolev_norm_coeffs)


def scaled_lambda(xi, epsilon=1.0):
    xi = np.asarray(xi, dtype=np.float64)
    return xi / (1.0 + epsilon * xi * xi)


@dataclass(frozen=True)
class SemigroupSymbol:
    """Symbol entries L1 = cos(lambda_eps t), L2 = i sin(lambda_eps t) on the grid."""

    grid: GridSpec
    t: float
    epsilon: float = 1.0

    @property
    def phase(self) -> np.ndarray:
        return scaled_lambda(self.grid.frequencies, self.epsilon) * self.t

    @property
    def L1(self) -> np.ndarray:
        return np.cos(self.phase)

    @property
    def L2(self) -> np.ndarray:
        return 1j * np.sin(self.phase)

    def matrix(self) -> np.ndarray:
        """(N, 2, 2) complex array of the per-mode blocks."""
        l1, l2 = self.L1, self.L2
        return np.stack([np.stack([l1, l2], -1), np.stack([l2, l1], -1)], -2)


def rotate(grid: GridSpec, uhat: np.ndarray, t: float, epsilon: float = 1.0) -> np.ndarray:
    """S^eps(t) on a (2, N) coefficient array; Nyquist mode zeroed."""
    if t == 0.0:
        out = np.array(uhat, dtype=np.complex128, copy=True)
    else:
        theta = scaled_lambda(grid.frequencies, epsilon) * t
        a, b = kernels.rotate_pair(uhat[0], uhat[1], theta)
        out = np.stack([a, b])
    out[:, grid.nyquist_index] = 0.0
    return out


def apply_semigroup(u: WaveState, t: float, epsilon: float = 1.0) -> WaveState:
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    return state_from_spectral(u.grid, rotate(u.grid, state_to_spectral(u), t, epsilon))


def group_compose_check(u: WaveState, t1: float, t2: float, epsilon: float = 1.0) -> float:
    """||S(t1+t2)u - S(t1)S(t2)u||_0, summed over the two components."""
    g = u.grid
    uhat = state_to_spectral(u)
    diff = rotate(g, uhat, t1 + t2, epsilon) - rotate(g, rotate(g, uhat, t2, epsilon), t1, epsilon)
    return float(np.sum(sobolev_norm_coeffs(g, diff, 0.0)))
