"""Fields on a truncated periodic domain and their Fourier representation.

Transform convention (used everywhere in the package): the grid is
``x_j = -L/2 + j*dx`` and a real field is expanded as

    f(x) = sum_k c_k exp(-i xi_k x),    xi_k = 2*pi*k/L,

with unit-mean normalization (a constant field 1 has ``c_0 = 1``).  The minus
sign makes d/dx act as multiplication by ``-i xi``; under it the linear group
has the symbol [[cos, i sin], [i sin, cos]](lambda(xi) t) and the nonlinearity
-(1 - d_xx)^-1 d_x has symbol ``+i xi / (1 + xi^2)``.  With this choice the continuum L2 norm
of the periodized function is ``sqrt(L * sum |c_k|^2)``, which is the weight
used by :func:`sobolev_norm`.  Coefficient arrays are stored in numpy FFT
order.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Union

import numpy as np

from .errors import SymmetryError

SYMMETRY_TOL = 1e-10


@dataclass(frozen=True)
class GridSpec:
    num_points: int
    domain_length: float = 256.0

    def __post_init__(self):
        n = int(self.num_points)
        if n != self.num_points or n < 16 or n % 2:
            raise ValueError(f"num_points must be an even integer >= 16, got {self.num_points}")
        if not self.domain_length > 0:
            raise ValueError("domain_length must be positive")
        object.__setattr__(self, "num_points", n)
        object.__setattr__(self, "domain_length", float(self.domain_length))

    @property
    def spacing(self) -> float:
        return self.domain_length / self.num_points

    dx = spacing

    @cached_property
    def x(self) -> np.ndarray:
        return -0.5 * self.domain_length + self.spacing * np.arange(self.num_points)

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        """Integer mode indices k in FFT order (the Nyquist mode is -N/2)."""
        return np.fft.fftfreq(self.num_points, 1.0 / self.num_points)

    @cached_property
    def frequencies(self) -> np.ndarray:
        return 2.0 * np.pi * self.wavenumbers / self.domain_length

    @property
    def nyquist_index(self) -> int:
        return self.num_points // 2

    @cached_property
    def _shift(self) -> np.ndarray:
        # exp(i xi_k x_0) with x_0 = -L/2
        return np.where(self.wavenumbers % 2 == 0, 1.0, -1.0)

    @property
    def dealias_cutoff(self) -> int:
        """Largest retained |k| under the 2/3 rule (3K < N)."""
        return (self.num_points - 1) // 3

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        return np.abs(self.wavenumbers) <= self.dealias_cutoff

    @property
    def max_resolved_frequency(self) -> float:
        return 2.0 * np.pi * self.dealias_cutoff / self.domain_length


@dataclass(frozen=True, eq=False)
class RealField:
    grid: GridSpec
    samples: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=np.float64)
        if s.shape != (self.grid.num_points,):
            raise ValueError(f"expected {self.grid.num_points} samples, got shape {s.shape}")
        object.__setattr__(self, "samples", s)


@dataclass(frozen=True, eq=False)
class SpectralField:
    grid: GridSpec
    coefficients: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coefficients, dtype=np.complex128)
        if c.shape != (self.grid.num_points,):
            raise ValueError(f"expected {self.grid.num_points} coefficients, got shape {c.shape}")
        object.__setattr__(self, "coefficients", c)


@dataclass(frozen=True, eq=False)
class WaveState:
    """The pair (eta, v) in physical space."""

    eta: RealField
    v: RealField

    def __post_init__(self):
        if self.eta.grid != self.v.grid:
            raise ValueError("eta and v must share one grid")

    @property
    def grid(self) -> GridSpec:
        return self.eta.grid

    @classmethod
    def from_arrays(cls, grid: GridSpec, eta, v) -> "WaveState":
        return cls(RealField(grid, eta), RealField(grid, v))

    @classmethod
    def zeros(cls, grid: GridSpec) -> "WaveState":
        z = np.zeros(grid.num_points)
        return cls.from_arrays(grid, z, z.copy())

    def as_array(self) -> np.ndarray:
        return np.stack([self.eta.samples, self.v.samples])

    def __add__(self, other: "WaveState") -> "WaveState":
        return WaveState.from_arrays(self.grid, self.eta.samples + other.eta.samples,
                                     self.v.samples + other.v.samples)

    def __sub__(self, other: "WaveState") -> "WaveState":
        return WaveState.from_arrays(self.grid, self.eta.samples - other.eta.samples,
                                     self.v.samples - other.v.samples)

    def __mul__(self, c: float) -> "WaveState":
        return WaveState.from_arrays(self.grid, c * self.eta.samples, c * self.v.samples)

    __rmul__ = __mul__


# -- array-level transforms (used on hot paths; operate on the last axis) ------

def to_spectral(grid: GridSpec, samples: np.ndarray) -> np.ndarray:
    return np.fft.ifft(samples, axis=-1) * grid._shift


def to_physical(grid: GridSpec, coeffs: np.ndarray) -> np.ndarray:
    return np.fft.fft(coeffs * grid._shift, axis=-1).real


def derivative_symbol(grid: GridSpec) -> np.ndarray:
    """Symbol of d/dx, Nyquist mode zeroed."""
    d = -1j * grid.frequencies
    d[grid.nyquist_index] = 0.0
    return d


def symmetry_defect(coeffs: np.ndarray) -> float:
    """max_k |c_{-k} - conj(c_k)|, including the Nyquist mode's imaginary part."""
    mirrored = np.roll(coeffs[..., ::-1], 1, axis=-1)
    return float(np.max(np.abs(mirrored - np.conj(coeffs)), initial=0.0))


def state_to_spectral(u: WaveState) -> np.ndarray:
    """(2, N) complex coefficient array for (eta, v)."""
    return to_spectral(u.grid, u.as_array())


def state_from_spectral(grid: GridSpec, uhat: np.ndarray) -> WaveState:
    phys = to_physical(grid, uhat)
    return WaveState.from_arrays(grid, phys[0], phys[1])


# -- public operations ----------------------------------------------------------

def forward_transform(f: RealField) -> SpectralField:
    return SpectralField(f.grid, to_spectral(f.grid, f.samples))


def inverse_transform(F: SpectralField) -> RealField:
    c = F.coefficients
    scale = max(1.0, float(np.max(np.abs(c), initial=0.0)))
    defect = symmetry_defect(c)
    if defect > SYMMETRY_TOL * scale:
        raise SymmetryError(f"coefficients not conjugate-symmetric (defect {defect:.3e})")
    return RealField(F.grid, to_physical(F.grid, c))


Multiplier = Union[Callable[[np.ndarray], np.ndarray], np.ndarray]


def multiplier_values(grid: GridSpec, m: Multiplier) -> np.ndarray:
    vals = m(grid.frequencies) if callable(m) else m
    vals = np.broadcast_to(np.asarray(vals, dtype=np.complex128), (grid.num_points,))
    if not np.all(np.isfinite(vals)):
        raise ValueError("multiplier is not finite at every grid frequency")
    return vals


def apply_multiplier(F: SpectralField, m: Multiplier) -> SpectralField:
    """Pointwise product in frequency; the unpaired Nyquist mode is zeroed."""
    out = F.coefficients * multiplier_values(F.grid, m)
    out[F.grid.nyquist_index] = 0.0
    return SpectralField(F.grid, out)


def lambda_symbol(xi):
    """Dispersion phase xi / (1 + xi^2)."""
    xi = np.asarray(xi, dtype=np.float64)
    out = xi / (1.0 + xi * xi)
    return float(out) if out.ndim == 0 else out


def japanese_bracket(xi):
    return np.sqrt(1.0 + np.asarray(xi, dtype=np.float64) ** 2)


def sobolev_norm_coeffs(grid: GridSpec, coeffs: np.ndarray, s: float) -> np.ndarray:
    """H^s norm of coefficient arrays along the last axis."""
    w = (1.0 + grid.frequencies ** 2) ** s
    return np.sqrt(grid.domain_length * np.sum(w * np.abs(coeffs) ** 2, axis=-1))


def sobolev_norm(f: Union[RealField, SpectralField], s: float) -> float:
    if isinstance(f, RealField):
        f = forward_transform(f)
    return float(sobolev_norm_coeffs(f.grid, f.coefficients, s))


def pair_norm(u: WaveState, s: float) -> float:
    """||eta||_s + ||v||_s (a sum, not a root-sum-square)."""
    return float(np.sum(sobolev_norm_coeffs(u.grid, state_to_spectral(u), s)))


def hilbert_pair_norm(u: WaveState, s: float) -> float:
    """sqrt(||eta||_s^2 + ||v||_s^2): the inner-product norm of H^s x H^s."""
    n = sobolev_norm_coeffs(u.grid, state_to_spectral(u), s)
    return float(np.sqrt(np.sum(n ** 2)))


def lp_norm(f: RealField, p) -> float:
    a = np.abs(f.samples)
    if p == 1:
        return float(f.grid.dx * np.sum(a))
    if p == 2:
        return float(np.sqrt(f.grid.dx * np.sum(a * a)))
    if p in (np.inf, "inf", float("inf")):
        return float(np.max(a, initial=0.0))
    raise ValueError(f"p must be 1, 2 or inf, got {p!r}")


def derivative(f: RealField) -> RealField:
    """Spectral x-derivative (Nyquist mode dropped)."""
    c = to_spectral(f.grid, f.samples) * derivative_symbol(f.grid)
    return RealField(f.grid, to_physical(f.grid, c))


def random_coefficients(grid: GridSpec, rng: np.random.Generator, envelope_power: float = 2.0,
                        band_limit: int | None = None) -> np.ndarray:
    """Seeded complex Gaussian coefficients with a <xi>^-p envelope, symmetrized to a real field.

    Modes above ``band_limit`` (default: the dealiasing cutoff) and the Nyquist
    mode are zero.
    """
    n = grid.num_points
    kmax = grid.dealias_cutoff if band_limit is None else int(band_limit)
    c = np.zeros(n, dtype=np.complex128)
    pos = np.arange(1, kmax + 1)
    vals = rng.standard_normal(kmax) + 1j * rng.standard_normal(kmax)
    env = (1.0 + grid.frequencies[pos] ** 2) ** (-0.5 * envelope_power)
    c[pos] = vals * env
    c[-pos] = np.conj(c[pos])
    c[0] = rng.standard_normal()
    return c


def random_state(grid: GridSpec, rng: np.random.Generator, amplitude: float = 1.0,
                 envelope_power: float = 2.0) -> WaveState:
    """Random real pair whose X^0 norm (sum of component L2 norms) equals ``amplitude``."""
    c = np.stack([random_coefficients(grid, rng, envelope_power),
                  random_coefficients(grid, rng, envelope_power)])
    c *= amplitude / np.sum(sobolev_norm_coeffs(grid, c, 0.0))
    return state_from_spectral(grid, c)


def gaussian_state(grid: GridSpec, eta_amplitude=0.1, v_amplitude=0.1, width=1.0,
                   eta_center=0.0, v_center=0.0) -> WaveState:
    x = grid.x
    return WaveState.from_arrays(grid, eta_amplitude * np.exp(-((x - eta_center) / width) ** 2),
                                 v_amplitude * np.exp(-((x - v_center) / width) ** 2))
