"""Spatial grid, two-channel wavefunctions, inner products, ground-state prep.

Scaled units throughout: hbar = 1 and the kinetic operator is exactly
-d2/dx2 (i.e. effective mass 1/2).  The harmonic reference potential is
U(x) = x^2/2, whose ground state is the Gaussian

    phi0(x) = (2 pi^2)^(-1/8) exp(-x^2 / (2 sqrt(2)))

with energy 1/sqrt(2) and position variance sqrt(2)/2.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from ._fft import fft, ifft

GROUND_STATE_ENERGY = 1.0 / np.sqrt(2.0)
# peak probability density of the harmonic ground state, |phi0(0)|^2
GROUND_STATE_PEAK_DENSITY = (2.0 * np.pi**2) ** (-0.25)
GROUND_STATE_VARIANCE = np.sqrt(2.0) / 2.0

_TAIL_LIMIT = 1e-12


class GridError(ValueError):
    """Invalid grid construction or a state that does not fit the grid."""


class GridMismatchError(ValueError):
    """Operands live on different grids."""


class RelaxationError(RuntimeError):
    """Imaginary-time relaxation failed to converge."""


@dataclass(frozen=True)
class Grid:
    """Uniform periodic lattice with its paired momentum lattice.

    ``x`` holds the nodes x_min + i*dx for i in [0, n_points); x_max is the
    periodic image of x_min and is not a node.  ``k`` holds the discrete
    transform frequencies in FFT order, spanning [-pi/dx, pi/dx) with
    spacing 2*pi/(x_max - x_min).
    """

    x_min: float
    x_max: float
    n_points: int
    dx: float = field(init=False)
    x: np.ndarray = field(init=False, repr=False)
    k: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        dx = (self.x_max - self.x_min) / self.n_points
        object.__setattr__(self, "dx", dx)
        object.__setattr__(self, "x", self.x_min + dx * np.arange(self.n_points))
        object.__setattr__(self, "k", 2.0 * np.pi * np.fft.fftfreq(self.n_points, d=dx))

    @property
    def length(self) -> float:
        return self.x_max - self.x_min

    def same_as(self, other: "Grid") -> bool:
        return (
            self.x_min == other.x_min
            and self.x_max == other.x_max
            and self.n_points == other.n_points
        )


@dataclass
class TwoChannelState:
    """Complex amplitudes psi1 (channel 1, bound) and psi2 (channel 2) on a grid."""

    grid: Grid
    psi1: np.ndarray
    psi2: np.ndarray

    def copy(self) -> "TwoChannelState":
        return TwoChannelState(self.grid, self.psi1.copy(), self.psi2.copy())


class Populations(NamedTuple):
    total: float
    p1: float
    p2: float


def make_grid(x_min: float, x_max: float, n_points: int) -> Grid:
    """Build a uniform grid; n_points must be a power of two >= 64."""
    if not x_max > x_min:
        raise GridError(f"degenerate interval: x_min={x_min!r}, x_max={x_max!r}")
    if n_points < 64 or (n_points & (n_points - 1)) != 0:
        raise GridError(f"n_points must be a power of two >= 64, got {n_points}")
    return Grid(float(x_min), float(x_max), int(n_points))


def _empty_channels(grid: Grid):
    return (
        np.zeros(grid.n_points, dtype=np.complex128),
        np.zeros(grid.n_points, dtype=np.complex128),
    )


def harmonic_ground_state(grid: Grid) -> TwoChannelState:
    """Ground state of -d2/dx2 + x^2/2 on channel 1, channel 2 empty.

    The analytic Gaussian is sampled on the grid and renormalized with the
    Riemann weight so the discrete norm is exactly 1.  Raises GridError when
    the Gaussian tail at the nearer boundary exceeds 1e-12 of the peak.
    """
    edge = min(abs(grid.x_min), abs(grid.x_max))
    tail = np.exp(-(edge**2) / (2.0 * np.sqrt(2.0)))
    if not (grid.x_min < 0.0 < grid.x_max) or tail >= _TAIL_LIMIT:
        raise GridError(
            f"grid too narrow for the harmonic ground state: boundary tail {tail:.3e}"
        )
    psi1, psi2 = _empty_channels(grid)
    psi1[:] = np.exp(-grid.x**2 / (2.0 * np.sqrt(2.0)))
    psi1 /= np.sqrt(np.sum(np.abs(psi1) ** 2) * grid.dx)
    return TwoChannelState(grid, psi1, psi2)


def gaussian_packet(
    grid: Grid, center: float, sigma: float, k0: float = 0.0, channel: int = 1
) -> TwoChannelState:
    """Normalized Gaussian packet exp(-(x-center)^2/(4 sigma^2) + i k0 x).

    sigma is the standard deviation of the probability density; the mean
    momentum is k0 (group velocity 2*k0 under the -d2/dx2 kinetic term).
    """
    if sigma <= 0.0:
        raise ValueError("sigma must be positive")
    if channel not in (1, 2):
        raise ValueError("channel must be 1 or 2")
    psi = np.exp(-((grid.x - center) ** 2) / (4.0 * sigma**2)) * np.exp(1j * k0 * grid.x)
    psi /= np.sqrt(np.sum(np.abs(psi) ** 2) * grid.dx)
    psi1, psi2 = _empty_channels(grid)
    if channel == 1:
        psi1[:] = psi
    else:
        psi2[:] = psi
    return TwoChannelState(grid, psi1, psi2)


def norm(state: TwoChannelState) -> Populations:
    """Riemann-sum populations (total, p1, p2); p1 + p2 == total."""
    dx = state.grid.dx
    p1 = float(np.sum(np.abs(state.psi1) ** 2) * dx)
    p2 = float(np.sum(np.abs(state.psi2) ** 2) * dx)
    return Populations(p1 + p2, p1, p2)


def overlap(a: TwoChannelState, b: TwoChannelState) -> complex:
    """Two-channel inner product <a|b> with the Riemann weight."""
    if not a.grid.same_as(b.grid):
        raise GridMismatchError("overlap requires states on the same grid")
    acc = np.sum(np.conj(a.psi1) * b.psi1) + np.sum(np.conj(a.psi2) * b.psi2)
    return complex(acc * a.grid.dx)


def momentum_norm(state: TwoChannelState) -> float:
    """Total norm evaluated in momentum space (Parseval check)."""
    g = state.grid
    dk = 2.0 * np.pi / g.length
    scale = g.dx / np.sqrt(2.0 * np.pi)
    t1 = np.sum(np.abs(fft(state.psi1) * scale) ** 2)
    t2 = np.sum(np.abs(fft(state.psi2) * scale) ** 2)
    return float((t1 + t2) * dk)


def energy_expectation(grid: Grid, psi: np.ndarray, potential_values: np.ndarray) -> float:
    """Rayleigh quotient <psi| k^2 + U |psi> / <psi|psi> on one channel."""
    nrm = np.sum(np.abs(psi) ** 2)
    if nrm == 0.0:
        raise ValueError("empty wavefunction")
    kin = np.sum(grid.k**2 * np.abs(fft(psi)) ** 2) / grid.n_points
    pot = np.sum(potential_values * np.abs(psi) ** 2)
    return float((kin + pot) / nrm)


def imaginary_time_relax(
    grid: Grid,
    potential_values: np.ndarray,
    dt: float = 0.005,
    max_iters: int = 50000,
    tol: float = 1e-10,
) -> tuple[TwoChannelState, float]:
    """Lowest eigenstate of -d2/dx2 + U by diffusion with renormalization.

    Uses the symmetric split exp(-U dt/2) exp(-k^2 dt) exp(-U dt/2) from a
    uniform start, renormalizing each sweep.  The returned energy is the
    Rayleigh quotient of the true grid Hamiltonian, so its error is fourth
    order in dt once the iteration is stationary to ``tol``.
    """
    potential_values = np.asarray(potential_values, dtype=float)
    if potential_values.shape != (grid.n_points,):
        raise ValueError("potential_values must be sampled on the grid")
    if not np.all(np.isfinite(potential_values)):
        raise ValueError("potential must be finite on the grid")
    half_pot = np.exp(-0.5 * dt * (potential_values - potential_values.min()))
    kin = np.exp(-dt * grid.k**2)

    psi = np.full(grid.n_points, 1.0 / np.sqrt(grid.length), dtype=np.complex128)
    energy = energy_expectation(grid, psi, potential_values)
    for i in range(1, max_iters + 1):
        psi = half_pot * psi
        psi = ifft(kin * fft(psi))
        psi = half_pot * psi
        psi /= np.sqrt(np.sum(np.abs(psi) ** 2) * grid.dx)
        if i % 10 == 0 or i == max_iters:
            new_energy = energy_expectation(grid, psi, potential_values)
            if abs(new_energy - energy) < tol:
                psi1, psi2 = _empty_channels(grid)
                psi1[:] = psi
                return TwoChannelState(grid, psi1, psi2), new_energy
            energy = new_energy
    raise RelaxationError(
        f"imaginary-time relaxation not stationary to {tol:g} within {max_iters} sweeps"
    )
