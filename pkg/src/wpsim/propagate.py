"""Split-operator time evolution of a two-channel state.

Each step is a symmetric (Strang) splitting:

    half kinetic  ->  exact pointwise 2x2 potential+coupling  ->  half kinetic

The kinetic factor exp(-i k^2 dt/2) uses the exact discrete-transform
dispersion; the 2x2 factor is the closed-form unitary exp(-i dt H(x)) with
H(x) = [[u1, V], [V, u2 + delta_omega]], evaluated with the coupling and
chirp at the half-step midpoint.  The scheme is unconditionally stable and
second-order accurate in dt for time-dependent pulses.

Step-size guidance: keep dt * |U| <= 0.05 over the region where the state
has support and dt * k_occ^2 <= 0.5 for the largest momentum k_occ the
packet actually reaches (the absorber caps k_occ by removing accelerated
flux before it wraps).

An optional absorbing mask multiplies both channels after each step.  Its
edge profile is cos(pi/2 * s)^(1/8) (s ramping 0 -> 1 across the zone),
raised to the power strength*dt so that the attenuation per unit time is
independent of the step size; without that scaling the absorber has no
dt -> 0 limit and timestep-refinement studies are meaningless.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from ._fft import fft, ifft
from .grid import Grid, TwoChannelState, norm, overlap
from .model import ModelSpec, potential_on_grid, pulse_value

_NAN_CHECK_EVERY = 256
_MOMENT_FLOOR = 1e-12


class DivergenceError(RuntimeError):
    """NaN detected during propagation."""


@dataclass(frozen=True)
class AbsorberSpec:
    """Edge mask: zone width (each side) and attenuation rate (per unit time)."""

    width: float
    strength: float = 1000.0


@dataclass(frozen=True)
class RunConfig:
    """Numerical policy for one propagation.

    dt may be negative for backward evolution; t_final is the horizon
    magnitude.  record_every / snapshot_every count steps; snapshot_every
    None disables snapshots.
    """

    dt: float
    t_final: float
    absorber: Optional[AbsorberSpec] = None
    record_every: int = 10
    snapshot_every: Optional[int] = None

    def __post_init__(self):
        if self.dt == 0.0:
            raise ValueError("dt must be nonzero")
        if self.t_final < abs(self.dt):
            raise ValueError("t_final must cover at least one step")
        if self.record_every < 1:
            raise ValueError("record_every must be >= 1")
        if self.snapshot_every is not None and self.snapshot_every < 1:
            raise ValueError("snapshot_every must be >= 1 or None")

    @property
    def n_steps(self) -> int:
        return int(round(self.t_final / abs(self.dt)))


class Snapshot(NamedTuple):
    t: float
    density1: np.ndarray
    density2: np.ndarray


@dataclass
class Trajectory:
    """Recorded series from one propagation.

    Populations are plain Riemann sums; per-channel means/variances are
    conditioned on the channel population and NaN while the channel holds
    less than 1e-12 probability.  ``survival`` is |<state(0)|state(t)>|^2.
    With an absorber, p1 + p2 + absorbed_norm is conserved.
    """

    grid: Grid
    times: np.ndarray
    p1: np.ndarray
    p2: np.ndarray
    mean_x1: np.ndarray
    mean_x2: np.ndarray
    var_x1: np.ndarray
    var_x2: np.ndarray
    survival: np.ndarray
    absorbed_norm: np.ndarray
    absorbed_ch1: np.ndarray
    absorbed_ch2: np.ndarray
    snapshots: list = field(default_factory=list)
    final_state: Optional[TwoChannelState] = None


def coupling_step(u1: float, u2: float, v: float, dt: float) -> np.ndarray:
    """Exact 2x2 unitary exp(-i dt [[u1, v], [v, u2]]).

    Closed form through the mean / half-difference / flopping-frequency
    parametrization; unitary to machine precision for any finite inputs.
    """
    a11, a12, a22 = _coupling_factors(
        np.asarray(float(u1)), np.asarray(float(u2)), float(v), float(dt)
    )
    return np.array([[complex(a11), complex(a12)], [complex(a12), complex(a22)]])


def _coupling_factors(u1, u2, v, dt):
    """Entries (a11, a12, a22) of exp(-i dt [[u1, v], [v, u2]]), vectorized over x."""
    mean = 0.5 * (u1 + u2)
    half = 0.5 * (u1 - u2)
    omega = np.sqrt(half * half + v * v)
    phase = np.exp(-1j * mean * dt)
    cos = np.cos(omega * dt)
    # sin(omega dt)/omega, exact at omega = 0
    sinc = np.sinc(omega * dt / np.pi) * dt
    a11 = phase * (cos - 1j * sinc * half)
    a12 = phase * (-1j * sinc * v)
    a22 = phase * (cos + 1j * sinc * half)
    return a11, a12, a22


def absorber_profile(grid: Grid, absorber: AbsorberSpec) -> np.ndarray:
    """cos^(1/8) edge profile: 1 in the interior, dipping to ~0 at both boundaries."""
    if not 0.0 < absorber.width < 0.5 * grid.length:
        raise ValueError("absorber width must be positive and below half the grid extent")
    prof = np.ones(grid.n_points)
    left = grid.x < grid.x_min + absorber.width
    right = grid.x > grid.x_max - absorber.width
    s_left = (grid.x_min + absorber.width - grid.x[left]) / absorber.width
    s_right = (grid.x[right] - (grid.x_max - absorber.width)) / absorber.width
    prof[left] = np.cos(0.5 * np.pi * s_left) ** 0.125
    prof[right] = np.cos(0.5 * np.pi * s_right) ** 0.125
    return prof


def absorber_mask(grid: Grid, absorber: AbsorberSpec, dt: float) -> np.ndarray:
    """Per-step multiplier profile**(strength*|dt|)."""
    return absorber_profile(grid, absorber) ** (absorber.strength * abs(dt))


def apply_absorber(state: TwoChannelState, mask: np.ndarray) -> tuple[TwoChannelState, float]:
    """Multiply both channels by the mask; returns (state, removed norm >= 0)."""
    before = norm(state).total
    out = TwoChannelState(state.grid, state.psi1 * mask, state.psi2 * mask)
    return out, before - norm(out).total


class _Stepper:
    """Precomputed factors for repeated steps of one (grid, model, cfg) triple."""

    def __init__(self, grid: Grid, model: ModelSpec, cfg: RunConfig):
        self.grid = grid
        self.model = model
        self.dt = cfg.dt
        self.u1 = potential_on_grid(model.u1, grid)
        self.u2 = potential_on_grid(model.u2_minus_omega, grid)
        self.kin_half = np.exp(-1j * grid.k**2 * (0.5 * self.dt))
        self.mask = absorber_mask(grid, cfg.absorber, cfg.dt) if cfg.absorber else None
        self._static = (
            model.pulse.envelope == "constant" and model.pulse.chirp_rate == 0.0
        )
        self._factors = (
            _coupling_factors(self.u1, self.u2, model.pulse.v0, self.dt)
            if self._static
            else None
        )

    def factors_at(self, t: float):
        if self._static:
            return self._factors
        v, d_omega = pulse_value(self.model.pulse, t + 0.5 * self.dt)
        return _coupling_factors(self.u1, self.u2 + d_omega, v, self.dt)

    def advance(self, psi1: np.ndarray, psi2: np.ndarray, t: float):
        """One Strang step, absorber not included; returns new (psi1, psi2)."""
        a11, a12, a22 = self.factors_at(t)
        f1 = ifft(self.kin_half * fft(psi1))
        f2 = ifft(self.kin_half * fft(psi2))
        g1 = a11 * f1 + a12 * f2
        g2 = a12 * f1 + a22 * f2
        return ifft(self.kin_half * fft(g1)), ifft(self.kin_half * fft(g2))


def step(state: TwoChannelState, model: ModelSpec, t: float, cfg: RunConfig) -> TwoChannelState:
    """One full step from time t, including the absorber if configured."""
    stepper = _Stepper(state.grid, model, cfg)
    psi1, psi2 = stepper.advance(state.psi1, state.psi2, t)
    out = TwoChannelState(state.grid, psi1, psi2)
    if stepper.mask is not None:
        out, _ = apply_absorber(out, stepper.mask)
    return out


def _channel_moments(x, dx, psi):
    dens = np.abs(psi) ** 2
    p = dens.sum() * dx
    if p <= _MOMENT_FLOOR:
        return p, np.nan, np.nan
    mean = float((x * dens).sum() * dx / p)
    var = float((x * x * dens).sum() * dx / p - mean * mean)
    return p, mean, var


def propagate(state: TwoChannelState, model: ModelSpec, cfg: RunConfig) -> Trajectory:
    """Evolve from t = 0 through n_steps = round(t_final/|dt|) steps.

    Populations and moments are recorded at step 0, every record_every
    steps, and at the final step; snapshots follow snapshot_every.  The run
    is deterministic for identical inputs and thread configuration.
    """
    grid = state.grid
    stepper = _Stepper(grid, model, cfg)
    psi1 = state.psi1.astype(np.complex128, copy=True)
    psi2 = state.psi2.astype(np.complex128, copy=True)
    ref = TwoChannelState(grid, psi1.copy(), psi2.copy())

    n_steps = cfg.n_steps
    times, p1s, p2s = [], [], []
    m1s, m2s, v1s, v2s = [], [], [], []
    survs, abss, abs1s, abs2s = [], [], [], []
    snapshots = []
    removed = removed1 = removed2 = 0.0
    dx = grid.dx

    def record(i):
        t = i * cfg.dt
        p1, mx1, vx1 = _channel_moments(grid.x, dx, psi1)
        p2, mx2, vx2 = _channel_moments(grid.x, dx, psi2)
        cur = TwoChannelState(grid, psi1, psi2)
        times.append(t)
        p1s.append(p1)
        p2s.append(p2)
        m1s.append(mx1)
        m2s.append(mx2)
        v1s.append(vx1)
        v2s.append(vx2)
        survs.append(abs(overlap(ref, cur)) ** 2)
        abss.append(removed)
        abs1s.append(removed1)
        abs2s.append(removed2)

    for i in range(n_steps + 1):
        if i % cfg.record_every == 0 or i == n_steps:
            record(i)
        if cfg.snapshot_every is not None and i % cfg.snapshot_every == 0:
            snapshots.append(Snapshot(i * cfg.dt, np.abs(psi1) ** 2, np.abs(psi2) ** 2))
        if i == n_steps:
            break
        psi1, psi2 = stepper.advance(psi1, psi2, i * cfg.dt)
        if stepper.mask is not None:
            b1 = np.sum(np.abs(psi1) ** 2) * dx
            b2 = np.sum(np.abs(psi2) ** 2) * dx
            psi1 *= stepper.mask
            psi2 *= stepper.mask
            d1 = b1 - np.sum(np.abs(psi1) ** 2) * dx
            d2 = b2 - np.sum(np.abs(psi2) ** 2) * dx
            removed1 += d1
            removed2 += d2
            removed += d1 + d2
        if (i + 1) % _NAN_CHECK_EVERY == 0 and (
            np.isnan(psi1).any() or np.isnan(psi2).any()
        ):
            raise DivergenceError(f"NaN amplitudes at step {i + 1}")

    if np.isnan(psi1).any() or np.isnan(psi2).any():
        raise DivergenceError(f"NaN amplitudes at step {n_steps}")

    return Trajectory(
        grid=grid,
        times=np.asarray(times),
        p1=np.asarray(p1s),
        p2=np.asarray(p2s),
        mean_x1=np.asarray(m1s),
        mean_x2=np.asarray(m2s),
        var_x1=np.asarray(v1s),
        var_x2=np.asarray(v2s),
        survival=np.asarray(survs),
        absorbed_norm=np.asarray(abss),
        absorbed_ch1=np.asarray(abs1s),
        absorbed_ch2=np.asarray(abs2s),
        snapshots=snapshots,
        final_state=TwoChannelState(grid, psi1, psi2),
    )
