"""Quantum-jump (Monte Carlo wave function) trajectories for spontaneous
decay from channel 2 into channel 1.

Between jumps the state evolves with the deterministic split-operator step
plus an amplitude damping factor exp(-gamma_sp dt / 2) on channel 2, so its
norm is non-increasing.  Jump times use the first-passage rule: a uniform
target u is drawn at the start and after every jump, and the jump fires at
the first step where the accumulated no-jump survival (the product of the
per-step damping norm ratios) drops below u.  This reproduces the exact
waiting-time distribution independent of dt; the jump instant is the step
boundary, an O(dt) quantization.  Absorbing-mask losses are excluded from
the survival product - absorbed flux has left the grid, it has not decayed.

At a jump the position is sampled from the normalized channel-2 density,
the channel-2 amplitude replaces channel 1 with its spatial profile intact
(position-resolved projective jump), channel 2 is cleared, and the state is
renormalized.

Recorded populations and moments are those of the *normalized* state, so
ensemble means estimate the open-system dynamics directly.

Randomness comes from counter-based Philox generators.  Trajectory i of a
run with base seed b draws from SeedSequence(b, spawn_key=(i,)), a pure
function of (b, i), so ensembles are reproducible and order-independent.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import TwoChannelState
from .model import ModelSpec
from .propagate import DivergenceError, RunConfig, Snapshot, Trajectory, _Stepper

_NAN_CHECK_EVERY = 256


@dataclass(frozen=True)
class JumpRecord:
    t_jump: float
    x_jump: float
    trajectory_id: int


@dataclass
class EnsembleResult:
    """Aggregated trajectories: means, standard errors (sample std / sqrt(n)), all jumps."""

    n_trajectories: int
    base_seed: int
    times: np.ndarray
    mean_p1: np.ndarray
    mean_p2: np.ndarray
    se_p1: np.ndarray
    se_p2: np.ndarray
    jumps: list


def trajectory_rng(base_seed: int, index: int) -> np.random.Generator:
    """The documented seed derivation: Philox keyed by SeedSequence(base, spawn_key=(index,))."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(base_seed, spawn_key=(index,))))


def _moments(x, dx, psi):
    dens = np.abs(psi) ** 2
    p = dens.sum() * dx
    if p <= 1e-12:
        return p, np.nan, np.nan
    mean = float((x * dens).sum() * dx / p)
    return p, mean, float((x * x * dens).sum() * dx / p - mean * mean)


def mcwf_trajectory(
    state: TwoChannelState,
    model: ModelSpec,
    gamma_sp: float,
    cfg: RunConfig,
    seed: int,
    trajectory_id: int = 0,
) -> tuple[Trajectory, list[JumpRecord]]:
    """One stochastic trajectory; deterministic given (seed, trajectory_id).

    With gamma_sp = 0 the recorded populations coincide with the
    deterministic propagation and no jumps occur.
    """
    if gamma_sp < 0.0:
        raise ValueError("gamma_sp must be >= 0")
    grid = state.grid
    stepper = _Stepper(grid, model, cfg)
    rng = trajectory_rng(seed, trajectory_id)
    psi1 = state.psi1.astype(np.complex128, copy=True)
    psi2 = state.psi2.astype(np.complex128, copy=True)
    damp = np.exp(-0.5 * gamma_sp * abs(cfg.dt))
    dx = grid.dx
    n_steps = cfg.n_steps

    survival = 1.0
    target = rng.random()
    jumps: list[JumpRecord] = []
    times, p1s, p2s = [], [], []
    m1s, m2s, v1s, v2s = [], [], [], []
    abss, abs1s, abs2s, survs = [], [], [], []
    snapshots = []
    removed = removed1 = removed2 = 0.0
    ref1 = psi1.copy()
    ref2 = psi2.copy()
    ref_norm = (np.sum(np.abs(ref1) ** 2) + np.sum(np.abs(ref2) ** 2)) * dx

    def record(i):
        p1r, mx1, vx1 = _moments(grid.x, dx, psi1)
        p2r, mx2, vx2 = _moments(grid.x, dx, psi2)
        tot = p1r + p2r
        times.append(i * cfg.dt)
        p1s.append(p1r / tot)
        p2s.append(p2r / tot)
        m1s.append(mx1)
        m2s.append(mx2)
        v1s.append(vx1)
        v2s.append(vx2)
        ov = (np.sum(np.conj(ref1) * psi1) + np.sum(np.conj(ref2) * psi2)) * dx
        survs.append(abs(ov) ** 2 / (ref_norm * tot))
        abss.append(removed)
        abs1s.append(removed1)
        abs2s.append(removed2)

    for i in range(n_steps + 1):
        if i % cfg.record_every == 0 or i == n_steps:
            record(i)
        if cfg.snapshot_every is not None and i % cfg.snapshot_every == 0:
            tot = (np.sum(np.abs(psi1) ** 2) + np.sum(np.abs(psi2) ** 2)) * dx
            snapshots.append(
                Snapshot(i * cfg.dt, np.abs(psi1) ** 2 / tot, np.abs(psi2) ** 2 / tot)
            )
        if i == n_steps:
            break

        psi1, psi2 = stepper.advance(psi1, psi2, i * cfg.dt)
        # decay damping, tracked separately from absorber losses
        before = (np.sum(np.abs(psi1) ** 2) + np.sum(np.abs(psi2) ** 2)) * dx
        psi2 *= damp
        after = (np.sum(np.abs(psi1) ** 2) + np.sum(np.abs(psi2) ** 2)) * dx
        if before > 0.0:
            survival *= after / before
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

        if survival < target:
            dens2 = np.abs(psi2) ** 2 * dx
            p2r = dens2.sum()
            if p2r <= 0.0:
                raise DivergenceError(f"jump fired with empty channel 2 at step {i + 1}")
            x_jump = float(rng.choice(grid.x, p=dens2 / p2r))
            jumps.append(JumpRecord((i + 1) * cfg.dt, x_jump, trajectory_id))
            psi1 = psi2 / np.sqrt(p2r)
            psi2 = np.zeros_like(psi2)
            survival = 1.0
            target = rng.random()

        if (i + 1) % _NAN_CHECK_EVERY == 0 and (
            np.isnan(psi1).any() or np.isnan(psi2).any()
        ):
            raise DivergenceError(f"NaN amplitudes at step {i + 1}")

    traj = Trajectory(
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
    return traj, jumps


def nojump_benchmark(
    state: TwoChannelState, model: ModelSpec, gamma_sp: float, cfg: RunConfig
) -> tuple[Trajectory, np.ndarray]:
    """Deterministic damped evolution with jumps disabled.

    Returns the trajectory (normalized populations, comparable to ensemble
    means in the single-decay regime) and the accumulated unnormalized jump
    intensity gamma_sp * |psi2(x, t)|^2 dt summed over steps - the expected
    density of first-jump positions on the grid.
    """
    grid = state.grid
    stepper = _Stepper(grid, model, cfg)
    psi1 = state.psi1.astype(np.complex128, copy=True)
    psi2 = state.psi2.astype(np.complex128, copy=True)
    damp = np.exp(-0.5 * gamma_sp * abs(cfg.dt))
    intensity = np.zeros(grid.n_points)
    times, p1s, p2s = [], [], []
    dx = grid.dx
    n_steps = cfg.n_steps
    for i in range(n_steps + 1):
        if i % cfg.record_every == 0 or i == n_steps:
            p1r = np.sum(np.abs(psi1) ** 2) * dx
            p2r = np.sum(np.abs(psi2) ** 2) * dx
            times.append(i * cfg.dt)
            p1s.append(p1r / (p1r + p2r))
            p2s.append(p2r / (p1r + p2r))
        if i == n_steps:
            break
        psi1, psi2 = stepper.advance(psi1, psi2, i * cfg.dt)
        intensity += gamma_sp * np.abs(psi2) ** 2 * abs(cfg.dt)
        psi2 *= damp
        if stepper.mask is not None:
            psi1 *= stepper.mask
            psi2 *= stepper.mask
    empty = np.full(len(times), np.nan)
    traj = Trajectory(
        grid=grid,
        times=np.asarray(times),
        p1=np.asarray(p1s),
        p2=np.asarray(p2s),
        mean_x1=empty.copy(),
        mean_x2=empty.copy(),
        var_x1=empty.copy(),
        var_x2=empty.copy(),
        survival=empty.copy(),
        absorbed_norm=np.zeros(len(times)),
        absorbed_ch1=np.zeros(len(times)),
        absorbed_ch2=np.zeros(len(times)),
        snapshots=[],
    )
    return traj, intensity


def mcwf_ensemble(
    base_seed: int,
    n: int,
    state: TwoChannelState,
    model: ModelSpec,
    gamma_sp: float,
    cfg: RunConfig,
) -> EnsembleResult:
    """n independent trajectories with seeds derived from (base_seed, index).

    Aggregation stacks the per-trajectory series in index order, so the
    result does not depend on execution order.
    """
    if n < 2:
        raise ValueError("ensemble needs n >= 2 trajectories")
    all_p1 = []
    all_p2 = []
    jumps: list[JumpRecord] = []
    times = None
    for i in range(n):
        traj, traj_jumps = mcwf_trajectory(
            state, model, gamma_sp, cfg, seed=base_seed, trajectory_id=i
        )
        if times is None:
            times = traj.times
        all_p1.append(traj.p1)
        all_p2.append(traj.p2)
        jumps.extend(traj_jumps)
    p1 = np.vstack(all_p1)
    p2 = np.vstack(all_p2)
    root_n = np.sqrt(n)
    return EnsembleResult(
        n_trajectories=n,
        base_seed=base_seed,
        times=times,
        mean_p1=p1.mean(axis=0),
        mean_p2=p2.mean(axis=0),
        se_p1=p1.std(axis=0, ddof=1) / root_n,
        se_p2=p2.std(axis=0, ddof=1) / root_n,
        jumps=jumps,
    )
