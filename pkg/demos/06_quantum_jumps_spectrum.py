"""Quantum-jump trajectories and the emission spectrum.

Spontaneous decay is unraveled into stochastic pure-state trajectories:
non-unitary damping of the excited channel between jumps, projective
transfers to the ground channel at the jump instants.  With no coupling
the jump times are exactly exponential; each jump's position maps through
the difference potential to the central frequency of the photon emitted
there, so the jump statistics build the emission spectrum.
"""

import numpy as np
from scipy import stats

import wpsim as w

# --- jump-time statistics against the exponential law -----------------
gamma, horizon, n_traj = 1.0, 5.0, 400
grid = w.make_grid(-8.0, 8.0, 64)
excited = w.gaussian_packet(grid, 0.0, 0.7, channel=2)
free = w.ModelSpec(w.flat_potential(), w.flat_potential(), w.constant_pulse(0.0))
cfg = w.RunConfig(dt=0.01, t_final=horizon, record_every=25)

ensemble = w.mcwf_ensemble(7, n_traj, excited, free, gamma, cfg)
theory = np.exp(-gamma * ensemble.times)
worst = np.max(np.abs(ensemble.mean_p2 - theory) / np.maximum(ensemble.se_p2, 1e-300))
print(f"{n_traj} trajectories, {len(ensemble.jumps)} jumps")
print(f"ensemble survival vs exp(-t): worst deviation {worst:.2f} standard errors")

times = [j.t_jump for j in ensemble.jumps]
cdf = lambda t: (1 - np.exp(-gamma * np.asarray(t))) / (1 - np.exp(-gamma * horizon))
ks = stats.kstest(times, cdf)
print(f"KS test of jump times against the truncated exponential: p = {ks.pvalue:.3f}")

# --- emission spectrum from decay on a slope ---------------------------
print("\ndecaying packet sliding down a slope:")
wide = w.make_grid(-30.0, 30.0, 256)
packet = w.gaussian_packet(wide, 0.0, 1.0, channel=2)
sloped = w.ModelSpec(
    u1=w.flat_potential(),
    u2_minus_omega=w.linear_potential(0.0, 1.0),
    pulse=w.constant_pulse(0.0),
)
cfg2 = w.RunConfig(dt=0.01, t_final=2.5, record_every=25)
ens2 = w.mcwf_ensemble(41, 400, packet, sloped, 1.5, cfg2)
spectrum = w.emission_spectrum(ens2.jumps, sloped, n_bins=13)

_, intensity = w.nojump_benchmark(packet, sloped, 1.5, cfg2)
x_star = wide.x[np.argmax(intensity)]
print(f"expected emission peak: difference potential at x = {x_star:.2f} "
      f"-> frequency {w.difference_potential(sloped, float(x_star)):+.3f}")
print("\n  frequency bin        counts")
scale = 56.0 / spectrum.counts.max()
for lo, hi, c in zip(spectrum.bin_edges[:-1], spectrum.bin_edges[1:], spectrum.counts):
    print(f"  [{lo:+7.2f}, {hi:+7.2f})  {int(c):5d}  {'#' * int(c * scale)}")
