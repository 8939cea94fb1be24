"""Bound level decaying into a sloped continuum: the exponential regime
and its breakdown.

The harmonic ground level is coupled suddenly (constant V) to a linear
slope whose continuum is resonant with it at x = 0.  In the weak-coupling
regime the bound population decays exponentially at the golden-rule rate
2 pi V^2 |S|^2, with S the bound-to-continuum Condon overlap; pushing the
nominal rate above ~1 makes the decay ring with flopping oscillations
instead.
"""

import numpy as np

import wpsim as w

alpha = 2.0
grid = w.make_grid(-12.0, 52.0, 2048)
state = w.harmonic_ground_state(grid)

print("Condon overlap between the bound Gaussian and the resonant Airy state:")
s_quad = w.condon_factor(alpha, "quadrature")
s_refl = w.condon_factor(alpha, "reflection")
print(f"  quadrature |S|^2 = {s_quad.magnitude_sq:.6f}")
print(f"  reflection |S|^2 = {s_refl.magnitude_sq:.6f}  "
      f"(steep-slope limit, {abs(s_quad.magnitude_sq/s_refl.magnitude_sq-1):.1%} apart at alpha=2)")

print("\nnominal-rate scan (fit of the initial-state survival):")
print("  G_nom   gamma_fit   r^2       minima   regime")
for gamma_nom in (0.1, 0.26, 0.5, 1.0, 2.4):
    v = w.coupling_for_rate(gamma_nom, alpha)
    model = w.ModelSpec(
        u1=w.harmonic_potential(),
        u2_minus_omega=w.linear_potential(w.GROUND_STATE_ENERGY, alpha),
        pulse=w.constant_pulse(v),
    )
    horizon = min(max(3.2 / gamma_nom, 6.0), 30.0)
    cfg = w.RunConfig(dt=0.001, t_final=horizon, record_every=10,
                      absorber=w.AbsorberSpec(6.0, 1000.0))
    traj = w.propagate(state, model, cfg)
    fit = w.fit_decay_rate(traj.times, traj.survival)
    osc = w.detect_oscillation(traj.survival)
    regime = "oscillatory" if osc.is_oscillatory else "exponential"
    print(f"  {gamma_nom:5.2f}   {fit.gamma_fit:8.5f}   {fit.r_squared:.5f}   "
          f"{osc.n_local_minima:4d}   {regime}")

print("\nweak-coupling benchmark (nominal 0.26, channel population):")
v26 = w.coupling_for_rate(0.26, alpha)
model = w.ModelSpec(
    u1=w.harmonic_potential(),
    u2_minus_omega=w.linear_potential(w.GROUND_STATE_ENERGY, alpha),
    pulse=w.constant_pulse(v26),
)
cfg = w.RunConfig(dt=0.001, t_final=12.0, record_every=10,
                  absorber=w.AbsorberSpec(6.0, 1000.0))
traj = w.propagate(state, model, cfg)
fit = w.fit_decay_rate(traj.times, traj.p1)
gamma_quad = w.ww_rate_condon(v26, s_quad)
print(f"  fitted rate     = {fit.gamma_fit:.5f}  (r^2 = {fit.r_squared:.6f})")
print(f"  golden rule     = {gamma_quad:.5f}  -> agreement {fit.gamma_fit/gamma_quad:.4f}")
print(f"  survival law: p1(t) vs exp(-Gamma t) at t = 1/Gamma: "
      f"{np.interp(1/gamma_quad, traj.times, traj.p1):.4f} vs "
      f"{w.survival_probability(gamma_quad, 1/gamma_quad):.4f}")
