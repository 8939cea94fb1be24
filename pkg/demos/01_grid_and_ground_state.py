"""Grid construction and bound-state preparation.

Builds the spectral grid, prepares the harmonic ground state, and
cross-checks it against an imaginary-time relaxation of the same
Hamiltonian: energies must agree to 1e-6 and the states must overlap to
better than 1 - 1e-8.
"""

import numpy as np

import wpsim as w

grid = w.make_grid(-10.0, 10.0, 256)
print(f"grid: x in [{grid.x_min}, {grid.x_max}), {grid.n_points} nodes, dx = {grid.dx}")
print(f"momentum lattice: |k| <= {np.max(np.abs(grid.k)):.4f} with spacing {grid.k[1]:.4f}")

state = w.harmonic_ground_state(grid)
u1 = w.potential_on_grid(w.harmonic_potential(), grid)
energy = w.energy_expectation(grid, state.psi1, u1)
print(f"\nanalytic Gaussian ground state:")
print(f"  energy        = {energy:.10f}   (exact: 1/sqrt(2) = {1/np.sqrt(2):.10f})")
print(f"  peak density  = {abs(state.psi1[128])**2:.10f}   (exact: (2 pi^2)^(-1/4))")
print(f"  norm          = {w.norm(state).total:.2e}")
moments = w.position_moments(state, 1)
print(f"  <x> = {moments.mean:+.2e},  var(x) = {moments.variance:.10f}  (exact sqrt(2)/2)")

relaxed, relaxed_energy = w.imaginary_time_relax(grid, u1)
fidelity = abs(w.overlap(relaxed, state)) ** 2
print(f"\nimaginary-time relaxation oracle:")
print(f"  energy   = {relaxed_energy:.10f}  (|diff| = {abs(relaxed_energy-energy):.1e})")
print(f"  fidelity = {fidelity:.12f}")

print(f"\nmomentum-space norm (Parseval): {w.momentum_norm(state):.12f}")
