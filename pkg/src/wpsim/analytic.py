"""Closed-form reference models the grid propagation must reproduce.

Decay of the harmonic ground level into the linear-slope continuum follows
the Weisskopf-Wigner golden rule

    rate = 2 pi V^2 |S|^2,

with S the Franck-Condon overlap between the bound state and the
energy-normalized continuum eigenstate at the resonant energy 1/sqrt(2).
For the slope U(x) = 1/sqrt(2) - alpha*x those eigenstates are Airy
functions; delta-normalization in energy fixes them as

    chi_eps(x) = alpha^(-1/6) Ai(alpha^(1/3) (x_eps - x)),   x_eps = (1/sqrt(2) - eps)/alpha,

so |S|^2 carries 1/energy units and the rate is a pure number.  In the
steep-slope (reflection) limit |S|^2 -> |phi0(0)|^2 / alpha and the rate
reduces to 2 pi V^2 / (alpha (2 pi^2)^(1/4)).

Landau-Zener transit through a linear crossing at speed v keeps the packet
on its initial diabatic channel with probability exp(-2 pi V^2 / (|dF| v));
the sweep rate of the energy gap is v * |dF| and the packet velocity is
twice its mean momentum (mass 1/2 units).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import simpson
from scipy.special import airy

from .grid import GROUND_STATE_ENERGY, GROUND_STATE_PEAK_DENSITY


class QuadratureError(RuntimeError):
    """Condon-factor quadrature failed to converge."""


@dataclass(frozen=True)
class DecayModelParams:
    """Constant coupling V to the slope alpha; bound level fixed at 1/sqrt(2)."""

    v: float
    alpha: float
    omega0: float = GROUND_STATE_ENERGY

    def __post_init__(self):
        if self.v < 0.0:
            raise ValueError("coupling v must be >= 0")
        if self.alpha <= 0.0:
            raise ValueError("slope alpha must be positive")


@dataclass(frozen=True)
class CondonFactor:
    magnitude_sq: float  # 1/energy units (energy-normalized continuum)
    method: str  # "reflection" | "quadrature"


def condon_factor(alpha: float, method: str = "quadrature") -> CondonFactor:
    """|S|^2 between the bound Gaussian and the resonant continuum state.

    reflection: the steep-slope limit |phi0(0)|^2 / alpha, exact as
    alpha -> infinity.  quadrature: the Airy overlap integral, evaluated by
    composite Simpson with mesh doubling until successive |S|^2 estimates
    differ by less than 1e-6.
    """
    if alpha <= 0.0:
        raise ValueError("alpha must be positive")
    if method == "reflection":
        return CondonFactor(GROUND_STATE_PEAK_DENSITY / alpha, "reflection")
    if method != "quadrature":
        raise ValueError(f"unknown method {method!r}")

    span = 12.0  # bound-state tail < 1e-22 of peak beyond |x| = 12
    amp = np.sqrt(GROUND_STATE_PEAK_DENSITY)
    cbrt = alpha ** (1.0 / 3.0)
    prev = None
    n = 1 << 11
    while n <= (1 << 21):
        x = np.linspace(-span, span, n + 1)
        integrand = (
            amp
            * np.exp(-(x**2) / (2.0 * np.sqrt(2.0)))
            * alpha ** (-1.0 / 6.0)
            * airy(-cbrt * x)[0]
        )
        s = simpson(integrand, x=x)
        mag_sq = float(s * s)
        if prev is not None and abs(mag_sq - prev) < 1e-6:
            return CondonFactor(mag_sq, "quadrature")
        prev = mag_sq
        n <<= 1
    raise QuadratureError("Condon-factor quadrature did not converge")


def ww_rate_reflection(params: DecayModelParams) -> float:
    """Reflection-limit decay rate 2 pi V^2 / (alpha (2 pi^2)^(1/4))."""
    return 2.0 * np.pi * params.v**2 / (params.alpha * (2.0 * np.pi**2) ** 0.25)


def ww_rate_condon(v: float, s: CondonFactor) -> float:
    """Golden-rule decay rate 2 pi V^2 |S|^2."""
    if v < 0.0:
        raise ValueError("coupling v must be >= 0")
    return 2.0 * np.pi * v**2 * s.magnitude_sq


def coupling_for_rate(gamma: float, alpha: float) -> float:
    """Invert the reflection-limit rate: the V giving decay rate gamma at slope alpha."""
    if gamma < 0.0:
        raise ValueError("gamma must be >= 0")
    if alpha <= 0.0:
        raise ValueError("alpha must be positive")
    return float(np.sqrt(gamma * alpha * (2.0 * np.pi**2) ** 0.25 / (2.0 * np.pi)))


def survival_probability(gamma: float, t: float) -> float:
    """Bound-level population exp(-gamma t) under exponential decay."""
    if gamma < 0.0 or t < 0.0:
        raise ValueError("gamma and t must be >= 0")
    return float(np.exp(-gamma * t))


def lz_probability(v: float, slope_difference: float, velocity: float) -> float:
    """Diabatic survival exp(-2 pi V^2 / (|slope_difference| * velocity)).

    Transfer to the other channel is the complement.  slope_difference is
    the difference of the two surface slopes at the crossing and velocity
    the packet speed there (2x its mean momentum).
    """
    if slope_difference == 0.0:
        raise ValueError("zero slope difference: no crossing sweep")
    if velocity <= 0.0:
        raise ValueError("velocity must be positive")
    return float(np.exp(-2.0 * np.pi * v**2 / (abs(slope_difference) * velocity)))


def rabi_population(v: float, t: float) -> float:
    """Excited population sin^2(V t) for resonant flat surfaces under constant V."""
    if v < 0.0:
        raise ValueError("coupling v must be >= 0")
    return float(np.sin(v * t) ** 2)
