"""Damping exponent Gamma of the momentum-basis decoherence factor |D| = e^-Gamma.

Gamma is a quadratic form in the momentum difference dp = p - p'. To first
order in v0/c it factorizes into angular moments (geometry) times frequency
kernels (kernels):

    (pi/alpha) Gamma = [F0 + beta F1] G1(s) - (beta/2) F1 G2(s)

with G1 = gamma1_vac + gamma1_th and G2 = s (gamma2_vac + gamma2_th).
``gamma_unexpanded`` evaluates the same quantity without the velocity
expansion by nested quadrature and serves as the oracle.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import kernels
from .geometry import Weight, moment_matrix, polarization_basis
from .model import PhysicalScenario, displacement_amplitude, tau_f_over_cutoff
from .errors import QuadratureFailure, RegimeBoundary
from .quadrature import integrate_frequency, coth_minus_one, one_minus_cos


class Regime(str, enum.Enum):
    SUB_CUTOFF = "SubCutoff"
    VACUUM_LOG = "VacuumLog"
    THERMAL_LINEAR = "ThermalLinear"
    EXACT = "Exact"


@dataclass(frozen=True)
class DecoherenceResult:
    gamma: float
    modulus: float
    regime_label: Regime

    @classmethod
    def from_gamma(cls, gamma: float, label: Regime) -> "DecoherenceResult":
        gamma = max(float(gamma), 0.0)
        return cls(gamma, math.exp(-gamma), label)


def _dp(p, p_prime) -> np.ndarray:
    dp = np.asarray(p, dtype=float) - np.asarray(p_prime, dtype=float)
    if not np.all(np.isfinite(dp)):
        raise ValueError("momentum difference must be finite")
    return dp


def frequency_factors(s, theta: float, thermal: str = "exact"):
    """(G1, G2) at times s; ``thermal`` selects exact or low-temperature kernels."""
    exact = thermal == "exact"
    g1 = kernels.gamma1_vac_closed(s) + kernels.gamma1_th_closed(s, theta, exact)
    g2 = kernels.gamma2_time_scaled(s, theta, exact)
    return g1, g2


def gamma_matrix(s: float, unobserved, scenario: PhysicalScenario, thermal: str = "exact") -> np.ndarray:
    """3x3 matrix M(s) with Gamma = dp . M . dp."""
    g1, g2 = frequency_factors(s, scenario.theta, thermal)
    beta = scenario.velocity_beta
    m0 = moment_matrix(unobserved, Weight.ONE)
    m1 = 2.0 * moment_matrix(unobserved, Weight.COS_THETA)
    return (scenario.coupling_alpha / math.pi) * ((m0 + beta * m1) * g1 - 0.5 * beta * m1 * g2)


def gamma_exact(s, p, p_prime, unobserved, scenario: PhysicalScenario, thermal: str = "exact") -> DecoherenceResult:
    """Gamma from the moment x kernel factorization, first order in v0/c.

    ``thermal="asymptotic"`` uses the low-temperature kernels, i.e.
    G1 = log[sqrt(1+s^2) sinh(x)/x] and G2 = x coth(x) - 1/(1+s^2) with
    x = t/tau_F. The default keeps the cutoff inside the thermal kernels.
    """
    if s < 0:
        raise ValueError("time must be nonnegative")
    dp = _dp(p, p_prime)
    return DecoherenceResult.from_gamma(dp @ gamma_matrix(s, unobserved, scenario, thermal) @ dp, Regime.EXACT)


def gamma_curve(s_values, p, p_prime, unobserved, scenario: PhysicalScenario, thermal: str = "exact") -> np.ndarray:
    """Vectorized gamma_exact over an array of times."""
    dp = _dp(p, p_prime)
    s = np.asarray(s_values, dtype=float)
    g1, g2 = frequency_factors(s, scenario.theta, thermal)
    beta = scenario.velocity_beta
    f0 = dp @ moment_matrix(unobserved, Weight.ONE) @ dp
    f1 = 2.0 * dp @ moment_matrix(unobserved, Weight.COS_THETA) @ dp
    out = (scenario.coupling_alpha / math.pi) * ((f0 + beta * f1) * g1 - 0.5 * beta * f1 * g2)
    return np.maximum(out, 0.0)


def gamma_unexpanded(
    s: float,
    p,
    p_prime,
    unobserved,
    scenario: PhysicalScenario,
    order: int = 12,
    rtol: float = 1e-9,
) -> float:
    """Gamma by direct nested quadrature over frequency and direction.

    No expansion in v0/c: the integrand keeps (1 - cos(w nu s))/nu^2 with
    nu = 1 - beta cos(theta_k) and the full coth factor.
    """
    dp = _dp(p, p_prime)
    theta, beta = scenario.theta, scenario.velocity_beta
    if s == 0 or not np.any(dp):
        return 0.0

    def at_order(n):
        k, wt = unobserved.nodes(n)
        perp = dp @ dp - (k @ dp) ** 2
        nu = 1.0 - beta * k[:, 2]
        # nodes sharing a polar angle share nu; merge them
        nu_u, inv = np.unique(nu, return_inverse=True)
        g = np.bincount(inv, weights=wt * perp) / nu_u**2

        def f(w):
            return (np.exp(-w) * (1.0 + coth_minus_one(theta, w)) / w) * (
                one_minus_cos(np.outer(w, nu_u * s)) @ g
            )

        return float(integrate_frequency(f, s * nu_u.max(), theta, rtol=1e-11, atol=1e-300, chunk=40_000))

    lo, hi = at_order(order), at_order(2 * order)
    if abs(hi - lo) > rtol * abs(hi):
        raise QuadratureFailure(f"angular order {2 * order} insufficient for gamma_unexpanded")
    return scenario.coupling_alpha / math.pi * hi


def regime_label(s: float, scenario: PhysicalScenario) -> tuple[Regime, bool]:
    """Nearest regime row and whether s lies in that row's interior."""
    tau = tau_f_over_cutoff(scenario)
    if s < 1.0:
        return Regime.SUB_CUTOFF, s < 0.1
    if s <= tau:
        return Regime.VACUUM_LOG, 10.0 < s < 0.1 * tau
    return Regime.THERMAL_LINEAR, s > 10.0 * tau


def gamma_regime(s, p, p_prime, unobserved, scenario: PhysicalScenario) -> DecoherenceResult:
    """Three-regime approximation of Gamma (dressing / vacuum log / thermal linear)."""
    dp = _dp(p, p_prime)
    beta = scenario.velocity_beta
    f0 = dp @ moment_matrix(unobserved, Weight.ONE) @ dp
    f1 = 2.0 * dp @ moment_matrix(unobserved, Weight.COS_THETA) @ dp
    tau = tau_f_over_cutoff(scenario)
    label, interior = regime_label(s, scenario)
    if not interior:
        warnings.warn(f"s={s:g} is near a regime boundary ({label.value})", RegimeBoundary, stacklevel=2)
    if label is Regime.SUB_CUTOFF:
        row = f0 * s * s / 2
    elif label is Regime.VACUUM_LOG:
        row = (f0 + beta * f1) * math.log(s) - 0.5 * beta * f1
    else:
        row = (f0 + 0.5 * beta * f1) * s / tau + (f0 + beta * f1) * math.log(tau)
    return DecoherenceResult.from_gamma(scenario.coupling_alpha / math.pi * row, label)


@lru_cache(maxsize=4096)
def _i3_total(s: float, theta: float, exact: bool) -> float:
    """i3_vac + i3_th; the thermal part has no closed form and is integrated once per (s, theta)."""
    if not exact:
        return float(kernels.i3_vac_closed(s) + kernels.i3_th_asymptotic(s, theta))
    thermal = kernels.i3_th_quad(s, theta) if math.isfinite(theta) else 0.0
    return float(kernels.i3_vac_closed(s)) + thermal


def relativistic_momentum_shift(p, p_prime) -> np.ndarray:
    """|p|^2 p - |p'|^2 p' in units of (m0 c)^3."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(p_prime, dtype=float)
    return (p @ p) * p - (q @ q) * q


def gamma_relativistic_correction(
    s, p, p_prime, unobserved, scenario: PhysicalScenario, thermal: str = "exact"
) -> float:
    """Gamma^(2) - Gamma^(1): next-order terms beyond the first-order Gamma.

    Two pieces, both formally O(1/c^4):

    * the p^4 kinetic correction rescales the coupling to p (1 - p^2/2), which
      adds -G1 * (alpha/pi) * M(dp, |p|^2 p - |p'|^2 p') with M the bilinear
      transverse moment;
    * the (v0/c)^2 term of the Doppler expansion,
      (alpha/pi) beta^2 [3 G1 - 2 G2 + s^2 I3 / 2] F2, where F2 is the
      cos^2-weighted moment and I3 = i3_vac + i3_th.
    """
    dp = _dp(p, p_prime)
    shift = relativistic_momentum_shift(p, p_prime)
    theta, beta = scenario.theta, scenario.velocity_beta
    g1, g2 = frequency_factors(s, theta, thermal)
    m0 = moment_matrix(unobserved, Weight.ONE)
    cross = -g1 * float(dp @ m0 @ shift)
    second = 0.0
    if beta:
        i3 = _i3_total(float(s), float(theta), thermal == "exact")
        f2 = float(dp @ moment_matrix(unobserved, Weight.COS2_THETA) @ dp)
        second = beta**2 * (3.0 * g1 - 2.0 * g2 + 0.5 * s * s * i3) * f2
    return scenario.coupling_alpha / math.pi * (cross + second)


def dipole_validity_time(scenario: PhysicalScenario) -> float:
    """Omega tau_dip = m0 c / delta p0; beyond it the moving-dipole picture fails."""
    return 1.0 / scenario.momentum_spread


def gamma_mode(khat, omega: float, polarization_index: int, s, p, p_prime, scenario, mode_weight: float) -> float:
    """Single-mode contribution w (eps.dp)^2 |alpha(s)|^2 coth(theta omega / 2)."""
    eps = polarization_basis(khat)[polarization_index - 1]
    amp = displacement_amplitude(s, khat, omega, scenario)
    proj = float(eps @ _dp(p, p_prime))
    occupation = 1.0 / math.tanh(0.5 * scenario.theta * omega) if math.isfinite(scenario.theta) else 1.0
    return mode_weight * proj * proj * abs(amp) ** 2 * occupation


__all__ = [
    "Regime",
    "DecoherenceResult",
    "gamma_exact",
    "gamma_curve",
    "gamma_matrix",
    "gamma_unexpanded",
    "gamma_regime",
    "gamma_relativistic_correction",
    "dipole_validity_time",
    "gamma_mode",
    "frequency_factors",
    "relativistic_momentum_shift",
    "regime_label",
]
