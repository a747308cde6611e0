"""State fidelity B of field fragments conditioned on two charge momenta.

For one mode the two conditional states are thermal states displaced by
amplitudes differing by dbeta, and

    log B = -|dbeta|^2 tanh(theta w / 2) / 2.

Summing over the modes of a patch gives the macrofraction fidelity. For a
point-like patch of solid angle dOmega0 around k0 with polarization j,

    -log B = (f / nu^2) [ log sqrt(1 + nu^2 s^2) + b_th(nu s) ],
    f = alpha dOmega0 (eps_j . dp)^2 / (4 pi^2),   nu = 1 - beta k0_z,

which saturates at (f / nu^2) b_th_limit(theta) for s >> theta / pi.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import kernels
from .decoherence import Regime, regime_label
from .errors import LargePatchWarning, QuadratureFailure, RegimeBoundary
from .geometry import FOUR_PI, PatchAround, polarization_basis, polarization_field, transported_polarization, unit
from .model import PhysicalScenario, displacement_amplitude, doppler_factor, tau_f_over_cutoff
from .quadrature import integrate_frequency, one_minus_cos, one_minus_tanh

LARGE_PATCH_FRACTION = 0.1


@dataclass(frozen=True)
class Macrofraction:
    """A small patch of directions with one polarization, read by one observer."""

    center: tuple
    solid_angle: float
    polarization_index: int = 1

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(float(c) for c in unit(self.center)))
        if not 0 < self.solid_angle < FOUR_PI:
            raise ValueError("solid_angle must lie in (0, 4 pi)")
        if self.polarization_index not in (1, 2):
            raise ValueError("polarization_index must be 1 or 2")
        if self.solid_angle / FOUR_PI > LARGE_PATCH_FRACTION:
            warnings.warn(
                f"patch covers {self.solid_angle / FOUR_PI:.3g} of the sphere; "
                "the point-like patch formula is unreliable above 0.1",
                LargePatchWarning,
                stacklevel=3,
            )

    @property
    def region(self) -> PatchAround:
        return PatchAround(self.center, self.solid_angle)

    @property
    def polarization(self) -> np.ndarray:
        return polarization_basis(np.array(self.center))[self.polarization_index - 1]

    def doppler(self, scenario: PhysicalScenario) -> float:
        return doppler_factor(self.center, scenario.velocity_beta)


@dataclass(frozen=True)
class FidelityResult:
    log_b: float
    b: float
    regime_label: Regime

    @classmethod
    def from_log_b(cls, log_b: float, label: Regime) -> "FidelityResult":
        log_b = min(float(log_b), 0.0)
        return cls(log_b, math.exp(log_b), label)


def _dp(p, p_prime) -> np.ndarray:
    return np.asarray(p, dtype=float) - np.asarray(p_prime, dtype=float)


def _tanh_half(theta: float, w):
    return 1.0 - one_minus_tanh(theta, w)


def mode_displacement(khat, omega: float, polarization_index: int, s, p, p_prime, scenario, mode_weight: float) -> complex:
    """Difference dbeta of the coherent amplitudes of one mode for the two momenta."""
    eps = polarization_basis(khat)[polarization_index - 1]
    amp = displacement_amplitude(s, khat, omega, scenario)
    return math.sqrt(2.0 * mode_weight) * float(eps @ _dp(p, p_prime)) * amp


def log_b_mode(khat, omega: float, polarization_index: int, s, p, p_prime, scenario, mode_weight: float) -> float:
    """log B of one mode: -w (eps.dp)^2 |alpha(s)|^2 tanh(theta omega / 2).

    ``mode_weight`` stands in for alpha times the mode density; it drops out
    of every continuum quantity, and B -> 1 as it goes to zero.
    """
    dbeta = mode_displacement(khat, omega, polarization_index, s, p, p_prime, scenario, mode_weight)
    return -0.5 * abs(dbeta) ** 2 * float(_tanh_half(scenario.theta, omega))


def log_b_region(
    region,
    polarization,
    s: float,
    p,
    p_prime,
    scenario: PhysicalScenario,
    order: int = 8,
    max_order: int = 64,
    rtol: float = 1e-9,
    method: str = "nested",
) -> float:
    """log B summed over every mode in ``region``.

    ``polarization`` is either an index (1 or 2, the local spherical pair of
    ``polarization_basis``) or a reference vector, which is projected onto
    each transverse plane. The integrand keeps the Doppler factor nu in both
    the denominator and the oscillation, with no expansion in v0/c.

    ``method="nested"`` integrates frequency numerically at every angular
    node. ``method="kernel"`` uses the closed-form frequency kernel at each
    node instead; it is orders of magnitude faster and agrees to the kernel
    accuracy (about 1e-10 relative).
    """
    if method not in ("nested", "kernel"):
        raise ValueError(f"unknown method {method!r}")
    dp = _dp(p, p_prime)
    if s == 0 or not np.any(dp):
        return 0.0
    theta, beta = scenario.theta, scenario.velocity_beta

    def at_order(n):
        k, wt = region.nodes(n)
        if isinstance(polarization, (int, np.integer)):
            eps = polarization_field(k, int(polarization))
        else:
            eps = transported_polarization(polarization, k)
        nu = 1.0 - beta * k[:, 2]
        nu_u, inv = np.unique(nu, return_inverse=True)
        g = np.bincount(inv, weights=wt * (eps @ dp) ** 2, minlength=len(nu_u)) / nu_u**2
        if method == "kernel":
            u = nu_u * s
            kernel = kernels.gamma1_vac_closed(u) + kernels.b_th_closed(u, theta)
            return -scenario.coupling_alpha / math.pi * float(g @ kernel)

        def f(w):
            return (np.exp(-w) * _tanh_half(theta, w) / w) * (one_minus_cos(np.outer(w, nu_u * s)) @ g)

        total = integrate_frequency(f, s * nu_u.max(), theta, rtol=1e-11, atol=1e-300, chunk=40_000)
        return -scenario.coupling_alpha / math.pi * float(total)

    prev = at_order(order)
    while order < max_order:
        order *= 2
        cur = at_order(order)
        if abs(cur - prev) <= rtol * abs(cur) + 1e-300:
            return cur
        prev = cur
    raise QuadratureFailure(f"angular order {max_order} insufficient for the patch fidelity at s={s}")


def log_b_macrofraction_exact(mac: Macrofraction, s, p, p_prime, scenario: PhysicalScenario, **kw) -> FidelityResult:
    """Patch fidelity with the polarization of the center transported across the patch."""
    if s < 0:
        raise ValueError("time must be nonnegative")
    value = log_b_region(mac.region, mac.polarization, s, p, p_prime, scenario, **kw)
    return FidelityResult.from_log_b(value, Regime.EXACT)


def patch_prefactor(mac: Macrofraction, p, p_prime, scenario: PhysicalScenario) -> float:
    """f = alpha dOmega0 (eps.dp)^2 / (4 pi^2), without the 1/nu^2."""
    proj = float(mac.polarization @ _dp(p, p_prime))
    return scenario.coupling_alpha * mac.solid_angle * proj * proj / (4.0 * math.pi**2)


def small_patch_exponent(mac: Macrofraction, s, p, p_prime, scenario: PhysicalScenario, thermal: str = "exact"):
    """-log B of a point-like patch; vectorized in s."""
    nu = mac.doppler(scenario)
    f = patch_prefactor(mac, p, p_prime, scenario)
    s = np.asarray(s, dtype=float)
    kernel = kernels.gamma1_vac_closed(nu * s) + kernels.b_th_closed(s, scenario.theta, nu, thermal == "exact")
    return f / nu**2 * kernel


def log_b_small_patch(mac: Macrofraction, s, p, p_prime, scenario: PhysicalScenario, thermal: str = "exact") -> FidelityResult:
    """Point-like patch fidelity.

    The thermal kernel keeps the cutoff by default; ``thermal="asymptotic"``
    swaps in log[tanh(y)/y] with y = pi nu s / (2 theta).
    """
    if s < 0:
        raise ValueError("time must be nonnegative")
    return FidelityResult.from_log_b(-float(small_patch_exponent(mac, s, p, p_prime, scenario, thermal)), Regime.EXACT)


def b_floor(mac: Macrofraction, p, p_prime, scenario: PhysicalScenario, thermal: str = "exact") -> float:
    """Long-time limit of the small-patch fidelity.

    Equals (2 Omega tau_F)^(-f/nu^2) up to cutoff corrections of order
    1/theta; in the vacuum it is zero.
    """
    f = patch_prefactor(mac, p, p_prime, scenario)
    if f == 0:
        return 1.0
    nu = mac.doppler(scenario)
    return math.exp(-f / nu**2 * kernels.b_th_limit(scenario.theta, thermal == "exact"))


def fidelity_regime(mac: Macrofraction, s, p, p_prime, scenario: PhysicalScenario) -> FidelityResult:
    """Piecewise approximation: f s^2/2, then (f/nu^2) log(nu s), then (f/nu^2) log(Omega tau_F)."""
    nu = mac.doppler(scenario)
    f = patch_prefactor(mac, p, p_prime, scenario)
    label, interior = regime_label(s, scenario)
    if not interior:
        warnings.warn(f"s={s:g} is near a regime boundary ({label.value})", RegimeBoundary, stacklevel=2)
    if label is Regime.SUB_CUTOFF:
        exponent = f * s * s / 2
    elif label is Regime.VACUUM_LOG:
        exponent = f / nu**2 * math.log(nu * s)
    else:
        exponent = f / nu**2 * math.log(tau_f_over_cutoff(scenario))
    return FidelityResult.from_log_b(-exponent, label)


__all__ = [
    "Macrofraction",
    "FidelityResult",
    "mode_displacement",
    "log_b_mode",
    "log_b_region",
    "log_b_macrofraction_exact",
    "patch_prefactor",
    "small_patch_exponent",
    "log_b_small_patch",
    "b_floor",
    "fidelity_regime",
]
