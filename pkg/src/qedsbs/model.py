"""Dimensionless parameterization of a charge coupled to a thermal field.

Frequencies are in units of the cutoff ``Omega`` (so ``s = Omega t`` is
the time) and momenta in units of ``m0 c``.
The charge moves along +z with speed ``velocity_beta`` (in units of c).
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import asdict, dataclass

import numpy as np

from .errors import DopplerSingularity, LowThermalRatioWarning

VELOCITY_AXIS = np.array([0.0, 0.0, 1.0])


class CutoffRegularization(str, enum.Enum):
    EXPONENTIAL_DAMPING = "ExponentialDamping"


@dataclass(frozen=True)
class PhysicalScenario:
    """One physical configuration.

    Attributes:
        coupling_alpha: q^2/(4 pi eps0 hbar c), dimensionless.
        cutoff_over_thermal: hbar Omega / (k_B T). ``math.inf`` is the vacuum.
        velocity_beta: v0/c along +z.
        momentum_spread: delta p0 / (m0 c) of the initial packet.
    """

    coupling_alpha: float
    cutoff_over_thermal: float
    velocity_beta: float = 0.0
    momentum_spread: float = 0.05
    cutoff_regularization: CutoffRegularization = CutoffRegularization.EXPONENTIAL_DAMPING

    def __post_init__(self):
        if not self.coupling_alpha >= 0:
            raise ValueError(f"coupling_alpha must be >= 0, got {self.coupling_alpha}")
        if not self.cutoff_over_thermal > 0:
            raise ValueError(f"cutoff_over_thermal must be > 0, got {self.cutoff_over_thermal}")
        if not 0 <= self.velocity_beta < 1:
            raise ValueError(f"velocity_beta must lie in [0, 1), got {self.velocity_beta}")
        if not 0 < self.momentum_spread < 1:
            raise ValueError(f"momentum_spread must lie in (0, 1), got {self.momentum_spread}")
        object.__setattr__(
            self, "cutoff_regularization", CutoffRegularization(self.cutoff_regularization)
        )
        if self.cutoff_over_thermal < 10:
            warnings.warn(
                f"cutoff_over_thermal={self.cutoff_over_thermal} < 10: thermal closed forms "
                "assume k_B T << hbar Omega",
                LowThermalRatioWarning,
                stacklevel=3,
            )

    @property
    def theta(self) -> float:
        return self.cutoff_over_thermal

    def replace(self, **changes) -> "PhysicalScenario":
        fields = asdict(self)
        fields.update(changes)
        return PhysicalScenario(**fields)


def tau_f_over_cutoff(scenario: PhysicalScenario) -> float:
    """Thermal time hbar/(pi k_B T) in units of 1/Omega."""
    return scenario.cutoff_over_thermal / math.pi


def doppler_factor(khat, beta: float) -> float:
    """1 - khat . v0/c for a charge moving along +z."""
    return 1.0 - beta * float(np.asarray(khat, dtype=float)[2])


def displacement_amplitude(s: float, khat, omega: float, scenario: PhysicalScenario) -> complex:
    """Dimensionless coherent displacement of mode (khat, omega) at time s.

    Returns ``[1 - exp(i (omega - k.v0) s)] / (omega - k.v0)`` with the
    constant phase exp(-i k.r0) dropped.
    """
    if s < 0:
        raise ValueError("time must be nonnegative")
    if not omega > 0:
        raise ValueError("mode frequency must be positive")
    shifted = omega * doppler_factor(khat, scenario.velocity_beta)
    if abs(shifted) <= 8 * np.finfo(float).eps * omega:
        raise DopplerSingularity(f"omega - k.v0 = {shifted} vanishes")
    half = 0.5 * shifted * s
    # 1 - e^{2ix} = -2i sin(x) e^{ix}; no cancellation for small x
    return complex(-2j * math.sin(half) * np.exp(1j * half) / shifted)
