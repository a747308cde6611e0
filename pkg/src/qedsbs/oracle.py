"""Truncated Fock-space oracle for one bosonic mode.

Independent of every closed form in the package: states and displacements
are explicit (N+1) x (N+1) matrices, and fidelities come from matrix square
roots. Used to check the tanh law of the per-mode fidelity and the coth
law of the per-mode decoherence factor.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm
from scipy.special import eval_genlaguerre, gammaln

from .errors import NumericalIndefiniteness, TruncationTooSmall

TAIL_WARN = 1e-12
EIG_CLAMP = 1e-10


class TruncationTailWarning(UserWarning):
    """The thermal distribution has noticeable weight above the truncation."""


@dataclass(frozen=True)
class FockOperator:
    matrix: np.ndarray
    discarded_weight: float = 0.0

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    @property
    def truncation(self) -> int:
        return self.dimension - 1

    def is_state(self, atol: float = 1e-8) -> bool:
        m = self.matrix
        if not np.allclose(m, m.conj().T, atol=atol):
            return False
        if abs(np.trace(m).real - 1.0) > atol:
            return False
        return np.linalg.eigvalsh(0.5 * (m + m.conj().T)).min() >= -atol

    def unitarity_error(self, levels: int | None = None) -> float:
        """max |(U^dagger U - 1)_ij| over the lowest ``levels`` columns.

        Columns near the truncation edge leak out of the space, so the
        default checks the lower half only.
        """
        k = self.dimension // 2 if levels is None else levels
        m = self.matrix[:, :k]
        return float(np.abs(m.conj().T @ m - np.eye(k)).max())


def occupation(theta: float, omega: float) -> float:
    """Bose occupation 1/(exp(theta omega) - 1) of a mode at frequency omega (cutoff units)."""
    if math.isinf(theta):
        return 0.0
    return 1.0 / math.expm1(theta * omega)


def _check_truncation(truncation: int):
    if int(truncation) != truncation or truncation < 1:
        raise TruncationTooSmall(f"truncation must be an integer >= 1, got {truncation}", suggested=1)


def thermal_state(nbar: float, truncation: int) -> FockOperator:
    """Geometric occupation distribution on n = 0..N, renormalized after truncation."""
    _check_truncation(truncation)
    if not nbar >= 0:
        raise ValueError("nbar must be nonnegative")
    q = nbar / (1.0 + nbar)
    n = np.arange(truncation + 1)
    probs = (1.0 - q) * q**n
    tail = q ** (truncation + 1)
    if tail > TAIL_WARN:
        needed = math.ceil(math.log(TAIL_WARN) / math.log(q)) if q > 0 else 1
        warnings.warn(
            f"thermal tail {tail:.2e} above truncation {truncation}; use N >= {needed}",
            TruncationTailWarning,
            stacklevel=2,
        )
    return FockOperator(np.diag(probs / probs.sum()).astype(complex), discarded_weight=float(tail))


def _laguerre_displacement(beta: complex, dim: int) -> np.ndarray:
    x = abs(beta) ** 2
    m, n = np.meshgrid(np.arange(dim), np.arange(dim), indexing="ij")
    lo, hi = np.minimum(m, n), np.maximum(m, n)
    diff = hi - lo
    log_norm = 0.5 * (gammaln(lo + 1) - gammaln(hi + 1)) - 0.5 * x
    lag = eval_genlaguerre(lo, diff, x)
    # below the diagonal the power is beta^(m-n), above it (-conj beta)^(n-m)
    base = np.where(m >= n, beta, -np.conj(beta))
    with np.errstate(invalid="ignore"):
        power = np.where(diff == 0, 1.0, base ** diff)
    return np.exp(log_norm) * lag * power


def _expm_displacement(beta: complex, dim: int, pad: int) -> np.ndarray:
    big = dim + pad
    a = np.diag(np.sqrt(np.arange(1, big)), k=1).astype(complex)
    return expm(beta * a.conj().T - np.conj(beta) * a)[:dim, :dim]


def displacement(beta: complex, truncation: int, method: str = "laguerre", pad: int = 40) -> FockOperator:
    """Matrix of D(beta) = exp(beta a^dagger - beta* a) on n = 0..N.

    ``method="laguerre"`` gives the exact matrix elements of the
    infinite-dimensional operator restricted to the truncated space;
    ``method="expm"`` exponentiates the generator in a space padded by
    ``pad`` levels and crops.
    """
    _check_truncation(truncation)
    if abs(beta) ** 2 > truncation / 4:
        raise TruncationTooSmall(
            f"|beta|^2 = {abs(beta) ** 2:.3g} exceeds N/4 = {truncation / 4:.3g}",
            suggested=math.ceil(4 * abs(beta) ** 2),
        )
    dim = truncation + 1
    if method == "laguerre":
        return FockOperator(_laguerre_displacement(complex(beta), dim))
    if method == "expm":
        return FockOperator(_expm_displacement(complex(beta), dim, pad))
    raise ValueError(f"unknown method {method!r}")


def displaced_thermal_state(nbar: float, beta: complex, truncation: int) -> FockOperator:
    d = displacement(beta, truncation).matrix
    rho = thermal_state(nbar, truncation).matrix
    return FockOperator(d @ rho @ d.conj().T)


def _psd_sqrt(m: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eigh(0.5 * (m + m.conj().T))
    if vals.min() < -EIG_CLAMP:
        raise NumericalIndefiniteness(f"eigenvalue {vals.min():.3g} below -{EIG_CLAMP}")
    return (vecs * np.sqrt(np.clip(vals, 0.0, None))) @ vecs.conj().T


def uhlmann_fidelity(rho: FockOperator, sigma: FockOperator) -> float:
    """tr sqrt(sqrt(rho) sigma sqrt(rho)), unsquared.

    Evaluated as the trace norm of sqrt(rho) sqrt(sigma), i.e. the sum of its
    singular values, which is symmetric in the two arguments by construction.
    """
    if rho.dimension != sigma.dimension:
        raise ValueError("operators act on different truncations")
    product = _psd_sqrt(rho.matrix) @ _psd_sqrt(sigma.matrix)
    return float(min(np.linalg.svd(product, compute_uv=False).sum(), 1.0))


def displacement_overlap_trace(nbar: float, beta1: complex, beta2: complex, truncation: int) -> complex:
    """tr[D(beta1) rho_th D(beta2)^dagger] in the truncated space."""
    rho = thermal_state(nbar, truncation).matrix
    d1 = displacement(beta1, truncation).matrix
    d2 = displacement(beta2, truncation).matrix
    return complex(np.trace(d1 @ rho @ d2.conj().T))


def gaussian_fidelity(nbar: float, dbeta: complex) -> float:
    """Analytic fidelity of two equally thermal states displaced by dbeta."""
    return math.exp(-abs(dbeta) ** 2 / (2.0 * (2.0 * nbar + 1.0)))


def gaussian_overlap_modulus(nbar: float, dbeta: complex) -> float:
    """Analytic |tr[D(dbeta) rho_th]|."""
    return math.exp(-abs(dbeta) ** 2 * (2.0 * nbar + 1.0) / 2.0)


__all__ = [
    "FockOperator",
    "TruncationTailWarning",
    "occupation",
    "thermal_state",
    "displacement",
    "displaced_thermal_state",
    "uhlmann_fidelity",
    "displacement_overlap_trace",
    "gaussian_fidelity",
    "gaussian_overlap_modulus",
]
