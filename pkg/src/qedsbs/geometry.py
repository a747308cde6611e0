"""Regions of the direction sphere with their polarization frames, and angular moments over them.

All region integrals are normalized with the measure dOmega/(4 pi), so the
full sphere has weight one. Regions expose quadrature nodes with (possibly
signed) weights; complements are realized as "full sphere minus region".
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import QuadratureFailure

FOUR_PI = 4.0 * math.pi
_POLE_TOL = 1e-8


class Weight(str, enum.Enum):
    ONE = "One"
    COS_THETA = "CosTheta"
    COS2_THETA = "Cos2Theta"


def unit(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    n = np.linalg.norm(v)
    if not n > 0:
        raise ValueError("zero vector has no direction")
    return v / n


def spherical_direction(theta: float, phi: float) -> np.ndarray:
    return np.array(
        [math.sin(theta) * math.cos(phi), math.sin(theta) * math.sin(phi), math.cos(theta)]
    )


def polarization_basis(khat) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic transverse pair (e1, e2) with (e1, e2, khat) right-handed.

    Away from the poles e1, e2 are the spherical unit vectors e_theta, e_phi.
    At +z the pair is (x, y), at -z it is (x, -y).
    """
    k = unit(khat)
    rho = math.hypot(k[0], k[1])
    if rho < _POLE_TOL:
        sign = 1.0 if k[2] > 0 else -1.0
        return np.array([1.0, 0.0, 0.0]), np.array([0.0, sign, 0.0])
    cphi, sphi = k[0] / rho, k[1] / rho
    e1 = np.array([k[2] * cphi, k[2] * sphi, -rho])
    e2 = np.array([-sphi, cphi, 0.0])
    return e1, e2


def polarization_field(khat: np.ndarray, index: int) -> np.ndarray:
    """Row-wise ``polarization_basis(k)[index - 1]`` for an (n, 3) array of directions."""
    if index not in (1, 2):
        raise ValueError("polarization index must be 1 or 2")
    k = np.atleast_2d(np.asarray(khat, dtype=float))
    rho = np.hypot(k[:, 0], k[:, 1])
    pole = rho < _POLE_TOL
    safe = np.where(pole, 1.0, rho)
    cphi = np.where(pole, 1.0, k[:, 0] / safe)
    sphi = np.where(pole, 0.0, k[:, 1] / safe)
    if index == 1:
        out = np.column_stack([k[:, 2] * cphi, k[:, 2] * sphi, -rho])
        out[pole] = [1.0, 0.0, 0.0]
    else:
        out = np.column_stack([-sphi, cphi, np.zeros(len(k))])
        out[pole, 1] = np.sign(k[pole, 2])
    return out


def transversal_norm2(dp, khat) -> float:
    """|dp|^2 - (dp.khat)^2, the squared norm of dp transverse to khat."""
    dp = np.asarray(dp, dtype=float)
    k = unit(khat)
    along = float(dp @ k)
    return max(float(dp @ dp) - along * along, 0.0)


def transported_polarization(reference, khat: np.ndarray) -> np.ndarray:
    """Unit projection of ``reference`` onto the planes transverse to khat.

    ``khat`` may be an (n, 3) array; used to give a patch one smooth
    polarization field that equals ``reference`` at the patch center.
    """
    ref = np.asarray(reference, dtype=float)
    k = np.atleast_2d(khat)
    proj = ref - (k @ ref)[:, None] * k
    return proj / np.linalg.norm(proj, axis=1)[:, None]


def _frame(center: np.ndarray) -> np.ndarray:
    e1, e2 = polarization_basis(center)
    return np.column_stack([e1, e2, unit(center)])


def _gauss(a: float, b: float, n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    half = 0.5 * (b - a)
    return a + half * (x + 1.0), half * w


def _cap_nodes(theta_min, theta_max, phi_min, phi_max, order):
    mu, wmu = _gauss(math.cos(theta_max), math.cos(theta_min), order)
    span = phi_max - phi_min
    if span >= 2 * math.pi - 1e-14:
        m = 2 * order
        phi = phi_min + 2 * math.pi * np.arange(m) / m
        wphi = np.full(m, 2 * math.pi / m)
    else:
        phi, wphi = _gauss(phi_min, phi_max, order)
    MU, PHI = np.meshgrid(mu, phi, indexing="ij")
    sin = np.sqrt(np.clip(1.0 - MU**2, 0.0, None))
    k = np.stack([sin * np.cos(PHI), sin * np.sin(PHI), MU], axis=-1).reshape(-1, 3)
    w = np.outer(wmu, wphi).ravel() / FOUR_PI
    return k, w


@dataclass(frozen=True)
class FullSphere:
    def measure(self) -> float:
        return FOUR_PI

    def contains(self, khat) -> bool:
        return True

    def nodes(self, order: int):
        return _cap_nodes(0.0, math.pi, 0.0, 2 * math.pi, order)


@dataclass(frozen=True)
class PolarCap:
    """theta in [theta_min, theta_max], phi in [phi_min, phi_max] (global frame)."""

    theta_min: float = 0.0
    theta_max: float = math.pi
    phi_min: float = 0.0
    phi_max: float = 2 * math.pi

    def __post_init__(self):
        if not 0 <= self.theta_min <= self.theta_max <= math.pi:
            raise ValueError("need 0 <= theta_min <= theta_max <= pi")
        if not self.phi_min <= self.phi_max <= self.phi_min + 2 * math.pi + 1e-12:
            raise ValueError("need phi_min <= phi_max <= phi_min + 2 pi")

    def measure(self) -> float:
        return (math.cos(self.theta_min) - math.cos(self.theta_max)) * (self.phi_max - self.phi_min)

    def contains(self, khat) -> bool:
        k = unit(khat)
        theta = math.acos(max(-1.0, min(1.0, k[2])))
        if not self.theta_min <= theta <= self.theta_max:
            return False
        if self.phi_max - self.phi_min >= 2 * math.pi - 1e-14:
            return True
        phi = (math.atan2(k[1], k[0]) - self.phi_min) % (2 * math.pi)
        return phi <= self.phi_max - self.phi_min

    def nodes(self, order: int):
        return _cap_nodes(self.theta_min, self.theta_max, self.phi_min, self.phi_max, order)


@dataclass(frozen=True)
class PatchAround:
    """Circular cap of a given solid angle centered on ``center``."""

    center: tuple
    solid_angle: float

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(float(c) for c in unit(self.center)))
        if not 0 < self.solid_angle <= FOUR_PI + 1e-12:
            raise ValueError("solid_angle must lie in (0, 4 pi]")

    @property
    def half_angle(self) -> float:
        return math.acos(max(-1.0, 1.0 - self.solid_angle / (2 * math.pi)))

    def measure(self) -> float:
        return self.solid_angle

    def contains(self, khat) -> bool:
        return float(unit(khat) @ np.array(self.center)) >= math.cos(self.half_angle) - 1e-14

    def nodes(self, order: int):
        k, w = _cap_nodes(0.0, self.half_angle, 0.0, 2 * math.pi, order)
        return k @ _frame(np.array(self.center)).T, w

    def boundary(self, n: int = 64) -> np.ndarray:
        phi = 2 * math.pi * np.arange(n) / n
        a = self.half_angle
        local = np.column_stack(
            [math.sin(a) * np.cos(phi), math.sin(a) * np.sin(phi), np.full(n, math.cos(a))]
        )
        return local @ _frame(np.array(self.center)).T


@dataclass(frozen=True)
class Complement:
    region: object

    def measure(self) -> float:
        return FOUR_PI - self.region.measure()

    def contains(self, khat) -> bool:
        return not self.region.contains(khat)

    def nodes(self, order: int):
        kf, wf = FullSphere().nodes(order)
        kr, wr = self.region.nodes(order)
        return np.vstack([kf, kr]), np.concatenate([wf, -wr])


@dataclass(frozen=True)
class Union:
    """Union of regions that are assumed pairwise disjoint."""

    regions: tuple

    def __post_init__(self):
        object.__setattr__(self, "regions", tuple(self.regions))

    def measure(self) -> float:
        return sum(r.measure() for r in self.regions)

    def contains(self, khat) -> bool:
        return any(r.contains(khat) for r in self.regions)

    def nodes(self, order: int):
        parts = [r.nodes(order) for r in self.regions]
        if not parts:
            return np.zeros((0, 3)), np.zeros(0)
        return np.vstack([p[0] for p in parts]), np.concatenate([p[1] for p in parts])


def integrate(region, f, rtol: float = 1e-10, atol: float = 1e-15, order: int = 8, max_order: int = 512):
    """Adaptive product-Gauss integral of f over region with measure dOmega/4pi.

    ``f`` maps an (n, 3) array of directions to an (n,) or (n, m) array.
    The order is doubled until successive estimates agree to rtol times the
    integral of |f|.
    """
    def estimate(n):
        k, w = region.nodes(n)
        vals = np.asarray(f(k), dtype=float)
        # the integral of |f| sets the roundoff floor, which matters when the result cancels to zero
        return np.tensordot(w, vals, axes=(0, 0)), np.max(np.tensordot(np.abs(w), np.abs(vals), axes=(0, 0)))

    prev, _ = estimate(order)
    while order < max_order:
        order *= 2
        cur, scale = estimate(order)
        if np.max(np.abs(cur - prev)) <= atol + rtol * scale:
            return cur
        prev = cur
    raise QuadratureFailure(f"angular quadrature did not converge by order {max_order}")


def _weight_values(weight: Weight, k: np.ndarray) -> np.ndarray:
    weight = Weight(weight)
    if weight is Weight.ONE:
        return np.ones(len(k))
    if weight is Weight.COS_THETA:
        return k[:, 2]
    return k[:, 2] ** 2


@lru_cache(maxsize=512)
def _moment_matrix(region, weight: Weight) -> np.ndarray:
    def f(k):
        proj = np.eye(3)[None, :, :] - k[:, :, None] * k[:, None, :]
        return (_weight_values(weight, k)[:, None, None] * proj).reshape(len(k), 9)

    m = integrate(region, f, rtol=1e-12, atol=1e-16).reshape(3, 3)
    m = 0.5 * (m + m.T)
    m.setflags(write=False)
    return m


def moment_matrix(region, weight=Weight.ONE) -> np.ndarray:
    """3x3 matrix M with a.M.b = int_region dOmega/4pi w(theta) [a.b - (a.k)(b.k)]."""
    return _moment_matrix(region, Weight(weight))


def angular_moment(region, dp, weight=Weight.ONE, dp2=None) -> float:
    """int_region dOmega/4pi w(theta) Delta p_perp^2 (bilinear if dp2 is given)."""
    a = np.asarray(dp, dtype=float)
    b = a if dp2 is None else np.asarray(dp2, dtype=float)
    return float(a @ moment_matrix(region, weight) @ b)


@dataclass(frozen=True)
class Moments:
    F0: float
    F1: float
    F2: float


def angular_moments(region, dp) -> Moments:
    """F0, F1 (with its conventional factor 2) and F2 for a momentum difference."""
    return Moments(
        F0=angular_moment(region, dp, Weight.ONE),
        F1=2.0 * angular_moment(region, dp, Weight.COS_THETA),
        F2=angular_moment(region, dp, Weight.COS2_THETA),
    )

