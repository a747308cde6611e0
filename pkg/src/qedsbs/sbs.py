"""Spectrum-broadcast-structure diagnostics over a momentum grid and a patch tiling.

The charge state is discretized into momentum cells; the observed field is
divided into macrofractions. Two numbers measure how close the joint state
is to a broadcast structure: the largest surviving coherence between
distinct cells, and the largest fidelity between the field fragments
conditioned on distinct cells. Both Gamma and -log B are quadratic forms in
the cell difference, so each maximum is one minimization over lattice
offsets.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .decoherence import dipole_validity_time, gamma_matrix
from .errors import DegenerateFrame
from .fidelity import Macrofraction
from .geometry import PatchAround
from .model import PhysicalScenario

GRAM_TOL = 1e-10
GRID_HALF_WIDTH = 4.0
_GOLDEN_ANGLE = math.pi * (3.0 - math.sqrt(5.0))


@dataclass(frozen=True)
class MomentumGrid:
    """Momentum cells with probabilities |<p|psi>|^2.

    ``indices`` and ``spacing`` are set for cubic grids; differences between
    cells are then lattice offsets and never need to be formed pairwise.
    """

    cells: np.ndarray
    weights: np.ndarray
    indices: np.ndarray | None = None
    spacing: float | None = None

    def __post_init__(self):
        cells = np.atleast_2d(np.asarray(self.cells, dtype=float))
        weights = np.asarray(self.weights, dtype=float)
        if cells.shape[1] != 3 or len(cells) != len(weights):
            raise ValueError("need one weight per 3-vector cell")
        if np.any(weights < 0):
            raise ValueError("weights must be nonnegative")
        object.__setattr__(self, "cells", cells)
        object.__setattr__(self, "weights", weights / weights.sum())

    @classmethod
    def from_cells(cls, cells, weights=None) -> "MomentumGrid":
        cells = np.atleast_2d(np.asarray(cells, dtype=float))
        return cls(cells, np.ones(len(cells)) if weights is None else weights)

    def differences(self) -> np.ndarray:
        """Distinct nonzero differences p_a - p_b over cell pairs, up to sign."""
        if self.indices is not None:
            span = [np.arange(-(np.ptp(self.indices[:, i])), np.ptp(self.indices[:, i]) + 1) for i in range(3)]
            offs = np.stack(np.meshgrid(*span, indexing="ij"), axis=-1).reshape(-1, 3)
            # keep one of each +/- pair
            first = np.argmax(offs != 0, axis=1)
            lead = offs[np.arange(len(offs)), first]
            return offs[lead > 0] * self.spacing
        a, b = np.triu_indices(len(self.cells), k=1)
        return self.cells[a] - self.cells[b]


def pointer_probabilities(mean_p, spread: float, cells_per_axis: int) -> MomentumGrid:
    """Isotropic Gaussian density sampled at the centers of a cubic grid over +-4 spreads."""
    if cells_per_axis < 2:
        raise ValueError("cells_per_axis must be >= 2")
    if not spread > 0:
        raise ValueError("spread must be positive")
    mean = np.asarray(mean_p, dtype=float)
    h = 2 * GRID_HALF_WIDTH * spread / cells_per_axis
    axis = (np.arange(cells_per_axis) + 0.5) * h - GRID_HALF_WIDTH * spread
    idx = np.stack(np.meshgrid(*[np.arange(cells_per_axis)] * 3, indexing="ij"), axis=-1).reshape(-1, 3)
    offsets = axis[idx]
    weights = np.exp(-0.5 * np.sum(offsets**2, axis=1) / spread**2)
    return MomentumGrid(mean + offsets, weights, indices=idx, spacing=h)


def _angle(a, b) -> float:
    return math.acos(max(-1.0, min(1.0, float(np.dot(a, b)))))


@dataclass(frozen=True)
class Tiling:
    macrofractions: tuple
    unobserved: object

    def __post_init__(self):
        object.__setattr__(self, "macrofractions", tuple(self.macrofractions))
        self.validate()

    def validate(self) -> None:
        """Patches must be pairwise disjoint and lie in the observed directions."""
        seen = {}
        for m in self.macrofractions:
            key = m.center
            if (key, m.polarization_index) in seen:
                raise ValueError(f"duplicate macrofraction at {key} with polarization {m.polarization_index}")
            seen[(key, m.polarization_index)] = m
        patches = {m.center: m.region for m in self.macrofractions}
        regions = list(patches.values())
        for r1, r2 in itertools.combinations(regions, 2):
            if _angle(r1.center, r2.center) < r1.half_angle + r2.half_angle - 1e-12:
                raise ValueError(f"patches around {r1.center} and {r2.center} overlap")
        for r in regions:
            probe = np.vstack([np.array(r.center), r.boundary(64)])
            if any(self.unobserved.contains(k) for k in probe):
                raise ValueError(f"patch around {r.center} reaches into the unobserved region")

    @property
    def patch_centers(self) -> list:
        return sorted({m.center for m in self.macrofractions})


def _fibonacci(total: int) -> np.ndarray:
    i = np.arange(total) + 0.5
    mu = 1.0 - 2.0 * i / total
    rho = np.sqrt(1.0 - mu**2)
    return np.column_stack([rho * np.cos(_GOLDEN_ANGLE * i), rho * np.sin(_GOLDEN_ANGLE * i), mu])


def _min_separation(points) -> float:
    if len(points) < 2:
        return math.pi
    cos = np.clip(points @ points.T, -1.0, 1.0)
    np.fill_diagonal(cos, -1.0)
    return float(np.arccos(cos.max()))


def _fits(center, half_angle, unobserved) -> bool:
    patch = PatchAround(tuple(center), 2 * math.pi * (1 - math.cos(half_angle)))
    probe = np.vstack([np.array(patch.center), patch.boundary(64)])
    return not any(unobserved.contains(k) for k in probe)


def tile_region(unobserved, n_patches: int, fill: float = 0.999) -> Tiling:
    """Disjoint equal circular patches on Fibonacci-spiral centers in the observed directions.

    The spiral on the whole sphere is refined until exactly ``n_patches`` of
    its points carry a patch (half the spiral spacing) clear of
    ``unobserved``; the common half angle is then the largest keeping those
    patches disjoint and clear, times ``fill``. Each patch yields the two
    polarization macrofractions j = 1, 2.
    """
    if n_patches < 1:
        raise ValueError("need at least one patch")
    total = n_patches
    while True:
        pts = _fibonacci(total)
        half = 0.5 * _min_separation(pts) if total > 1 else math.pi / 2
        kept = pts[[_fits(p, half, unobserved) for p in pts]]
        if len(kept) >= n_patches:
            break
        total += 1
    centers = kept[:n_patches]
    lo, hi = half, min(0.5 * _min_separation(centers), math.pi / 2)
    for _ in range(40):
        mid = 0.5 * (lo + hi)
        if all(_fits(c, mid, unobserved) for c in centers):
            lo = mid
        else:
            hi = mid
    solid = 2 * math.pi * (1 - math.cos(lo * fill))
    macs = [Macrofraction(tuple(c), solid, j) for c in centers for j in (1, 2)]
    return Tiling(tuple(macs), unobserved)


def _canonical(macs) -> list:
    return sorted(macs, key=lambda m: (m.center, m.polarization_index))


def _independent(vectors) -> bool:
    e = np.asarray(vectors, dtype=float)
    return float(np.linalg.det(e @ e.T)) > GRAM_TOL


def redundant_triples(tiling: Tiling) -> list:
    """Greedy disjoint triples of macrofractions with independent polarizations.

    Macrofractions are visited in canonical order (center, then polarization
    index); each unused one is paired with the lexicographically first
    unused pair completing an independent frame.
    """
    macs = _canonical(tiling.macrofractions)
    eps = [m.polarization for m in macs]
    used = [False] * len(macs)
    triples = []
    for a in range(len(macs)):
        if used[a]:
            continue
        for b, c in itertools.combinations(range(a + 1, len(macs)), 2):
            if used[b] or used[c]:
                continue
            if _independent([eps[a], eps[b], eps[c]]):
                triples.append((macs[a], macs[b], macs[c]))
                used[a] = used[b] = used[c] = True
                break
    return triples


def redundancy_count(tiling: Tiling) -> int:
    return len(redundant_triples(tiling))


def reconstruct_momentum(components) -> np.ndarray:
    """Momentum from its projections on three or more polarization vectors.

    ``components`` is a sequence of (vector, value) pairs. With exactly three
    the dual-basis system is solved; with more, least squares.
    """
    comps = list(components)
    if len(comps) < 3:
        raise DegenerateFrame("need at least three projections")
    e = np.array([np.asarray(v, dtype=float) for v, _ in comps])
    values = np.array([float(x) for _, x in comps])
    gram = e.T @ e
    if np.linalg.det(gram) <= GRAM_TOL:
        raise DegenerateFrame(f"Gram determinant {np.linalg.det(gram):.3g} <= {GRAM_TOL}")
    if len(comps) == 3:
        return np.linalg.solve(e, values)
    return np.linalg.solve(gram, e.T @ values)


@dataclass(frozen=True)
class SbsReport:
    s: float
    max_offdiag_modulus: float
    max_fidelity: float
    floor_estimate: float
    redundancy_triples: int
    proximity: bool
    validity_warning: bool
    fragment_fidelities: tuple = field(default=())

    def as_dict(self) -> dict:
        return {
            "s": self.s,
            "max_offdiag_modulus": self.max_offdiag_modulus,
            "max_fidelity": self.max_fidelity,
            "floor_estimate": self.floor_estimate,
            "redundancy_triples": self.redundancy_triples,
            "proximity": self.proximity,
            "validity_warning": self.validity_warning,
        }


def _min_form(matrix: np.ndarray, diffs: np.ndarray) -> float:
    if len(diffs) == 0:
        return math.inf
    return float(np.min(np.einsum("ni,ij,nj->n", diffs, matrix, diffs)))


def _patch_coefficient(mac: Macrofraction, kernel_value: float, scenario: PhysicalScenario) -> float:
    nu = mac.doppler(scenario)
    return scenario.coupling_alpha * mac.solid_angle * kernel_value / (4 * math.pi**2 * nu**2)


def fragments(tiling: Tiling) -> list:
    """Observer fragments: redundancy triples, or single macrofractions when no triple exists."""
    triples = redundant_triples(tiling)
    if triples:
        return triples
    return [(m,) for m in _canonical(tiling.macrofractions)]


def _fragment_forms(fragment, s: float, scenario: PhysicalScenario):
    """3x3 matrices (Q, U) with -log B = d.Q.d at time s and d.U.d per unit kernel.

    The long-time kernel limit does not depend on the Doppler factor, so the
    floor exponent is that limit times d.U.d.
    """
    q_now = np.zeros((3, 3))
    q_unit = np.zeros((3, 3))
    for mac in fragment:
        nu = mac.doppler(scenario)
        k_now = float(kernels.gamma1_vac_closed(nu * s) + kernels.b_th_closed(s, scenario.theta, nu))
        outer = np.outer(mac.polarization, mac.polarization)
        q_now += _patch_coefficient(mac, k_now, scenario) * outer
        q_unit += _patch_coefficient(mac, 1.0, scenario) * outer
    return q_now, q_unit


def sbs_report(
    grid: MomentumGrid,
    tiling: Tiling,
    s: float,
    scenario: PhysicalScenario,
    decoherence_threshold: float = 0.1,
    fidelity_threshold: float = 0.1,
) -> SbsReport:
    """Worst surviving coherence and worst fragment fidelity over distinct cells."""
    if s < 0:
        raise ValueError("time must be nonnegative")
    diffs = grid.differences()
    gamma_min = _min_form(gamma_matrix(s, tiling.unobserved, scenario), diffs)
    max_offdiag = math.exp(-max(gamma_min, 0.0)) if math.isfinite(gamma_min) else 0.0

    limit = kernels.b_th_limit(scenario.theta)
    per_fragment = []
    floors = []
    for frag in fragments(tiling):
        q_now, q_unit = _fragment_forms(frag, s, scenario)
        per_fragment.append(math.exp(-max(_min_form(q_now, diffs), 0.0)))
        unit_min = max(_min_form(q_unit, diffs), 0.0)
        floors.append(1.0 if unit_min == 0 else math.exp(-limit * unit_min))
    max_fid = max(per_fragment) if per_fragment else 1.0
    floor = max(floors) if floors else 1.0

    proximity = (
        max_offdiag < decoherence_threshold
        and max_fid < fidelity_threshold
        and max_fid <= 2.0 * floor
    )
    return SbsReport(
        s=float(s),
        max_offdiag_modulus=max_offdiag,
        max_fidelity=max_fid,
        floor_estimate=floor,
        redundancy_triples=len(redundant_triples(tiling)),
        proximity=proximity,
        validity_warning=s > dipole_validity_time(scenario),
        fragment_fidelities=tuple(per_fragment),
    )


__all__ = [
    "MomentumGrid",
    "Tiling",
    "SbsReport",
    "pointer_probabilities",
    "tile_region",
    "redundant_triples",
    "redundancy_count",
    "reconstruct_momentum",
    "fragments",
    "sbs_report",
]
