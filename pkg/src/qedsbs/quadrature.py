"""Composite Gauss-Legendre quadrature over frequency, w in [0, W_MAX].

Every frequency integral in the package carries the cutoff factor exp(-w),
so the domain is truncated at ``W_MAX`` where that factor is below 1e-17.
Oscillatory integrands cos(w s) are handled by panels no wider than one
period; the thermal scale 1/theta is resolved by a geometric set of edges.
Each estimate is paired with a second rule of lower order on the same
panels and the panels are halved until the two agree.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from .errors import QuadratureFailure

W_MAX = 40.0
HIGH_ORDER = 20
LOW_ORDER = 14
ROUNDOFF_FACTOR = 100.0


@lru_cache(maxsize=16)
def _legendre(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    return x, w


def panel_edges(omega_max: float, theta: float = math.inf, offset: float = 0.0, refine: int = 0) -> np.ndarray:
    """Panel edges on [0, W_MAX].

    Args:
        omega_max: largest angular frequency of the oscillatory factor (s times
            the largest Doppler factor). Panels are at most one period wide.
        theta: thermal ratio; adds geometric edges around w ~ 1/theta.
        offset: shift of the uniform edges in units of the panel width.
        refine: number of panel halvings.
    """
    width = 0.5
    if omega_max > 0:
        width = min(width, 2 * math.pi / omega_max)
    width /= 2**refine
    n = int(math.ceil(W_MAX / width)) + 1
    uniform = (np.arange(n) + (offset % 1.0)) * width
    parts = [np.array([0.0, W_MAX]), uniform[uniform < W_MAX], np.geomspace(1e-6, 1.0, 25)]
    if math.isfinite(theta):
        parts.append(np.geomspace(1e-3 / theta, min(60.0 / theta, W_MAX), 40))
    edges = np.unique(np.concatenate(parts))
    keep = np.concatenate([[True], np.diff(edges) > 1e-14])
    return edges[keep]


def _nodes(edges: np.ndarray, order: int):
    x, w = _legendre(order)
    a, b = edges[:-1, None], edges[1:, None]
    half = 0.5 * (b - a)
    return (a + half * (x + 1.0)).ravel(), (half * w).ravel()


def integrate_frequency(
    integrand,
    omega_max: float,
    theta: float = math.inf,
    rtol: float = 1e-11,
    atol: float = 1e-15,
    offset: float = 0.0,
    max_refine: int = 3,
    chunk: int = 200_000,
):
    """Integrate ``integrand(w)`` over w in [0, W_MAX].

    ``integrand`` maps a 1-d node array to an array whose *last* axis runs
    over the nodes; the result has the remaining shape.
    """
    def rule(edges, order):
        w, wt = _nodes(edges, order)
        total = 0.0
        magnitude = 0.0
        for start in range(0, len(w), chunk):
            vals = np.asarray(integrand(w[start : start + chunk]), dtype=float)
            total = total + vals @ wt[start : start + chunk]
            magnitude = magnitude + np.abs(vals) @ wt[start : start + chunk]
        return total, magnitude

    for refine in range(max_refine + 1):
        edges = panel_edges(omega_max, theta, offset, refine)
        hi, magnitude = rule(edges, HIGH_ORDER)
        lo, _ = rule(edges, LOW_ORDER)
        err = np.max(np.abs(np.asarray(hi - lo)))
        # oscillatory integrands cancel down to a roundoff floor set by the integral of |f|
        floor = ROUNDOFF_FACTOR * np.finfo(float).eps * np.max(magnitude)
        if err <= atol + floor + rtol * np.max(np.abs(np.asarray(hi))):
            return hi
    raise QuadratureFailure(
        f"frequency quadrature failed (omega_max={omega_max}, theta={theta}, error~{err:.3g})"
    )


def one_minus_cos(x):
    """1 - cos(x) without cancellation at small x."""
    return 2.0 * np.sin(0.5 * x) ** 2


def coth_minus_one(theta: float, w):
    """coth(theta w / 2) - 1 = 2 / (exp(theta w) - 1); zero for theta = inf."""
    if math.isinf(theta):
        return np.zeros_like(w)
    with np.errstate(over="ignore"):
        return 2.0 / np.expm1(theta * w)


def one_minus_tanh(theta: float, w):
    """1 - tanh(theta w / 2) = 2 / (exp(theta w) + 1); zero for theta = inf."""
    if math.isinf(theta):
        return np.zeros_like(w)
    with np.errstate(over="ignore"):
        return 2.0 / (np.exp(theta * w) + 1.0)
