"""Frequency kernels of the decoherence and fidelity exponents.

All kernels are in cutoff units (w = omega/Omega, s = Omega t) with the
exponential cutoff exp(-w) and theta = hbar Omega/(k_B T):

    gamma1_vac  = int dw/w e^-w (1 - cos ws)
    gamma1_th   = int dw/w e^-w [coth(theta w/2) - 1] (1 - cos ws)
    gamma2_vac  = int dw   e^-w sin ws
    gamma2_th   = int dw   e^-w [coth(theta w/2) - 1] sin ws
    b_th        = int dw/w e^-w [tanh(theta w/2) - 1] (1 - cos nu w s)
    i3_vac      = int dw   e^-w w cos ws
    i3_th       = int dw   e^-w [coth(theta w/2) - 1] w cos ws

Expanding the Bose factors in geometric series turns each thermal kernel
into a sum over Matsubara-like poles at w = -(1 + n theta), which sums to
log-gamma / digamma expressions that keep the cutoff exactly. Those are the
``closed_form`` values. The familiar low-temperature expressions
(log sinh(x)/x and friends) drop the cutoff inside the thermal factor and
are reported as ``asymptotic``; they differ from the exact kernels at
relative order 1/theta.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import loggamma, polygamma, psi

from .quadrature import coth_minus_one, integrate_frequency, one_minus_cos, one_minus_tanh

_SMALL = 1e-4


@dataclass(frozen=True)
class KernelValue:
    closed_form: Optional[float]
    quadrature: float
    abs_discrepancy: Optional[float]
    asymptotic: Optional[float] = None
    time_scaled: Optional[float] = None

    @classmethod
    def build(cls, closed, quad, asymptotic=None, time_scaled=None):
        closed = None if closed is None else float(closed)
        disc = None if closed is None else abs(closed - float(quad))
        return cls(closed, float(quad), disc, asymptotic, time_scaled)

    @property
    def value(self) -> float:
        return self.quadrature if self.closed_form is None else self.closed_form


# ---------------------------------------------------------------------------
# elementary overflow-safe functions


def log_sinhc(x):
    """log(sinh(x)/x) for x >= 0."""
    x = np.abs(np.asarray(x, dtype=float))
    out = np.empty_like(x)
    small = x < 1e-3
    big = x > 30
    mid = ~(small | big)
    xs = x[small]
    out[small] = xs**2 / 6 - xs**4 / 180
    out[mid] = np.log(np.sinh(x[mid]) / x[mid])
    xb = x[big]
    out[big] = xb - np.log(2 * xb) + np.log1p(-np.exp(-2 * xb))
    return out[()] if out.ndim == 0 else out


def log_tanhc(x):
    """log(tanh(x)/x) for x >= 0; always <= 0."""
    x = np.abs(np.asarray(x, dtype=float))
    out = np.empty_like(x)
    small = x < 1e-3
    big = x > 30
    mid = ~(small | big)
    xs = x[small]
    out[small] = -(xs**2) / 3 + 7 * xs**4 / 90
    out[mid] = np.log(np.tanh(x[mid]) / x[mid])
    out[big] = -np.log(x[big])
    return out[()] if out.ndim == 0 else out


def x_coth_x_minus_one(x):
    x = np.abs(np.asarray(x, dtype=float))
    out = np.empty_like(x)
    small = x < 1e-3
    xs = x[small]
    out[small] = xs**2 / 3 - xs**4 / 45
    xl = x[~small]
    out[~small] = xl / np.tanh(xl) - 1.0
    return out[()] if out.ndim == 0 else out


def _re_loggamma_shift(c: float, y):
    """Re lnGamma(c + i y) - lnGamma(c), accurate for small y."""
    y = np.asarray(y, dtype=float)
    small = np.abs(y) < _SMALL
    out = np.empty_like(y)
    ys = y[small]
    out[small] = -0.5 * ys**2 * polygamma(1, c) + ys**4 * polygamma(3, c) / 24
    out[~small] = loggamma(c + 1j * y[~small]).real - loggamma(c).real
    return out


def _scalar(out):
    out = np.asarray(out, dtype=float)
    return out[()] if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# closed forms (vectorized in s)


def gamma1_vac_closed(s):
    s = np.asarray(s, dtype=float)
    return _scalar(0.5 * np.log1p(s * s))


def gamma1_th_closed(s, theta: float, exact: bool = True):
    s = np.asarray(s, dtype=float)
    if math.isinf(theta):
        return _scalar(np.zeros_like(s))
    if not exact:
        return _scalar(log_sinhc(math.pi * s / theta))
    c = 1.0 + 1.0 / theta
    return _scalar(-2.0 * _re_loggamma_shift(c, s / theta))


def gamma2_vac_closed(s):
    s = np.asarray(s, dtype=float)
    return _scalar(s / (1.0 + s * s))


def gamma2_th_closed(s, theta: float, exact: bool = True):
    """Bare thermal sine kernel; multiply by s for the time-scaled form."""
    s = np.asarray(s, dtype=float)
    if math.isinf(theta):
        return _scalar(np.zeros_like(s))
    if not exact:
        x = math.pi * s / theta
        with np.errstate(invalid="ignore", divide="ignore"):
            out = np.where(s > 0, x_coth_x_minus_one(x) / np.where(s > 0, s, 1.0), 0.0)
        return _scalar(out)
    z = (1.0 - 1j * s) / theta
    return _scalar(-(2.0 / theta) * psi(1.0 + z).imag)


def gamma2_time_scaled(s, theta: float, exact: bool = True):
    """s * (gamma2_vac + gamma2_th): the combination multiplying the Doppler term.

    With the low-temperature thermal kernel this is
    (t/tau_F) coth(t/tau_F) - 1/(1 + s^2).
    """
    s = np.asarray(s, dtype=float)
    return _scalar(s * (gamma2_vac_closed(s) + gamma2_th_closed(s, theta, exact)))


def b_th_closed(s, theta: float, nu: float = 1.0, exact: bool = True):
    """Thermal part of the fidelity kernel; depends on s only through nu s."""
    u = nu * np.asarray(s, dtype=float)
    if math.isinf(theta):
        return _scalar(np.zeros_like(u))
    y = u / (2.0 * theta)
    if not exact:
        return _scalar(log_tanhc(math.pi * y))
    a = (1.0 - theta) / (2.0 * theta)
    b = 1.0 / (2.0 * theta)
    return _scalar(-2.0 * (_re_loggamma_shift(1.0 + b, y) - _re_loggamma_shift(1.0 + a, y)))


def b_th_limit(theta: float, exact: bool = True) -> float:
    """lim_{s->inf} [gamma1_vac(nu s) + b_th(s)] - this makes the fidelity saturate."""
    if math.isinf(theta):
        return math.inf
    if not exact:
        return math.log(2.0 * theta / math.pi)
    a = (1.0 - theta) / (2.0 * theta)
    b = 1.0 / (2.0 * theta)
    return math.log(2.0 * theta) - 2.0 * float(loggamma(1.0 + a).real) + 2.0 * float(loggamma(1.0 + b).real)


def i3_vac_closed(s):
    s = np.asarray(s, dtype=float)
    return _scalar((1.0 - s * s) / (1.0 + s * s) ** 2)


def i3_th_asymptotic(s, theta: float):
    s = np.asarray(s, dtype=float)
    if math.isinf(theta):
        return _scalar(np.zeros_like(s))
    x = math.pi * s / theta
    small = x < 1e-3
    out = np.empty_like(x)
    xs = x[small]
    out[small] = (math.pi / theta) ** 2 * (1.0 / 3 - xs**2 / 15)
    xl = x[~small]
    out[~small] = (1.0 - (xl / np.sinh(xl)) ** 2) / s[~small] ** 2
    return _scalar(out)


# ---------------------------------------------------------------------------
# quadrature oracles


def _quad(f, omega_max, theta=math.inf, **kw):
    return float(integrate_frequency(f, omega_max, theta, **kw))


def gamma1_vac_quad(s: float, **kw) -> float:
    return _quad(lambda w: np.exp(-w) * one_minus_cos(w * s) / w, s, **kw)


def gamma1_th_quad(s: float, theta: float, **kw) -> float:
    return _quad(lambda w: np.exp(-w) * coth_minus_one(theta, w) * one_minus_cos(w * s) / w, s, theta, **kw)


def gamma2_vac_quad(s: float, **kw) -> float:
    return _quad(lambda w: np.exp(-w) * np.sin(w * s), s, **kw)


def gamma2_th_quad(s: float, theta: float, **kw) -> float:
    return _quad(lambda w: np.exp(-w) * coth_minus_one(theta, w) * np.sin(w * s), s, theta, **kw)


def b_th_quad(s: float, theta: float, nu: float = 1.0, **kw) -> float:
    u = nu * s
    return _quad(lambda w: -np.exp(-w) * one_minus_tanh(theta, w) * one_minus_cos(w * u) / w, u, theta, **kw)


def i3_vac_quad(s: float, **kw) -> float:
    return _quad(lambda w: np.exp(-w) * w * np.cos(w * s), s, **kw)


def i3_th_quad(s: float, theta: float, **kw) -> float:
    return _quad(lambda w: np.exp(-w) * coth_minus_one(theta, w) * w * np.cos(w * s), s, theta, **kw)


# ---------------------------------------------------------------------------
# KernelValue API


def _check_s(s):
    if not s >= 0:
        raise ValueError(f"time must be nonnegative, got {s}")


def gamma1_vac(s: float, **kw) -> KernelValue:
    _check_s(s)
    closed = gamma1_vac_closed(s)
    return KernelValue.build(closed, gamma1_vac_quad(s, **kw), asymptotic=closed)


def gamma1_th(s: float, theta: float, **kw) -> KernelValue:
    _check_s(s)
    return KernelValue.build(
        gamma1_th_closed(s, theta),
        gamma1_th_quad(s, theta, **kw),
        asymptotic=float(gamma1_th_closed(s, theta, exact=False)),
    )


def gamma2_vac(s: float, **kw) -> KernelValue:
    _check_s(s)
    closed = gamma2_vac_closed(s)
    return KernelValue.build(closed, gamma2_vac_quad(s, **kw), asymptotic=closed, time_scaled=s * closed)


def gamma2_th(s: float, theta: float, **kw) -> KernelValue:
    _check_s(s)
    closed = gamma2_th_closed(s, theta)
    return KernelValue.build(
        closed,
        gamma2_th_quad(s, theta, **kw),
        asymptotic=float(gamma2_th_closed(s, theta, exact=False)),
        time_scaled=s * closed,
    )


def b_th(s: float, theta: float, nu: float = 1.0, **kw) -> KernelValue:
    _check_s(s)
    if not 0 < nu < 2:
        raise ValueError("Doppler factor must lie in (0, 2)")
    return KernelValue.build(
        b_th_closed(s, theta, nu),
        b_th_quad(s, theta, nu, **kw),
        asymptotic=float(b_th_closed(s, theta, nu, exact=False)),
    )


def i3_vac(s: float, **kw) -> KernelValue:
    _check_s(s)
    closed = i3_vac_closed(s)
    return KernelValue.build(closed, i3_vac_quad(s, **kw), asymptotic=closed)


def i3_th(s: float, theta: float, **kw) -> KernelValue:
    _check_s(s)
    return KernelValue.build(None, i3_th_quad(s, theta, **kw), asymptotic=float(i3_th_asymptotic(s, theta)))
