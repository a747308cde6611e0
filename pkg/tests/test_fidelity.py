import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import momenta, unit_vectors
from qedsbs import kernels, oracle
from qedsbs.decoherence import gamma_exact
from qedsbs.errors import LargePatchWarning
from qedsbs.fidelity import (
    Macrofraction,
    b_floor,
    fidelity_regime,
    log_b_macrofraction_exact,
    log_b_mode,
    log_b_region,
    log_b_small_patch,
    mode_displacement,
    patch_prefactor,
    small_patch_exponent,
)
from qedsbs.geometry import FOUR_PI, PatchAround, PolarCap, Union
from qedsbs.model import PhysicalScenario, tau_f_over_cutoff

P = np.array([0.05, 0.0, 0.0])
ZERO = np.zeros(3)
SIDE = Macrofraction((0.0, 1.0, 0.0), FOUR_PI * 0.01, 2)


@pytest.fixture
def sc():
    return PhysicalScenario(1e5, 400.0, 0.02)


def test_trivial_cases(sc):
    assert log_b_small_patch(SIDE, 0.0, P, ZERO, sc).b == 1.0
    assert log_b_small_patch(SIDE, 50.0, P, P, sc).b == 1.0
    along_center = np.array([0.0, 0.05, 0.0])
    assert log_b_small_patch(SIDE, 50.0, along_center, ZERO, sc).b == 1.0
    assert log_b_macrofraction_exact(SIDE, 0.0, P, ZERO, sc).b == 1.0


@given(unit_vectors(), st.floats(0.01, 1.0), st.floats(0.1, 100.0))
def test_vanishing_mode_weight(khat, omega, s):
    sc = PhysicalScenario(1.0, 400.0, 0.02)
    unit_weight = log_b_mode(khat, omega, 1, s, [0.3, 0.1, -0.2], ZERO, sc, 1.0)
    small = log_b_mode(khat, omega, 1, s, [0.3, 0.1, -0.2], ZERO, sc, 1e-12)
    assert unit_weight <= 0.0
    assert small == pytest.approx(1e-12 * unit_weight, rel=1e-9, abs=1e-300)


@given(unit_vectors(), st.floats(0.02, 0.5), st.floats(0.1, 30.0), st.sampled_from([1, 2]), st.sampled_from([25.0, 400.0]))
def test_single_mode_matches_fock_fidelity(khat, omega, s, j, theta):
    sc = PhysicalScenario(1.0, theta, 0.02)
    p = np.array([0.4, 0.2, -0.3])
    dbeta = mode_displacement(khat, omega, j, s, p, ZERO, sc, 0.5)
    if abs(dbeta) ** 2 > 4.0:
        return
    nbar = oracle.occupation(theta, omega)
    rho = oracle.displaced_thermal_state(nbar, 0.0, 60)
    sigma = oracle.displaced_thermal_state(nbar, dbeta, 60)
    ref = oracle.uhlmann_fidelity(rho, sigma)
    assert math.exp(log_b_mode(khat, omega, j, s, p, ZERO, sc, 0.5)) == pytest.approx(ref, abs=1e-6)


@pytest.mark.parametrize("method", ["nested", "kernel"])
@pytest.mark.parametrize("s", [0.5, 40.0, 900.0])
def test_factorizes_over_disjoint_regions(sc, method, s):
    a, b = PolarCap(0.0, 0.3), PolarCap(0.3, 0.6, 0.0, math.pi)
    dp = np.array([0.05, -0.02, 0.01])
    whole = log_b_region(Union((a, b)), 2, s, dp, ZERO, sc, method=method)
    parts = log_b_region(a, 2, s, dp, ZERO, sc, method=method) + log_b_region(b, 2, s, dp, ZERO, sc, method=method)
    assert whole == pytest.approx(parts, rel=1e-9)


def test_nested_and_kernel_methods_agree(sc):
    mac = Macrofraction((1.0, 0.0, 1.0), FOUR_PI * 0.02, 1)
    for s in (2.0, 300.0):
        a = log_b_macrofraction_exact(mac, s, P, ZERO, sc).log_b
        b = log_b_macrofraction_exact(mac, s, P, ZERO, sc, method="kernel").log_b
        assert a == pytest.approx(b, rel=1e-8)


@given(momenta(), momenta(), st.floats(0.0, 1e4))
def test_symmetric_in_momenta(p, q, s):
    sc = PhysicalScenario(1e5, 400.0, 0.02)
    assert log_b_small_patch(SIDE, s, p, q, sc).log_b == pytest.approx(log_b_small_patch(SIDE, s, q, p, sc).log_b, rel=1e-14, abs=1e-300)


@given(st.floats(1e-3, 0.03), st.floats(1.0, 3.0), st.floats(0.0, 1e4))
def test_monotone_in_patch_size_and_momentum(frac, factor, s):
    sc = PhysicalScenario(1e5, 400.0, 0.02)
    small = Macrofraction((0.0, 1.0, 0.0), FOUR_PI * frac, 1)
    big = Macrofraction((0.0, 1.0, 0.0), FOUR_PI * frac * factor, 1)
    base = small_patch_exponent(small, s, P, ZERO, sc)
    assert small_patch_exponent(big, s, P, ZERO, sc) >= base
    assert small_patch_exponent(small, s, factor * P, ZERO, sc) >= base


def test_saturation_after_thermal_time(sc):
    tau = tau_f_over_cutoff(sc)
    s = np.linspace(10 * tau, 20 * tau, 11)
    values = small_patch_exponent(SIDE, s, P, ZERO, sc)
    assert (values.max() - values.min()) / values.min() < 0.01


def test_decoherence_and_fidelity_grow_alike_in_vacuum():
    """In the vacuum, with dp along the patch polarization, both exponents follow (f) log s."""
    sc = PhysicalScenario(1e5, math.inf, 0.0)
    mac = Macrofraction((0.0, 1.0, 0.0), FOUR_PI * 0.005, 2)
    dp = 0.05 * mac.polarization
    region = mac.region
    s1, s2 = 100.0, 1000.0
    rate_gamma = gamma_exact(s2, dp, ZERO, region, sc).gamma - gamma_exact(s1, dp, ZERO, region, sc).gamma
    rate_fid = log_b_macrofraction_exact(mac, s1, dp, ZERO, sc).log_b - log_b_macrofraction_exact(mac, s2, dp, ZERO, sc).log_b
    assert rate_fid / rate_gamma == pytest.approx(1.0, abs=0.05)


def test_floor_limits(sc):
    assert b_floor(SIDE, P, P, sc) == 1.0
    assert b_floor(SIDE, P, ZERO, sc.replace(cutoff_over_thermal=math.inf)) == 0.0
    single = b_floor(SIDE, P, ZERO, sc)
    assert b_floor(SIDE, 2 * P, ZERO, sc) == pytest.approx(single**4, rel=1e-12)
    late = log_b_small_patch(SIDE, 1e8, P, ZERO, sc).b
    assert late == pytest.approx(single, rel=1e-6)


def test_floor_example(sc):
    f = patch_prefactor(SIDE, P, ZERO, sc)
    assert f == pytest.approx(1e5 * FOUR_PI * 0.01 * 0.05**2 / (4 * math.pi**2))
    assert b_floor(SIDE, P, ZERO, sc, thermal="asymptotic") == pytest.approx((2 * 400 / math.pi) ** (-f), rel=1e-12)


@pytest.mark.parametrize("s", [1.0, 127.0, 1273.0])
def test_one_percent_patch_agrees_with_point_formula(sc, s):
    mac = Macrofraction((0.0, 1.0, 0.0), FOUR_PI * 0.01, 2)
    p, q = np.array([0.05, 0.0, 0.0]), ZERO
    exact = log_b_macrofraction_exact(mac, s, p, q, sc).log_b
    point = log_b_small_patch(mac, s, p, q, sc).log_b
    assert abs(exact / point - 1) < 0.01


@pytest.mark.parametrize("s", [1.0, 127.0, 1273.0])
def test_five_percent_patch_agrees_with_point_formula(sc, s):
    """The preset patch covers 5% of the sphere; there the point-like formula overestimates by about 4.8%."""
    mac = Macrofraction((0.0, 1.0, 0.0), FOUR_PI * 0.05, 2)
    p, q = np.array([0.05, 0.0, 0.0]), ZERO
    exact = log_b_macrofraction_exact(mac, s, p, q, sc).log_b
    point = log_b_small_patch(mac, s, p, q, sc).log_b
    assert abs(exact / point - 1) < 0.01


def test_macrofraction_validation():
    with pytest.warns(LargePatchWarning):
        Macrofraction((0, 0, 1), FOUR_PI * 0.2)
    with pytest.raises(ValueError):
        Macrofraction((0, 0, 1), 0.1, 3)
    with pytest.raises(ValueError):
        Macrofraction((0, 0, 1), -0.1)
    mac = Macrofraction((0, 3, 0), 0.1, 2)
    assert mac.center == (0.0, 1.0, 0.0)
    assert isinstance(mac.region, PatchAround)


def test_thermal_row_relates_to_floor(sc):
    s = 1e4 * tau_f_over_cutoff(sc)
    row = fidelity_regime(SIDE, s, P, ZERO, sc)
    ratio = row.log_b / math.log(b_floor(SIDE, P, ZERO, sc))
    assert ratio == pytest.approx(math.log(tau_f_over_cutoff(sc)) / kernels.b_th_limit(sc.theta), rel=1e-12)
