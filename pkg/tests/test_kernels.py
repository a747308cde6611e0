import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qedsbs import kernels
from qedsbs.errors import QuadratureFailure
from qedsbs.quadrature import W_MAX, coth_minus_one, integrate_frequency, one_minus_cos, panel_edges

thetas = st.sampled_from([10.0, 25.0, 400.0, 1e4])
times = st.floats(1e-3, 3e3)


def test_elementary_examples():
    assert kernels.gamma1_vac(1.0).closed_form == pytest.approx(0.5 * math.log(2), abs=1e-15)
    assert kernels.log_sinhc(1.0) == pytest.approx(0.1614393615, abs=1e-9)
    assert kernels.log_tanhc(1.0) == pytest.approx(-0.2723414689, abs=1e-9)
    assert kernels.i3_vac(0.0).closed_form == pytest.approx(1.0)
    assert kernels.i3_vac(1.0).closed_form == pytest.approx(0.0, abs=1e-15)
    assert kernels.gamma2_vac(1.0).closed_form == pytest.approx(0.5)


def test_asymptotic_values_use_pi_s_over_theta():
    theta = 400.0
    s = theta / math.pi
    assert kernels.gamma1_th(s, theta).asymptotic == pytest.approx(kernels.log_sinhc(1.0))
    assert kernels.b_th(2 * s, theta).asymptotic == pytest.approx(kernels.log_tanhc(1.0))


@pytest.mark.parametrize("f", [kernels.log_sinhc, kernels.log_tanhc, kernels.x_coth_x_minus_one])
def test_branch_continuity(f):
    for edge in (1e-3, 30.0):
        lo, hi = f(edge * (1 - 1e-12)), f(edge * (1 + 1e-12))
        assert lo == pytest.approx(hi, rel=1e-9, abs=1e-15)


@given(times, thetas)
def test_closed_forms_match_quadrature(s, theta):
    for kv in (
        kernels.gamma1_vac(s),
        kernels.gamma1_th(s, theta),
        kernels.gamma2_vac(s),
        kernels.gamma2_th(s, theta),
        kernels.b_th(s, theta, 0.98),
        kernels.i3_vac(s),
    ):
        assert kv.abs_discrepancy <= 1e-8 * max(1.0, abs(kv.closed_form))


@given(st.lists(times, min_size=2, max_size=6), thetas)
def test_monotone_in_time(ss, theta):
    s = np.sort(np.array(ss))
    assert np.all(np.diff(kernels.gamma1_vac_closed(s)) >= 0)
    assert np.all(np.diff(kernels.gamma1_th_closed(s, theta)) >= -1e-15)
    assert np.all(np.diff(kernels.b_th_closed(s, theta)) <= 1e-15)
    assert np.all(kernels.b_th_closed(s, theta) <= 0)


@given(st.floats(1e-6, 1e-3))
def test_sub_cutoff_growth_is_quadratic(s):
    assert kernels.gamma1_vac_closed(s) / (0.5 * s * s) == pytest.approx(1.0, abs=1e-5)


def test_vacuum_limits_of_thermal_kernels():
    for f in (kernels.gamma1_th_closed, kernels.gamma2_th_closed, kernels.b_th_closed):
        assert f(5.0, math.inf) == 0.0
    assert kernels.b_th_limit(math.inf) == math.inf


@pytest.mark.parametrize("s", [0.3, 17.0, 900.0])
def test_panel_offset_independence(s):
    theta = 400.0

    def f(w):
        return np.exp(-w) * coth_minus_one(theta, w) * one_minus_cos(w * s) / w

    a = integrate_frequency(f, s, theta)
    b = integrate_frequency(f, s, theta, offset=0.37)
    assert a == pytest.approx(b, rel=1e-9)


def test_panel_edges_cover_domain():
    e = panel_edges(100.0, 400.0)
    assert e[0] == 0.0 and e[-1] == W_MAX
    assert np.all(np.diff(e) > 0)
    assert np.max(np.diff(e)) <= 2 * math.pi / 100.0 + 1e-12


def test_quadrature_failure_is_reported():
    with pytest.raises(QuadratureFailure):
        integrate_frequency(lambda w: np.sin(1e6 * w), 1.0, max_refine=0)


@pytest.mark.parametrize("kernel", ["gamma1", "b"])
def test_exact_kernels_approach_low_temperature_forms(kernel):
    """At fixed pi s / theta the exact and asymptotic thermal kernels differ at order 1/theta."""
    gaps = []
    for theta in (1e2, 1e3, 1e4):
        s = 2 * theta / math.pi
        if kernel == "gamma1":
            gap = kernels.gamma1_th_closed(s, theta) - kernels.gamma1_th_closed(s, theta, exact=False)
        else:
            gap = kernels.b_th_closed(s, theta) - kernels.b_th_closed(s, theta, exact=False)
        gaps.append(abs(gap))
        assert abs(gap) < 10 / theta
    assert gaps[0] > gaps[1] > gaps[2]


def test_floor_limit_is_reached_at_long_times():
    theta = 400.0
    s = 1e6
    total = kernels.gamma1_vac_closed(s) + kernels.b_th_closed(s, theta)
    assert total == pytest.approx(kernels.b_th_limit(theta), abs=1e-6)
    assert kernels.b_th_limit(theta) == pytest.approx(math.log(2 * theta / math.pi), rel=1e-2)


def test_thermal_i3_low_temperature_form_is_close():
    kv = kernels.i3_th(50.0, 1e4)
    assert kv.closed_form is None
    assert kv.quadrature == pytest.approx(kv.asymptotic, rel=2e-3)


def test_negative_time_rejected():
    with pytest.raises(ValueError):
        kernels.gamma1_vac(-1.0)
    with pytest.raises(ValueError):
        kernels.b_th(1.0, 400.0, nu=2.5)


def test_vacuum_log_growth_example():
    kv = kernels.gamma1_vac(1e3)
    assert kv.closed_form == pytest.approx(0.5 * math.log(1 + 1e6), rel=1e-14)
    assert kv.closed_form == pytest.approx(6.9078, abs=1e-4)
    assert kv.abs_discrepancy < 1e-9


def test_linear_thermal_asymptote():
    assert kernels.log_sinhc(50.0) == pytest.approx(50 - math.log(100), abs=1e-12)


def test_sine_kernel_examples():
    vac = kernels.gamma2_vac(1.0)
    assert vac.closed_form == pytest.approx(0.5) and vac.time_scaled == pytest.approx(0.5)
    th = kernels.gamma2_th(1.0, 400.0)
    # a small positive number: the Bose factor and sin(ws) are both positive where the weight sits
    assert th.closed_form == pytest.approx(2.0486716390e-05, rel=1e-9)
    assert th.quadrature == pytest.approx(th.closed_form, rel=1e-10)
    assert th.closed_form != pytest.approx(-1 / (1.0 * (1 + 1.0)), abs=1e-3)


def test_cosine_kernel_decays_like_inverse_square():
    s = 1e4
    assert kernels.i3_vac_closed(s) * s * s == pytest.approx(-1.0, rel=1e-6)
