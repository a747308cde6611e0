"""Acceptance criteria 1-10, each at its stated tolerance.

Every test prints one ``PASS``/``FAIL`` line (visible without ``-s``) before
asserting, so a full run doubles as the acceptance report.
"""

import math
import subprocess
import sys
import time
import warnings

import numpy as np
import pytest

from qedsbs import kernels, oracle
from qedsbs.config import preset
from qedsbs.decoherence import gamma_exact, gamma_regime, gamma_relativistic_correction, gamma_unexpanded
from qedsbs.errors import DegenerateFrame, RegimeBoundary
from qedsbs.fidelity import (
    Macrofraction,
    b_floor,
    fidelity_regime,
    log_b_macrofraction_exact,
    log_b_region,
    log_b_small_patch,
    patch_prefactor,
)
from qedsbs.geometry import (
    FullSphere,
    PatchAround,
    PolarCap,
    Union,
    Weight,
    angular_moment,
    polarization_basis,
)
from qedsbs.model import PhysicalScenario, tau_f_over_cutoff
from qedsbs.sbs import reconstruct_momentum


@pytest.fixture
def report(capsys):
    def emit(number, ok, detail):
        with capsys.disabled():
            print(f"\n[criterion {number:>2}] {'PASS' if ok else 'FAIL'}: {detail}")

    return emit


def _fig2(theta, beta=0.02):
    cfg = preset("fig2-a")
    return cfg, cfg.scenario.build().replace(cutoff_over_thermal=theta, velocity_beta=beta)


def test_criterion_01_kernel_oracle_equivalence(report):
    start = time.perf_counter()
    worst = 0.0
    where = None
    s_grid = np.geomspace(1e-3, 1e4, 40)

    def check(kv, label):
        nonlocal worst, where
        excess = kv.abs_discrepancy / max(1e-8, 1e-8 * abs(kv.closed_form))
        if excess > worst:
            worst, where = excess, label

    for s in s_grid:
        check(kernels.gamma1_vac(s), f"gamma1_vac s={s:.3g}")
        check(kernels.i3_vac(s), f"i3_vac s={s:.3g}")
        for theta in (10.0, 25.0, 400.0, 1e4):
            check(kernels.gamma1_th(s, theta), f"gamma1_th s={s:.3g} theta={theta:g}")
            check(kernels.b_th(s, theta), f"b_th s={s:.3g} theta={theta:g}")
    elapsed = time.perf_counter() - start
    ok = worst <= 1.0 and elapsed < 10.0
    report(1, ok, f"worst |closed-quad| / allowed = {worst:.2e} at {where}; runtime {elapsed:.1f} s (< 10 s)")
    assert ok


def test_criterion_02_gamma_vs_unexpanded_integral(report):
    start = time.perf_counter()
    worst = 0.0
    where = None
    for theta in (400.0, 25.0):
        for beta in (0.0, 0.02, 0.05):
            cfg, sc = _fig2(theta, beta)
            p, q = np.array(cfg.momenta.p), np.array(cfg.momenta.p_prime)
            tau = tau_f_over_cutoff(sc)
            for s in np.geomspace(0.1, 10 * tau, 10):
                ref = gamma_unexpanded(s, p, q, cfg.unobserved, sc)
                rel = abs(gamma_exact(s, p, q, cfg.unobserved, sc).gamma / ref - 1)
                if rel > worst:
                    worst, where = rel, f"theta={theta:g} beta={beta} s={s:.3g}"
    elapsed = time.perf_counter() - start
    ok = worst < 5e-3 and elapsed < 60.0
    report(2, ok, f"worst relative deviation {worst:.2e} (< 5e-3) at {where}; runtime {elapsed:.1f} s (< 60 s)")
    assert ok


def test_criterion_03_regime_table(report):
    cfg, sc = _fig2(1e4)
    p, q = np.array(cfg.momenta.p), np.array(cfg.momenta.p_prime)
    mac = cfg.macrofraction.build()
    tau = tau_f_over_cutoff(sc)
    rows = []
    with warnings.catch_warnings():
        warnings.simplefilter("error", RegimeBoundary)
        for s in (1e-2, 1e2, 100 * tau):
            g_row = gamma_regime(s, p, q, cfg.unobserved, sc)
            g_ref = gamma_exact(s, p, q, cfg.unobserved, sc).gamma
            b_row = fidelity_regime(mac, s, p, q, sc)
            b_ref = log_b_small_patch(mac, s, p, q, sc).log_b
            rows.append((f"Gamma {g_row.regime_label.value}", abs(g_row.gamma / g_ref - 1)))
            rows.append((f"-logB {b_row.regime_label.value}", abs(b_row.log_b / b_ref - 1)))
    ok = all(err < 0.05 for _, err in rows)
    detail = "; ".join(f"{name} {err:.2%}" for name, err in rows)
    report(3, ok, f"relative errors (< 5%): {detail}")
    assert ok


def test_criterion_04_per_mode_oracle(report):
    start = time.perf_counter()
    worst_f = worst_d = 0.0
    for nbar in (0.0, 0.2, 1.0):
        for mag in (0.1, 1.0, 2.0):
            dbeta = mag * np.exp(0.4j)
            rho = oracle.displaced_thermal_state(nbar, 0.0, 60)
            sigma = oracle.displaced_thermal_state(nbar, dbeta, 60)
            tanh_half = 1.0 / (2 * nbar + 1)
            b = oracle.uhlmann_fidelity(rho, sigma)
            worst_f = max(worst_f, abs(b - math.exp(-(mag**2) * tanh_half / 2)))
            d = abs(oracle.displacement_overlap_trace(nbar, dbeta, 0.0, 60))
            worst_d = max(worst_d, abs(d - math.exp(-(mag**2) / tanh_half / 2)))
    elapsed = time.perf_counter() - start
    ok = worst_f < 1e-6 and worst_d < 1e-6 and elapsed < 30.0
    report(4, ok, f"fidelity err {worst_f:.1e}, overlap err {worst_d:.1e} (< 1e-6); runtime {elapsed:.2f} s (< 30 s)")
    assert ok


def test_criterion_05_saturation(report):
    cfg = preset("fig2-b")
    sc = cfg.scenario.build()
    p, q = np.array(cfg.momenta.p), np.array(cfg.momenta.p_prime)
    mac = cfg.macrofraction.build()
    tau = tau_f_over_cutoff(sc)
    s1, s2 = 10 * tau, 20 * tau
    b1 = -log_b_macrofraction_exact(mac, s1, p, q, sc).log_b
    b2 = -log_b_macrofraction_exact(mac, s2, p, q, sc).log_b
    g1 = gamma_exact(s1, p, q, cfg.unobserved, sc).gamma
    g2 = gamma_exact(s2, p, q, cfg.unobserved, sc).gamma
    fid_change = abs(b2 / b1 - 1)
    gamma_growth = g2 / g1 - 1
    ok = fid_change < 0.01 and gamma_growth > 0.5
    report(5, ok, f"-log B changes by {fid_change:.2e} (< 1%), Gamma grows by {gamma_growth:.1%} (> 50%)")
    assert ok


def test_criterion_06_floor_scaling(report):
    cfg = preset("fig2-a")
    p, q = np.array(cfg.momenta.p), np.array(cfg.momenta.p_prime)
    mac = cfg.macrofraction.build()
    logs_tau, logs_floor = [], []
    for theta in (1e2, 1e3, 1e4):
        sc = cfg.scenario.build().replace(cutoff_over_thermal=theta)
        logs_tau.append(math.log(tau_f_over_cutoff(sc)))
        logs_floor.append(math.log(b_floor(mac, p, q, sc)))
    slope = np.polyfit(logs_tau, logs_floor, 1)[0]
    nu = mac.doppler(sc)
    expected = -patch_prefactor(mac, p, q, sc) / nu**2
    rel = abs(slope / expected - 1)
    ok = rel < 0.02
    report(6, ok, f"fitted exponent {slope:.6g} vs {expected:.6g}: relative {rel:.2e} (< 2%)")
    assert ok


def test_criterion_07_geometry_identities(report):
    rng = np.random.default_rng(7)
    f1_worst = max(
        abs(2 * angular_moment(FullSphere(), rng.normal(size=3) * 0.05, Weight.COS_THETA)) for _ in range(20)
    )
    comp_worst = 0.0
    for _ in range(1000):
        k = rng.normal(size=3)
        k /= np.linalg.norm(k)
        a, b = rng.normal(size=3), rng.normal(size=3)
        e1, e2 = polarization_basis(k)
        lhs = (a @ e1) * (b @ e1) + (a @ e2) * (b @ e2)
        comp_worst = max(comp_worst, abs(lhs - (a @ b - (a @ k) * (b @ k))))

    sc = PhysicalScenario(1e5, 400.0, 0.02, 0.05)
    dp = np.array([0.05, 0.01, -0.02])
    r1, r2 = PolarCap(0.0, math.pi / 8), PolarCap(math.pi / 8, math.pi / 4)
    whole = Union((r1, r2))
    add_worst = 0.0
    for s in (0.5, 10.0, 300.0):
        g = [gamma_exact(s, dp, np.zeros(3), r, sc).gamma for r in (whole, r1, r2)]
        add_worst = max(add_worst, abs(g[0] - g[1] - g[2]) / g[0])
        lb = [log_b_region(r, 2, s, dp, np.zeros(3), sc) for r in (whole, r1, r2)]
        add_worst = max(add_worst, abs(lb[0] - lb[1] - lb[2]) / abs(lb[0]))
    ok = f1_worst < 1e-12 and comp_worst < 1e-12 and add_worst < 1e-9
    report(7, ok, f"F1(full sphere) {f1_worst:.1e}, completeness {comp_worst:.1e} (< 1e-12); additivity {add_worst:.1e} (< 1e-9)")
    assert ok


def test_criterion_08_sbs_round_trip(report):
    rng = np.random.default_rng(8)
    worst = 0.0
    done = 0
    while done < 1000:
        frame = rng.normal(size=(3, 3))
        frame /= np.linalg.norm(frame, axis=1)[:, None]
        if np.linalg.det(frame @ frame.T) <= 1e-10:
            continue
        p = rng.uniform(-0.05, 0.05, size=3)
        rec = reconstruct_momentum([(e, e @ p) for e in frame])
        worst = max(worst, float(np.linalg.norm(rec - p)))
        done += 1
    degenerate_raised = 0
    for center in ([0, 1, 0], [1, 1, 1], [0.3, -0.2, 0.9]):
        k = np.array(center, float) / np.linalg.norm(center)
        vecs = list(polarization_basis(k)) + list(polarization_basis(-k))
        for trio in ((0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3)):
            try:
                reconstruct_momentum([(vecs[i], 0.01) for i in trio])
            except DegenerateFrame:
                degenerate_raised += 1
    ok = worst < 1e-12 and degenerate_raised == 12
    report(8, ok, f"max |p_rec - p| = {worst:.1e} (< 1e-12); DegenerateFrame on {degenerate_raised}/12 antipodal triples")
    assert ok


def test_criterion_09_relativistic_smallness(report):
    rng = np.random.default_rng(9)
    pairs = []
    while len(pairs) < 12:
        p = rng.uniform(-0.05, 0.05, 3)
        q = rng.uniform(-0.05, 0.05, 3)
        if max(np.linalg.norm(p), np.linalg.norm(q), np.linalg.norm(p - q)) <= 0.05:
            pairs.append((p, q))
    worst = 0.0
    for name in ("fig2-a", "fig2-b"):
        cfg = preset(name)
        sc = cfg.scenario.build()
        for s in cfg.time_grid.values():
            for p, q in pairs:
                base = gamma_exact(s, p, q, cfg.unobserved, sc).gamma
                corr = gamma_relativistic_correction(s, p, q, cfg.unobserved, sc)
                worst = max(worst, abs(corr) / base)
    ok = worst < 10 * 0.05**2
    report(9, ok, f"max |Gamma2 - Gamma1| / Gamma1 = {worst:.2e} (< {10 * 0.05**2:.3g})")
    assert ok


def test_criterion_10_determinism(report, tmp_path):
    outs = []
    for i in range(2):
        path = tmp_path / f"run{i}.csv"
        subprocess.run(
            [sys.executable, "-m", "qedsbs", "sweep", "--preset", "fig2-a", "--out", str(path)],
            check=True,
            capture_output=True,
        )
        outs.append(path.read_bytes())
    ok = outs[0] == outs[1] and len(outs[0]) > 0 and b"\r" not in outs[0]
    report(10, ok, f"two sweeps byte-identical: {outs[0] == outs[1]} ({len(outs[0])} bytes, LF only)")
    assert ok
