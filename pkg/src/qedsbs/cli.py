"""Command-line entry point: sweeps, regime tables, oracle self-checks, SBS reports.

Exit codes: 0 success, 1 configuration error, 2 numerical failure,
3 oracle-check failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import kernels, oracle
from .config import RunConfig, load_config, preset
from .decoherence import dipole_validity_time, gamma_exact, gamma_mode, gamma_regime, gamma_unexpanded
from .errors import ConfigError, QedSbsError, QuadratureFailure, RegimeBoundary
from .fidelity import (
    Macrofraction,
    b_floor,
    fidelity_regime,
    log_b_macrofraction_exact,
    log_b_mode,
    log_b_small_patch,
    mode_displacement,
    patch_prefactor,
)
from .geometry import Weight, angular_moment
from .model import tau_f_over_cutoff
from .sbs import pointer_probabilities, redundancy_count, sbs_report, tile_region

OUTPUT_DIR_ENV = "QEDSBS_OUTPUT_DIR"

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_ORACLE = 0, 1, 2, 3

SWEEP_HEADER = [
    "s [Omega t]",
    "gamma_exact [1]",
    "gamma_regime [1]",
    "gamma_regime_label",
    "neg_log_b_exact [1]",
    "neg_log_b_small_patch [1]",
    "neg_log_b_regime [1]",
    "fidelity_regime_label",
    "b_floor [1]",
]


# ---------------------------------------------------------------------------
# output helpers


def _fmt(x) -> str:
    """Shortest round-trip decimal for floats, plain text otherwise."""
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def resolve_output(path: str | None) -> Path | None:
    if path is None or path == "-":
        return None
    p = Path(path)
    base = os.environ.get(OUTPUT_DIR_ENV)
    if base and not p.is_absolute():
        p = Path(base) / p
    p.parent.mkdir(parents=True, exist_ok=True)
    return p


def _emit(text: str, path: str | None) -> None:
    target = resolve_output(path)
    if target is None:
        sys.stdout.write(text)
    else:
        with open(target, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _validity_check(cfg: RunConfig) -> bool:
    scenario = cfg.scenario.build()
    limit = dipole_validity_time(scenario)
    if cfg.time_grid.s_max > limit:
        print(
            f"WARNING: s_max = {cfg.time_grid.s_max:g} exceeds the moving-dipole validity time {limit:g}",
            file=sys.stderr,
        )
        return True
    return False


# ---------------------------------------------------------------------------
# sweep


def sweep_rows(cfg: RunConfig, threads: int = 1) -> list:
    """One row per time point, in grid order."""
    scenario = cfg.scenario.build()
    mac = cfg.macrofraction.build()
    p, q = np.array(cfg.momenta.p), np.array(cfg.momenta.p_prime)
    floor = b_floor(mac, p, q, scenario)

    def row(s):
        s = float(s)
        column = "gamma_exact"
        try:
            g = gamma_exact(s, p, q, cfg.unobserved, scenario).gamma
            column = "gamma_regime"
            gr = gamma_regime(s, p, q, cfg.unobserved, scenario)
            column = "neg_log_b_exact"
            be = -log_b_macrofraction_exact(mac, s, p, q, scenario, method="kernel").log_b
            column = "neg_log_b_small_patch"
            bs = -log_b_small_patch(mac, s, p, q, scenario).log_b
            column = "neg_log_b_regime"
            br = fidelity_regime(mac, s, p, q, scenario)
        except QuadratureFailure as exc:
            raise QuadratureFailure(f"s={s!r}, column {column}: {exc}") from exc
        return [s, g, gr.gamma, gr.regime_label.value, be, bs, -br.log_b, br.regime_label.value, floor]

    s_values = cfg.time_grid.values()
    # every sweep crosses the regime boundaries; the label column already says which row applies.
    # The filter is process-wide, so it is set once here rather than inside the worker threads.
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RegimeBoundary)
        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                return list(pool.map(row, s_values))
        return [row(s) for s in s_values]


def sweep_csv(cfg: RunConfig, threads: int = 1) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SWEEP_HEADER)
    for r in sweep_rows(cfg, threads):
        writer.writerow([_fmt(x) for x in r])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# regime table


def regime_table(cfg: RunConfig) -> dict:
    scenario = cfg.scenario.build()
    mac = cfg.macrofraction.build()
    p, q = np.array(cfg.momenta.p), np.array(cfg.momenta.p_prime)
    dp = p - q
    f0 = angular_moment(cfg.unobserved, dp, Weight.ONE)
    f1 = 2.0 * angular_moment(cfg.unobserved, dp, Weight.COS_THETA)
    f2 = angular_moment(cfg.unobserved, dp, Weight.COS2_THETA)
    beta = scenario.velocity_beta
    tau = tau_f_over_cutoff(scenario)
    nu = mac.doppler(scenario)
    f = patch_prefactor(mac, p, q, scenario)
    a = scenario.coupling_alpha / math.pi
    return {
        "units": "s = Omega t; momenta in m0 c; Gamma and -log B dimensionless",
        "parameters": {
            "alpha_over_pi": a,
            "F0": f0,
            "F1": f1,
            "F2": f2,
            "beta": beta,
            "Omega_tau_F": tau,
            "f": f,
            "nu": nu,
        },
        "gamma_rows": [
            {"regime": "SubCutoff", "range": "s << 1", "expression": "(alpha/pi) F0 s^2/2", "coefficient_s2": a * f0 / 2},
            {
                "regime": "VacuumLog",
                "range": "1 << s << Omega tau_F",
                "expression": "(alpha/pi) [(F0 + beta F1) log s - beta F1/2]",
                "coefficient_log_s": a * (f0 + beta * f1),
                "constant": -a * beta * f1 / 2,
            },
            {
                "regime": "ThermalLinear",
                "range": "s >> Omega tau_F",
                "expression": "(alpha/pi) [(F0 + beta F1/2) s/(Omega tau_F) + (F0 + beta F1) log(Omega tau_F)]",
                "coefficient_s": a * (f0 + beta * f1 / 2) / tau,
                "constant": a * (f0 + beta * f1) * math.log(tau),
            },
        ],
        "fidelity_rows": [
            {"regime": "SubCutoff", "range": "s << 1", "expression": "f s^2/2", "coefficient_s2": f / 2},
            {
                "regime": "VacuumLog",
                "range": "1 << s << Omega tau_F",
                "expression": "(f/nu^2) log(nu s)",
                "coefficient_log_s": f / nu**2,
                "constant": f / nu**2 * math.log(nu),
            },
            {
                "regime": "ThermalLinear",
                "range": "s >> Omega tau_F",
                "expression": "(f/nu^2) log(Omega tau_F)",
                "constant": f / nu**2 * math.log(tau),
            },
        ],
    }


def regime_table_text(table: dict) -> str:
    lines = [f"# {table['units']}"]
    for k, v in table["parameters"].items():
        lines.append(f"{k:>14} = {_fmt(v)}")
    for title, key in (("Gamma", "gamma_rows"), ("-log B", "fidelity_rows")):
        lines.append(f"{title}:")
        for row in table[key]:
            nums = ", ".join(f"{k}={_fmt(v)}" for k, v in row.items() if k not in ("regime", "range", "expression"))
            lines.append(f"  {row['regime']:<14} {row['range']:<24} {row['expression']}  [{nums}]")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# oracle suite


@dataclass(frozen=True)
class CheckResult:
    name: str
    discrepancy: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.discrepancy <= self.tolerance

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.name}: max discrepancy {self.discrepancy:.3e} (tolerance {self.tolerance:.1e})"


def _kernel_check(theta: float) -> float:
    worst = 0.0
    for s in np.geomspace(1e-3, 1e4, 12):
        for kv in (
            kernels.gamma1_vac(s),
            kernels.gamma1_th(s, theta),
            kernels.gamma2_vac(s),
            kernels.gamma2_th(s, theta),
            kernels.b_th(s, theta),
            kernels.i3_vac(s),
        ):
            scale = max(1.0, abs(kv.closed_form))
            worst = max(worst, kv.abs_discrepancy / scale)
    return worst


_PER_MODE_NBAR = (0.0, 0.2, 1.0)
_PER_MODE_DBETA = (0.1, 1.0, 2.0)


def _per_mode_checks(cfg: RunConfig) -> tuple[float, float]:
    """(tanh check, coth check): package per-mode laws against Fock matrices."""
    scenario = cfg.scenario.build()
    theta = scenario.theta
    n = cfg.oracle.truncation
    khat = np.array([0.0, 1.0, 0.0])
    p, q = np.array([0.05, 0.0, 0.0]), np.zeros(3)
    s = 3.0
    worst_tanh = worst_coth = 0.0
    for nbar in _PER_MODE_NBAR:
        omega = 40.0 / theta if nbar == 0 else math.log1p(1.0 / nbar) / theta
        unit_dbeta = abs(mode_displacement(khat, omega, 2, s, p, q, scenario, 1.0))
        for target in _PER_MODE_DBETA:
            weight = (target / unit_dbeta) ** 2
            dbeta = mode_displacement(khat, omega, 2, s, p, q, scenario, weight)
            nb = oracle.occupation(theta, omega)
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", oracle.TruncationTailWarning)
                b_matrix = oracle.uhlmann_fidelity(
                    oracle.displaced_thermal_state(nb, 0.0, n), oracle.displaced_thermal_state(nb, dbeta, n)
                )
                overlap = abs(oracle.displacement_overlap_trace(nb, dbeta, 0.0, n))
            b_model = math.exp(log_b_mode(khat, omega, 2, s, p, q, scenario, weight))
            d_model = math.exp(-gamma_mode(khat, omega, 2, s, p, q, scenario, weight))
            worst_tanh = max(worst_tanh, abs(b_matrix - b_model))
            worst_coth = max(worst_coth, abs(overlap - d_model))
    return worst_tanh, worst_coth


def _gamma_2d_check(cfg: RunConfig) -> float:
    scenario = cfg.scenario.build()
    p, q = np.array(cfg.momenta.p), np.array(cfg.momenta.p_prime)
    tau = tau_f_over_cutoff(scenario)
    worst = 0.0
    for s in (0.1, 1.0, 10.0, tau, 10 * tau):
        ref = gamma_unexpanded(s, p, q, cfg.unobserved, scenario)
        if ref == 0:
            continue
        worst = max(worst, abs(gamma_exact(s, p, q, cfg.unobserved, scenario).gamma / ref - 1))
    return worst


def _patch_checks(cfg: RunConfig) -> tuple[float, float]:
    """(nested vs kernel exact patch, point-like vs exact patch at 1% of the sphere)."""
    scenario = cfg.scenario.build()
    p, q = np.array(cfg.momenta.p), np.array(cfg.momenta.p_prime)
    mac = cfg.macrofraction.build()
    small = Macrofraction(mac.center, 0.01 * 4 * math.pi, mac.polarization_index)
    tau = tau_f_over_cutoff(scenario)
    worst_nested = worst_small = 0.0
    for s in (1.0, tau, 10 * tau):
        nested = log_b_macrofraction_exact(mac, s, p, q, scenario).log_b
        kernel = log_b_macrofraction_exact(mac, s, p, q, scenario, method="kernel").log_b
        if nested != 0:
            worst_nested = max(worst_nested, abs(kernel / nested - 1))
        point_like = log_b_small_patch(small, s, p, q, scenario).log_b
        if point_like != 0:
            worst_small = max(worst_small, abs(log_b_macrofraction_exact(small, s, p, q, scenario).log_b / point_like - 1))
    return worst_nested, worst_small


def oracle_suite(cfg: RunConfig, tolerance_scale: float = 1.0) -> list:
    scenario = cfg.scenario.build()
    tanh_err, coth_err = _per_mode_checks(cfg)
    nested_err, small_err = _patch_checks(cfg)
    x = tolerance_scale
    return [
        CheckResult("kernel closed forms vs quadrature", _kernel_check(scenario.theta), 1e-8 * x),
        CheckResult("per-mode fidelity (tanh) vs Fock oracle", tanh_err, 1e-6 * x),
        CheckResult("per-mode decoherence (coth) vs Fock oracle", coth_err, 1e-6 * x),
        CheckResult("Gamma vs unexpanded 2D integral", _gamma_2d_check(cfg), 5e-3 * x),
        CheckResult("exact patch fidelity, closed kernel vs nested quadrature", nested_err, 1e-8 * x),
        CheckResult("point-like vs exact patch fidelity (1% patch)", small_err, 1e-2 * x),
    ]


# ---------------------------------------------------------------------------
# SBS report


def sbs_series(cfg: RunConfig) -> dict:
    scenario = cfg.scenario.build()
    grid = pointer_probabilities(cfg.grid.mean_p, scenario.momentum_spread, cfg.grid.cells_per_axis)
    tiling = tile_region(cfg.unobserved, cfg.tiling.patches)
    reports = [
        sbs_report(grid, tiling, float(s), scenario, cfg.thresholds.decoherence, cfg.thresholds.fidelity).as_dict()
        for s in cfg.time_grid.values()
    ]
    return {
        "units": "s = Omega t; moduli and fidelities dimensionless",
        "dipole_validity_time": dipole_validity_time(scenario),
        "redundancy_count": redundancy_count(tiling),
        "patches": cfg.tiling.patches,
        "patch_solid_angle_fraction": tiling.macrofractions[0].solid_angle / (4 * math.pi),
        "validity_warning": any(r["validity_warning"] for r in reports),
        "series": reports,
    }


# ---------------------------------------------------------------------------
# entry point


def _load(args) -> RunConfig:
    if args.config and args.preset:
        raise ConfigError("give either --config or --preset, not both")
    if args.config:
        try:
            return load_config(args.config)
        except OSError as exc:
            raise ConfigError(f"cannot read {args.config}: {exc.strerror}") from None
    return preset(args.preset or "fig2-a")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qedsbs", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("sweep", "time sweep of Gamma and -log B as CSV"),
        ("regime-table", "regime approximations with numerical prefactors"),
        ("oracle-check", "closed forms against quadrature and Fock-space oracles"),
        ("sbs-report", "broadcast-structure diagnostics over a momentum grid and tiling"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="JSON run configuration")
        p.add_argument("--preset", choices=["fig2-a", "fig2-b"], help="named configuration")
        p.add_argument("--out", help="output file (default: stdout)")
        p.add_argument("--threads", type=int, default=1, help="worker threads for sweeps")
        p.add_argument("--tolerance-scale", type=float, default=1.0, help="multiply oracle tolerances")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _load(args)
        if args.threads < 1:
            raise ConfigError("--threads must be >= 1")
        if not args.tolerance_scale > 0:
            raise ConfigError("--tolerance-scale must be positive")
        if args.command == "sweep":
            _validity_check(cfg)
            _emit(sweep_csv(cfg, args.threads), args.out)
        elif args.command == "regime-table":
            table = regime_table(cfg)
            sys.stdout.write(regime_table_text(table))
            if args.out:
                _emit(json.dumps(table, indent=2, sort_keys=True) + "\n", args.out)
        elif args.command == "oracle-check":
            results = oracle_suite(cfg, args.tolerance_scale)
            text = "".join(r.line() + "\n" for r in results)
            _emit(text, args.out)
            if args.out:
                sys.stdout.write(text)
            return EXIT_OK if all(r.passed for r in results) else EXIT_ORACLE
        elif args.command == "sbs-report":
            _validity_check(cfg)
            _emit(json.dumps(sbs_series(cfg), indent=2, sort_keys=True) + "\n", args.out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except QedSbsError as exc:
        hint = f" (suggested truncation N >= {exc.suggested})" if getattr(exc, "suggested", None) else ""
        print(f"numerical failure: {type(exc).__name__}: {exc}{hint}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
