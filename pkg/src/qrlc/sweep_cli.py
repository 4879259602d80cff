"""Command-line front end: check suite, parameter sweeps, diagnostics.

Subcommands
-----------
check          run every identity/equivalence check family over the
               configured grid; JSON report plus human summary.
sweep-entropy  entropy (and dS/dR) versus resistance as CSV/JSON.
sweep          any supported observable over a parameter grid.
convergence    truncation-doubling trace for one observable/point.

All computation is deterministic: same config, byte-identical output.
Exit codes: 0 success, 1 check failure (or inconclusive results),
2 usage/config error.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import math
import sys
from dataclasses import dataclass
from importlib import resources
from typing import Any

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from .checks import CheckResult, make_check
from .closed_forms import (
    dS_dR_cf,
    entropy_cf,
    fluctuation_cf,
    internal_energy_cf,
    omega,
    resistor_energy_cf,
)
from .fock_operators import CircuitParams, OverdampedError, build_hamiltonian
from .ghft_verifier import (
    PointWorkspace,
    check_characteristic_pde,
    check_characteristics_invariance,
    check_commutator_average,
    check_entropy_variation,
    check_fluctuation_identity,
    check_ghft_beta_form,
    check_ghft_correlation,
    check_ghft_weighted_average,
    check_pure_state_hf,
    params_on_characteristic,
    probe_linear_coupling_entropy,
)
from .thermal_oracle import (
    ThermalState,
    converged_observable,
    thermo_identities,
    von_neumann_entropy,
)

VERSION = "0.1.0"

SWEEP_OBSERVABLES = (
    "internal_energy",
    "entropy",
    "fluctuation",
    "resistor_energy",
    "dS_dR",
    "omega",
)

#: resistance must stay below (1 - margin) * sqrt(L/C)
NEAR_CRITICAL_MARGIN = 1e-3
NEAR_CRITICAL_MARGIN_RELAXED = 1e-6


class ConfigError(ValueError):
    """Malformed or physically invalid configuration."""


# ---------------------------------------------------------------------------
# configuration


def load_default_config() -> dict:
    text = resources.files("qrlc").joinpath("default_config.toml").read_text()
    return tomllib.loads(text)


def _merge(base: dict, override: dict) -> dict:
    merged = dict(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def load_config(path: str | None) -> dict:
    """Default config, deep-merged with the user's file when given."""
    config = load_default_config()
    if path is not None:
        try:
            with open(path, "rb") as fh:
                user = tomllib.load(fh)
        except FileNotFoundError as exc:
            raise ConfigError(f"config file not found: {path}") from exc
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"config file {path} is not valid TOML: {exc}") from exc
        config = _merge(config, user)
    return config


def config_hash(config: dict) -> str:
    canonical = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()


# ---------------------------------------------------------------------------
# check suite


@dataclass(frozen=True)
class GridPoint:
    params: CircuitParams
    beta: float
    beta_hbar_omega: float
    resistance_fraction: float


def _grid_params(config: dict) -> list[tuple[CircuitParams, float]]:
    grid = config["grid"]
    for key in ("inductance", "capacitance", "resistance_fractions", "beta_hbar_omega"):
        if not grid.get(key):
            raise ConfigError(f"grid.{key} must be a non-empty list")
    hbar = float(grid.get("hbar", 1.0))
    k = float(grid.get("boltzmann", 1.0))
    combos = []
    for L in grid["inductance"]:
        for C in grid["capacitance"]:
            for fraction in grid["resistance_fractions"]:
                if fraction >= 1.0:
                    raise ConfigError(
                        f"grid point L={L}, C={C}, R={fraction}*sqrt(L/C) is not "
                        "underdamped: resistance fraction must be < 1"
                    )
                R = fraction * math.sqrt(L / C)
                combos.append((CircuitParams(L, C, R, hbar, k), fraction))
    return combos


def check_grid(config: dict) -> list[GridPoint]:
    points = []
    for params, fraction in _grid_params(config):
        mode = omega(params).omega
        for x in config["grid"]["beta_hbar_omega"]:
            if x <= 0.0:
                raise ConfigError(f"beta_hbar_omega entries must be positive, got {x}")
            points.append(
                GridPoint(
                    params=params,
                    beta=x / (params.hbar * mode),
                    beta_hbar_omega=x,
                    resistance_fraction=fraction,
                )
            )
    return points


def _with_context(check: CheckResult, extra: dict[str, Any]) -> CheckResult:
    return dataclasses.replace(check, context={**extra, **check.context})


def _point_checks(ws: PointWorkspace, tolerances: dict) -> list[CheckResult]:
    params, beta = ws.params, ws.beta
    t_identity = float(tolerances["identity"])
    out: list[CheckResult] = []
    for chi in ("L", "C", "R"):
        out.append(
            check_ghft_weighted_average(
                params, beta, chi, workspace=ws, tolerance=t_identity
            )
        )
        out.append(
            check_ghft_correlation(params, beta, chi, workspace=ws, tolerance=t_identity)
        )
        out.append(
            check_ghft_beta_form(params, beta, chi, workspace=ws, tolerance=t_identity)
        )
        out.append(
            check_entropy_variation(
                params, beta, chi, "difference", workspace=ws, tolerance=t_identity
            )
        )
        out.append(
            check_entropy_variation(
                params, beta, chi, "beta_derivative", workspace=ws, tolerance=t_identity
            )
        )
    out.append(
        check_fluctuation_identity(params, beta, workspace=ws, tolerance=t_identity)
    )
    out.append(
        check_characteristic_pde(
            params, beta, workspace=ws, tolerance=float(tolerances["pde"])
        )
    )
    out.append(check_commutator_average(params, beta, workspace=ws))

    t_closed = float(tolerances["closed_form"])
    conclusive = ws.certified
    out.append(
        make_check(
            "closed_form_internal_energy",
            ws.U,
            internal_energy_cf(params, beta),
            t_closed,
            conclusive=conclusive,
            context=ws.context(),
        )
    )
    entropy_closed = entropy_cf(params, beta)
    if max(abs(ws.S), abs(entropy_closed)) < 1e-3:
        out.append(
            make_check(
                "closed_form_entropy",
                ws.S,
                entropy_closed,
                float(tolerances["entropy_absolute"]),
                mode="absolute",
                conclusive=conclusive,
                context=ws.context(),
            )
        )
    else:
        out.append(
            make_check(
                "closed_form_entropy",
                ws.S,
                entropy_closed,
                t_closed,
                conclusive=conclusive,
                context=ws.context(),
            )
        )
    fluct_closed = fluctuation_cf(params, beta)
    out.append(
        make_check(
            "closed_form_fluctuation",
            ws.fluctuation(),
            fluct_closed,
            t_closed,
            conclusive=conclusive,
            context=ws.context(),
        )
    )
    out.append(
        make_check(
            "closed_form_fluctuation_fd",
            -ws.dbeta_u().value,
            fluct_closed,
            float(tolerances["fluctuation_fd"]),
            conclusive=conclusive,
            context=ws.context(),
        )
    )
    dissipation = params.R / (2.0 * params.L) * ws.pq_plus_qp_average()
    out.append(
        make_check(
            "closed_form_dissipation",
            dissipation,
            resistor_energy_cf(params, beta),
            t_closed,
            conclusive=conclusive,
            context=ws.context(),
        )
    )
    out.append(
        make_check(
            "entropy_variation_vs_closed_form",
            ws.ds_dchi("R").value,
            dS_dR_cf(params, beta),
            t_identity,
            conclusive=conclusive,
            context=ws.context(chi="R"),
        )
    )
    for identity in thermo_identities(ws.state, ws.spectrum, params.k):
        out.append(_with_context(identity, ws.context()))
    return out


def _level_spacing_check(
    params: CircuitParams, dim: int, levels: int, tolerance: float
) -> CheckResult:
    energies = np.linalg.eigvalsh(build_hamiltonian(params, dim).entries)
    target = params.hbar * omega(params).omega
    gaps = np.diff(energies)[:levels]
    worst = int(np.argmax(np.abs(gaps - target)))
    return make_check(
        "level_spacing",
        float(gaps[worst]),
        target,
        tolerance,
        context={
            "L": params.L,
            "C": params.C,
            "R": params.R,
            "N": dim,
            "levels": levels,
            "worst_n": worst,
        },
    )


def _pure_entropy_check(tolerance: float) -> CheckResult:
    degenerate = ThermalState(
        beta=1.0, log_partition=0.0, probabilities=np.array([1.0, 0.0, 0.0, 0.0])
    )
    return make_check(
        "pure_state_entropy",
        von_neumann_entropy(degenerate),
        0.0,
        tolerance,
        mode="absolute",
        context={"distribution": "degenerate"},
    )


@dataclass
class CheckReport:
    version: str
    config_hash: str
    checks: list[CheckResult]
    probe: list[dict]

    def as_dict(self) -> dict:
        return {
            "version": self.version,
            "config_hash": self.config_hash,
            "checks": [check.as_dict() for check in self.checks],
            "probe": self.probe,
        }

    def families(self) -> dict[str, list[CheckResult]]:
        grouped: dict[str, list[CheckResult]] = {}
        for check in self.checks:
            grouped.setdefault(check.name, []).append(check)
        return grouped

    def exit_code(self) -> int:
        ok = all(c.passed for c in self.checks) and all(
            c.conclusive for c in self.checks
        )
        return 0 if ok else 1

    def summary_lines(self) -> list[str]:
        def margin(check: CheckResult) -> float:
            # fraction of tolerance used; absolute-mode checks compare
            # the absolute residual
            if check.tolerance == 0.0:
                return math.inf
            if check.context.get("comparison") == "absolute":
                return check.abs_residual / check.tolerance
            return check.rel_residual / check.tolerance

        lines = [
            f"{'family':<36} {'pass':>9} {'worst margin':>13} {'inconclusive':>13}"
        ]
        for name, checks in sorted(self.families().items()):
            passed = sum(c.passed for c in checks)
            inconclusive = sum(not c.conclusive for c in checks)
            worst = max(margin(c) for c in checks)
            lines.append(
                f"{name:<36} {passed:>4}/{len(checks):<4} {worst:>13.3e} {inconclusive:>13}"
            )
        verdict = "PASS" if self.exit_code() == 0 else "FAIL"
        lines.append(f"result: {verdict} ({len(self.checks)} checks)")
        return lines


def run_check_suite(config: dict) -> CheckReport:
    """Every check family over the configured grid, in deterministic order."""
    tolerances = config["tolerances"]
    oracle_cfg = config["oracle"]
    checks: list[CheckResult] = []

    combos = _grid_params(config)
    hf_cfg = config["pure_hf"]
    for params, _ in combos:
        for chi in ("L", "C", "R"):
            for n in hf_cfg["levels"]:
                checks.append(
                    check_pure_state_hf(
                        params,
                        int(hf_cfg["dim"]),
                        int(n),
                        chi,
                        tolerance=float(tolerances["pure_hf"]),
                    )
                )

    spacing_cfg = config["level_spacing"]
    for params, _ in combos:
        checks.append(
            _level_spacing_check(
                params,
                int(spacing_cfg["dim"]),
                int(spacing_cfg["levels"]),
                float(tolerances["level_spacing"]),
            )
        )

    for point in check_grid(config):
        ws = PointWorkspace(
            point.params,
            point.beta,
            oracle_tol=float(oracle_cfg["tolerance"]),
            n_start=int(oracle_cfg["n_start"]),
            n_cap=int(oracle_cfg["n_cap"]),
            tail_tol=float(oracle_cfg["tail_mass"]),
        )
        for check in _point_checks(ws, tolerances):
            checks.append(
                _with_context(
                    check,
                    {
                        "beta_hbar_omega": point.beta_hbar_omega,
                        "resistance_fraction": point.resistance_fraction,
                    },
                )
            )

    char_cfg = config["characteristics"]
    for L, C, fraction in char_cfg["bases"]:
        base = CircuitParams(
            float(L),
            float(C),
            float(fraction) * math.sqrt(float(L) / float(C)),
            float(config["grid"].get("hbar", 1.0)),
            float(config["grid"].get("boltzmann", 1.0)),
        )
        for scale in char_cfg["l_scales"]:
            partner = params_on_characteristic(base, float(scale))
            checks.append(
                check_characteristics_invariance(
                    base,
                    partner,
                    float(char_cfg["beta"]),
                    tolerance=float(tolerances["characteristics"]),
                    oracle_tol=float(oracle_cfg["tolerance"]),
                )
            )

    checks.append(_pure_entropy_check(float(tolerances["pure_entropy"])))

    probe = []
    for L, C, R, beta in config["probe"]["points"]:
        params = CircuitParams(
            float(L),
            float(C),
            float(R),
            float(config["grid"].get("hbar", 1.0)),
            float(config["grid"].get("boltzmann", 1.0)),
        )
        probe.append(probe_linear_coupling_entropy(params, float(beta)))

    return CheckReport(
        version=VERSION,
        config_hash=config_hash(config),
        checks=checks,
        probe=probe,
    )


def cmd_check(config: dict, out_path: str) -> int:
    report = run_check_suite(config)
    _write_text(out_path, json.dumps(report.as_dict(), sort_keys=True, indent=1) + "\n")
    for line in report.summary_lines():
        print(line)
    print(f"report written to {out_path}")
    return report.exit_code()


# ---------------------------------------------------------------------------
# sweeps


@dataclass(frozen=True)
class SweepSpec:
    """A resolved sweep request: base circuit, grid, outputs."""

    base: CircuitParams
    parameter: str
    values: tuple[float, ...]
    betas: tuple[float, ...]
    observables: tuple[str, ...]
    cross_check: bool
    allow_near_critical: bool
    oracle_tolerance: float
    n_start: int
    n_cap: int
    tail_tol: float

    def margin(self) -> float:
        return (
            NEAR_CRITICAL_MARGIN_RELAXED
            if self.allow_near_critical
            else NEAR_CRITICAL_MARGIN
        )

    def point(self, value: float) -> CircuitParams:
        kwargs = {
            "L": self.base.L,
            "C": self.base.C,
            "R": self.base.R,
            "hbar": self.base.hbar,
            "k": self.base.k,
        }
        kwargs[self.parameter] = value
        return CircuitParams(**kwargs)


@dataclass(frozen=True)
class SweepRow:
    """One output row: closed forms, optional oracle values, convergence."""

    index: int
    params: CircuitParams
    beta: float
    closed_form: dict[str, float]
    oracle: dict[str, float]
    converged: bool | None
    N_used: int | None


def sweep_spec(config: dict, *, cross_check: str | None = None) -> SweepSpec:
    sweep = config["sweep"]
    parameter = sweep.get("parameter", "R")
    if parameter not in ("L", "C", "R"):
        raise ConfigError(f"sweep.parameter must be L, C or R, got {parameter!r}")
    base = CircuitParams(
        float(sweep["inductance"]),
        float(sweep["capacitance"]),
        float(sweep.get("resistance", 0.0)),
        float(sweep.get("hbar", 1.0)),
        float(sweep.get("boltzmann", 1.0)),
    )
    if "values" in sweep:
        values = tuple(float(v) for v in sweep["values"])
    else:
        count = int(sweep["count"])
        if count < 1:
            raise ConfigError(f"sweep.count must be >= 1, got {count}")
        start = float(sweep["start"])
        if "stop" in sweep:
            stop = float(sweep["stop"])
        elif parameter == "R" and "stop_fraction" in sweep:
            stop = float(sweep["stop_fraction"]) * base.critical_resistance
        else:
            raise ConfigError("sweep needs `values`, `stop` or `stop_fraction`")
        values = tuple(np.linspace(start, stop, count).tolist())
    if not values:
        raise ConfigError("sweep grid is empty")

    if "temperature" in sweep:
        temps = [float(t) for t in sweep["temperature"]]
        if any(t <= 0.0 for t in temps):
            raise ConfigError("temperatures must be positive")
        betas = tuple(1.0 / (base.k * t) for t in temps)
    else:
        betas = tuple(float(b) for b in sweep["beta"])
    if not betas or any(b <= 0.0 for b in betas):
        raise ConfigError("sweep.beta must be a non-empty list of positive values")

    observables = tuple(sweep["observables"])
    for name in observables:
        if name not in SWEEP_OBSERVABLES:
            raise ConfigError(
                f"unknown observable {name!r}; supported: {', '.join(SWEEP_OBSERVABLES)}"
            )

    flag = sweep.get("cross_check", "off") if cross_check is None else cross_check
    if flag not in ("on", "off"):
        raise ConfigError(f"cross_check must be 'on' or 'off', got {flag!r}")

    oracle_cfg = config["oracle"]
    spec = SweepSpec(
        base=base,
        parameter=parameter,
        values=values,
        betas=betas,
        observables=observables,
        cross_check=flag == "on",
        allow_near_critical=bool(sweep.get("allow_near_critical", False)),
        oracle_tolerance=float(oracle_cfg["tolerance"]),
        n_start=int(oracle_cfg["n_start"]),
        n_cap=int(oracle_cfg["n_cap"]),
        tail_tol=float(oracle_cfg["tail_mass"]),
    )
    _validate_sweep_domain(spec)
    return spec


def _validate_sweep_domain(spec: SweepSpec) -> None:
    margin = spec.margin()
    for value in spec.values:
        if spec.parameter in ("L", "C") and value <= 0.0:
            raise ConfigError(f"sweep value {spec.parameter}={value} must be positive")
        if spec.parameter == "R" and value < 0.0:
            raise ConfigError(f"sweep value R={value} must be non-negative")
        params = spec.point(value)
        limit = (1.0 - margin) * params.critical_resistance
        if params.R > limit:
            raise ConfigError(
                f"sweep point {spec.parameter}={value} reaches "
                f"R={params.R} > (1 - {margin:g}) * sqrt(L/C); "
                "set allow_near_critical = true to sweep closer to critical"
            )


_CLOSED_FORM_EVALUATORS = {
    "internal_energy": internal_energy_cf,
    "entropy": entropy_cf,
    "fluctuation": fluctuation_cf,
    "resistor_energy": resistor_energy_cf,
    "dS_dR": dS_dR_cf,
    "omega": lambda params, beta: omega(params).omega,
}


def _oracle_value(
    spec: SweepSpec, params: CircuitParams, beta: float, observable: str
) -> tuple[float, bool, int]:
    if observable == "dS_dR":
        ws = PointWorkspace(
            params,
            beta,
            oracle_tol=spec.oracle_tolerance,
            n_start=spec.n_start,
            n_cap=spec.n_cap,
            tail_tol=spec.tail_tol,
        )
        return ws.ds_dchi("R").value, ws.report.converged, ws.N
    value, report = converged_observable(
        params,
        beta,
        observable,
        spec.oracle_tolerance,
        n_start=spec.n_start,
        n_cap=spec.n_cap,
        tail_tol=spec.tail_tol,
    )
    return value, report.converged, report.N_used


def run_sweep(spec: SweepSpec) -> list[SweepRow]:
    rows = []
    index = 0
    for value in spec.values:
        params = spec.point(value)
        for beta in spec.betas:
            closed = {
                name: _CLOSED_FORM_EVALUATORS[name](params, beta)
                for name in spec.observables
            }
            oracle: dict[str, float] = {}
            converged: bool | None = None
            n_used: int | None = None
            if spec.cross_check:
                converged = True
                n_used = 0
                for name in spec.observables:
                    oracle_value, ok, n = _oracle_value(spec, params, beta, name)
                    oracle[name] = oracle_value
                    converged = converged and ok
                    n_used = max(n_used, n)
            rows.append(
                SweepRow(
                    index=index,
                    params=params,
                    beta=beta,
                    closed_form=closed,
                    oracle=oracle,
                    converged=converged,
                    N_used=n_used,
                )
            )
            index += 1
    return rows


def _fmt(value: float) -> str:
    # 17 significant digits in scientific notation: round-trip exact
    return f"{value:.16e}"


def _fmt_bool(value: bool | None) -> str:
    if value is None:
        return ""
    return "true" if value else "false"


ENTROPY_HEADER = [
    "index",
    "L",
    "C",
    "R",
    "beta",
    "omega",
    "S_cf",
    "S_oracle",
    "dSdR_cf",
    "converged",
    "N_used",
]


def entropy_sweep_rows(spec: SweepSpec) -> tuple[list[str], list[list[str]]]:
    if spec.parameter != "R":
        raise ConfigError("sweep-entropy sweeps the resistance; set sweep.parameter = 'R'")
    table = []
    index = 0
    for value in spec.values:
        params = spec.point(value)
        for beta in spec.betas:
            mode = omega(params).omega
            s_cf = entropy_cf(params, beta)
            ds_cf = dS_dR_cf(params, beta)
            if spec.cross_check:
                s_oracle, converged, n_used = _oracle_value(
                    spec, params, beta, "entropy"
                )
                oracle_cols = [_fmt(s_oracle), _fmt_bool(converged), str(n_used)]
            else:
                oracle_cols = ["", "", ""]
            table.append(
                [
                    str(index),
                    _fmt(params.L),
                    _fmt(params.C),
                    _fmt(params.R),
                    _fmt(beta),
                    _fmt(mode),
                    _fmt(s_cf),
                    oracle_cols[0],
                    _fmt(ds_cf),
                    oracle_cols[1],
                    oracle_cols[2],
                ]
            )
            index += 1
    return ENTROPY_HEADER, table


def observable_sweep_rows(spec: SweepSpec) -> tuple[list[str], list[list[str]]]:
    header = ["index", "L", "C", "R", "beta"]
    for name in spec.observables:
        header.append(f"{name}_cf")
        header.append(f"{name}_oracle")
    header += ["converged", "N_used"]
    table = []
    for row in run_sweep(spec):
        cells = [
            str(row.index),
            _fmt(row.params.L),
            _fmt(row.params.C),
            _fmt(row.params.R),
            _fmt(row.beta),
        ]
        for name in spec.observables:
            cells.append(_fmt(row.closed_form[name]))
            cells.append(_fmt(row.oracle[name]) if name in row.oracle else "")
        cells.append(_fmt_bool(row.converged))
        cells.append("" if row.N_used is None else str(row.N_used))
        table.append(cells)
    return header, table


def _write_text(path: str, text: str) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(text)


def _write_table(path: str, fmt: str, header: list[str], table: list[list[str]]) -> None:
    if fmt == "csv":
        lines = [",".join(header)]
        lines += [",".join(row) for row in table]
        _write_text(path, "\n".join(lines) + "\n")
    elif fmt == "json":
        records = [dict(zip(header, row)) for row in table]
        _write_text(path, json.dumps(records, indent=1) + "\n")
    else:
        raise ConfigError(f"unknown output format {fmt!r}")


def cmd_sweep_entropy(
    config: dict, out_path: str, fmt: str, cross_check: str | None
) -> int:
    spec = sweep_spec(config, cross_check=cross_check)
    header, table = entropy_sweep_rows(spec)
    _write_table(out_path, fmt, header, table)
    print(f"wrote {len(table)} rows to {out_path}")
    return 0


def cmd_sweep_observable(
    config: dict, out_path: str, fmt: str, cross_check: str | None
) -> int:
    spec = sweep_spec(config, cross_check=cross_check)
    header, table = observable_sweep_rows(spec)
    _write_table(out_path, fmt, header, table)
    print(f"wrote {len(table)} rows to {out_path}")
    return 0


def cmd_convergence(config: dict, out_path: str) -> int:
    conv = config["convergence"]
    params = CircuitParams(
        float(conv["inductance"]),
        float(conv["capacitance"]),
        float(conv["resistance"]),
        float(config["grid"].get("hbar", 1.0)),
        float(config["grid"].get("boltzmann", 1.0)),
    )
    oracle_cfg = config["oracle"]
    trace: list[dict] = []
    try:
        value, report = converged_observable(
            params,
            float(conv["beta"]),
            str(conv["observable"]),
            float(conv.get("tolerance", oracle_cfg["tolerance"])),
            n_start=int(oracle_cfg["n_start"]),
            n_cap=int(oracle_cfg["n_cap"]),
            tail_tol=float(oracle_cfg["tail_mass"]),
            trace=trace,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    payload = {
        "version": VERSION,
        "config_hash": config_hash(config),
        "observable": conv["observable"],
        "params": {"L": params.L, "C": params.C, "R": params.R},
        "beta": float(conv["beta"]),
        "value": value,
        "N_used": report.N_used,
        "tail_mass": report.tail_mass,
        "successive_change": report.successive_change,
        "converged": report.converged,
        "trace": trace,
    }
    _write_text(out_path, json.dumps(payload, sort_keys=True, indent=1) + "\n")
    print(f"convergence trace written to {out_path}")
    return 0


# ---------------------------------------------------------------------------
# entry point


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qrlc",
        description=(
            "Thermodynamics of the quantized RLC circuit: identity checks, "
            "parameter sweeps and convergence diagnostics."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help="TOML config merged over the defaults")
        p.add_argument("--out", help="output file path")
        p.add_argument(
            "--seedless",
            action="store_true",
            help="no-op: all computation is deterministic, nothing is seeded",
        )

    p_check = sub.add_parser("check", help="run the full check suite")
    common(p_check)
    p_check.add_argument(
        "--tolerance",
        type=float,
        help="override the identity-check tolerance (tolerances.identity)",
    )

    for name, help_text in (
        ("sweep-entropy", "entropy vs resistance sweep"),
        ("sweep", "observable sweep over a parameter grid"),
    ):
        p_sweep = sub.add_parser(name, help=help_text)
        common(p_sweep)
        p_sweep.add_argument("--format", choices=("csv", "json"), default="csv")
        p_sweep.add_argument("--cross-check", choices=("on", "off"), default=None)

    p_conv = sub.add_parser("convergence", help="truncation-doubling diagnostics")
    common(p_conv)
    return parser


_DEFAULT_OUT = {
    "check": "check_report.json",
    "sweep-entropy": "sweep_entropy.csv",
    "sweep": "sweep.csv",
    "convergence": "convergence.json",
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    out_path = args.out or _DEFAULT_OUT[args.command]
    if args.command in ("sweep-entropy", "sweep") and args.format == "json":
        if args.out is None:
            out_path = out_path.rsplit(".", 1)[0] + ".json"
    try:
        config = load_config(args.config)
        if args.command == "check":
            if args.tolerance is not None:
                config["tolerances"]["identity"] = args.tolerance
            return cmd_check(config, out_path)
        if args.command == "sweep-entropy":
            return cmd_sweep_entropy(config, out_path, args.format, args.cross_check)
        if args.command == "sweep":
            return cmd_sweep_observable(config, out_path, args.format, args.cross_check)
        if args.command == "convergence":
            return cmd_convergence(config, out_path)
        raise ConfigError(f"unknown command {args.command!r}")
    except (ConfigError, OverdampedError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
