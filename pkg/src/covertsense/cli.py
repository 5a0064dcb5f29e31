"""Command-line front end.

Thin wrapper around the library: every subcommand parses flags, resolves
them against an optional flat KEY=VALUE config file (the ``--config``
flag or the ``COVERTSENSE_CONFIG`` environment variable; flags win),
calls library functions, and serialises the results.  No numerics live
here.

Output contracts:

* JSON reports are ``sort_keys=True, indent=2`` with Python repr floats,
  so parsed values equal the in-memory doubles bitwise and identical
  config + seed produces byte-identical bytes (no timestamps, no paths).
* Every JSON report embeds the resolved config and a metadata block
  (seed where meaningful, RNG name, constants version).  CSV output is
  bare plot data — header plus rows — and the resolved config goes to
  stderr instead so the stream stays machine-readable.
* Exit codes: 0 success; 1 domain error (a machine-readable error object
  is printed); 2 usage error.

All quantities are SI base units (meters, hertz, seconds, kelvin); no
unit-suffix parsing.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from typing import Any, Callable, Sequence

from ._constants import CONSTANTS_VERSION
from .covertness import (
    covert_budget,
    taylor_coefficients,
    willie_error_lower_bound,
    willie_qre,
)
from .errors import DomainError, EmptySweepError, NumericalInstabilityError
from .estimation import (
    RNG_ALGORITHM,
    estimation_report,
    heterodyne_stats,
    simulate_heterodyne_mse,
)
from .fock import oracle_cross_check
from .link import (
    LinkGeometry,
    optimize_wavelength,
    reproduce_paper_report,
    sweep_frequency,
)
from .scenario import SensingScenario, willie_cm

__all__ = ["main", "emit_csv", "CONFIG_ENV_VAR"]

CONFIG_ENV_VAR = "COVERTSENSE_CONFIG"

CSV_HEADER = "f_hz,lambda_m,eta,nbar_b,c_ase,B"

#: Residual thresholds for the oracle-check subcommand, from the
#: cross-validation contracts of the number-basis oracle.
ORACLE_TOLERANCES = {
    "willie_mean_max": 1e-8,
    "willie_cm_max_err": 1e-6,
    "willie_purity_err": 1e-6,
    "willie_qre_err": 1e-4,
    "alice_mean_max": 1e-8,
    "alice_cm_max_err": 1e-6,
    "alice_fidelity_err": 1e-5,
}


def _bool_from_string(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


@dataclasses.dataclass(frozen=True)
class _Flag:
    name: str  # flag name without dashes, e.g. "eta1"
    kind: Callable[[str], Any]
    default: Any  # ... means required
    help: str


_GEOMETRY_FLAGS = [
    _Flag("rt", float, 0.04, "transceiver pupil radius (m)"),
    _Flag("rtarget", float, 0.10, "target radius (m)"),
    _Flag("t0", float, 300.0, "ambient temperature (K)"),
    _Flag("area-factor", float, 0.25, "aperture-area convention: 1, 0.5 or 0.25"),
    _Flag("eta-policy", str, "error", "near-field handling: error or clamp"),
    _Flag("eta-max", float, 0.99, "transmissivity ceiling under clamp"),
]

_SCENARIO_FLAGS = [
    _Flag("eta1", float, ..., "forward tap transmissivity"),
    _Flag("eta2", float, ..., "return tap transmissivity"),
    _Flag("nb1", float, ..., "forward bath occupancy"),
    _Flag("nb2", float, ..., "return bath occupancy"),
]

_BOUND_FLAGS = [
    _Flag("epsilon", float, 1e-3, "covertness budget"),
    _Flag("W", float, 3e12, "bandwidth (Hz)"),
    _Flag("T", float, 1.0, "integration time (s)"),
]

_COMMANDS: dict[str, list[_Flag]] = {
    "scenario": _SCENARIO_FLAGS
    + [
        _Flag("epsilon", float, ..., "covertness budget"),
        _Flag("n", float, ..., "number of channel uses (floored)"),
        _Flag("theta", float, 0.0, "target phase (rad)"),
    ],
    "bounds": _SCENARIO_FLAGS
    + [
        _Flag("epsilon", float, ..., "covertness budget"),
        _Flag("n", float, ..., "number of channel uses (floored)"),
        _Flag("nlo", float, 1e6, "reference (local oscillator) occupancy"),
        _Flag("w-ase", float, 3e12, "thermal-source bandwidth (Hz)"),
        _Flag("w-coh", float, 3e9, "coherent-source bandwidth (Hz)"),
        _Flag("t-int", float, 1e-3, "integration time for the comparison (s)"),
    ],
    "mse-mc": _SCENARIO_FLAGS
    + [
        _Flag("epsilon", float, ..., "covertness budget"),
        _Flag("n", float, ..., "number of channel uses (floored)"),
        _Flag("theta", float, 0.3, "true target phase (rad)"),
        _Flag("trials", int, 10000, "Monte Carlo trials (>= 1000)"),
        _Flag("seed", int, 42, "RNG seed"),
        _Flag("workers", int, 1, "worker threads"),
        _Flag("per-sample", _bool_from_string, False, "sample all n shots per trial"),
    ],
    "sweep": [
        _Flag("L", float, ..., "range (m)"),
        _Flag("fmin", float, ..., "lowest frequency (Hz)"),
        _Flag("fmax", float, ..., "highest frequency (Hz)"),
        _Flag("points", int, ..., "grid points"),
    ]
    + _GEOMETRY_FLAGS
    + _BOUND_FLAGS
    + [_Flag("format", str, "csv", "output format: csv or json")],
    "optimize": [
        _Flag("L", float, ..., "range (m)"),
        _Flag("lmin", float, 3e-6, "bracket lower edge (m)"),
        _Flag("lmax", float, 2e-5, "bracket upper edge (m)"),
    ]
    + _GEOMETRY_FLAGS
    + _BOUND_FLAGS,
    "reproduce-paper": _BOUND_FLAGS
    + [_Flag("format", str, "table", "output format: table or json")],
    "oracle-check": [
        _Flag("eta1", float, 0.6, "forward tap transmissivity"),
        _Flag("eta2", float, 0.75, "return tap transmissivity"),
        _Flag("nb1", float, 0.2, "forward bath occupancy"),
        _Flag("nb2", float, 0.3, "return bath occupancy"),
        _Flag("ns", float, 0.05, "probe signal occupancy"),
        _Flag("nlo", float, 0.25, "probe reference occupancy"),
        _Flag("theta", float, 0.3, "target phase (rad)"),
        _Flag("cutoff", int, None, "explicit total-photon cutoff"),
    ],
}


def _dest(flag_name: str) -> str:
    return flag_name.replace("-", "_")


def _known_config_keys() -> set[str]:
    keys = set()
    for flags in _COMMANDS.values():
        for flag in flags:
            keys.add(_dest(flag.name))
    return keys


def _load_config_file(path: str) -> dict[str, str]:
    """Parse a flat KEY=VALUE config file ('#' starts a comment)."""
    values: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as handle:
        for line_no, raw in enumerate(handle, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{line_no}: expected KEY=VALUE, got {raw!r}")
            key, _, value = line.partition("=")
            values[_dest(key.strip().lower())] = value.strip()
    return values


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="covertsense",
        description="Covert phase-sensing bounds, sweeps and simulations.",
    )
    parser.add_argument(
        "--config",
        default=None,
        help=f"flat KEY=VALUE config file (default: ${CONFIG_ENV_VAR})",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    for command, flags in _COMMANDS.items():
        sub = subparsers.add_parser(command)
        for flag in flags:
            # Defaults are filled in post-parse so a config file can sit
            # between built-in defaults and explicit flags.
            sub.add_argument(f"--{flag.name}", type=str, default=None, help=flag.help)
    return parser


def _resolve(
    command: str, args: argparse.Namespace, file_values: dict[str, str]
) -> dict[str, Any]:
    resolved: dict[str, Any] = {}
    for flag in _COMMANDS[command]:
        dest = _dest(flag.name)
        raw = getattr(args, dest)
        if raw is None and dest in file_values:
            raw = file_values[dest]
        if raw is None:
            if flag.default is ...:
                raise _UsageError(f"missing required option --{flag.name}")
            resolved[dest] = flag.default
            continue
        try:
            resolved[dest] = flag.kind(raw)
        except (TypeError, ValueError) as exc:
            raise _UsageError(f"bad value for --{flag.name}: {exc}") from exc
    return resolved


class _UsageError(Exception):
    pass


def _metadata(seed: int | None) -> dict[str, Any]:
    return {
        "constants_version": CONSTANTS_VERSION,
        "rng": RNG_ALGORITHM,
        "seed": seed,
    }


def _emit_json(payload: dict[str, Any]) -> None:
    sys.stdout.write(json.dumps(payload, sort_keys=True, indent=2) + "\n")


def _report(
    command: str,
    config: dict[str, Any],
    results: dict[str, Any],
    *,
    seed: int | None = None,
) -> None:
    _emit_json(
        {
            "command": command,
            "config": config,
            "metadata": _metadata(seed),
            "results": results,
        }
    )


def _csv_cell(value: float | None) -> str:
    return "" if value is None else repr(float(value))


def emit_csv(rows: Sequence[Any], stream: Any = None) -> None:
    """Write sweep rows as CSV (header always; one line per row)."""
    stream = stream or sys.stdout
    stream.write(CSV_HEADER + "\n")
    for row in rows:
        cells = (
            _csv_cell(row.f_hz),
            _csv_cell(row.lambda_m),
            _csv_cell(row.eta),
            _csv_cell(row.nbar_b),
            _csv_cell(row.c_ase),
            _csv_cell(row.b),
        )
        stream.write(",".join(cells) + "\n")


def _scenario_from(config: dict[str, Any]) -> SensingScenario:
    return SensingScenario(
        eta_1=config["eta1"],
        eta_2=config["eta2"],
        nbar_b1=config["nb1"],
        nbar_b2=config["nb2"],
    )


def _geometry_from(config: dict[str, Any]) -> LinkGeometry:
    return LinkGeometry(
        range_m=config["L"],
        r_t=config["rt"],
        r_target=config["rtarget"],
        t0=config["t0"],
        area_factor=config["area_factor"],
        eta_policy=config["eta_policy"],
        eta_max=config["eta_max"],
    )


def _cmd_scenario(config: dict[str, Any]) -> int:
    scenario = _scenario_from(config)
    coefficients = taylor_coefficients(scenario)
    budget = covert_budget(scenario, config["epsilon"], config["n"])
    qre = willie_qre(scenario, budget.nbar_s, config["theta"])
    cm = willie_cm(scenario, budget.nbar_s, config["theta"])
    results = {
        "eta_eff": scenario.eta_eff,
        "nb_eff": scenario.nbar_b_eff,
        "c2": budget.c2,
        "c3": coefficients.c3,
        "ns": budget.nbar_s,
        "in_taylor_regime": budget.in_taylor_regime,
        "qre_per_mode": qre,
        "willie_error_bound": willie_error_lower_bound(
            budget.c2, config["n"], budget.nbar_s
        ),
        "willie_cm": cm.matrix.tolist(),
    }
    _report("scenario", config, results)
    return 0


def _cmd_bounds(config: dict[str, Any]) -> int:
    scenario = _scenario_from(config)
    report = estimation_report(
        scenario,
        config["epsilon"],
        config["n"],
        config["nlo"],
        w_ase=config["w_ase"],
        w_coh=config["w_coh"],
        integration_time=config["t_int"],
    )
    results = {
        "eta_eff": scenario.eta_eff,
        "nb_eff": scenario.nbar_b_eff,
        "F_A": report.f_a,
        "F_A_prime": report.f_a_prime,
        "c_ase": report.c_ase,
        "c_het_tilde": report.c_het_tilde,
        "c_coh": report.c_coh,
        "c_het": report.c_het,
        "B": report.qcrb,
        "mse_het": report.mse_het,
        "mu": report.mu,
        "mu_c": report.mu_c,
        "mu_w": report.mu_w,
    }
    _report("bounds", config, results)
    return 0


def _cmd_mse_mc(config: dict[str, Any]) -> int:
    scenario = _scenario_from(config)
    budget = covert_budget(scenario, config["epsilon"], config["n"])
    stats = heterodyne_stats(scenario, config["theta"], budget.nbar_s, config["n"])
    mse, stderr = simulate_heterodyne_mse(
        scenario,
        config["theta"],
        config["epsilon"],
        config["n"],
        config["trials"],
        config["seed"],
        workers=config["workers"],
        per_sample=config["per_sample"],
    )
    results = {
        "mse": mse,
        "stderr": stderr,
        "sigma_het_sq": stats.sigma_het_sq,
        "ns": budget.nbar_s,
    }
    # The worker count routes identical per-trial substreams to threads and
    # cannot change any result, so it is an execution detail rather than
    # config: echoing it would break byte-identical output across
    # parallelism settings.
    config_echo = {key: value for key, value in config.items() if key != "workers"}
    _report("mse-mc", config_echo, results, seed=config["seed"])
    return 0


def _cmd_sweep(config: dict[str, Any]) -> int:
    if config["format"] not in ("csv", "json"):
        raise _UsageError("--format must be csv or json")
    geometry = _geometry_from(config)
    try:
        rows = sweep_frequency(
            config["fmin"],
            config["fmax"],
            config["points"],
            geometry,
            epsilon=config["epsilon"],
            bandwidth=config["W"],
            integration_time=config["T"],
        )
    except EmptySweepError as exc:
        if config["format"] == "csv":
            emit_csv([])
        _emit_error(exc, stream=sys.stderr)
        return 1
    if config["format"] == "csv":
        emit_csv(rows)
        sys.stderr.write(
            json.dumps({"config": config, "metadata": _metadata(None)}, sort_keys=True)
            + "\n"
        )
    else:
        _report(
            "sweep",
            config,
            {"rows": [dataclasses.asdict(row) for row in rows]},
        )
    return 0


def _cmd_optimize(config: dict[str, Any]) -> int:
    geometry = _geometry_from(config)
    lambda_star, c_ase, bound = optimize_wavelength(
        geometry,
        (config["lmin"], config["lmax"]),
        epsilon=config["epsilon"],
        bandwidth=config["W"],
        integration_time=config["T"],
    )
    _report(
        "optimize",
        config,
        {"lambda_star": lambda_star, "c_ase": c_ase, "B": bound},
    )
    return 0


def _format_reproduce_table(report: Any) -> str:
    lines = []
    lines.append(
        f"reference check at epsilon={report.epsilon:g}, W={report.bandwidth_hz:g} Hz, "
        f"T={report.integration_time_s:g} s "
        f"(tolerances: |dlambda| <= {report.lambda_tolerance_m * 1e6:g} um, "
        f"|dB|/B <= {report.b_rel_tolerance:.0%})"
    )
    header = (
        f"{'convention':22s} {'target':34s} {'lambda* (um)':>12s} "
        f"{'B':>13s} {'B target':>10s} {'dlam (um)':>10s} {'B rel err':>10s} {'ok':>3s}"
    )
    for convention in report.conventions:
        lines.append("")
        lines.append(header)
        label = f"af={convention.area_factor:g} policy={convention.eta_policy}"
        for result in convention.results:
            lam = f"{result.lambda_m * 1e6:.4f}" if result.lambda_m is not None else "-"
            b_val = f"{result.b_value:.6g}" if result.b_value is not None else "-"
            d_lam = (
                f"{result.d_lambda_m * 1e6:+.3f}"
                if result.d_lambda_m is not None
                else "-"
            )
            rel = f"{result.b_rel_err:+.3%}" if result.b_rel_err is not None else "-"
            flag = f" [{result.flag}]" if result.flag else ""
            lines.append(
                f"{label:22s} {result.label:34s} {lam:>12s} {b_val:>13s} "
                f"{result.b_target:>10g} {d_lam:>10s} {rel:>10s} "
                f"{'yes' if result.matches else 'no':>3s}{flag}"
            )
    lines.append("")
    matched = report.matched
    if matched is None:
        lines.append(
            "no convention reproduces all five reference values within tolerance; "
            "the residuals above are the result"
        )
    else:
        lines.append(
            f"matched convention: area_factor={matched.area_factor:g}, "
            f"eta_policy={matched.eta_policy}"
        )
    return "\n".join(lines) + "\n"


def _cmd_reproduce_paper(config: dict[str, Any]) -> int:
    if config["format"] not in ("table", "json"):
        raise _UsageError("--format must be table or json")
    report = reproduce_paper_report(
        epsilon=config["epsilon"],
        bandwidth=config["W"],
        integration_time=config["T"],
    )
    if config["format"] == "json":
        _report("reproduce-paper", config, dataclasses.asdict(report))
    else:
        sys.stdout.write(_format_reproduce_table(report))
    return 0


def _cmd_oracle_check(config: dict[str, Any]) -> int:
    scenario = _scenario_from(config)
    residuals = dict(
        oracle_cross_check(
            scenario,
            config["ns"],
            config["nlo"],
            config["theta"],
            config["cutoff"],
        )
    )
    residuals["cutoff"] = int(residuals["cutoff"])
    passed = all(
        residuals[name] <= bound for name, bound in ORACLE_TOLERANCES.items()
    )
    _report(
        "oracle-check",
        config,
        {
            "residuals": residuals,
            "tolerances": ORACLE_TOLERANCES,
            "passed": passed,
        },
    )
    return 0 if passed else 1


_HANDLERS: dict[str, Callable[[dict[str, Any]], int]] = {
    "scenario": _cmd_scenario,
    "bounds": _cmd_bounds,
    "mse-mc": _cmd_mse_mc,
    "sweep": _cmd_sweep,
    "optimize": _cmd_optimize,
    "reproduce-paper": _cmd_reproduce_paper,
    "oracle-check": _cmd_oracle_check,
}


def _emit_error(exc: Exception, stream: Any = None) -> None:
    stream = stream or sys.stdout
    stream.write(
        json.dumps(
            {"error": {"type": type(exc).__name__, "message": str(exc)}},
            sort_keys=True,
        )
        + "\n"
    )


def main(argv: Sequence[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)

    config_path = args.config or os.environ.get(CONFIG_ENV_VAR)
    file_values: dict[str, str] = {}
    if config_path:
        try:
            file_values = _load_config_file(config_path)
        except (OSError, ValueError) as exc:
            parser.exit(2, f"covertsense: config error: {exc}\n")
        unknown = set(file_values) - _known_config_keys()
        if unknown:
            parser.exit(
                2,
                "covertsense: unknown config keys: "
                + ", ".join(sorted(unknown))
                + "\n",
            )

    try:
        config = _resolve(args.command, args, file_values)
    except _UsageError as exc:
        parser.exit(2, f"covertsense: {exc}\n")

    try:
        return _HANDLERS[args.command](config)
    except _UsageError as exc:
        parser.exit(2, f"covertsense: {exc}\n")
    except (DomainError, NumericalInstabilityError, ValueError) as exc:
        _emit_error(exc)
        return 1


if __name__ == "__main__":
    sys.exit(main())
