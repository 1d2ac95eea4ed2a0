"""Scenario runner: named experiments with JSON config and CSV output.

Usage:
    metrolab run --config cfg.json [--seed 7] [--output out.csv]
    metrolab list-scenarios
    metrolab validate --config cfg.json

A config is a JSON document {"scenario": ..., "params": {...},
"output": ...}.  CLI flags override config fields.  Output is a CSV
file with a "# schema=1" comment line, floats printed to 17 significant
digits, UTF-8, LF line endings; identical config and seed reproduce the
file byte for byte.  The environment variable METROLAB_MAX_DIM (default
4096) caps the basis dimension a scenario may request.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from .fock import fidelity
from .operators import PairAxis, number_op, schwinger_j
from .states import (
    coherent_cutoff,
    coherent_truncated,
    correlated_three_mode,
    cv_cat,
    general_probe,
    noon,
    rotated_fock,
    two_mode_fixed_n,
    with_reference,
)
from .metrology import jn_variance_closed_form, qfi_mixed, qfi_pure, variance
from .optimize import lossy_probe, optimal_zeta, sweep_qfi_vs_zeta

SCHEMA_LINE = "# schema=1"
DEFAULT_MAX_DIM = 4096
MAX_N = 60
DEFAULT_SEED = 0


class ConfigError(ValueError):
    """Carries every validation error found, not just the first."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


@dataclass
class ScenarioConfig:
    scenario: str
    params: dict = field(default_factory=dict)
    output_path: str = ""

    def __post_init__(self):
        if not self.output_path:
            self.output_path = f"{self.scenario}.csv"


def max_dim() -> int:
    raw = os.environ.get("METROLAB_MAX_DIM", "")
    try:
        return int(raw) if raw else DEFAULT_MAX_DIM
    except ValueError:
        return DEFAULT_MAX_DIM


def _fmt(value) -> str:
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".17g")


def _write_csv(path: str, header, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(SCHEMA_LINE + "\n")
        handle.write(",".join(header) + "\n")
        for row in rows:
            handle.write(",".join(_fmt(v) for v in row) + "\n")


# ---------------------------------------------------------------------------
# parameter validation


def _want_int(params, name, errors, *, lo=None, hi=None, default=None):
    value = params.get(name, default)
    if value is None:
        errors.append(f"params.{name}: required")
        return None
    if isinstance(value, bool) or not isinstance(value, int):
        errors.append(f"params.{name}: expected an integer, got {value!r}")
        return None
    if lo is not None and value < lo:
        errors.append(f"params.{name}: must be >= {lo}, got {value}")
        return None
    if hi is not None and value > hi:
        errors.append(f"params.{name}: must be <= {hi}, got {value}")
        return None
    return value


def _want_number(params, name, errors, *, lo=None, hi=None, default=None):
    value = params.get(name, default)
    if value is None:
        errors.append(f"params.{name}: required")
        return None
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        errors.append(f"params.{name}: expected a number, got {value!r}")
        return None
    value = float(value)
    if lo is not None and value < lo:
        errors.append(f"params.{name}: must be >= {lo}, got {value}")
        return None
    if hi is not None and value > hi:
        errors.append(f"params.{name}: must be <= {hi}, got {value}")
        return None
    return value


def _want_int_list(params, name, errors, *, lo, hi, default):
    values = params.get(name, list(default))
    if not isinstance(values, list) or not values:
        errors.append(f"params.{name}: expected a non-empty list")
        return None
    out = []
    for k, value in enumerate(values):
        if isinstance(value, bool) or not isinstance(value, int):
            errors.append(f"params.{name}[{k}]: expected an integer, got {value!r}")
            return None
        if not lo <= value <= hi:
            errors.append(f"params.{name}[{k}]: {value} outside {lo}..{hi}")
            return None
        out.append(value)
    return out


def _want_number_list(params, name, errors, *, lo, hi, default):
    values = params.get(name, list(default))
    if not isinstance(values, list) or not values:
        errors.append(f"params.{name}: expected a non-empty list")
        return None
    out = []
    for k, value in enumerate(values):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            errors.append(f"params.{name}[{k}]: expected a number, got {value!r}")
            return None
        value = float(value)
        if not lo <= value <= hi:
            errors.append(f"params.{name}[{k}]: {value} outside [{lo}, {hi}]")
            return None
        out.append(value)
    return out


def _check_dim(num_modes: int, n_total: int, errors) -> None:
    dim = math.comb(n_total + num_modes, num_modes)
    cap = max_dim()
    if dim > cap:
        errors.append(
            f"basis dimension {dim} ({num_modes} modes, cutoff {n_total}) "
            f"exceeds the cap {cap} (override with METROLAB_MAX_DIM)"
        )


def _check_unknown(params, known, errors) -> None:
    for name in sorted(set(params) - set(known) - {"seed"}):
        errors.append(f"params.{name}: unknown parameter")


# ---------------------------------------------------------------------------
# scenarios


def _run_noon_scaling(params, rng):
    rows = []
    for n in params["n_values"]:
        state = noon(n)
        jz = schwinger_j(state.basis, PairAxis(0, 1, beta=0.0))
        rows.append((n, qfi_pure(state, jz).qfi))
    return ["n", "qfi"], rows, []


def _validate_noon_scaling(params, errors):
    values = _want_int_list(params, "n_values", errors, lo=1, hi=MAX_N, default=range(1, 9))
    if values:
        _check_dim(2, max(values), errors)
    return {"n_values": values}


def _run_cat_vs_noon(params, rng):
    nop_cache = {}
    rows = []
    for alpha in params["alphas"]:
        cutoff = coherent_cutoff(alpha)
        cat = cv_cat(alpha, cutoff)
        if cutoff not in nop_cache:
            nop_cache[cutoff] = number_op(cat.basis, 0)
        nop = nop_cache[cutoff]
        probs = np.abs(cat.amplitudes) ** 2
        nbar = float(probs @ np.arange(cutoff + 1))
        qfi_cat = qfi_pure(cat, nop).qfi
        n_noon = max(1, round(nbar))
        rows.append((alpha, nbar, qfi_cat, n_noon, float(n_noon) ** 2))
    return ["alpha", "cat_nbar", "cat_qfi", "noon_n", "noon_qfi"], rows, []


def _validate_cat_vs_noon(params, errors):
    alphas = _want_number_list(params, "alphas", errors, lo=0.1, hi=6.0, default=(1.0, 2.0, 3.0))
    if alphas:
        _check_dim(1, coherent_cutoff(max(alphas)), errors)
    return {"alphas": alphas}


def _run_cv_convergence(params, rng):
    alpha = params["alpha"]
    rows = []
    for n in params["n_values"]:
        theta = 2.0 * math.asin(alpha / math.sqrt(n))
        probe = rotated_fock(n, theta, 0.0)
        target = with_reference(coherent_truncated(alpha, coherent_cutoff(alpha)), n)
        rows.append((n, theta, 1.0 - fidelity(probe, target)))
    return ["n", "theta", "infidelity"], rows, []


def _validate_cv_convergence(params, errors):
    alpha = _want_number(params, "alpha", errors, lo=0.1, hi=4.0, default=1.0)
    values = _want_int_list(params, "n_values", errors, lo=1, hi=400, default=(10, 40, 160))
    if alpha is not None and values:
        if alpha * alpha > min(values):
            errors.append(
                f"params.alpha: alpha^2 = {alpha * alpha:.6g} exceeds the smallest "
                f"n_value {min(values)}; sin(theta/2) would leave [0, 1]"
            )
    return {"alpha": alpha, "n_values": values}


def _run_zeta_optimize(params, rng):
    n_total = params["n_total"]
    coeffs = params.get("coeffs")
    size = n_total // 2 + 1
    if coeffs is None:
        raw = rng.standard_normal(size) + 1j * rng.standard_normal(size)
    else:
        raw = np.asarray(coeffs, dtype=complex)
    raw = raw / np.linalg.norm(raw)
    state = correlated_three_mode(raw, n_total)
    result = optimal_zeta(state)
    grid = np.linspace(0.0, math.pi, params["grid_points"], endpoint=False)
    rows = [(z, q) for z, q in sweep_qfi_vs_zeta(state, grid)]
    notes = [
        f"zeta_opt = {_fmt(result.zeta_opt)}",
        f"var_max = {_fmt(result.var_max)}",
        f"var_perp = {_fmt(result.var_perp)}",
    ]
    return ["zeta", "qfi"], rows, notes


def _validate_zeta_optimize(params, errors):
    n_total = _want_int(params, "n_total", errors, lo=1, hi=MAX_N, default=8)
    grid_points = _want_int(params, "grid_points", errors, lo=1, hi=100_000, default=64)
    out = {"n_total": n_total, "grid_points": grid_points}
    if n_total is not None:
        _check_dim(3, n_total, errors)
        coeffs = params.get("coeffs")
        if coeffs is not None:
            size = n_total // 2 + 1
            if not isinstance(coeffs, list) or len(coeffs) != size:
                errors.append(f"params.coeffs: expected a list of {size} numbers")
            elif not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in coeffs):
                errors.append("params.coeffs: entries must be real numbers")
            elif not any(v != 0 for v in coeffs):
                errors.append("params.coeffs: must not be all zero")
            else:
                out["coeffs"] = [float(v) for v in coeffs]
    return out


def _run_lossy_sweep(params, rng):
    n_total = params["n_total"]
    probe_mode = params["probe_mode"]
    coeffs = np.zeros((n_total + 1, n_total + 1), dtype=complex)
    if params["probe"] == "noon":
        coeffs[n_total, 0] = coeffs[0, n_total] = 1 / math.sqrt(2)
    else:
        for n in range(n_total // 2 + 1):
            coeffs[n, n] = 1.0
        coeffs /= np.linalg.norm(coeffs)
    probe = general_probe(coeffs, n_total)
    rows = []
    for kappa in params["kappas"]:
        rho = lossy_probe(probe, probe_mode, kappa)
        jz = schwinger_j(rho.basis, PairAxis(0, 2, beta=0.0))
        rows.append((kappa, qfi_mixed(rho, jz).qfi))
    return ["kappa", "qfi"], rows, []


def _validate_lossy_sweep(params, errors):
    n_total = _want_int(params, "n_total", errors, lo=1, hi=MAX_N, default=3)
    probe_mode = _want_int(params, "probe_mode", errors, lo=0, hi=2, default=0)
    kappas = _want_number_list(
        params, "kappas", errors, lo=0.0, hi=math.pi,
        default=[k * math.pi / 16 for k in range(9)],
    )
    probe = params.get("probe", "noon")
    if probe not in ("noon", "correlated"):
        errors.append(f"params.probe: expected 'noon' or 'correlated', got {probe!r}")
    if n_total is not None:
        _check_dim(4, n_total, errors)
    return {"n_total": n_total, "probe_mode": probe_mode, "kappas": kappas, "probe": probe}


def _run_variance_oracle(params, rng):
    rows = []
    for case in range(params["num_cases"]):
        n_total = int(rng.integers(1, params["n_max"] + 1))
        raw = rng.standard_normal(n_total + 1) + 1j * rng.standard_normal(n_total + 1)
        coeffs = raw / np.linalg.norm(raw)
        beta = float(rng.uniform(0.0, math.pi))
        phi = float(rng.uniform(0.0, 2 * math.pi))
        closed = jn_variance_closed_form(coeffs, n_total, beta, phi)
        state = two_mode_fixed_n(coeffs, n_total)
        matrix = variance(state, schwinger_j(state.basis, PairAxis(0, 1, beta=beta, phi=phi)))
        rows.append((case, n_total, beta, phi, closed, matrix, abs(closed - matrix)))
    header = ["case", "n", "beta", "phi", "closed_form", "matrix", "abs_diff"]
    return header, rows, []


def _validate_variance_oracle(params, errors):
    num_cases = _want_int(params, "num_cases", errors, lo=1, hi=10_000, default=200)
    n_max = _want_int(params, "n_max", errors, lo=1, hi=MAX_N, default=30)
    if n_max is not None:
        _check_dim(2, n_max, errors)
    return {"num_cases": num_cases, "n_max": n_max}


SCENARIOS = {
    "noon-scaling": (
        _run_noon_scaling,
        _validate_noon_scaling,
        ("n_values",),
        "QFI of NOON probes under Jz; exhibits the N^2 scaling",
    ),
    "cat-vs-noon": (
        _run_cat_vs_noon,
        _validate_cat_vs_noon,
        ("alphas",),
        "cat-state QFI under the number operator next to the matched NOON value",
    ),
    "cv-convergence": (
        _run_cv_convergence,
        _validate_cv_convergence,
        ("alpha", "n_values"),
        "infidelity of the rotated Fock probe against a reference-embedded coherent state",
    ),
    "zeta-optimize": (
        _run_zeta_optimize,
        _validate_zeta_optimize,
        ("n_total", "grid_points", "coeffs"),
        "closed-form optimal weight angle plus an operator-route sweep",
    ),
    "lossy-sweep": (
        _run_lossy_sweep,
        _validate_lossy_sweep,
        ("n_total", "probe", "probe_mode", "kappas"),
        "mixed-state QFI of a four-mode probe after environment coupling, per kappa",
    ),
    "variance-oracle": (
        _run_variance_oracle,
        _validate_variance_oracle,
        ("num_cases", "n_max"),
        "closed-form J_n variance against the operator computation on random states",
    ),
}


def validate_config(text: str) -> ScenarioConfig:
    """Parse and validate a JSON config, collecting every error found."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(
            [f"syntax error at line {exc.lineno}, column {exc.colno}: {exc.msg}"]
        ) from exc

    errors: list[str] = []
    if not isinstance(doc, dict):
        raise ConfigError(["config must be a JSON object"])

    scenario = doc.get("scenario")
    if not isinstance(scenario, str) or scenario not in SCENARIOS:
        raise ConfigError(
            [
                f"scenario: {scenario!r} is not recognized; valid scenarios: "
                + ", ".join(sorted(SCENARIOS))
            ]
        )

    params = doc.get("params", {})
    if not isinstance(params, dict):
        errors.append("params: expected an object")
        params = {}
    output = doc.get("output", "")
    if not isinstance(output, str):
        errors.append("output: expected a string")
        output = ""
    for key in sorted(set(doc) - {"scenario", "params", "output"}):
        errors.append(f"{key}: unknown config field")

    _, validator, known, _ = SCENARIOS[scenario]
    _check_unknown(params, known, errors)
    cleaned = validator(params, errors)
    seed = params.get("seed", DEFAULT_SEED)
    if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
        errors.append(f"params.seed: expected a non-negative integer, got {seed!r}")
    else:
        cleaned["seed"] = seed

    if errors:
        raise ConfigError(errors)
    return ScenarioConfig(scenario=scenario, params=cleaned, output_path=output)


def run_scenario(config: ScenarioConfig, stream=None) -> int:
    """Execute a validated config; returns a process exit status."""
    stream = stream if stream is not None else sys.stdout
    runner = SCENARIOS[config.scenario][0]
    rng = np.random.default_rng(config.params.get("seed", DEFAULT_SEED))
    header, rows, notes = runner(config.params, rng)
    try:
        _write_csv(config.output_path, header, rows)
    except OSError as exc:
        print(f"error: cannot write {config.output_path}: {exc}", file=sys.stderr)
        return 1
    for note in notes:
        print(note, file=stream)
    print(f"wrote {len(rows)} rows to {config.output_path}", file=stream)
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="metrolab", description="scenario runner for the metrolab library"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_parser = sub.add_parser("run", help="run a scenario from a config file")
    run_parser.add_argument("--config", required=True, help="path to a JSON config")
    run_parser.add_argument("--seed", type=int, default=None, help="override params.seed")
    run_parser.add_argument("--output", default=None, help="override the output path")

    sub.add_parser("list-scenarios", help="list scenario names and parameters")

    validate_parser = sub.add_parser("validate", help="validate a config file")
    validate_parser.add_argument("--config", required=True, help="path to a JSON config")

    args = parser.parse_args(argv)

    if args.command == "list-scenarios":
        for name in sorted(SCENARIOS):
            _, _, known, description = SCENARIOS[name]
            print(f"{name}: {description}")
            print(f"    params: {', '.join(known)}, seed")
        return 0

    try:
        with open(args.config, "r", encoding="utf-8") as handle:
            text = handle.read()
    except OSError as exc:
        print(f"error: cannot read {args.config}: {exc}", file=sys.stderr)
        return 2

    try:
        config = validate_config(text)
    except ConfigError as exc:
        for line in exc.errors:
            print(f"error: {line}", file=sys.stderr)
        return 2

    if args.command == "validate":
        print(f"ok: scenario {config.scenario}")
        return 0

    if args.seed is not None:
        if args.seed < 0:
            print("error: --seed must be non-negative", file=sys.stderr)
            return 2
        config.params["seed"] = args.seed
    if args.output is not None:
        config.output_path = args.output
    return run_scenario(config)


if __name__ == "__main__":
    sys.exit(main())
