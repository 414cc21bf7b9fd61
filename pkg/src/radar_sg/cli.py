"""Command-line front end: ``radar-sg {eval,sweep,simulate,compare,quad}``.

A run is described by a RunSpec, a JSON object such as::

    {
      "scenario": {"alpha_i": 2, "delta0": 0},
      "desired": "rayleigh",
      "model": "kms:k=1,mu=2,m=1",
      "method": "approx",
      "order": 10,
      "T_dB": [-10, 0, 10],
      "sweep": {"param": "L", "values": [0, 1, 2]},
      "sim": {"trials": 100000, "seed": 1, "rmax": 100, "tail_mean": true},
      "curves": [{"label": "L=2", "scenario": {"L": 2}}]
    }

Every key is optional. Command-line flags override the top-level entries;
each item of ``curves`` may override ``scenario`` (merged), ``desired``,
``model``, ``method``, ``order`` and ``sweep``. Output is CSV with header
``sweep_param,sweep_value,T_dB,ps_closed[,ps_mc,stderr,abs_diff,pass]`` and
a trailing ``curve`` column when the run description defines curves.

Exit status: 0 on success, 2 for invalid input or unsupported parameter
regimes, 3 when a ``compare`` row misses its tolerance.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields, replace
from importlib import resources
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from . import analysis, channels, montecarlo
from .errors import ConvergenceError, InvalidArgument, UnsupportedParameters
from .specfun import gauss_laguerre_rule

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_COMPARE_FAILED = 3
ABS_TOLERANCE = 0.005
SIGMA_TOLERANCE = 4.0

SCENARIO_FIELDS = tuple(f.name for f in fields(analysis.Scenario))
MODEL_PARAMS = ("kappa", "K", "mu", "m")
SWEEP_PARAMS = SCENARIO_FIELDS + ("T_dB",) + MODEL_PARAMS
_MODEL_FIELD_ALIASES = {"kappa": ("kappa", "K"), "K": ("K", "kappa"), "mu": ("mu",), "m": ("m",)}
TOP_LEVEL_KEYS = {"description", "scenario", "desired", "model", "method", "order",
                  "T_dB", "T", "sweep", "sim", "curves"}
CURVE_KEYS = {"label", "scenario", "desired", "model", "method", "order", "sweep"}
SIM_KEYS = {"trials", "seed", "rmax", "batch", "tail_mean"}


class SpecError(InvalidArgument):
    """Malformed RunSpec; the message names the offending location."""


# ---------------------------------------------------------------------------
# RunSpec
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Sweep:
    param: str
    values: tuple

    def __post_init__(self):
        if self.param not in SWEEP_PARAMS:
            raise SpecError(f"sweep parameter {self.param!r} is not one of {', '.join(SWEEP_PARAMS)}")
        if not self.values:
            raise SpecError("sweep needs at least one value")


@dataclass(frozen=True)
class Curve:
    label: str
    scenario: analysis.Scenario
    desired: str
    model: channels.FadingModel
    method: analysis.Method
    order: int
    sweep: Optional[Sweep]


@dataclass
class RunSpec:
    """Fully resolved run description."""

    scenario: analysis.Scenario = field(default_factory=analysis.Scenario)
    desired: str = "rayleigh"
    model: channels.FadingModel = field(default_factory=channels.Rayleigh)
    method: analysis.Method = analysis.Method.EXACT
    order: int = analysis.DEFAULT_ORDER
    thresholds_db: Optional[List[float]] = None
    sweep: Optional[Sweep] = None
    sim: montecarlo.SimConfig = field(default_factory=montecarlo.SimConfig)
    curves: List[Dict[str, Any]] = field(default_factory=list)
    has_curves: bool = False

    def resolved_curves(self) -> List[Curve]:
        raw = self.curves or [{}]
        out = []
        for index, item in enumerate(raw):
            where = f"curves[{index}]"
            scn = self.scenario
            if "scenario" in item:
                scn = _scenario_update(scn, item["scenario"], f"{where}.scenario")
            out.append(Curve(
                label=str(item.get("label", index if self.has_curves else "")),
                scenario=scn,
                desired=_desired(item["desired"], f"{where}.desired") if "desired" in item else self.desired,
                model=_model(item["model"], f"{where}.model") if "model" in item else self.model,
                method=_method(item["method"], f"{where}.method") if "method" in item else self.method,
                order=_order(item["order"], f"{where}.order") if "order" in item else self.order,
                sweep=_sweep(item["sweep"], f"{where}.sweep") if "sweep" in item else self.sweep,
            ))
        return out


def _fail(where: str, message: str):
    raise SpecError(f"{where}: {message}")


def _number(value, where):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        _fail(where, f"expected a number, got {value!r}")
    return float(value)


def _scenario_update(base: analysis.Scenario, data, where: str) -> analysis.Scenario:
    if not isinstance(data, dict):
        _fail(where, "expected an object of scenario fields")
    changes = {}
    for key, value in data.items():
        if key == "T_dB":
            changes["T"] = analysis.db_to_linear(_number(value, f"{where}.{key}"))
        elif key in SCENARIO_FIELDS:
            changes[key] = _number(value, f"{where}.{key}")
        else:
            _fail(f"{where}.{key}", f"unknown scenario field (expected one of {', '.join(SCENARIO_FIELDS)}, T_dB)")
    try:
        return replace(base, **changes)
    except InvalidArgument as exc:
        _fail(where, str(exc))


def _desired(value, where):
    if value not in ("rayleigh", "none"):
        _fail(where, f"desired must be 'rayleigh' or 'none', got {value!r}")
    return value


def _model(value, where):
    if not isinstance(value, str):
        _fail(where, f"expected a model string such as 'kms:k=1,mu=2,m=3', got {value!r}")
    try:
        return channels.parse_model(value)
    except InvalidArgument as exc:
        _fail(where, str(exc))


def _method(value, where):
    try:
        return analysis.Method.coerce(value)
    except InvalidArgument as exc:
        _fail(where, str(exc))


def _order(value, where):
    if isinstance(value, bool) or not isinstance(value, int) or not 1 <= value <= 200:
        _fail(where, f"quadrature order must be an integer in 1..200, got {value!r}")
    return value


def _value_list(value, where):
    if not isinstance(value, list) or not value:
        _fail(where, "expected a non-empty list of numbers")
    return [_number(v, f"{where}[{i}]") for i, v in enumerate(value)]


def _sweep(data, where) -> Sweep:
    if not isinstance(data, dict):
        _fail(where, "expected an object with 'param' and 'values' (or 'from', 'to', 'steps')")
    unknown = set(data) - {"param", "values", "from", "to", "steps"}
    if unknown:
        _fail(f"{where}.{sorted(unknown)[0]}", "unknown sweep key")
    if "param" not in data:
        _fail(f"{where}.param", "missing")
    if "values" in data:
        values = _value_list(data["values"], f"{where}.values")
    else:
        for key in ("from", "to", "steps"):
            if key not in data:
                _fail(f"{where}.{key}", "missing (give 'values' or 'from', 'to' and 'steps')")
        steps = data["steps"]
        if isinstance(steps, bool) or not isinstance(steps, int) or steps < 1:
            _fail(f"{where}.steps", f"expected a positive integer, got {steps!r}")
        values = linspace(_number(data["from"], f"{where}.from"), _number(data["to"], f"{where}.to"), steps)
    try:
        return Sweep(str(data["param"]), tuple(values))
    except SpecError as exc:
        _fail(f"{where}.param", str(exc))


def _sim(data, where) -> montecarlo.SimConfig:
    if not isinstance(data, dict):
        _fail(where, "expected an object")
    unknown = set(data) - SIM_KEYS
    if unknown:
        _fail(f"{where}.{sorted(unknown)[0]}", f"unknown simulation key (expected {', '.join(sorted(SIM_KEYS))})")
    kwargs = {}
    for key in ("trials", "seed", "batch"):
        if key in data:
            kwargs[key] = data[key]
    if "rmax" in data:
        kwargs["r_max"] = None if data["rmax"] is None else _number(data["rmax"], f"{where}.rmax")
    if "tail_mean" in data:
        if not isinstance(data["tail_mean"], bool):
            _fail(f"{where}.tail_mean", "expected true or false")
        kwargs["tail_mean"] = data["tail_mean"]
    try:
        return montecarlo.SimConfig(**kwargs)
    except InvalidArgument as exc:
        _fail(where, str(exc))


def linspace(start: float, stop: float, steps: int) -> List[float]:
    if steps == 1:
        return [start]
    return [float(v) for v in np.linspace(start, stop, steps)]


def parse_runspec(data: Any, source: str = "<spec>") -> RunSpec:
    """Validate a decoded RunSpec object."""
    if not isinstance(data, dict):
        _fail(source, "top level must be a JSON object")
    unknown = set(data) - TOP_LEVEL_KEYS
    if unknown:
        _fail(f"{source}: {sorted(unknown)[0]}", f"unknown key (expected {', '.join(sorted(TOP_LEVEL_KEYS))})")
    spec = RunSpec()
    if "scenario" in data:
        spec.scenario = _scenario_update(spec.scenario, data["scenario"], f"{source}: scenario")
    if "desired" in data:
        spec.desired = _desired(data["desired"], f"{source}: desired")
    if "model" in data:
        spec.model = _model(data["model"], f"{source}: model")
    if "method" in data:
        spec.method = _method(data["method"], f"{source}: method")
    if "order" in data:
        spec.order = _order(data["order"], f"{source}: order")
    if "T_dB" in data and "T" in data:
        _fail(source, "give either T_dB or T, not both")
    if "T_dB" in data:
        spec.thresholds_db = _value_list(data["T_dB"], f"{source}: T_dB")
    if "T" in data:
        linear = _value_list(data["T"], f"{source}: T")
        if any(v <= 0 for v in linear):
            _fail(f"{source}: T", "linear thresholds must be positive")
        spec.thresholds_db = [analysis.linear_to_db(v) for v in linear]
    if "sweep" in data:
        spec.sweep = _sweep(data["sweep"], f"{source}: sweep")
    if "sim" in data:
        spec.sim = _sim(data["sim"], f"{source}: sim")
    if "curves" in data:
        curves = data["curves"]
        if not isinstance(curves, list) or not curves:
            _fail(f"{source}: curves", "expected a non-empty list of objects")
        for i, item in enumerate(curves):
            if not isinstance(item, dict):
                _fail(f"{source}: curves[{i}]", "expected an object")
            bad = set(item) - CURVE_KEYS
            if bad:
                _fail(f"{source}: curves[{i}].{sorted(bad)[0]}", "unknown curve key")
        spec.curves = curves
        spec.has_curves = True
        spec.resolved_curves()  # validate eagerly
    return spec


def load_json(text: str, source: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError(f"{source}:{exc.lineno}:{exc.colno}: invalid JSON: {exc.msg}") from None


def _read_file(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise SpecError(f"{path}: cannot read: {exc.strerror}") from None


def preset_names() -> List[str]:
    folder = resources.files("radar_sg") / "presets"
    return sorted(p.name[:-5] for p in folder.iterdir() if p.name.endswith(".json"))


def load_preset(name: str) -> RunSpec:
    path = resources.files("radar_sg") / "presets" / f"{name}.json"
    if not path.is_file():
        raise SpecError(f"unknown preset {name!r} (available: {', '.join(preset_names())})")
    return parse_runspec(load_json(path.read_text(encoding="utf-8"), f"preset {name}"), f"preset {name}")


# ---------------------------------------------------------------------------
# Row evaluation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Row:
    curve: Curve
    sweep_param: str
    sweep_value: Optional[float]
    T_dB: float
    scenario: analysis.Scenario
    model: channels.FadingModel


def _apply_model_param(model, name, value):
    triple_fields = {f.name for f in fields(model)} if hasattr(model, "__dataclass_fields__") else set()
    for candidate in _MODEL_FIELD_ALIASES[name]:
        if candidate in triple_fields:
            return replace(model, **{candidate: value})
    raise SpecError(f"sweep parameter {name!r} does not apply to model {model.spec()!r}")


def expand_rows(spec: RunSpec) -> List[List[Row]]:
    """Rows grouped by (curve, sweep value); each group shares one threshold grid."""
    groups = []
    for curve in spec.resolved_curves():
        base_db = [analysis.linear_to_db(curve.scenario.T)] if spec.thresholds_db is None else spec.thresholds_db
        sweep = curve.sweep
        if sweep is None:
            points = [("", None)]
        else:
            points = [(sweep.param, v) for v in sweep.values]
        for param, value in points:
            scn, model, grid = curve.scenario, curve.model, base_db
            if param == "T_dB":
                grid = [value]
            elif param == "T":
                if value <= 0:
                    raise SpecError(f"linear threshold must be positive, got {value!r}")
                grid = [analysis.linear_to_db(value)]
            elif param in SCENARIO_FIELDS:
                try:
                    scn = replace(scn, **{param: value})
                except InvalidArgument as exc:
                    raise SpecError(f"sweep {param}={value!r}: {exc}") from None
            elif param:
                try:
                    model = _apply_model_param(model, param, value)
                except InvalidArgument as exc:
                    raise SpecError(f"sweep {param}={value!r}: {exc}") from None
            groups.append([Row(curve, param, value, t_db,
                               replace(scn, T=analysis.db_to_linear(t_db)), model) for t_db in grid])
    return groups


def closed_form(row: Row) -> float:
    c = row.curve
    return analysis.ps_closed_form(row.scenario, c.desired, row.model, c.method, c.order)


def _thread_pool_size(n: int) -> int:
    return montecarlo._thread_count(n)


def evaluate_closed(rows: Sequence[Row]) -> List[float]:
    workers = _thread_pool_size(len(rows))
    if workers == 1:
        return [closed_form(r) for r in rows]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(closed_form, rows))


def simulate_group(group: Sequence[Row], sim: montecarlo.SimConfig):
    row0 = group[0]
    thresholds = [r.scenario.T for r in group]
    return montecarlo.simulate_ps_grid(row0.scenario, row0.curve.desired, row0.model, sim, thresholds)


# ---------------------------------------------------------------------------
# Output
# ---------------------------------------------------------------------------

def fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    return format(float(value), ".12g")


def _write_table(out, header, rows):
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)


def _prefix(row: Row):
    return [row.sweep_param, fmt(row.sweep_value), fmt(row.T_dB)]


def _run_closed(spec: RunSpec, out) -> int:
    groups = expand_rows(spec)
    rows = [r for g in groups for r in g]
    values = evaluate_closed(rows)
    header = ["sweep_param", "sweep_value", "T_dB", "ps_closed"] + (["curve"] if spec.has_curves else [])
    table = []
    for row, value in zip(rows, values):
        table.append(_prefix(row) + [fmt(value)] + ([row.curve.label] if spec.has_curves else []))
    _write_table(out, header, table)
    return EXIT_OK


def _run_simulate(spec: RunSpec, out) -> int:
    groups = expand_rows(spec)
    header = ["sweep_param", "sweep_value", "T_dB", "ps_mc", "stderr", "trials", "seed", "r_max",
              "truncation_bias_bound"] + (["curve"] if spec.has_curves else [])
    table = []
    for group in groups:
        for row, est in zip(group, simulate_group(group, spec.sim)):
            table.append(_prefix(row) + [fmt(est.p_hat), fmt(est.stderr), str(est.trials), str(est.seed),
                                         fmt(est.r_max), fmt(est.truncation_bias_bound)]
                         + ([row.curve.label] if spec.has_curves else []))
    _write_table(out, header, table)
    return EXIT_OK


def _run_compare(spec: RunSpec, out) -> int:
    groups = expand_rows(spec)
    # closed forms first so unsupported regimes are rejected before simulating
    closed = [evaluate_closed(g) for g in groups]
    header = ["sweep_param", "sweep_value", "T_dB", "ps_closed", "ps_mc", "stderr", "abs_diff", "pass"] \
        + (["curve"] if spec.has_curves else [])
    table = []
    failed = False
    for group, values in zip(groups, closed):
        for row, value, est in zip(group, values, simulate_group(group, spec.sim)):
            diff = abs(value - est.p_hat)
            ok = diff <= max(SIGMA_TOLERANCE * est.stderr, ABS_TOLERANCE)
            failed |= not ok
            table.append(_prefix(row) + [fmt(value), fmt(est.p_hat), fmt(est.stderr), fmt(diff),
                                         "true" if ok else "false"]
                         + ([row.curve.label] if spec.has_curves else []))
    _write_table(out, header, table)
    return EXIT_COMPARE_FAILED if failed else EXIT_OK


def _run_quad(order: int, out) -> int:
    rule = gauss_laguerre_rule(order)
    table = [[str(i + 1), format(t, ".17g"), format(w, ".17g")]
             for i, (t, w) in enumerate(zip(rule.nodes, rule.weights))]
    _write_table(out, ["i", "node", "weight"], table)
    return EXIT_OK


# ---------------------------------------------------------------------------
# Argument handling
# ---------------------------------------------------------------------------

def _add_common(p: argparse.ArgumentParser, sweep: bool, sim: bool):
    g = p.add_argument_group("run description")
    g.add_argument("--preset", help="start from a bundled RunSpec (fig2 ... fig11)")
    g.add_argument("--spec", metavar="FILE", help="start from a RunSpec JSON file")
    g.add_argument("--scenario", metavar="FILE", help="JSON object of scenario fields merged over the run description")
    g.add_argument("--set", metavar="NAME=VALUE", action="append", default=[],
                   help="override one scenario field (repeatable); T_dB is accepted")
    g.add_argument("--desired", choices=("rayleigh", "none"))
    g.add_argument("--model", help="interferer fading, e.g. kms:k=1,mu=2,m=3, nakagami:m=2, rician:K=5, "
                                   "km:k=1,mu=2, rs:K=5,m=1, rayleigh, none")
    g.add_argument("--method", choices=("exact", "approx"))
    g.add_argument("--order", type=int, help="Gauss-Laguerre order (default 10)")
    g.add_argument("--T", dest="threshold", type=float, help="threshold in dB (linear with --T-linear)")
    g.add_argument("--T-linear", action="store_true", help="read --T and a T sweep as linear values")
    if sweep:
        s = p.add_argument_group("sweep")
        s.add_argument("--param", help=f"swept parameter: {', '.join(SWEEP_PARAMS)}")
        s.add_argument("--from", dest="start", type=float)
        s.add_argument("--to", dest="stop", type=float)
        s.add_argument("--steps", type=int)
        s.add_argument("--values", help="comma-separated sweep values (instead of --from/--to/--steps)")
    if sim:
        m = p.add_argument_group("simulation")
        m.add_argument("--trials", type=int)
        m.add_argument("--seed", type=int)
        m.add_argument("--rmax", type=float, help="truncation radius (default: automatic)")
        m.add_argument("--batch", type=int)
        m.add_argument("--tail-mean", action="store_true", default=None,
                       help="add the expected interference beyond rmax to every trial")
    p.add_argument("--out", metavar="FILE", help="write CSV here instead of standard output")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="radar-sg", description="Radar ranging success probability under Poisson interference.")
    sub = parser.add_subparsers(dest="command", required=True)
    _add_common(sub.add_parser("eval", help="closed form at one point"), sweep=False, sim=False)
    _add_common(sub.add_parser("sweep", help="closed form over a parameter grid"), sweep=True, sim=False)
    _add_common(sub.add_parser("simulate", help="Monte Carlo estimate"), sweep=True, sim=True)
    _add_common(sub.add_parser("compare", help="closed form against Monte Carlo"), sweep=True, sim=True)
    q = sub.add_parser("quad", help="dump a Gauss-Laguerre rule")
    q.add_argument("--order", type=int, required=True)
    q.add_argument("--out", metavar="FILE")
    return parser


def spec_from_args(args) -> RunSpec:
    if args.preset and args.spec:
        raise SpecError("give either --preset or --spec, not both")
    if args.preset:
        spec = load_preset(args.preset)
    elif args.spec:
        spec = parse_runspec(load_json(_read_file(args.spec), args.spec), args.spec)
    else:
        spec = RunSpec()
    if args.scenario:
        spec.scenario = _scenario_update(spec.scenario, load_json(_read_file(args.scenario), args.scenario),
                                         args.scenario)
    for item in args.set:
        name, eq, value = item.partition("=")
        if not eq:
            raise SpecError(f"--set expects NAME=VALUE, got {item!r}")
        try:
            number = float(value)
        except ValueError:
            raise SpecError(f"--set {name}: not a number: {value!r}") from None
        spec.scenario = _scenario_update(spec.scenario, {name.strip(): number}, "--set")
    if args.desired:
        spec.desired = args.desired
    if args.model:
        spec.model = _model(args.model, "--model")
    if args.method:
        spec.method = analysis.Method(args.method)
    if args.order is not None:
        spec.order = _order(args.order, "--order")
    if args.threshold is not None:
        if args.T_linear:
            if args.threshold <= 0:
                raise SpecError("--T must be positive when linear")
            t_db = analysis.linear_to_db(args.threshold)
        else:
            t_db = args.threshold
        spec.thresholds_db = [t_db]
    if getattr(args, "param", None) or getattr(args, "values", None):
        param = args.param
        if not param:
            raise SpecError("--values requires --param")
        if param == "T_dB" and args.T_linear:
            param = "T"
        if args.values:
            try:
                values = [float(v) for v in args.values.split(",")]
            except ValueError:
                raise SpecError(f"--values must be comma-separated numbers, got {args.values!r}") from None
        else:
            if args.start is None or args.stop is None or args.steps is None:
                raise SpecError("--param needs --from, --to and --steps (or --values)")
            if args.steps < 1:
                raise SpecError("--steps must be >= 1")
            values = linspace(args.start, args.stop, args.steps)
        spec.sweep = Sweep(param, tuple(values))
        spec.curves = [{k: v for k, v in c.items() if k != "sweep"} for c in spec.curves]
    if hasattr(args, "trials"):
        changes = {}
        if args.trials is not None:
            changes["trials"] = args.trials
        if args.seed is not None:
            changes["seed"] = args.seed
        if args.rmax is not None:
            changes["r_max"] = args.rmax
        if args.batch is not None:
            changes["batch"] = args.batch
        if args.tail_mean is not None:
            changes["tail_mean"] = True
        if changes:
            spec.sim = replace(spec.sim, **changes)
    return spec


def run(argv: Optional[Sequence[str]] = None, stdout=None, stderr=None) -> int:
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    buffer = io.StringIO()
    try:
        if args.command == "quad":
            if not 1 <= args.order <= 200:
                raise InvalidArgument(f"--order must lie in 1..200, got {args.order}")
            code = _run_quad(args.order, buffer)
        else:
            spec = spec_from_args(args)
            if args.command == "eval":
                if spec.sweep is not None or any("sweep" in c for c in spec.curves):
                    spec.sweep = None
                    spec.curves = [{k: v for k, v in c.items() if k != "sweep"} for c in spec.curves]
                code = _run_closed(spec, buffer)
            elif args.command == "sweep":
                code = _run_closed(spec, buffer)
            elif args.command == "simulate":
                code = _run_simulate(spec, buffer)
            else:
                code = _run_compare(spec, buffer)
    except UnsupportedParameters as exc:
        print(f"radar-sg: unsupported parameters: {exc}", file=stderr)
        return EXIT_INVALID
    except (InvalidArgument, ConvergenceError) as exc:
        print(f"radar-sg: error: {exc}", file=stderr)
        return EXIT_INVALID
    text = buffer.getvalue()
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        stdout.write(text)
    return code


def main(argv: Optional[Sequence[str]] = None) -> int:
    return run(argv)


if __name__ == "__main__":
    sys.exit(main())
