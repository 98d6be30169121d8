"""Command-line surface: scenario files, subcommand dispatch, reports.

Scenario files are JSON with an explicit ``schema_version``.  Version 1:

    {
      "schema_version": 1,
      "grid":    {"axes": [[1.0, 2.0], [1.0, 2.0]]},
      "pmfs":    {"f": [0.5, 0.0, 0.0, 0.5], "g": [0.25, 0.25, 0.25, 0.25]},
      "utility": {"family": "custom", "values": [5.0, -5.0, 14.0, 5.0]},
      "params":  {"beta": 0.5, "gamma": 1.0, "tol": 1e-10},
      "options": {"class": "supermodular", "theorem": "T3", "seed": 0,
                  "cases": 100, "grid_shape": [3, 3], "episodes": 100000,
                  "threshold": null, "samples": 50, "operator": "truncate"}
    }

Masses and utility values are listed in canonical (lexicographic) node
order.  Only the sections a subcommand needs are required; ``g`` is the
dominated / comparison distribution.  Flags override file values and the
effective configuration is echoed in every report header.

Exit codes: 0 success, 1 a verification verdict failed (or a solve could
not be certified), 2 input or validation error.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from typing import Any, Sequence

from .dominance import dominates
from .grids import Grid, Pmf, SearchParams, make_grid, make_pmf
from .report import FORMATS, Report, emit_report, fmt_value, render_table
from .solver import ConvergenceError, reservation_utility, simulate_search
from .statics import (
    SuiteConfig,
    TheoremCase,
    closure_check,
    run_suite,
    verify_theorem,
)
from .utility import FunctionClass, TabulatedUtility, tabulate_family

SCHEMA_VERSION = 1


class ScenarioError(ValueError):
    """Scenario validation failure; the message names the offending field."""


@dataclass(frozen=True)
class UtilitySpec:
    family: str
    a: tuple[float, ...] | None = None
    values: tuple[float, ...] | None = None

    def build(self, grid: Grid) -> TabulatedUtility:
        return tabulate_family(self.family, grid, a=self.a, values=self.values)


@dataclass(frozen=True)
class Options:
    function_class: str | None = None
    theorem: str | None = None
    seed: int = 0
    cases: int | None = None
    grid_shape: tuple[int, ...] = (3, 3)
    episodes: int = 100_000
    threshold: float | None = None
    samples: int = 50
    operator: str | None = None


@dataclass(frozen=True)
class Scenario:
    schema_version: int
    grid: Grid | None
    pmf_f: Pmf | None
    pmf_g: Pmf | None
    utility: UtilitySpec | None
    params: SearchParams | None
    options: Options


# ---------------------------------------------------------------------------
# parsing / writing
# ---------------------------------------------------------------------------


def _expect(cond: bool, path: str, message: str) -> None:
    if not cond:
        raise ScenarioError(f"{path}: {message}")


def _number_list(raw: Any, path: str) -> tuple[float, ...]:
    _expect(isinstance(raw, list) and raw, path, "must be a nonempty list of numbers")
    out = []
    for i, v in enumerate(raw):
        _expect(isinstance(v, (int, float)) and not isinstance(v, bool), f"{path}[{i}]", "must be a number")
        out.append(float(v))
    return tuple(out)


def scenario_from_dict(data: Any, path: str = "scenario") -> Scenario:
    _expect(isinstance(data, dict), path, "must be a JSON object")
    version = data.get("schema_version")
    _expect(version == SCHEMA_VERSION, f"{path}.schema_version",
            f"must be {SCHEMA_VERSION} (got {version!r})")
    known = {"schema_version", "grid", "pmfs", "utility", "params", "options"}
    for key in data:
        _expect(key in known, f"{path}.{key}", "unknown section")

    grid = None
    if "grid" in data:
        gsec = data["grid"]
        _expect(isinstance(gsec, dict) and "axes" in gsec, f"{path}.grid", "needs an axes list")
        axes = gsec["axes"]
        _expect(isinstance(axes, list) and axes, f"{path}.grid.axes", "must be a nonempty list")
        try:
            grid = make_grid([_number_list(ax, f"{path}.grid.axes[{k}]") for k, ax in enumerate(axes)])
        except ValueError as exc:
            raise ScenarioError(f"{path}.grid.axes: {exc}") from None

    pmf_f = pmf_g = None
    if "pmfs" in data:
        psec = data["pmfs"]
        _expect(isinstance(psec, dict), f"{path}.pmfs", "must be an object with keys f and/or g")
        for key in psec:
            _expect(key in ("f", "g"), f"{path}.pmfs.{key}", "unknown pmf name (use f or g)")
        _expect(grid is not None, f"{path}.grid", "required when pmfs are given")
        built = {}
        for key in ("f", "g"):
            if key in psec:
                weights = _number_list(psec[key], f"{path}.pmfs.{key}")
                try:
                    built[key] = make_pmf(grid, weights)
                except ValueError as exc:
                    raise ScenarioError(f"{path}.pmfs.{key}: {exc}") from None
        pmf_f, pmf_g = built.get("f"), built.get("g")

    utility = None
    if "utility" in data:
        usec = data["utility"]
        _expect(isinstance(usec, dict) and "family" in usec, f"{path}.utility", "needs a family")
        family = usec["family"]
        _expect(family in ("linear", "product", "min", "custom"), f"{path}.utility.family",
                f"unknown family {family!r}")
        a = _number_list(usec["a"], f"{path}.utility.a") if "a" in usec else None
        values = (
            _number_list(usec["values"], f"{path}.utility.values") if "values" in usec else None
        )
        _expect(family != "linear" or a is not None, f"{path}.utility.a", "required for linear")
        _expect(family != "custom" or values is not None, f"{path}.utility.values",
                "required for custom")
        utility = UtilitySpec(family, a, values)

    params = None
    if "params" in data:
        sec = data["params"]
        _expect(isinstance(sec, dict), f"{path}.params", "must be an object")
        for key in ("beta", "gamma"):
            _expect(key in sec, f"{path}.params.{key}", "required")
            _expect(isinstance(sec[key], (int, float)), f"{path}.params.{key}", "must be a number")
        tol = sec.get("tol", 1e-10)
        _expect(isinstance(tol, (int, float)), f"{path}.params.tol", "must be a number")
        try:
            params = SearchParams(float(sec["beta"]), float(sec["gamma"]), float(tol))
        except ValueError as exc:
            raise ScenarioError(f"{path}.params: {exc}") from None

    opts = Options()
    if "options" in data:
        sec = data["options"]
        _expect(isinstance(sec, dict), f"{path}.options", "must be an object")
        kwargs: dict[str, Any] = {}
        for key, val in sec.items():
            if key == "class":
                _expect(isinstance(val, str), f"{path}.options.class", "must be a string")
                kwargs["function_class"] = val
            elif key == "theorem":
                _expect(isinstance(val, str), f"{path}.options.theorem", "must be a string")
                kwargs["theorem"] = val
            elif key in ("seed", "cases", "episodes", "samples"):
                _expect(isinstance(val, int) and not isinstance(val, bool),
                        f"{path}.options.{key}", "must be an integer")
                kwargs[{"seed": "seed", "cases": "cases", "episodes": "episodes",
                        "samples": "samples"}[key]] = val
            elif key == "grid_shape":
                shape = _number_list(val, f"{path}.options.grid_shape")
                _expect(all(float(s).is_integer() and s >= 1 for s in shape),
                        f"{path}.options.grid_shape", "must be positive integers")
                kwargs["grid_shape"] = tuple(int(s) for s in shape)
            elif key == "threshold":
                if val is not None:
                    _expect(isinstance(val, (int, float)), f"{path}.options.threshold",
                            "must be a number or null")
                    kwargs["threshold"] = float(val)
            elif key == "operator":
                _expect(isinstance(val, str), f"{path}.options.operator", "must be a string")
                kwargs["operator"] = val
            else:
                raise ScenarioError(f"{path}.options.{key}: unknown option")
        opts = Options(**kwargs)

    return Scenario(SCHEMA_VERSION, grid, pmf_f, pmf_g, utility, params, opts)


def scenario_to_dict(s: Scenario) -> dict:
    out: dict[str, Any] = {"schema_version": s.schema_version}
    if s.grid is not None:
        out["grid"] = {"axes": [list(ax) for ax in s.grid.axes]}
    pmfs = {}
    if s.pmf_f is not None:
        pmfs["f"] = list(s.pmf_f.mass)
    if s.pmf_g is not None:
        pmfs["g"] = list(s.pmf_g.mass)
    if pmfs:
        out["pmfs"] = pmfs
    if s.utility is not None:
        usec: dict[str, Any] = {"family": s.utility.family}
        if s.utility.a is not None:
            usec["a"] = list(s.utility.a)
        if s.utility.values is not None:
            usec["values"] = list(s.utility.values)
        out["utility"] = usec
    if s.params is not None:
        out["params"] = {"beta": s.params.beta, "gamma": s.params.gamma, "tol": s.params.tol}
    o = s.options
    osec: dict[str, Any] = {}
    if o.function_class is not None:
        osec["class"] = o.function_class
    if o.theorem is not None:
        osec["theorem"] = o.theorem
    defaults = Options()
    for key, name in (
        ("seed", "seed"), ("cases", "cases"), ("grid_shape", "grid_shape"),
        ("episodes", "episodes"), ("threshold", "threshold"),
        ("samples", "samples"), ("operator", "operator"),
    ):
        val = getattr(o, key)
        if val != getattr(defaults, key):
            osec[name] = list(val) if isinstance(val, tuple) else val
    if osec:
        out["options"] = osec
    return out


def load_scenario(path: str) -> Scenario:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario file {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path} is not valid JSON: {exc}") from None
    return scenario_from_dict(data)


def write_scenario(s: Scenario, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(scenario_to_dict(s), fh, indent=2)
        fh.write("\n")


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def _node_label(coords: Sequence[float]) -> str:
    return "(" + ", ".join(fmt_value(float(c)) for c in coords) + ")"


def _need(value: Any, what: str) -> Any:
    if value is None:
        raise ScenarioError(f"{what} is required by this subcommand")
    return value


def _effective_params(s: Scenario, args: argparse.Namespace) -> SearchParams:
    base = s.params
    beta = args.beta if args.beta is not None else (base.beta if base else None)
    gamma = args.gamma if args.gamma is not None else (base.gamma if base else None)
    tol = args.tol if args.tol is not None else (base.tol if base else 1e-10)
    if beta is None or gamma is None:
        raise ScenarioError("scenario.params (or --beta/--gamma) is required")
    try:
        return SearchParams(float(beta), float(gamma), float(tol))
    except ValueError as exc:
        raise ScenarioError(str(exc)) from None


def _cmd_solve(s: Scenario, args: argparse.Namespace) -> tuple[Report, int]:
    grid = _need(s.grid, "scenario.grid")
    pmf = _need(s.pmf_f, "scenario.pmfs.f")
    utility = _need(s.utility, "scenario.utility").build(grid)
    params = _effective_params(s, args)
    sol = reservation_utility(pmf, utility, params)
    config = {
        "scenario": args.scenario,
        "schema_version": s.schema_version,
        "beta": params.beta,
        "gamma": params.gamma,
        "tol": params.tol,
    }
    rows = [
        {
            "node": _node_label(grid.nodes[i]),
            "mass": pmf.mass[i],
            "utility": utility.values[i],
            "value": sol.value.values[i],
            "accept": grid.node(i) in sol.acceptance,
        }
        for i in range(grid.size)
    ]
    summary = {
        "reservation_utility": sol.reservation_utility,
        "residual": sol.residual,
        "iterations": sol.iterations,
        "acceptance_size": len(sol.acceptance),
    }
    return Report("solve", config, ("node", "mass", "utility", "value", "accept"), rows, summary), 0


def _cmd_dominate(s: Scenario, args: argparse.Namespace) -> tuple[Report, int]:
    _need(s.grid, "scenario.grid")
    f = _need(s.pmf_f, "scenario.pmfs.f")
    g = _need(s.pmf_g, "scenario.pmfs.g")
    name = args.function_class or s.options.function_class
    fc = FunctionClass.from_name(_need(name, "options.class (or --class)"))
    result = dominates(f, g, fc)
    config = {"scenario": args.scenario, "schema_version": s.schema_version, "class": fc.value}
    grid = f.grid
    rows = []
    for i in range(grid.size):
        row: dict[str, Any] = {
            "node": _node_label(grid.nodes[i]),
            "f_mass": f.mass[i],
            "g_mass": g.mass[i],
            "witness": result.witness.values[i] if result.witness is not None else None,
        }
        rows.append(row)
    summary = {
        "verdict": result.verdict,
        "lp_optimum": result.lp_optimum,
        "reason": result.reason,
    }
    code = 0 if result.verdict == "dominates" else 1
    return Report("dominance", config, ("node", "f_mass", "g_mass", "witness"), rows, summary), code


def _suite_rows(records) -> list[dict[str, Any]]:
    rows = []
    for rec in records:
        rep = rec.report
        row: dict[str, Any] = {
            "case_id": rec.case_id,
            "theorem": rep.theorem_id,
            "premise_dom": rep.premise_dominance.verdict,
            "premise_mem": rep.premise_membership,
            "u_F": rep.u_f,
            "u_G": rep.u_g,
            "verdict": rep.status,
            "detail": "",
        }
        if rep.status == "fail":
            case = rec.case
            row["detail"] = json.dumps(
                {
                    "axes": [list(ax) for ax in case.f.grid.axes],
                    "f": list(case.f.mass),
                    "g": list(case.g.mass),
                    "utility": list(case.utility.values),
                    "beta": case.params.beta,
                    "gamma": case.params.gamma,
                    "tol": case.params.tol,
                },
                separators=(",", ":"),
            )
        rows.append(row)
    return rows


_SUITE_COLUMNS = ("case_id", "theorem", "premise_dom", "premise_mem", "u_F", "u_G", "verdict", "detail")


def _cmd_verify(s: Scenario, args: argparse.Namespace) -> tuple[Report, int]:
    theorem = args.theorem or s.options.theorem
    theorem = _need(theorem, "options.theorem (or --theorem)")
    seed = args.seed if args.seed is not None else s.options.seed
    explicit = s.pmf_f is not None or s.pmf_g is not None
    if s.options.cases is not None and explicit:
        raise ScenarioError(
            "scenario.options.cases: give either explicit pmfs (single case) or "
            "cases (generated suite), not both"
        )

    if s.options.cases is not None:
        config = SuiteConfig(theorem, s.options.cases, seed, s.options.grid_shape, jobs=args.jobs)
        suite = run_suite(config)
        header = {
            "scenario": args.scenario,
            "schema_version": s.schema_version,
            "theorem": theorem,
            "cases": config.n_cases,
            "seed": seed,
            "grid_shape": "x".join(str(n) for n in config.grid_shape),
            "jobs": args.jobs,
        }
        summary: dict[str, Any] = dict(suite.summary)
        summary["suite_passed"] = suite.passed
        code = 0 if suite.passed else 1
        return Report("verify-suite", header, _SUITE_COLUMNS, _suite_rows(suite.records), summary), code

    grid = _need(s.grid, "scenario.grid")
    f = _need(s.pmf_f, "scenario.pmfs.f")
    g = _need(s.pmf_g, "scenario.pmfs.g")
    utility = _need(s.utility, "scenario.utility").build(grid)
    params = _effective_params(s, args)
    case = TheoremCase(theorem, f, g, utility, params)
    rep = verify_theorem(case)
    header = {
        "scenario": args.scenario,
        "schema_version": s.schema_version,
        "theorem": theorem,
        "beta": params.beta,
        "gamma": params.gamma,
        "tol": params.tol,
    }
    rows = [
        {
            "theorem": rep.theorem_id,
            "premise_dom": rep.premise_dominance.verdict,
            "premise_mem": rep.premise_membership,
            "u_F": rep.u_f,
            "u_G": rep.u_g,
            "verdict": rep.status,
        }
    ]
    summary = {
        "verdict": rep.status,
        "reason": rep.reason,
    }
    code = 1 if rep.status == "fail" else 0
    return Report(
        "verify", header, ("theorem", "premise_dom", "premise_mem", "u_F", "u_G", "verdict"), rows, summary
    ), code


def _cmd_closure(s: Scenario, args: argparse.Namespace) -> tuple[Report, int]:
    name = args.function_class or s.options.function_class
    fc = FunctionClass.from_name(_need(name, "options.class (or --class)"))
    operator = _need(s.options.operator, "options.operator")
    seed = args.seed if args.seed is not None else s.options.seed
    rep = closure_check(fc, operator, s.options.samples, seed)
    config = {
        "scenario": args.scenario,
        "schema_version": s.schema_version,
        "class": fc.value,
        "operator": operator,
        "samples": rep.samples,
        "seed": seed,
    }
    rows = [
        {
            "sample": idx,
            "constraint": witness.constraint,
            "nodes": "; ".join(_node_label(nd) for nd in witness.nodes),
            "margin": witness.margin,
        }
        for idx, witness in rep.violations
    ]
    summary: dict[str, Any] = {
        "preserved": rep.preserved,
        "violations": len(rep.violations),
        "expects_violation": rep.expects_violation,
        "counterexample_margin": (
            rep.counterexample_witness.margin if rep.counterexample_witness else None
        ),
        "passed": rep.passed,
    }
    return Report(
        "closure", config, ("sample", "constraint", "nodes", "margin"), rows, summary
    ), (0 if rep.passed else 1)


def _cmd_simulate(s: Scenario, args: argparse.Namespace) -> tuple[Report, int]:
    grid = _need(s.grid, "scenario.grid")
    pmf = _need(s.pmf_f, "scenario.pmfs.f")
    utility = _need(s.utility, "scenario.utility").build(grid)
    params = _effective_params(s, args)
    seed = args.seed if args.seed is not None else s.options.seed
    threshold = s.options.threshold
    if threshold is None:
        threshold = reservation_utility(pmf, utility, params).reservation_utility
    stats = simulate_search(pmf, utility, params, threshold, seed, s.options.episodes)
    config = {
        "scenario": args.scenario,
        "schema_version": s.schema_version,
        "beta": params.beta,
        "gamma": params.gamma,
        "tol": params.tol,
        "seed": seed,
    }
    rows = [
        {
            "threshold": threshold,
            "mean": stats.mean,
            "stderr": stats.stderr,
            "episodes": stats.episodes,
            "horizon": stats.horizon,
            "accept_rate": stats.accept_rate,
        }
    ]
    return Report(
        "simulate",
        config,
        ("threshold", "mean", "stderr", "episodes", "horizon", "accept_rate"),
        rows,
        dict(rows[0]),
    ), 0


_COMMANDS = {
    "solve": _cmd_solve,
    "dominate": _cmd_dominate,
    "verify": _cmd_verify,
    "closure": _cmd_closure,
    "simulate": _cmd_simulate,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mcsearch",
        description="Multicriteria search: reservation utilities, dominance checks, "
        "and comparative-statics verification on finite offer grids.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    help_text = {
        "solve": "solve the stopping problem for pmf f",
        "dominate": "check class dominance of pmf f over pmf g",
        "verify": "verify a comparative-statics theorem (single case or generated suite)",
        "closure": "closure suite: operator preservation of class membership",
        "simulate": "Monte Carlo evaluation of a threshold policy",
    }
    for name in _COMMANDS:
        p = sub.add_parser(name, help=help_text[name])
        p.add_argument("scenario", help="path to a JSON scenario file")
        p.add_argument("--beta", type=float, default=None, help="override params.beta")
        p.add_argument("--gamma", type=float, default=None, help="override params.gamma")
        p.add_argument("--tol", type=float, default=None, help="override params.tol")
        p.add_argument("--seed", type=int, default=None, help="override options.seed")
        p.add_argument("--class", dest="function_class", default=None,
                       choices=[fc.value for fc in FunctionClass],
                       help="override options.class")
        p.add_argument("--theorem", default=None, choices=["T2a", "T2b", "T2c", "T3", "T4"],
                       help="override options.theorem")
        p.add_argument("--out", default=None, help="also write a machine-readable report here")
        p.add_argument("--format", default="json-lines", choices=list(FORMATS),
                       help="format of the --out report (default json-lines)")
        p.add_argument("--jobs", type=int, default=1, help="worker threads for suites")
    return parser


def run_command(argv: Sequence[str] | None = None) -> int:
    """Execute one subcommand; returns the process exit code."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse already printed the diagnostic
        return int(exc.code) if exc.code else 0
    try:
        scenario = load_scenario(args.scenario)
        report, code = _COMMANDS[args.command](scenario, args)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    sys.stdout.write(render_table(report))
    if args.out:
        with open(args.out, "wb") as fh:
            fh.write(emit_report(report, args.format))
    return code


def main() -> None:  # console entry point
    sys.exit(run_command())
