"""Command-line entry point.

Exit codes: 0 every assertion passed, 1 an assertion failed (the failing
invariant is named on stderr), 2 the input could not be parsed, 3 a numerical
kernel failed to converge.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path
from typing import Optional

from .distributions import (
    DEFAULT_GRID_N,
    DistributionSpec,
    check_mhr,
    check_stochastic_dominance,
    validate_distribution,
)
from .errors import DegenerateDensityError, NumericalError, ParameterError, PreconditionError
from .experiments import (
    ASYM_SW_POINTS,
    ASYM_SW_TOL,
    BOUNDS,
    UPPER,
    UPPER_TOL,
    artifact_rows,
    asym_sw_limit_row,
    gaps_nonincreasing,
    ratio_report,
    render_artifact,
    reproduce_tables,
    sweep_asym_upper,
    sweep_sym_gft_upper,
    sweep_sym_sw_upper,
    verify_err_bnd,
)
from .mechanism import Setting, TradeInstance
from .montecarlo import Z_THRESHOLD, compare
from .numerics import DEFAULT_QUADRATURE, QuadratureSpec
from .optimize import COARSE_N, minimize_gft_ratio, minimize_sw_ratio, search_profit_constants

EXIT_OK, EXIT_ASSERT, EXIT_PARSE, EXIT_NUMERIC = 0, 1, 2, 3
DEFAULT_N = 1_000_000
COMMANDS = ("eval", "simulate", "check", "optimize", "sweep", "tables")


class AssertionFailure(Exception):
    """An invariant checked by a command did not hold."""


def _seed(text: str) -> int:
    try:
        v = int(text, 0)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"seed must be an integer, got {text!r}") from exc
    if not -(1 << 63) <= v < (1 << 64):
        raise argparse.ArgumentTypeError("seed must fit in 64 bits")
    return v


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from exc
    if v < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return v


def _positive_float(text: str) -> float:
    try:
        v = float(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from exc
    if not (math.isfinite(v) and v > 0):
        raise argparse.ArgumentTypeError("must be a positive number")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="brokerlab",
        description="Evaluate, simulate and verify single-sample broker mechanisms.",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    p.add_argument("command", choices=COMMANDS, help="what to run")
    p.add_argument("--spec", help="instance spec: a JSON file path or an inline JSON object (eval, simulate, check)")
    p.add_argument("--n", type=_positive_int, default=DEFAULT_N, help="Monte Carlo trials (simulate)")
    p.add_argument("--seed", type=_seed, default=0, help="master seed; embedded in every artifact")
    p.add_argument(
        "--tol", type=_positive_float, default=DEFAULT_QUADRATURE.abs_tol, help="absolute quadrature tolerance (eval)"
    )
    p.add_argument("--out", help="output file (default: stdout)")
    p.add_argument("--format", choices=("json", "csv"), default="json", help="artifact format")
    p.add_argument(
        "--grid",
        type=_positive_int,
        default=None,
        help=f"grid size: validation grid for check (default {DEFAULT_GRID_N}), coarse grid for optimize (default {COARSE_N})",
    )
    return p


def _load_spec(text: Optional[str]) -> dict:
    if not text:
        raise ParameterError("this command needs --spec")
    raw = text if text.lstrip().startswith("{") else None
    if raw is None:
        try:
            raw = Path(text).read_text()
        except OSError as exc:
            raise ParameterError(f"cannot read spec file {text!r}: {exc.strerror}") from exc
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ParameterError(f"spec is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ParameterError("spec must be a JSON object")
    return data


def _distributions(data: dict):
    try:
        setting = Setting(data.get("setting", "general"))
    except ValueError as exc:
        raise ParameterError(f"unknown setting {data.get('setting')!r}") from exc
    if "buyer" not in data:
        raise ParameterError("instance spec needs a 'buyer' distribution")
    F = DistributionSpec.from_dict(data["buyer"]).build()
    if "seller" in data:
        G = DistributionSpec.from_dict(data["seller"]).build()
    elif setting is Setting.SYMMETRIC:
        G = F
    else:
        raise ParameterError("non-symmetric instance spec needs a 'seller' distribution")
    return setting, F, G


def _require_valid(F, G, grid_n: int = DEFAULT_GRID_N) -> None:
    for role, d in (("buyer", F), ("seller", G)):
        rep = validate_distribution(d, grid_n)
        if not rep.ok:
            raise AssertionFailure(f"{role} distribution is not a valid CDF: {'; '.join(rep.failures)}")


def _instance(data: dict) -> TradeInstance:
    _, F, G = _distributions(data)
    _require_valid(F, G)
    try:
        return TradeInstance.from_dict(data)
    except PreconditionError as exc:
        raise AssertionFailure(str(exc)) from exc


def _row(experiment, params, ratio, bound, ok, seed):
    return {"experiment": experiment, "parameters": params, "ratio": ratio, "bound": bound, "pass": bool(ok), "seed": seed}


def _failures(rows) -> list:
    return [r["experiment"] for r in rows if not r["pass"] and not r["parameters"].get("informational")]


# -- commands --------------------------------------------------------------------


def cmd_eval(args):
    inst = _instance(_load_spec(args.spec))
    qspec = QuadratureSpec(abs_tol=args.tol, rel_tol=DEFAULT_QUADRATURE.rel_tol, max_depth=DEFAULT_QUADRATURE.max_depth)
    rep = ratio_report(inst, instance_id=inst.name or "eval", spec=qspec)
    rows = artifact_rows([rep], args.seed)
    payload = {"instance": inst.to_dict(), "report": rep.to_dict()}
    return rows, payload


def cmd_simulate(args):
    inst = _instance(_load_spec(args.spec))
    comps, report = compare(inst, args.n, args.seed)
    rows = [
        _row(
            f"simulate.{c.metric}",
            {"analytic": c.analytic, "simulated": c.simulated, "std_error": c.std_error, "n": args.n},
            c.z,
            Z_THRESHOLD,
            c.passed,
            args.seed,
        )
        for c in comps
    ]
    payload = {"instance": inst.to_dict(), "report": report.to_dict()}
    return rows, payload


def _mhr_status(d, side, grid_n):
    try:
        return check_mhr(d, side, grid_n), ""
    except DegenerateDensityError as exc:
        return False, str(exc)


def cmd_check(args):
    setting, F, G = _distributions(_load_spec(args.spec))
    grid_n = args.grid or DEFAULT_GRID_N
    rows = []
    roles = [("buyer", F)] if G is F else [("buyer", F), ("seller", G)]
    for role, d in roles:
        rep = validate_distribution(d, grid_n)
        rows.append(_row(f"check.{role}.cdf_valid", {"failures": rep.failures}, None, None, rep.ok, args.seed))
        valid = rep.ok
        for side in ("buyer", "seller"):
            ok, why = _mhr_status(d, side, grid_n) if valid else (False, "invalid CDF")
            params = {"informational": True}
            if why:
                params["note"] = why
            rows.append(_row(f"check.{role}.mhr_{side}", params, None, None, ok, args.seed))
    if G is not F:
        dom = check_stochastic_dominance(F, G, grid_n)
        params = {"worst_gap": dom.worst_gap}
        if setting is not Setting.STOCHASTIC_DOMINANCE:
            params["informational"] = True
        rows.append(_row("check.dominance", params, None, None, dom.dominates, args.seed))
    rows.sort(key=lambda r: r["experiment"])
    return rows, {"setting": setting.value, "grid_n": grid_n}


def cmd_optimize(args):
    n = args.grid or COARSE_N
    gft = minimize_gft_ratio(n)
    sw = minimize_sw_ratio(n)
    sym = search_profit_constants("symmetric")
    sd = search_profit_constants("stoch_dom")
    s = args.seed
    rows = [
        _row("optimize.gft_ratio", gft.to_dict(), gft.value, BOUNDS["sd_gft"], abs(gft.value - BOUNDS["sd_gft"]) <= 1e-4, s),
        _row("optimize.sw_ratio", sw.to_dict(), sw.value, BOUNDS["sd_sw"], abs(sw.value - BOUNDS["sd_sw"]) <= 1e-4, s),
        _row(
            "optimize.profit_symmetric",
            sym.to_dict(),
            sym.value,
            BOUNDS["sym_profit_doubly_mhr"],
            sym.meta["reference_feasible"] and sym.value >= BOUNDS["sym_profit_doubly_mhr"],
            s,
        ),
        _row(
            "optimize.profit_stoch_dom",
            sd.to_dict(),
            sd.value,
            BOUNDS["sd_profit_mhr"],
            sd.meta["reference_feasible"] and sd.value >= BOUNDS["sd_profit_mhr"],
            s,
        ),
    ]
    return rows, None


def cmd_sweep(args):
    s = args.seed
    sym_gft = sweep_sym_gft_upper()
    sym_sw = sweep_sym_sw_upper()
    asym = sweep_asym_upper(0.5, 0.5)
    asym_gft = [r for r in asym if r.metric == "gft_ratio"]
    asym_sw = [r for r in asym if r.metric == "sw_ratio"]
    err = verify_err_bnd()
    rows = artifact_rows([*sym_gft, *sym_sw, *asym_gft, *err], s)
    # the welfare ratio's limit at (1/2, 1/2) is reported, not asserted
    for r in artifact_rows(asym_sw, s):
        r["parameters"]["informational"] = True
        rows.append(r)
    for i, (af, ag) in enumerate(ASYM_SW_POINTS):
        row = asym_sw_limit_row(af, ag)
        params = {**row.params, "iterated_limit_order": i == 1}
        if i == 0:
            params["informational"] = True
        rows.append(_row("asym_sw_limit.sw_ratio_limit", params, row.ratio, row.target, row.gap <= ASYM_SW_TOL, s))

    def summary(name, seq, target):
        end = min(seq, key=lambda r: r.params["delta"])
        mono = gaps_nonincreasing(seq)
        ok = end.ratio <= target + UPPER_TOL and mono
        return _row(f"{name}.summary", {"endpoint_delta": end.params["delta"], "gaps_nonincreasing": mono}, end.ratio, target, ok, s)

    rows += [
        summary("sym_gft_upper", sym_gft, UPPER["sym_gft"]),
        summary("sym_sw_upper", sym_sw, UPPER["sym_sw"]),
        summary("asym_gft_upper", asym_gft, UPPER["asym_gft"]),
    ]
    rows.sort(key=lambda r: (r["experiment"], json.dumps(r["parameters"], sort_keys=True)))
    return rows, None


def cmd_tables(args):
    return artifact_rows(reproduce_tables(args.seed), args.seed), None


HANDLERS = {
    "eval": cmd_eval,
    "simulate": cmd_simulate,
    "check": cmd_check,
    "optimize": cmd_optimize,
    "sweep": cmd_sweep,
    "tables": cmd_tables,
}


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        try:
            Path(out).write_text(text)
        except OSError as exc:
            raise ParameterError(f"cannot write {out!r}: {exc.strerror}") from exc
    else:
        sys.stdout.write(text)


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        rows, payload = HANDLERS[args.command](args)
        _emit(render_artifact(rows, args.format, args.command, args.seed, payload), args.out)
    except AssertionFailure as exc:
        print(f"brokerlab: assertion failed: {exc}", file=sys.stderr)
        return EXIT_ASSERT
    except ParameterError as exc:
        print(f"brokerlab: invalid input: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except NumericalError as exc:
        print(f"brokerlab: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    failed = _failures(rows)
    if failed:
        print(f"brokerlab: assertion failed: {', '.join(failed)}", file=sys.stderr)
        return EXIT_ASSERT
    return EXIT_OK


def main() -> None:
    sys.exit(run())
