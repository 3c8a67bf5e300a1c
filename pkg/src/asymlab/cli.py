"""Command-line front end.

Exit status: 0 when the computation (or scenario) passes, 1 when a scenario
fails, 2 on bad input. Artifacts go to ``--out`` (``-`` for stdout); stderr
carries diagnostics.
"""
from __future__ import annotations

import argparse
import io
import json
import math
import shlex
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .functionals import (
    SampledFunction,
    cesaro_heat,
    default_s_grid,
    dixmier_average,
    heat_function,
    zeta_residue_function,
)
from .limits import MeasurabilityGrids, default_grids, measurability_report, tauberian_check
from .mellin import (
    GASKET_BETA,
    GasketParams,
    HeatTraceModel,
    ModelError,
    gasket_cesaro,
    heat_to_residue,
    load_model,
    mellin_zeta,
    zeta_bound_check,
)
from .numerics import GridSpec, grid_coordinates, log_arguments
from .profiles import (
    MembershipError,
    PiecewiseProfile,
    ProfileError,
    SignedProfilePair,
    classify_membership,
    evaluate_log,
    load_profile,
    make_canonical,
    make_counterexample,
    make_root,
    make_spike,
    profile_to_dict,
)
from .scenarios import (
    ScenarioError,
    ScenarioResult,
    run_counterexample,
    run_gamma_factor,
    run_p_case,
    run_signed,
)

OK, FAILED, BAD_INPUT = 0, 1, 2

_LOG_TINY = math.log(np.finfo(float).tiny)


class InputError(Exception):
    """Bad command-line input detected after parsing."""


def _builtin(name: str) -> Optional[PiecewiseProfile]:
    kind, _, arg = name.partition(":")
    if kind == "canonical":
        return make_canonical(float(arg) if arg else 1.0)
    if kind == "root":
        return make_root(float(arg) if arg else 2.0)
    if kind == "counterexample":
        return make_counterexample()
    if kind == "spike":
        return make_spike()
    return None


def read_profile(ref: str) -> PiecewiseProfile:
    """Load a profile file, or a built-in written ``builtin:canonical[:c]``,
    ``builtin:root[:p]``, ``builtin:counterexample`` or ``builtin:spike``."""
    if ref.startswith("builtin:"):
        p = _builtin(ref[len("builtin:"):])
        if p is None:
            raise InputError(f"unknown built-in profile {ref!r}")
        return p.validate()
    path = Path(ref)
    if not path.is_file():
        raise InputError(f"profile file not found: {ref}")
    try:
        return load_profile(path)
    except ProfileError as exc:
        raise ProfileError(f"{ref}: {exc}") from None


def _clean(obj):
    """JSON-compatible copy: numpy scalars to Python, non-finite floats to strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_clean(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


class Artifact:
    """Collects the output of one command with its provenance header."""

    def __init__(self, argv: Sequence[str], fmt: str):
        self.fmt = fmt
        self.provenance = {"tool": "asymlab", "version": __version__, "command": "asymlab " + shlex.join(argv)}

    def header_lines(self) -> list[str]:
        lines = [f"asymlab {__version__}", f"command: {self.provenance['command']}"]
        if "grids" in self.provenance:
            lines.append(f"grids: {json.dumps(_clean(self.provenance['grids']), sort_keys=True)}")
        return lines

    def render(self, payload: dict, csv_text: Optional[str] = None) -> str:
        if self.fmt == "csv" and csv_text is not None:
            return csv_text
        doc = {"provenance": self.provenance, **payload}
        return json.dumps(_clean(doc), indent=2, sort_keys=False) + "\n"


def _write(args, text: str) -> None:
    if args.out is None:
        return
    if args.out == "-":
        sys.stdout.write(text)
        return
    Path(args.out).write_text(text, encoding="utf-8")


def _log(args, message: str) -> None:
    if args.verbose:
        print(message, file=sys.stdout, flush=True)


# -- verbs ------------------------------------------------------------------------


def cmd_profile_validate(args, art: Artifact) -> int:
    ref = args.path or args.profile
    if ref is None:
        raise InputError("profile-validate needs a profile path")
    p = read_profile(ref)
    grid = args.grid or (GridSpec(2, 0.0, 8.0, 8) if p.generated else GridSpec(1, -5.0, 60.0, 8))
    art.provenance["grids"] = {"membership": grid.to_dict()}
    member = classify_membership(p, grid)
    payload = {"valid": True, "profile": profile_to_dict(p), "membership": member.to_dict()}
    _write(args, art.render(payload))
    print(f"{p.name}: valid", file=sys.stderr)
    return OK


def _sampled_payload(f: SampledFunction) -> dict:
    return {
        "meta": f.meta,
        "level": f.level,
        "x": f.x,
        "argument_log_magnitude": f.log_arguments,
        "values": f.values,
    }


def cmd_functionals(args, art: Artifact) -> int:
    if args.profile is None:
        raise InputError("functionals needs --profile")
    p = read_profile(args.profile)
    q = args.q[0] if args.q else 1.0
    power_p = args.p if args.p is not None else 1.0
    grid = args.grid or (GridSpec(2, 0.0, 8.0, 8) if p.generated else GridSpec(1, 0.0, 50.0, 8))
    if args.kind == "average":
        f = dixmier_average(p, grid)
    elif args.kind == "heat":
        f = heat_function(p, q, power_p, grid)
    elif args.kind == "mheat":
        f = cesaro_heat(p, q, power_p, grid)
    elif args.kind == "zeta":
        s_grid = default_s_grid(1e-6 if p.generated else 1e-4, 1e-1)
        f = zeta_residue_function(p, power_p, s_grid)
    else:
        # z(t) = t mu(t)
        lts = log_arguments(grid_coordinates(grid), grid.level)
        f = SampledFunction(grid_coordinates(grid), _t_mu(p, lts), grid.level,
                            {"functional": "t*mu(t)", "profile": p.name}, grid)
    art.provenance["grids"] = {"grid": grid.to_dict()} if args.kind != "zeta" else {"s": f.meta["s"]}
    _log(args, f"{args.kind}: {len(f)} points")
    _write(args, art.render({"function": _sampled_payload(f)}, f.to_csv(art.header_lines())))
    return OK


def _grids_from_args(args, p: PiecewiseProfile) -> MeasurabilityGrids:
    grids = default_grids(p)
    if args.grid is not None:
        grids = MeasurabilityGrids(args.grid, args.grid, grids.s_values, grids.raw_heat)
    return grids


def cmd_measurability(args, art: Artifact) -> int:
    if args.profile is None:
        raise InputError("measurability needs --profile")
    p = read_profile(args.profile)
    grids = _grids_from_args(args, p)
    art.provenance["grids"] = grids.to_dict()
    q = args.q[0] if args.q else 1.0
    report = measurability_report(p, q, args.tol, grids)
    payload = {"report": report.to_dict()}
    buf = io.StringIO()
    for line in art.header_lines():
        buf.write(f"# {line}\n")
    buf.write("quantity,classification,value,liminf,limsup,tail_oscillation\n")
    for name, est in (("dixmier_average", report.avg_limit), ("cesaro_heat", report.mheat_limit),
                      ("zeta_residue", report.zeta_limit), ("raw_heat", report.raw_heat_limit)):
        value = math.nan if est.value is None else est.value
        buf.write(f"{name},{est.classification},{value:.17g},{est.liminf_est:.17g},"
                  f"{est.limsup_est:.17g},{est.tail_oscillation:.17g}\n")
    _write(args, art.render(payload, buf.getvalue()))
    print(f"{p.name}: agree={report.agree} common_value={report.common_value}", file=sys.stderr)
    return OK


def _scenario_out(args, art: Artifact, result: ScenarioResult) -> int:
    art.provenance.setdefault("grids", result.meta.get("grids"))
    _write(args, art.render({"scenario": result.to_dict()}, result.to_csv(art.header_lines())))
    status = "pass" if result.passed else f"FAIL ({len(result.failures())} rows)"
    print(f"{result.name}: {status}", file=sys.stderr)
    for row in result.failures():
        print(f"  failed: {row.label}: computed {row.computed!r}, expected {row.relation} {row.expected!r}"
              f" (tol {row.tolerance!r})", file=sys.stderr)
    return OK if result.passed else FAILED


def cmd_counterexample(args, art: Artifact) -> int:
    level2_max = args.grid.x_max if args.grid is not None else 8.0
    art.provenance["grids"] = {"level2_max": level2_max}
    return _scenario_out(args, art, run_counterexample(args.nmax, level2_max))


def cmd_gamma_factor(args, art: Artifact) -> int:
    p = read_profile(args.profile or "builtin:canonical")
    q_list = tuple(args.q) if args.q else (0.5, 1.0, 2.0, 3.0)
    return _scenario_out(args, art, run_gamma_factor(p, q_list, args.tol, _grids_from_args(args, p)))


def cmd_p_case(args, art: Artifact) -> int:
    root = read_profile(args.profile or "builtin:root:2")
    power = args.p if args.p is not None else 2.0
    return _scenario_out(args, art, run_p_case(root, power, args.tol, _grids_from_args(args, root)))


def cmd_signed(args, art: Artifact) -> int:
    if not args.pair:
        raise InputError("signed needs --pair PLUS MINUS")
    pair = SignedProfilePair(read_profile(args.pair[0]), read_profile(args.pair[1]))
    return _scenario_out(args, art, run_signed(pair, args.tol, _grids_from_args(args, pair.plus)))


def _read_model(args) -> HeatTraceModel:
    if args.model is None:
        raise InputError("--model is required")
    path = Path(args.model)
    if not path.is_file():
        raise InputError(f"model file not found: {args.model}")
    return load_model(path)


def cmd_mellin(args, art: Artifact) -> int:
    h = _read_model(args)
    p = args.p if args.p is not None else h.p
    eps = np.logspace(-1, -3, 9)
    s_list = [p + e for e in eps]
    buf = io.StringIO()
    for line in art.header_lines():
        buf.write(f"# {line}\n")
    buf.write("s,zeta,s_minus_p_times_zeta\n")
    sweep = []
    for s in s_list:
        z = mellin_zeta(h, s)
        sweep.append({"s": s, "zeta": z, "scaled": (s - p) * z})
        buf.write(f"{s:.17g},{z:.17g},{(s - p) * z:.17g}\n")
    payload = {"model": h.to_dict(), "p": p, "sweep": sweep}
    status = OK
    if args.C is not None:
        check = zeta_bound_check(h, p, args.C, s_list, args.tol)
        payload["bound_check"] = check.to_dict()
        status = OK if check.passed else FAILED
        print(f"zeta bound check with C={args.C!r}: {'pass' if check.passed else 'FAIL'}", file=sys.stderr)
        for row in check.failures():
            print(f"  failed: {row.label}: computed {row.computed!r}", file=sys.stderr)
    res = heat_to_residue(h, p)
    payload["heat_to_residue"] = res.to_dict()
    _write(args, art.render(payload, buf.getvalue()))
    return status


def cmd_gasket(args, art: Artifact) -> int:
    if args.model is not None:
        h = _read_model(args)
        if h.kind != "gasket":
            raise InputError("gasket needs a model of kind 'gasket'")
        params = h.gasket
    else:
        params = GasketParams(1.0, 0.1, 0.0, GASKET_BETA)
    log_nu_max = args.grid.x_max if args.grid is not None else 40.0
    ppu = args.grid.points_per_unit if args.grid is not None else 256
    art.provenance["grids"] = {"grid": GridSpec(1, 0.0, log_nu_max, ppu).to_dict()}
    res = gasket_cesaro(params, math.exp(log_nu_max), ppu)
    payload = {
        "params": {"a": params.a, "b": params.b, "c": params.c, "beta": params.beta},
        "limit": res.limit.to_dict(),
        "max_excess_over_envelope": res.max_excess,
        "bound_holds": res.bound_holds,
        "trace": _sampled_payload(res.function),
    }
    _write(args, art.render(payload, res.function.to_csv(art.header_lines())))
    print(f"gasket Cesaro envelope: {'pass' if res.bound_holds else 'FAIL'} "
          f"(max excess {res.max_excess:.3g})", file=sys.stderr)
    return OK if res.bound_holds else FAILED



def _t_mu(p, lts):
    """t mu(t), floored at the smallest normal float so underflow is not read as zero."""
    return np.exp(np.maximum(evaluate_log(p, lts) + lts, _LOG_TINY))


def cmd_tauberian(args, art: Artifact) -> int:
    if args.profile is None:
        raise InputError("tauberian needs --profile")
    p = read_profile(args.profile)
    # tower profiles: dense level-1 sampling, since M z needs the unit-width bumps of t mu resolved
    grid = args.grid or (GridSpec(1, 0.0, math.exp(8.0), 8) if p.generated else GridSpec(1, 0.0, 300.0, 8))
    art.provenance["grids"] = {"grid": grid.to_dict()}
    x = grid_coordinates(grid)
    lts = log_arguments(x, grid.level)
    z = SampledFunction(x, _t_mu(p, lts), grid.level, {"functional": "t*mu(t)"}, grid)
    res = tauberian_check(z, args.mode, args.tol)
    _write(args, art.render({"tauberian": res.to_dict()}))
    print(f"tauberian {args.mode}: hypotheses={res.hypotheses_hold} premise={res.premise_holds} "
          f"implication={res.implication_holds}", file=sys.stderr)
    return OK if res.implication_holds else FAILED


COMMANDS = {
    "profile-validate": cmd_profile_validate,
    "functionals": cmd_functionals,
    "measurability": cmd_measurability,
    "counterexample": cmd_counterexample,
    "gamma-factor": cmd_gamma_factor,
    "p-case": cmd_p_case,
    "signed": cmd_signed,
    "mellin": cmd_mellin,
    "gasket": cmd_gasket,
    "tauberian": cmd_tauberian,
}


def _grid_arg(text: str) -> GridSpec:
    try:
        return GridSpec.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="artifact path ('-' for stdout)")
    common.add_argument("--format", choices=("csv", "json"), default=None)
    common.add_argument("--verbose", action="store_true")
    common.add_argument("--tol", type=float, default=1e-3)
    common.add_argument("--grid", type=_grid_arg, metavar="LEVEL:XMIN:XMAX:PPU")

    parser = argparse.ArgumentParser(prog="asymlab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"asymlab {__version__}")
    sub = parser.add_subparsers(dest="verb", required=True, metavar="VERB")

    def add(name, help_text, default_format="json"):
        sp = sub.add_parser(name, parents=[common], help=help_text)
        sp.set_defaults(default_format=default_format)
        return sp

    sp = add("profile-validate", "check a profile file and report space membership")
    sp.add_argument("path", nargs="?")
    sp.add_argument("--profile")

    sp = add("functionals", "sample a functional of a profile", "csv")
    sp.add_argument("--profile")
    sp.add_argument("--kind", choices=("average", "heat", "mheat", "zeta", "tmu"), default="average")
    sp.add_argument("--q", type=float, action="append")
    sp.add_argument("--p", type=float, help="power applied to lambda (heat) or base power (zeta)")

    sp = add("measurability", "three limits and their agreement")
    sp.add_argument("--profile")
    sp.add_argument("--q", type=float, action="append")

    sp = add("counterexample", "tower counterexample scenario", "csv")
    sp.add_argument("--nmax", type=int, default=30)

    sp = add("gamma-factor", "Gamma(1+1/q) factor scenario", "csv")
    sp.add_argument("--profile")
    sp.add_argument("--q", type=float, action="append")

    sp = add("p-case", "p-convexified limits scenario", "csv")
    sp.add_argument("--profile")
    sp.add_argument("--p", type=float)

    sp = add("signed", "signed difference scenario", "csv")
    sp.add_argument("--pair", nargs=2, metavar=("PLUS", "MINUS"))

    sp = add("mellin", "zeta sweep and residue of a heat-trace model", "csv")
    sp.add_argument("--model")
    sp.add_argument("--p", type=float)
    sp.add_argument("--C", type=float, help="run the (s-p) zeta bound check with this constant")

    sp = add("gasket", "Cesaro mean of the gasket heat-trace model", "csv")
    sp.add_argument("--model")

    sp = add("tauberian", "Tauberian implication check on z(t) = t mu(t)")
    sp.add_argument("--profile")
    sp.add_argument("--mode", choices=("cesaro_M", "derivative"), default="cesaro_M")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else BAD_INPUT
    if args.verb == "counterexample" and not 3 <= args.nmax <= 60:
        print("error: --nmax must lie in [3, 60]", file=sys.stderr)
        return BAD_INPUT
    art = Artifact(argv, args.format or args.default_format)
    try:
        return COMMANDS[args.verb](args, art)
    except (InputError, ProfileError, ModelError, MembershipError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return BAD_INPUT
    except ScenarioError as exc:
        print(f"scenario precondition failed: {exc}", file=sys.stderr)
        return FAILED
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return BAD_INPUT


if __name__ == "__main__":
    sys.exit(main())
