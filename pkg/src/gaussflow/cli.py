"""Command line entry point.

Exit status: 0 when every requested check passes, 1 when a check fails,
2 when the run itself faults (bad input, numerical breakdown, I/O error).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .analysis.report import write_report
from .analysis.suite import interface_anchor, sphere_oracle, verify_trajectory
from .config import ANALYSES, ConfigError, RunConfig, load_config
from .grids import RadialProfile
from .interface import ExtinctionError, sphere_exact_radius, sphere_extinction_time
from .io import SnapshotError, load_snapshot, read_trajectory, save_frame
from .params import FlowDomainError, classify_g_regularity, classify_v_regularity, derive_exponents
from .pipeline import run_config
from .scenarios import KINDS, ScenarioError, ScenarioSpec, scenario_build
from .solver import SphereCapBoundary, StepFault, run_flow
from .transforms.hodograph import hodograph_solve
from .transforms.legendre import PolarGrid, legendre_transform
from .transforms.pressure import to_pressure
from .transforms.zeta import rescaled_zeta

log = logging.getLogger("gaussflow")

EXIT_PASS, EXIT_FAIL, EXIT_FAULT = 0, 1, 2
FAULTS = (ConfigError, ScenarioError, SnapshotError, FlowDomainError, StepFault, ExtinctionError, ValueError,
          RuntimeError, OSError)


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n", type=int, default=None, help="dimension of the flat side (default 2)")
    p.add_argument("--p", type=float, default=None, help="power of the Gauss curvature (default 1)")
    p.add_argument("--out", default=None, help="output file or directory")
    p.add_argument("--seed", type=int, default=None, help="seed for sampled analyses")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gaussflow", description="Flat-sided Gauss curvature flow toolkit.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="more logging (repeatable)")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="simulate a scenario and run the analyses")
    _common(run)
    run.add_argument("--config", help="JSON run configuration (flags override its fields)")
    run.add_argument("--scenario", choices=KINDS, default=None)
    run.add_argument("--grid", type=int, default=None, help="cells per axis")
    run.add_argument("--cfl", type=float, default=None)
    run.add_argument("--t-end", type=float, default=None)
    run.add_argument("--samples", type=_floats, default=None, help="comma-separated sample times")
    run.add_argument("--resume", default=None, help="continue from a snapshot or trajectory file")
    run.add_argument("--analyses", default=None, help=f"comma-separated subset of {','.join(ANALYSES)}")
    run.add_argument("--radius", type=float, default=None, help="flat radius (sphere radius for cap_sphere)")
    run.add_argument("--amplitude", type=float, default=None)
    run.add_argument("--mode", type=int, default=None)
    run.add_argument("--scenario-file", default=None, help="snapshot for the custom_file scenario")

    cls = sub.add_parser("classify", help="regularity classes of g and v up to the interface")
    _common(cls)

    tr = sub.add_parser("transform", help="write a transform frame computed from a snapshot")
    _common(tr)
    tr.add_argument("--resume", required=True, help="snapshot (or trajectory) to transform")
    tr.add_argument("--frame", choices=("pressure", "legendre", "zeta", "hodograph"), default="pressure")
    tr.add_argument("--grid", type=int, default=200, help="radial nodes of the polar grid")
    tr.add_argument("--eta", type=float, default=0.2, help="hodograph patch half width")

    ver = sub.add_parser("verify", help="run the analysis suite on a stored trajectory")
    _common(ver)
    ver.add_argument("--resume", required=True, help="trajectory JSONL file")
    ver.add_argument("--analyses", default=None)

    ora = sub.add_parser("oracle", help="closed-form shrinking sphere, optionally against the solver")
    _common(ora)
    ora.add_argument("--radius", type=float, default=1.0, help="initial sphere radius")
    ora.add_argument("--samples", type=_floats, default=None)
    ora.add_argument("--t-end", type=float, default=0.1)
    ora.add_argument("--grid", type=int, default=None, help="also simulate the cap with this many cells")
    ora.add_argument("--cfl", type=float, default=0.4)
    return parser


def _emit(payload: dict, out: str | None) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True)
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text + "\n")
    else:
        print(text)


def _analyses(text: str | None):
    return None if text is None else [a for a in text.split(",") if a]


def cmd_run(args) -> int:
    if args.config:
        cfg = load_config(args.config)
        scen = cfg.scenario.to_dict()
        base = cfg.to_dict()
    else:
        scen = {}
        base = {"schema_version": 1, "t_end": 0.05}
    overrides = {"kind": args.scenario, "n": args.n, "p": args.p, "cells": args.grid, "radius": args.radius,
                 "amplitude": args.amplitude, "mode": args.mode, "path": args.scenario_file}
    scen.update({k: v for k, v in overrides.items() if v is not None})
    base.pop("scenario", None)
    run_over = {"cfl": args.cfl, "t_end": args.t_end, "samples": args.samples, "out": args.out,
                "seed": args.seed, "analyses": _analyses(args.analyses)}
    base.update({k: v for k, v in run_over.items() if v is not None})
    if args.samples is None and args.t_end is not None and args.config:
        base["samples"] = [t for t in base.get("samples", []) if t <= args.t_end]
    cfg = RunConfig.from_dict({**base, "scenario": scen})
    result = run_config(cfg, resume=args.resume)
    for cond in result.report.conditions:
        print(f"{'PASS' if cond.passed else 'FAIL'} {cond.name}")
    print(f"outputs in {result.out}")
    return EXIT_PASS if result.report.passed else EXIT_FAIL


def cmd_classify(args) -> int:
    params = derive_exponents(args.n or 2, args.p if args.p is not None else 1.0, flat_side=True)
    payload = {"params": params.to_dict(), "g": classify_g_regularity(params).to_dict(),
               "v": classify_v_regularity(params).to_dict()}
    _emit(payload, args.out)
    return EXIT_PASS


def _snapshot_params(path, args):
    state, params, _ = load_snapshot(path)
    if args.n is not None or args.p is not None or params is None:
        n = args.n or (params.n if params else 2)
        p = args.p if args.p is not None else (params.p if params else 1.0)
        params = derive_exponents(n, p)
    return state, params


def cmd_transform(args) -> int:
    state, params = _snapshot_params(args.resume, args)
    radial = isinstance(state, RadialProfile)
    if args.frame == "pressure":
        frame = to_pressure(state, params)
    elif args.frame == "hodograph":
        g = to_pressure(state, params)
        frame = hodograph_solve(g, interface_anchor(g), args.eta)
    elif args.frame == "legendre":
        grid = PolarGrid.uniform(1 if radial else 64, args.grid, 1.0)
        frame = legendre_transform(state, grid, n=params.n, refine=radial)
    else:
        grid = PolarGrid.uniform_s(1 if radial else 64, args.grid, params.sigma_p)
        frame = rescaled_zeta(legendre_transform(state, grid, n=params.n, refine=radial), params)
    out = args.out or f"{args.frame}_frame.json"
    save_frame(out, frame)
    print(f"wrote {args.frame} frame to {out}")
    return EXIT_PASS


def cmd_verify(args) -> int:
    states, params = read_trajectory(args.resume)
    if args.n is not None or args.p is not None or params is None:
        params = derive_exponents(args.n or (params.n if params else 2),
                                  args.p if args.p is not None else (params.p if params else 1.0))
    kw = {}
    if args.analyses:
        kw["analyses"] = _analyses(args.analyses)
    report = verify_trajectory(states, params, seed=args.seed or 0, **kw)
    out = args.out or str(Path(args.resume).with_name("report_verify.json"))
    write_report(report, out)
    for cond in report.conditions:
        print(f"{'PASS' if cond.passed else 'FAIL'} {cond.name}")
    print(f"report in {out}")
    return EXIT_PASS if report.passed else EXIT_FAIL


def cmd_oracle(args) -> int:
    params = derive_exponents(args.n or 2, args.p if args.p is not None else 1.0)
    R0 = args.radius
    times = args.samples or [args.t_end * i / 10 for i in range(11)]
    rows = [{"t": t, "radius": sphere_exact_radius(params, R0, t), "apex_height": R0 - sphere_exact_radius(params, R0, t)}
            for t in times]
    payload = {"params": params.to_dict(), "R0": R0, "extinction_time": sphere_extinction_time(params, R0),
               "closed_form": rows}
    code = EXIT_PASS
    if args.grid:
        spec = ScenarioSpec(kind="cap_sphere", n=params.n, p=params.p, radius=R0, cells=args.grid)
        traj = run_flow(scenario_build(spec), params, max(times), sample_times=times, cfl=args.cfl,
                        boundary=SphereCapBoundary(params, R0, center=R0))
        rep = sphere_oracle(traj.states, params, R0)
        payload["simulation"] = rep.to_dict()
        print(f"{'PASS' if rep.passed else 'FAIL'} sphere_oracle", file=sys.stderr)
        code = EXIT_PASS if rep.passed else EXIT_FAIL
    _emit(payload, args.out)
    return code


COMMANDS = {"run": cmd_run, "classify": cmd_classify, "transform": cmd_transform, "verify": cmd_verify,
            "oracle": cmd_oracle}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except FAULTS as exc:
        log.error("%s: %s", type(exc).__name__, exc)
        return EXIT_FAULT


if __name__ == "__main__":
    sys.exit(main())
