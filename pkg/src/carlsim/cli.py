"""``carl`` command line: run, sweep, regime, analyze, tof, repro."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from carlsim.dynamics import EnsembleState, IntegrationDiverged, along_pump, run
from carlsim.gain import CondensateGeometry, gain_report
from carlsim.observables import Trace, tof_profile
from carlsim.params import ParameterError, load_species
from carlsim.repro import TAGS, reproduce_figure
from carlsim.scenario_io import ScenarioError, read_doc, scenario_from_doc, scenario_to_doc
from carlsim.sweep import SweepSpec, analyze, run_sweep

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_DIVERGED = 3
EXIT_CHECK_FAILED = 4


def _print_json(obj):
    print(json.dumps(obj, indent=2))


def cmd_run(args):
    doc = read_doc(args.scenario)
    scen = scenario_from_doc(doc)
    trace, final, _ = run(scen)
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    (out / "scenario.json").write_text(json.dumps(doc, indent=2) + "\n")
    trace.write_csv(out / "trace.csv")
    summary = analyze(trace)
    (out / "peaks.json").write_text(json.dumps(summary, indent=2) + "\n")
    state = final.to_dict()
    # enough context for `carl tof` without the scenario file
    state.update(mass_kg=scen.params.species.mass, wavelength_m=scen.params.pump.wavelength,
                 n_real=scen.n_real)
    (out / "final_state.json").write_text(json.dumps(state) + "\n")
    _print_json(summary)
    return EXIT_OK


def _parse_values(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ScenarioError(f"cannot parse sweep values {text!r}") from None


def cmd_sweep(args):
    doc = read_doc(args.scenario)
    spec = SweepSpec(doc, args.param, _parse_values(args.values), seed_policy=args.seed_policy,
                     check_dt=args.check_dt, workers=args.workers)
    result = run_sweep(spec)
    result.write(args.output)
    _print_json(result.to_dict())
    if any(r["error"] and r["error"].startswith("diverged") for r in result.rows):
        return EXIT_DIVERGED
    if not result.ok():
        return EXIT_INVALID
    return EXIT_OK


def cmd_regime(args):
    scen = scenario_from_doc(read_doc(args.scenario))
    condensate = None
    if args.condensate_length is not None or args.condensate_waist is not None:
        if args.condensate_length is None or args.condensate_waist is None:
            raise ScenarioError("--condensate-length and --condensate-waist go together")
        condensate = CondensateGeometry(args.condensate_length, args.condensate_waist, scen.n_real)
    report = gain_report(scen.params, scen.n_real, condensate, use=args.use)
    out = report.to_dict()
    out["derived"] = {k: float(v) for k, v in scen.params.derived().items()}
    _print_json(out)
    return EXIT_OK


def cmd_analyze(args):
    try:
        trace = Trace.read_csv(args.trace)
    except (OSError, ValueError) as exc:
        raise ScenarioError(f"cannot read trace {args.trace}: {exc}") from None
    _print_json(analyze(trace, args.window, args.threshold))
    return EXIT_OK


def cmd_tof(args):
    doc = read_doc(args.state)
    try:
        state = EnsembleState.from_dict(doc)
    except (KeyError, TypeError, ValueError) as exc:
        raise ScenarioError(f"invalid state file: {exc}") from None
    mass = doc.get("mass_kg", load_species().mass)
    n_real = doc.get("n_real", args.n_real)
    if n_real is None:
        raise ScenarioError("state file carries no n_real; pass --n-real")
    try:
        prof = tof_profile(along_pump(state), mass, n_real, args.t_tof, args.sigma_x)
    except ValueError as exc:
        raise ScenarioError(str(exc)) from None
    out = prof.to_dict()
    if args.output:
        Path(args.output).write_text(json.dumps(out) + "\n")
        n = float(np.trapezoid(prof.density, prof.x))
        _print_json({"t_tof_s": args.t_tof, "integral": n, "flags": out["flags"], "written": args.output})
    else:
        _print_json(out)
    return EXIT_OK


def cmd_repro(args):
    bundle = reproduce_figure(args.tag, args.output, workers=args.workers,
                              n_scale=args.n_scale, p_scale=args.p_scale)
    for c in bundle.checks:
        print(f"{'PASS' if c.passed else 'FAIL'} {bundle.tag}.{c.name}: {c.detail}")
    return EXIT_OK if bundle.passed else EXIT_CHECK_FAILED


def build_parser():
    ap = argparse.ArgumentParser(prog="carl", description="Collective atomic recoil laser simulator.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="simulate one scenario")
    p.add_argument("scenario")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="sweep one numeric scenario entry")
    p.add_argument("scenario")
    p.add_argument("--param", required=True, help="dotted path, e.g. backscatter.us_over_kappa")
    p.add_argument("--values", required=True, help="comma separated list")
    p.add_argument("--seed-policy", choices=("fixed", "incrementing"), default="fixed")
    p.add_argument("--check-dt", action="store_true", help="rerun each point at dt/2")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("regime", help="gains, CARL parameter and regime")
    p.add_argument("scenario")
    p.add_argument("--condensate-length", type=float)
    p.add_argument("--condensate-waist", type=float)
    p.add_argument("--use", choices=("cavity", "condensate"), default="cavity")
    p.set_defaults(func=cmd_regime)

    p = sub.add_parser("analyze", help="peaks and delays of a trace.csv")
    p.add_argument("trace")
    p.add_argument("--window", type=int, default=5)
    p.add_argument("--threshold", type=float, default=0.05)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("tof", help="time-of-flight density of a final state")
    p.add_argument("state")
    p.add_argument("--t-tof", type=float, default=10e-3)
    p.add_argument("--sigma-x", type=float, default=10e-6)
    p.add_argument("--n-real", type=float)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_tof)

    p = sub.add_parser("repro", help="reproduce a figure study")
    p.add_argument("tag", choices=TAGS)
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--n-scale", type=float, default=1.0, help="atom-number multiplier (fig4)")
    p.add_argument("--p-scale", type=float, default=1.0, help="pump-power multiplier (fig4)")
    p.set_defaults(func=cmd_repro)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ScenarioError, ParameterError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except IntegrationDiverged as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DIVERGED


if __name__ == "__main__":
    sys.exit(main())
