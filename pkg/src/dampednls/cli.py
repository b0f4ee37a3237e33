"""Command line interface.

Exit codes: 0 success, 2 invariant violation, 3 blow-up diagnostic.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from importlib import resources

from .dynamics import BlowUpDiagnostic
from .experiments import (
    ConfigError,
    ScenarioConfig,
    delta_convergence,
    run_scenario,
    sweep,
    write_convergence_csv,
    write_sweep_summary_csv,
)
from .grid import make_domain
from .inequalities import IneqName, sweep_inequality
from .observables import FitError, FitModel, fit_decay, read_series_csv

EXIT_OK = 0
EXIT_VIOLATION = 2
EXIT_BLOWUP = 3


def _load_config(path: str) -> ScenarioConfig:
    if not os.path.exists(path):
        name = os.path.basename(path)
        if not name.endswith(".json"):
            name += ".json"
        ref = resources.files("dampednls").joinpath("scenarios", name)
        if ref.is_file():
            return ScenarioConfig.from_dict(json.loads(ref.read_text()))
        raise ConfigError(f"no such config file or bundled scenario: {path}")
    return ScenarioConfig.from_json(path)


def _parse_floats(text: str) -> list:
    return [float(x) for x in text.split(",") if x.strip()]


def _cmd_run(args) -> int:
    cfg = _load_config(args.config)
    try:
        report = run_scenario(cfg, outputs=args.outputs)
    except BlowUpDiagnostic as exc:
        print(f"blow-up: {exc}", file=sys.stderr)
        return EXIT_BLOWUP
    ext = "none" if report.extinction_time is None else f"{report.extinction_time:.6g}"
    print(f"{cfg.label}: records={len(report.series)} extinction_time={ext} "
          f"violations={report.violation_total}")
    return EXIT_VIOLATION if report.violation_total else EXIT_OK


def _cmd_sweep(args) -> int:
    cfg = _load_config(args.config)
    entries = sweep(cfg, args.axis, _parse_floats(args.values),
                    outputs=args.outputs, workers=args.workers)
    out_dir = args.outputs if args.outputs is not None else cfg.outputs
    os.makedirs(out_dir, exist_ok=True)
    write_sweep_summary_csv(os.path.join(out_dir, f"{cfg.label}_sweep_{args.axis}.csv"),
                            args.axis, entries)
    print(f"{'value':>12}  {'extinction':>12}  {'blow_up':>7}  error")
    for e in entries:
        ext = "-" if e.extinction_time is None else f"{e.extinction_time:.6g}"
        print(f"{e.value:>12g}  {ext:>12}  {str(e.blow_up):>7}  {e.error or ''}")
    if any(e.blow_up for e in entries):
        return EXIT_BLOWUP
    if any(e.report is not None and e.report.violation_total for e in entries):
        return EXIT_VIOLATION
    return EXIT_OK


def _cmd_converge(args) -> int:
    cfg = _load_config(args.config)
    table = delta_convergence(cfg, _parse_floats(args.deltas), args.T)
    out_dir = args.outputs if args.outputs is not None else cfg.outputs
    os.makedirs(out_dir, exist_ok=True)
    write_convergence_csv(os.path.join(out_dir, f"{cfg.label}_convergence.csv"), table)
    print(f"{'delta':>12}  {'max L2 error':>14}")
    for r in table.rows:
        print(f"{r.delta:>12g}  {r.error:>14.6e}")
    print(f"monotone within 10% slack: {table.monotone_ok}")
    return EXIT_OK if table.monotone_ok else EXIT_VIOLATION


_INEQ_DEFAULT_DOMAIN = {
    IneqName.GN: ("torus1d", None),
    IneqName.GN_DUAL: ("confined_r1", 1.0),
    IneqName.GN_DUAL2: ("confined_r2", 1.0),
    IneqName.NASH1: ("torus1d", None),
    IneqName.NASH2: ("torus1d", None),
    IneqName.BREZIS_GALLOUET: ("torus2d", None),
}


def _cmd_ineq(args) -> int:
    name = IneqName(args.name)
    domain = None
    if name is not IneqName.YOUNG_MONOTONE:
        kind, omega = _INEQ_DEFAULT_DOMAIN[name]
        kind = args.domain or kind
        dim = 2 if kind.endswith("2d") or kind.endswith("r2") else 1
        confined = kind.startswith("confined")
        extent = args.extent if args.extent else (12.0 if confined else 2 * math.pi)
        n = args.n if args.n else (64 if dim == 2 else 256)
        domain = make_domain(kind, extent, n, omega=(args.omega or omega) if confined else None)
    report = sweep_inequality(name, domain, args.trials, args.seed)
    print(f"{'inequality':>16}  {'trials':>7}  {'worst ratio':>13}  {'violations@C':>12}")
    print(f"{report.name.value:>16}  {report.trials:>7}  {report.worst_ratio:>13.6e}  "
          f"{report.violations_at_C:>12}")
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(report.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")
    return EXIT_VIOLATION if report.violations_at_C else EXIT_OK


def _cmd_fit(args) -> int:
    series = read_series_csv(args.series)
    model = FitModel.EXP_DECAY if args.model == "exp" else FitModel.POWER_EXTINCTION
    try:
        fit = fit_decay(series, model, alpha=args.alpha)
    except FitError as exc:
        print(f"fit refused: {exc}", file=sys.stderr)
        return EXIT_VIOLATION
    print(json.dumps(fit.to_dict(), indent=2, sort_keys=True))
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(fit.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dampednls",
                                 description="Damped NLS pseudospectral simulator")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run one scenario config")
    p.add_argument("config")
    p.add_argument("--outputs", default=None)
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("sweep", help="sweep one Params axis")
    p.add_argument("config")
    p.add_argument("--axis", required=True)
    p.add_argument("--values", required=True, help="comma-separated values")
    p.add_argument("--outputs", default=None)
    p.add_argument("--workers", type=int, default=None)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("converge", help="regularization convergence study")
    p.add_argument("config")
    p.add_argument("--deltas", required=True, help="comma-separated, decreasing")
    p.add_argument("--T", type=float, required=True)
    p.add_argument("--outputs", default=None)
    p.set_defaults(func=_cmd_converge)

    p = sub.add_parser("ineq", help="Monte Carlo inequality sweep")
    p.add_argument("name", choices=[n.value for n in IneqName])
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--domain", default=None)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--extent", type=float, default=None)
    p.add_argument("--omega", type=float, default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_ineq)

    p = sub.add_parser("fit", help="decay fit on a series CSV")
    p.add_argument("series")
    p.add_argument("--model", choices=["exp", "power"], required=True)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_fit)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VIOLATION


if __name__ == "__main__":
    sys.exit(main())
