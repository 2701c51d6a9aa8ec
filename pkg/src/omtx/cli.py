"""Command-line front end.

Subcommands: steady, spectrum, transistor, stability, validate.
Exit codes: 0 success, 1 usage/config error, 2 numerical failure,
3 validation failure.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from .config import RunConfig, parse_config
from .errors import BracketError, ConfigError, DivergenceError, SingularResponseError
from .model import select_branch, steady_state_roots
from .oracles import jacobian_eigenvalues
from .output import emit_plot, write_csv, write_rows_csv
from .sweeps import SweepSpec, spectrum, transistor_curve
from .validate import run_validation


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="omtx",
        description="Pump-controlled optomechanical transistor simulator",
    )
    sub = parser.add_subparsers(dest="command")
    for name, desc in (
        ("steady", "print steady-state roots and stability"),
        ("spectrum", "signal-response spectrum over delta_s"),
        ("transistor", "normalized gain vs. pump amplitude"),
        ("stability", "leading eigenvalue vs. pump amplitude"),
        ("validate", "oracle cross-checks and conformance report"),
    ):
        p = sub.add_parser(name, help=desc)
        p.add_argument("--config", required=True, help="configuration file path")
        p.add_argument("--out", help="output directory (overrides OMTX_OUT and config)")
        p.add_argument(
            "--method",
            choices=("closed", "linearized", "timedomain"),
            help="response evaluation method",
        )
        p.add_argument("--workers", type=int, help="parallel evaluation workers")
        if name == "spectrum":
            p.add_argument("--points", type=int, help="delta_s grid size")
        if name in ("transistor", "stability"):
            p.add_argument("--pump-points", type=int, help="pump grid size")
            p.add_argument("--pump-stop", type=float, help="pump grid upper end")
        if name == "validate":
            p.add_argument(
                "--full", action="store_true", help="run the full time-domain grid"
            )
    return parser


_METHOD_NAMES = {"closed": "closed_form", "linearized": "linearized", "timedomain": "time_domain"}


def _load_config(args) -> RunConfig:
    with open(args.config, encoding="utf-8") as fh:
        cfg = parse_config(fh.read())
    import dataclasses

    overrides = {}
    if args.method:
        overrides["method"] = _METHOD_NAMES[args.method]
    if args.workers is not None:
        overrides["workers"] = args.workers
    if getattr(args, "points", None) is not None:
        overrides["points"] = args.points
    if getattr(args, "pump_points", None) is not None:
        overrides["pump_points"] = args.pump_points
    if getattr(args, "pump_stop", None) is not None:
        overrides["pump_stop"] = args.pump_stop
    out = args.out or os.environ.get("OMTX_OUT")
    if out:
        overrides["out_dir"] = out
    return dataclasses.replace(cfg, **overrides) if overrides else cfg


def _spectrum_grid(cfg: RunConfig) -> SweepSpec:
    return SweepSpec(
        axis="delta_s",
        start=cfg.delta_s_start,
        stop=cfg.delta_s_stop,
        count=cfg.points,
        scale=cfg.scale,
        method=cfg.method,
        branch_policy=cfg.branch_policy,
    )


def _pump_grid(cfg: RunConfig) -> SweepSpec:
    return SweepSpec(
        axis="pump_amplitude",
        start=cfg.pump_start,
        stop=cfg.pump_stop,
        count=cfg.pump_points,
        scale=cfg.pump_scale,
        method=cfg.method,
        branch_policy=cfg.branch_policy,
    )


def _cmd_steady(cfg: RunConfig) -> int:
    roots = steady_state_roots(cfg.params, cfg.e_pump)
    print(f"e_pump = {cfg.e_pump!r}: {len(roots)} root(s)")
    for r in roots:
        tag = " (degenerate)" if r.degenerate else ""
        print(
            f"  {r.branch:>6}: w0 = {r.w0!r}  b0 = {r.b0!r}  q0 = {r.q0!r}  "
            f"{'stable' if r.stable else 'UNSTABLE'}{tag}"
        )
    return 0


def _cmd_spectrum(cfg: RunConfig) -> int:
    spec = spectrum(
        cfg.params,
        cfg.e_pump,
        cfg.e_signal,
        _spectrum_grid(cfg),
        workers=cfg.workers,
    )
    os.makedirs(cfg.out_dir, exist_ok=True)
    csv_path = os.path.join(cfg.out_dir, "spectrum.csv")
    svg_path = os.path.join(cfg.out_dir, "spectrum.svg")
    write_csv(spec, csv_path)
    emit_plot(spec, svg_path, title="signal response")
    print(csv_path)
    print(svg_path)
    return 0


def _cmd_transistor(cfg: RunConfig) -> int:
    curve = transistor_curve(
        cfg.params, _pump_grid(cfg), cfg.e_signal, method=cfg.method
    )
    os.makedirs(cfg.out_dir, exist_ok=True)
    csv_path = os.path.join(cfg.out_dir, "transistor.csv")
    svg_path = os.path.join(cfg.out_dir, "transistor.svg")
    write_csv(curve, csv_path)
    emit_plot(curve, svg_path, title="transistor characteristic")
    if curve.threshold_estimate is not None:
        print(f"instability threshold estimate: {curve.threshold_estimate!r}")
    print(csv_path)
    print(svg_path)
    return 0


def _cmd_stability(cfg: RunConfig) -> int:
    rows = []
    for pump in _pump_grid(cfg).values():
        steady = select_branch(
            steady_state_roots(cfg.params, float(pump)), cfg.branch_policy
        )
        eigs = jacobian_eigenvalues(cfg.params, steady)
        rows.append((pump, steady.w0, float(eigs[0].real), steady.stable))
    os.makedirs(cfg.out_dir, exist_ok=True)
    path = os.path.join(cfg.out_dir, "stability.csv")
    write_rows_csv(("pump", "w0", "leading_eig_re", "stable"), rows, path)
    print(path)
    return 0


def _cmd_validate(cfg: RunConfig, full: bool) -> int:
    report = run_validation(cfg, quick=not full)
    os.makedirs(cfg.out_dir, exist_ok=True)
    path = os.path.join(cfg.out_dir, "conformance.json")
    with open(path, "w", newline="\n") as fh:
        fh.write(report.to_json() + "\n")
    for check in report.checks:
        status = "PASS" if check.passed else "FAIL"
        print(
            f"[{status}] {check.name}: max_rel_dev = {check.max_rel_dev:.3e} "
            f"(tolerance {check.tolerance:.1e})"
        )
    print(path)
    return 0 if report.passed else 3


def run_command(argv) -> int:
    parser = build_parser()
    if not argv:
        parser.print_usage(sys.stderr)
        return 1
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 1
    try:
        cfg = _load_config(args)
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    try:
        if args.command == "steady":
            return _cmd_steady(cfg)
        if args.command == "spectrum":
            return _cmd_spectrum(cfg)
        if args.command == "transistor":
            return _cmd_transistor(cfg)
        if args.command == "stability":
            return _cmd_stability(cfg)
        if args.command == "validate":
            return _cmd_validate(cfg, args.full)
    except (
        SingularResponseError,
        DivergenceError,
        BracketError,
        np.linalg.LinAlgError,
    ) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    raise AssertionError("unreachable")


def main() -> None:
    sys.exit(run_command(sys.argv[1:]))


if __name__ == "__main__":
    main()
