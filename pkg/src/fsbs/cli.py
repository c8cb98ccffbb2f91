"""Command-line entry point: ``fsbs {detect,tune,simulate,evaluate,bench}``.

Exit codes: 0 success, 1 detection-level failure, 2 usage or I/O error.
"""

from __future__ import annotations

import argparse
import io
import json
import os
import secrets
import sys
import time
from dataclasses import asdict
from pathlib import Path

from . import bench
from .detector import FsbsParams, detect
from .kernels import FAMILIES
from .metrics import evaluate, summarize, write_summary_csv
from .panel import PanelError, load_panel, write_panel
from .seeded import DEPTH_MODES
from .simulate import SCENARIO_IDS, generate_scenario, null_scenario, scenario
from .tuning import candidate_grid, cross_validate, plugin_bandwidth

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _hbar_arg(value: str):
    if value == "plugin":
        return value
    try:
        v = float(value)
    except ValueError:
        raise argparse.ArgumentTypeError("--hbar takes a positive number or 'plugin'") from None
    if not v > 0:
        raise argparse.ArgumentTypeError("--hbar must be positive")
    return v


def _add_fsbs_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--input", required=True, help="panel CSV with header t,i,x1..xd,y")
    p.add_argument("--dim", type=int, default=1, help="location dimension d")
    p.add_argument("--rescale", action="store_true", help="min-max rescale out-of-range locations")
    p.add_argument("--hbar", type=_hbar_arg, help="density bandwidth, or 'plugin'")
    p.add_argument("--kernel", choices=FAMILIES, default="gaussian")
    p.add_argument("--depth", choices=DEPTH_MODES, default="full")
    p.add_argument("--ck", type=float, default=4.0, help="depth constant for --depth paper")
    p.add_argument("--seed", type=int, help="evaluation-point seed (random if omitted)")
    p.add_argument("--loss-source", choices=("train", "validation"), default="train")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fsbs", description="Change-point detection for sparsely observed functional time series.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("detect", help="estimate change points of a panel")
    _add_fsbs_flags(p)
    p.add_argument("--output", help="DetectionResult JSON path")
    p.add_argument("--h", type=float, help="mean bandwidth")
    p.add_argument("--tau", type=float, help="threshold")
    p.add_argument("--auto-tune", action="store_true", help="cross-validate h and tau even if given")

    p = sub.add_parser("tune", help="cross-validate h and tau, write the loss table")
    _add_fsbs_flags(p)
    p.add_argument("--output", help="loss-table CSV path (default stdout)")

    p = sub.add_parser("simulate", help="simulate a scenario panel and its truth sidecar")
    p.add_argument("--scenario", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--output", required=True, help="panel CSV path; truth goes to <output>.json")

    p = sub.add_parser("evaluate", help="score a DetectionResult against a truth sidecar")
    p.add_argument("--input", required=True, help="DetectionResult JSON")
    p.add_argument("--truth", required=True, help="truth sidecar JSON")
    p.add_argument("--output", help="summary CSV path (default stdout)")

    p = sub.add_parser("bench", help="replicate simulate, tune, detect and score")
    p.add_argument("--scenario", required=True)
    p.add_argument("--reps", type=int, default=100)
    p.add_argument("--seed", type=int)
    p.add_argument("--threads", type=int, help="worker processes (default: all CPUs)")
    p.add_argument("--kernel", choices=FAMILIES, default="gaussian")
    p.add_argument("--depth", choices=DEPTH_MODES, default="full")
    p.add_argument("--ck", type=float, default=4.0)
    p.add_argument("--hbar", choices=("tied", "plugin"), default="tied")
    p.add_argument("--loss-source", choices=("train", "validation"), default="train")
    p.add_argument("--output", help="summary CSV path (default stdout); report goes to <output>.json")
    return parser


def _seed(args) -> int:
    return args.seed if args.seed is not None else secrets.randbits(32)


def _read_panel(args):
    path = Path(args.input)
    try:
        with path.open() as fh:
            return load_panel(fh, args.dim, rescale=args.rescale)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror or exc}") from None
    except PanelError as exc:
        raise UsageError(f"{path}: {exc}") from None


def _write_text(path: str | None, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise UsageError(f"cannot write {path}: {exc.strerror or exc}") from None


def _sidecar(path: str) -> str:
    return str(Path(path).with_suffix(".json"))


def _tune(panel, args, seed):
    grid = candidate_grid(panel.T, panel.n, panel.d)
    hbar = plugin_bandwidth(panel) if args.hbar == "plugin" else args.hbar
    return cross_validate(panel, grid, args.depth, seed, args.kernel, hbar, args.ck, args.loss_source)


def cmd_detect(args) -> int:
    panel = _read_panel(args)
    seed = _seed(args)
    h, tau = args.h, args.tau
    hbar = plugin_bandwidth(panel) if args.hbar == "plugin" else args.hbar
    tuned = None
    if args.auto_tune or h is None or tau is None:
        if panel.T < 4:
            raise UsageError(f"tuning needs T >= 4 (got T={panel.T}); pass --h and --tau")
        tuned = _tune(panel, args, seed)
        h = tuned.h if args.auto_tune or h is None else h
        tau = tuned.tau if args.auto_tune or tau is None else tau
    if hbar is None:
        hbar = h
    params = FsbsParams(h, hbar, tau, args.kernel, args.depth, args.ck, seed=seed)
    result = detect(panel, params)
    out = result.to_dict()
    out["seed"] = seed
    out["tuned"] = tuned is not None
    out["T"] = panel.T
    if args.output:
        _write_text(args.output, json.dumps(out, indent=2) + "\n")
    print(" ".join(str(c) for c in result.change_points))
    return EXIT_OK


def cmd_tune(args) -> int:
    panel = _read_panel(args)
    if panel.T < 4:
        raise UsageError(f"tuning needs T >= 4, got T={panel.T}")
    seed = _seed(args)
    cv = _tune(panel, args, seed)
    buf = io.StringIO()
    cv.write_table(buf)
    _write_text(args.output, buf.getvalue())
    print(json.dumps({"h": cv.h, "hbar": cv.hbar, "tau": cv.tau, "seed": seed}), file=sys.stderr)
    return EXIT_OK


def _scenario_spec(sid: str):
    if sid == "null":
        return null_scenario()
    if sid not in SCENARIO_IDS:
        raise UsageError(f"unknown scenario {sid!r}; choose from {', '.join(SCENARIO_IDS)} or null")
    return scenario(sid)


def cmd_simulate(args) -> int:
    spec = _scenario_spec(args.scenario)
    seed = _seed(args)
    panel, truth = generate_scenario(spec, seed)
    try:
        with open(args.output, "w", newline="") as fh:
            write_panel(panel, fh)
    except OSError as exc:
        raise UsageError(f"cannot write {args.output}: {exc.strerror or exc}") from None
    meta = {"true_change_points": truth, "scenario": args.scenario, "seed": seed, "T": panel.T}
    _write_text(_sidecar(args.output), json.dumps(meta, indent=2) + "\n")
    return EXIT_OK


def _load_json(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror or exc}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: invalid JSON ({exc})") from None


def cmd_evaluate(args) -> int:
    result = _load_json(args.input)
    truth = _load_json(args.truth)
    try:
        est = [int(c) for c in result["change_points"]]
        true = [int(c) for c in truth["true_change_points"]]
        T = int(truth.get("T") or result["T"])
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"missing or malformed field: {exc}") from None
    buf = io.StringIO()
    write_summary_csv([summarize([evaluate(est, true, T)])], buf)
    _write_text(args.output, buf.getvalue())
    return EXIT_OK


def cmd_bench(args) -> int:
    if args.scenario not in bench.BENCH_SCENARIOS:
        raise UsageError(f"unknown scenario {args.scenario!r}; choose from {', '.join(bench.BENCH_SCENARIOS)}")
    if args.reps < 1:
        raise UsageError("--reps must be >= 1")
    threads = args.threads or os.cpu_count() or 1
    if threads < 1:
        raise UsageError("--threads must be >= 1")
    cfg = bench.BenchConfig(
        args.scenario,
        args.reps,
        _seed(args),
        args.kernel,
        args.depth,
        args.ck,
        loss_source=args.loss_source,
        hbar_mode=args.hbar,
    )
    start = time.perf_counter()
    summary, reps = bench.run_bench(cfg, threads)
    wall = time.perf_counter() - start
    buf = io.StringIO()
    write_summary_csv([summary], buf)
    _write_text(args.output, buf.getvalue())
    if args.output:
        report = bench.bench_report(cfg, summary, reps, threads, wall)
        _write_text(_sidecar(args.output), json.dumps(report, indent=2) + "\n")
    print(json.dumps({"seed": cfg.seed, **asdict(summary)}), file=sys.stderr)
    return EXIT_OK


COMMANDS = {
    "detect": cmd_detect,
    "tune": cmd_tune,
    "simulate": cmd_simulate,
    "evaluate": cmd_evaluate,
    "bench": cmd_bench,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"fsbs: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"fsbs: detection failed: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
