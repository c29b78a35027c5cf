"""Command-line entry point: run scenarios, sweep parameters, check
reports against expectations, and manage shipped presets."""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from . import harness, metrics
from .config import load_scenario
from .netsim import format_trace
from .presets import PRESETS


def _write_outputs(out_dir: str | None, report: dict, trace_text: str | None,
                   stem: str) -> None:
    if out_dir is None:
        return
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / f"{stem}.report.json").write_text(metrics.report_json(report))
    (out / f"{stem}.flows.csv").write_text(metrics.flows_csv(report))
    if trace_text is not None:
        (out / f"{stem}.trace.log").write_text(trace_text)


def _cmd_run(args: argparse.Namespace) -> int:
    config = load_scenario(args.scenario)
    if args.seed is not None:
        config = replace(config, seed=args.seed)
    if args.trace and args.out is None:
        print("--trace needs --out", file=sys.stderr)
        return 2
    if args.trace:
        result = harness.run_engine(config, record_trace=True)
        report = result.report
        if args.paired:
            baseline = harness.run_engine(harness.attack_off_twin(config)).report
            metrics.attach_amplification(report, baseline)
            report["baseline"] = baseline
        trace_text = format_trace(result.engine.trace)
    else:
        report = harness.run_experiment(config, paired=args.paired)
        trace_text = None
    _write_outputs(args.out, report, trace_text, config.scenario_id)
    camera = report.get("camera", {})
    line = (f"{config.scenario_id}: camera {camera.get('bitrate_mbps', 0.0):.2f} Mb/s")
    if "amplification" in camera:
        line += f", amplification {camera['amplification']:.2f}x"
    print(line)
    for name in sorted(report["flows"], key=lambda n: report["flows"][n]["flow_id"]):
        row = report["flows"][name]
        dr = row.get("drop_rate")
        rtt = row.get("rtt_ms")
        print(f"  {name}: drop_rate="
              f"{'n/a' if dr is None else f'{dr:.3f}'}"
              f" rtt_p95_ms={'n/a' if not rtt else f'{rtt['p95']:.1f}'}"
              f" throughput={row['throughput_mbps']:.2f} Mb/s")
    return 0


def _cmd_sweep(args: argparse.Namespace) -> int:
    config = load_scenario(args.scenario)
    if args.seed is not None:
        config = replace(config, seed=args.seed)
    values = [float(v) for v in args.values.split(",") if v.strip() != ""]
    summary = harness.sweep(config, args.param, values)
    csv_text = harness.sweep_csv(summary)
    if args.out is not None:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        stem = f"{config.scenario_id}.sweep.{args.param}"
        slim = {k: v for k, v in summary.items() if k != "reports"}
        (out / f"{stem}.json").write_text(json.dumps(slim, sort_keys=True,
                                                     indent=2) + "\n")
        (out / f"{stem}.csv").write_text(csv_text)
    print(csv_text, end="")
    return 0


def _cmd_check(args: argparse.Namespace) -> int:
    report = json.loads(Path(args.report).read_text())
    expectations = harness.parse_expectations(Path(args.expect).read_text())
    results = harness.check(report, expectations)
    failures = 0
    for ok, msg in results:
        print(f"{'PASS' if ok else 'FAIL'} {msg}")
        failures += 0 if ok else 1
    if failures:
        print(f"{failures} of {len(results)} expectations failed")
    return 1 if failures else 0


def _cmd_presets(args: argparse.Namespace) -> int:
    if args.action == "list":
        for name in sorted(PRESETS):
            print(name)
        return 0
    name = args.name
    if name is None:
        print("presets emit needs a NAME", file=sys.stderr)
        return 2
    if name not in PRESETS:
        print(f"unknown preset {name!r}; see `presets list`", file=sys.stderr)
        return 2
    text = PRESETS[name]
    if args.out is not None:
        Path(args.out).write_text(text)
    else:
        print(text, end="")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="flickersim",
        description="Simulate a variable-bitrate camera flooding a shared "
                    "network under a flickering-light attack.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one scenario file")
    p_run.add_argument("--scenario", required=True)
    p_run.add_argument("--seed", type=int, default=None)
    p_run.add_argument("--out", default=None)
    p_run.add_argument("--paired", action="store_true",
                       help="also run the attack-off twin and report amplification")
    p_run.add_argument("--trace", action="store_true",
                       help="write the full event trace (needs --out)")
    p_run.set_defaults(func=_cmd_run)

    p_sweep = sub.add_parser("sweep", help="run a scenario across parameter values")
    p_sweep.add_argument("--scenario", required=True)
    p_sweep.add_argument("--param", required=True, choices=harness.SWEEP_PARAMS)
    p_sweep.add_argument("--values", required=True,
                         help="comma-separated values, e.g. 0,10,20,30")
    p_sweep.add_argument("--seed", type=int, default=None)
    p_sweep.add_argument("--out", default=None)
    p_sweep.set_defaults(func=_cmd_sweep)

    p_check = sub.add_parser("check", help="evaluate expectations against a report")
    p_check.add_argument("--report", required=True)
    p_check.add_argument("--expect", required=True)
    p_check.set_defaults(func=_cmd_check)

    p_presets = sub.add_parser("presets", help="list or emit shipped scenarios")
    p_presets.add_argument("action", choices=["list", "emit"])
    p_presets.add_argument("name", nargs="?", default=None)
    p_presets.add_argument("--out", default=None)
    p_presets.set_defaults(func=_cmd_presets)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
