"""Command-line interface.

Subcommands:
    simulate    one trial with a verbose per-stop trace
    batch       Monte-Carlo batch with CSV + JSON outputs
    rir-dump    raw RIR text files for a static rig pose
    demo-corner near-corner failure / arm-extension mitigation demo

Exit codes: 0 ok, 1 configuration error, 2 infrastructure failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from .acoustics import Room, dump_rir, synthesize_rir
from .errors import ConfigError
from .geometry import Point2, rectangle
from .harness import (
    ExperimentConfig,
    derive_seed,
    run_batch,
    run_corner_experiment,
    run_trial,
    trace_payload,
    write_batch_outputs,
)
from .rig import RigPose, mic_positions


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="JSON config file (flags override)")
    p.add_argument("--seed", type=int, help="master seed")
    p.add_argument("--snr-db", type=str, help="noise SNR in dB (or 'inf')")
    p.add_argument("--out-dir", type=Path, help="output directory")
    p.add_argument("--scenario", choices=["fixed", "random"], help="room scenario")
    p.add_argument("--trials", type=int, help="number of trials")
    p.add_argument("--workers", type=int, help="parallel worker processes")


def _load_config(args: argparse.Namespace) -> ExperimentConfig:
    data: dict = {}
    if getattr(args, "config", None):
        data.update(json.loads(Path(args.config).read_text()))
    overrides = {
        "master_seed": getattr(args, "seed", None),
        "snr_db": float(args.snr_db) if getattr(args, "snr_db", None) else None,
        "scenario": getattr(args, "scenario", None),
        "trials": getattr(args, "trials", None),
        "workers": getattr(args, "workers", None),
    }
    data.update({k: v for k, v in overrides.items() if v is not None})
    return ExperimentConfig.from_dict(data)


def _cmd_simulate(args: argparse.Namespace) -> int:
    cfg = _load_config(args)
    report = run_trial(cfg, args.trial_index)
    for rec in report.trace:
        line = (
            f"stop {rec['stop']:3d}  action={rec['action']:<15s} "
            f"walls={rec['confirmed_walls']} candidates={rec['n_candidates']}"
        )
        print(line)
    errs = " ".join(f"{e * 100:.3f}cm" for e in report.wall_errors)
    print(f"success={report.success} steps={report.steps} wall_errors=[{errs}]")
    if args.out_dir:
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        path = out / f"trace_{args.trial_index}.json"
        path.write_text(json.dumps(trace_payload(report), sort_keys=True, indent=2) + "\n")
        print(f"trace written to {path}")
    return 0


def _cmd_batch(args: argparse.Namespace) -> int:
    cfg = _load_config(args)
    if args.save_traces:
        cfg = ExperimentConfig.from_dict(dict(cfg.to_dict(), save_traces=True))
    out_dir = args.out_dir or Path("out")
    batch = run_batch(cfg, out_dir)
    agg = batch.aggregate
    print(f"trials={agg['n_trials']} success_rate={agg['success_rate']:.3f}")
    print(
        f"errors: median={agg['errors']['median_m'] * 100:.3f}cm "
        f"p95={agg['errors']['p95_m'] * 100:.3f}cm "
        f"<1cm={agg['errors']['frac_below_1cm']:.3f}"
    )
    print(
        f"steps: median={agg['steps']['median']:.0f} p90={agg['steps']['p90']:.0f} "
        f"mode~{agg['steps']['mode_bin_center']}"
    )
    print(f"outputs in {out_dir}")
    return 0


def _cmd_rir_dump(args: argparse.Namespace) -> int:
    cfg = _load_config(args)
    room = Room.from_polygon(rectangle(cfg.room_width, cfg.room_height), cfg.absorption)
    center = Point2(*(float(v) for v in args.center.split(",")))
    pose = RigPose(center, math.radians(args.angle_deg), args.extension)
    sim_cfg = cfg.sim_config(rng_seed=derive_seed(cfg.master_seed, (0xD0,)))
    out = Path(args.out_dir or "out")
    out.mkdir(parents=True, exist_ok=True)
    for k, mic in enumerate(mic_positions(pose)):
        rir = synthesize_rir(room, center, mic, sim_cfg, mic_index=k + 1)
        path = out / f"rir_mic{k + 1}.txt"
        dump_rir(rir, path)
        print(f"wrote {path}")
    return 0


def _cmd_demo_corner(args: argparse.Namespace) -> int:
    cfg = _load_config(args)
    n = args.trials or 20
    summary = run_corner_experiment(cfg, n_trials=n)
    print(json.dumps(summary, indent=2, sort_keys=True))
    if args.out_dir:
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "corner_summary.json").write_text(
            json.dumps(summary, sort_keys=True, indent=2) + "\n"
        )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="echoroom", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run one trial with a verbose trace")
    _add_common(p)
    p.add_argument("--trial-index", type=int, default=0)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("batch", help="run a Monte-Carlo batch")
    _add_common(p)
    p.add_argument("--save-traces", action="store_true")
    p.set_defaults(func=_cmd_batch)

    p = sub.add_parser("rir-dump", help="dump raw RIRs for a static pose")
    _add_common(p)
    p.add_argument("--center", default="3.0,2.5", help="rig center as x,y")
    p.add_argument("--angle-deg", type=float, default=0.0)
    p.add_argument("--extension", type=float, default=0.4)
    p.set_defaults(func=_cmd_rir_dump)

    p = sub.add_parser("demo-corner", help="near-corner mitigation demo")
    _add_common(p)
    p.set_defaults(func=_cmd_demo_corner)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # infrastructure failure
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
