"""Command line entry points: calibrate, trial, study, replay, serve, bench."""
from __future__ import annotations

import argparse
import asyncio
import json
import sys
from pathlib import Path

import numpy as np

from .bench import format_bench, run_bench
from .control import ControllerConfig, Mode, PreparedRefs, synthesize_references
from .errors import ConfigError, MyoloopError
from .harness import (
    StudyConfig,
    TaskKind,
    TaskSpec,
    UserKind,
    UserModel,
    run_study,
    run_trial,
    trial_mae,
)
from .service import Engine, SessionConfig, serve_forever, verify_replay
from .signal import Dof, default_pattern, load_references, save_references


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="myoloop",
        description="Closed-loop myoelectric hand control simulator.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=None,
                       help="override the config seed")
        p.add_argument("--config", type=Path, default=None,
                       help="JSON config file")
        p.add_argument("--out", type=Path, default=None,
                       help="output file or directory")

    p = sub.add_parser("calibrate",
                       help="synthesize references and save them")
    common(p)

    p = sub.add_parser("trial", help="run one matching trial")
    common(p)
    p.add_argument("--mode", choices=[m.value for m in Mode],
                   default=Mode.CONTINUOUS.value)
    p.add_argument("--kind", choices=[k.value for k in TaskKind],
                   default=TaskKind.POSITION.value)
    p.add_argument("--dof", action="append", default=None,
                   help="targeted DOF (repeatable), default II")
    p.add_argument("--target", type=float, default=0.6)
    p.add_argument("--duration", type=float, default=5.0)
    p.add_argument("--user", choices=["closed", "open"], default="closed")

    p = sub.add_parser("study", help="run the full multi-arm study")
    common(p)

    p = sub.add_parser("replay", help="re-render feedback from a trace log")
    common(p)
    p.add_argument("log", type=Path)

    p = sub.add_parser("serve", help="stream the engine over a websocket")
    common(p)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8765)
    p.add_argument("--log", type=Path, default=None,
                   help="JSON-lines session log")

    p = sub.add_parser("bench", help="compare descent kernel backends")
    common(p)
    p.add_argument("--reps", type=int, default=200)
    return parser


def _load_json(path: Path | None) -> dict:
    if path is None:
        return {}
    try:
        return json.loads(path.read_text())
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file is not valid JSON: {exc}") from None


def _session_config(args) -> SessionConfig:
    cfg = SessionConfig.from_json(_load_json(args.config))
    if args.seed is not None:
        cfg.seed = args.seed
    return cfg


def cmd_calibrate(args) -> int:
    cfg = _session_config(args)
    rng = np.random.default_rng(cfg.seed)
    pattern = default_pattern(jitter=cfg.pattern_jitter, rng=rng) \
        if cfg.pattern_jitter > 0 else default_pattern()
    refs, threshold = synthesize_references(pattern, rng)
    out = args.out or Path("references.json")
    save_references(refs, out, threshold=threshold)
    print(f"saved {len(refs)} references (threshold {threshold:.6f}) "
          f"to {out}")
    return 0


def cmd_trial(args) -> int:
    cfg = _session_config(args)
    rng = np.random.default_rng(cfg.seed)
    pattern = default_pattern(jitter=cfg.pattern_jitter, rng=rng) \
        if cfg.pattern_jitter > 0 else default_pattern()
    if cfg.references:
        refs, threshold = load_references(cfg.references)
    else:
        refs, threshold = synthesize_references(pattern, rng)
    prepared = PreparedRefs(refs, perm_seed=cfg.seed)
    ctrl = ControllerConfig(mode=Mode(args.mode), threshold=threshold)
    dofs = tuple(Dof(d) for d in (args.dof or ["II"]))
    spec = TaskSpec(kind=TaskKind(args.kind), dof_set=dofs,
                    trial_duration=args.duration)
    user = UserModel(kind=UserKind.CLOSED_LOOP if args.user == "closed"
                     else UserKind.OPEN_LOOP)
    target = {d: args.target for d in spec.dof_set}
    trace = run_trial(spec, target, prepared, user, rng,
                      ctrl_cfg=ctrl, plant_cfg=cfg.plant, pattern=pattern,
                      control_rate=cfg.control_rate,
                      window_samples=cfg.window_samples)
    if args.out:
        with open(args.out, "w") as fh:
            for row in trace.rows():
                fh.write(json.dumps(row) + "\n")
    print(f"trial MAE: {trial_mae(trace):.3f}%")
    return 0


def cmd_study(args) -> int:
    cfg = StudyConfig.from_json(_load_json(args.config))
    if args.seed is not None:
        cfg.seed = args.seed
    out = args.out or Path("study_out")
    report = run_study(cfg, out=out)
    medians = {
        arm: {label: round(entry["median_mae"], 3)
              for label, entry in data["rounds"].items()}
        for arm, data in report["arms"].items()}
    print(json.dumps({"out": str(out), "median_mae": medians}, indent=2))
    return 0


def cmd_replay(args) -> int:
    cfg = _session_config(args)
    steps = verify_replay(args.log, cfg.plant)
    print(f"replayed {steps} steps; feedback reproduced exactly")
    return 0


def cmd_serve(args) -> int:
    cfg = _session_config(args)
    try:
        asyncio.run(serve_forever(cfg, host=args.host, port=args.port,
                                  log_path=args.log))
    except KeyboardInterrupt:
        pass
    return 0


def cmd_bench(args) -> int:
    print(format_bench(run_bench(reps=args.reps)))
    return 0


COMMANDS = {
    "calibrate": cmd_calibrate,
    "trial": cmd_trial,
    "study": cmd_study,
    "replay": cmd_replay,
    "serve": cmd_serve,
    "bench": cmd_bench,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except MyoloopError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
