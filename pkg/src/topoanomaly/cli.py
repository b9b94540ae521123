"""Command-line entry point: ingest -> metrics -> detect -> evaluate, plus simulators."""
from __future__ import annotations

import argparse
import os
import re
import sys
from pathlib import Path

from . import __version__
from .detector import DetectorConfig, DetectorState, TauMode, run_stream_with_state
from .evaluate import evaluate, k_sweep, roc_curve
from .formats import (
    SchemaError,
    header_lines,
    read_labels_csv,
    read_metrics_csv,
    write_labels_csv,
    write_metrics_csv,
    write_report_json,
    write_roc_csv,
    write_sweep_csv,
    write_trajectory_csv,
    write_verdicts_csv,
)
from .graph import read_edge_list
from .ingest import BinSpec, ingest_file
from .metrics import compute_metrics
from .simulate import AttackSchedule, Strategy, generate_ba, simulate_attack_curve, \
    synthesize_labeled_stream

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2
EXIT_MISSING_INPUT = 3
EXIT_SCHEMA = 4
EXIT_INVALID = 5

DEFAULT_K_GRID = "12,24,36,48,60"
BIN_FILE = re.compile(r"bin_(-?\d+)\.edges$")


class ConfigError(ValueError):
    pass


def _int_list(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x.strip()]


def _float_list(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def _window(text: str) -> tuple[int, int, float]:
    try:
        start, end, frac = text.split(":")
        return int(start), int(end), float(frac)
    except ValueError:
        raise argparse.ArgumentTypeError(f"window must be start:end:fraction, got {text!r}")


def _add_detector_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--k", type=int, default=36, help="window of prior normal states")
    p.add_argument("--lambda", dest="lam", type=float, default=1.96,
                   help="normal quantile scaling the spread")
    p.add_argument("--tau-mode", choices=[m.value for m in TauMode], default="deviation")
    p.add_argument("--warmup", type=int, default=None,
                   help="entries admitted untested at start (default: k)")


def _add_metrics_args(p: argparse.ArgumentParser, seed_flags=("--metrics-seed",)) -> None:
    g = p.add_mutually_exclusive_group()
    g.add_argument("--exact", action="store_true", help="all-sources BFS (default)")
    g.add_argument("--sample", type=int, default=None, metavar="N",
                   help="estimate from N random BFS sources")
    p.add_argument(*seed_flags, dest="metrics_seed", type=int, default=0,
                   help="seed for source sampling")
    p.add_argument("--dmax-variant", choices=["max", "mean"], default="max")
    p.add_argument("--workers", type=int, default=os.cpu_count() or 1,
                   help="BFS worker threads")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="topoanomaly", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--config", type=Path, default=None,
                        help="flat key=value file of defaults; flags override it")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="path file -> per-bin edge lists")
    p.add_argument("paths", type=Path)
    p.add_argument("--out", type=Path, required=True, help="output directory")
    p.add_argument("--bin-seconds", type=int, default=600)
    p.add_argument("--origin", type=int, default=0)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("metrics", help="edge lists -> metrics CSV")
    p.add_argument("inputs", nargs="+", type=Path, help="edge-list files or directories")
    p.add_argument("--out", type=Path, default=None)
    _add_metrics_args(p, ("--seed", "--metrics-seed"))
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("detect", help="metrics CSV -> verdict CSV")
    p.add_argument("metrics", type=Path)
    p.add_argument("--out", type=Path, default=None)
    p.add_argument("--state-in", type=Path, default=None, help="resume from checkpoint")
    p.add_argument("--state-out", type=Path, default=None, help="write checkpoint")
    _add_detector_args(p)
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("simulate", help="attack curves and labeled benchmark streams")
    simsub = p.add_subparsers(dest="sim_command", required=True)

    a = simsub.add_parser("attack", help="node-removal trajectory on a BA graph")
    a.add_argument("--n", type=int, default=2000)
    a.add_argument("--m", type=int, default=2)
    a.add_argument("--strategy", choices=[s.value for s in Strategy], default="targeted")
    a.add_argument("--step", type=float, default=0.005)
    a.add_argument("--max", dest="max_fraction", type=float, default=0.15)
    a.add_argument("--seed", type=int, default=0)
    a.add_argument("--out", type=Path, default=None)
    _add_metrics_args(a)
    a.set_defaults(func=cmd_simulate_attack)

    s = simsub.add_parser("stream", help="labeled metrics stream with hub-removal windows")
    s.add_argument("--n", type=int, default=2000)
    s.add_argument("--m", type=int, default=2)
    s.add_argument("--base-seed", type=int, default=0)
    s.add_argument("--ticks", type=int, default=720)
    s.add_argument("--window", type=_window, action="append", default=None,
                   help="anomaly window start:end:fraction (repeatable)")
    s.add_argument("--rewire", type=float, default=0.005)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out-metrics", type=Path, required=True)
    s.add_argument("--out-labels", type=Path, required=True)
    _add_metrics_args(s)
    s.set_defaults(func=cmd_simulate_stream)

    for name, func, helptext in (
        ("evaluate", cmd_evaluate, "score one detector configuration"),
        ("sweep", cmd_sweep, "score a grid of k values"),
        ("roc", cmd_roc, "ROC over a grid of lambda values"),
    ):
        e = sub.add_parser(name, help=helptext)
        e.add_argument("metrics", type=Path)
        e.add_argument("labels", type=Path)
        e.add_argument("--out", type=Path, default=None)
        _add_detector_args(e)
        if name == "evaluate":
            e.add_argument("--b", type=float, default=1.0, help="F-score weight")
        if name == "sweep":
            e.add_argument("--k-grid", type=_int_list, default=DEFAULT_K_GRID)
        if name == "roc":
            e.add_argument("--lambda-grid", type=_float_list,
                           default="0.25,0.5,1,1.5,1.96,2.5,3,4,6,8,16")
        e.set_defaults(func=func)
    return parser


def _subparsers(parser: argparse.ArgumentParser):
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            for sp in action.choices.values():
                yield sp
                yield from _subparsers(sp)


def _parse_bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {text!r}")


def load_config(path: Path) -> dict[str, str]:
    values = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key=value")
            key, value = line.split("=", 1)
            key = key.strip().lstrip("-").replace("-", "_")
            values[{"lambda": "lam", "max": "max_fraction"}.get(key, key)] = value.strip()
    return values


def _apply_config(parser: argparse.ArgumentParser, config: dict[str, str]) -> None:
    known: set[str] = set()
    for sp in [parser, *_subparsers(parser)]:
        for action in sp._actions:
            if action.dest in config:
                value: object = config[action.dest]
                if isinstance(action, (argparse._StoreTrueAction, argparse._StoreFalseAction)):
                    value = _parse_bool(config[action.dest])
                elif isinstance(action, argparse._AppendAction) and action.type is not None:
                    value = [action.type(v) for v in config[action.dest].split()]
                sp.set_defaults(**{action.dest: value})
                known.add(action.dest)
    unknown = sorted(set(config) - known)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")


def _echo(args: argparse.Namespace) -> list[str]:
    cfg = {"tool": "topoanomaly", "version": __version__}
    for key, value in sorted(vars(args).items()):
        if key in ("func", "config") or value is None:
            continue
        cfg[key] = value
    return header_lines(cfg)


def _require(path: Path) -> None:
    if not path.exists():
        raise FileNotFoundError(f"input not found: {path}")


def _emit(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)


def _detector_cfg(args) -> DetectorConfig:
    return DetectorConfig(k=args.k, lam=args.lam, tau_mode=args.tau_mode, warmup=args.warmup)


def _metrics_kwargs(args) -> dict:
    return {"sample_size": args.sample, "seed": args.metrics_seed,
            "dmax_variant": args.dmax_variant, "workers": args.workers}


def cmd_ingest(args) -> int:
    _require(args.paths)
    stats = ingest_file(args.paths, args.out, BinSpec(args.bin_seconds, args.origin),
                        header=_echo(args))
    print(f"wrote {sum(1 for _ in args.out.glob('bin_*.edges'))} bins "
          f"({sum(s.record_count for s in stats.values())} records, "
          f"{sum(s.rejected_count for s in stats.values())} rejected) to {args.out}",
          file=sys.stderr)
    return EXIT_OK


def _edge_files(inputs: list[Path]) -> list[tuple[int, Path]]:
    found = []
    for path in inputs:
        _require(path)
        if path.is_dir():
            found.extend(sorted(path.glob("bin_*.edges")))
        else:
            found.append(path)
    numbered = []
    for pos, path in enumerate(found):
        m = BIN_FILE.search(path.name)
        numbered.append((int(m.group(1)) if m else pos, path))
    numbered.sort()
    ids = [b for b, _ in numbered]
    if len(set(ids)) != len(ids):
        raise SchemaError("duplicate bin ids among inputs")
    return numbered


def cmd_metrics(args) -> int:
    rows = []
    for bin_id, path in _edge_files(args.inputs):
        g = read_edge_list(path, bin_id=bin_id)
        rows.append(compute_metrics(g, **_metrics_kwargs(args)))
    _emit(write_metrics_csv(args.out, rows, _echo(args)), args.out)
    return EXIT_OK


def cmd_detect(args) -> int:
    _require(args.metrics)
    cfg = _detector_cfg(args)
    state = None
    if args.state_in is not None:
        _require(args.state_in)
        state, saved = DetectorState.from_json(args.state_in.read_text(encoding="utf-8"))
        if saved != cfg:
            raise ConfigError("checkpoint configuration differs from the requested one")
    verdicts, state = run_stream_with_state(read_metrics_csv(args.metrics), cfg, state)
    _emit(write_verdicts_csv(args.out, verdicts, _echo(args)), args.out)
    if args.state_out is not None:
        args.state_out.write_text(state.to_json(cfg) + "\n", encoding="utf-8")
    return EXIT_OK


def cmd_simulate_attack(args) -> int:
    schedule = AttackSchedule(Strategy(args.strategy), args.step, args.max_fraction, args.seed)
    points = simulate_attack_curve(args.n, args.m, schedule, sample_size=args.sample,
                                   metrics_seed=args.metrics_seed,
                                   dmax_variant=args.dmax_variant, workers=args.workers)
    _emit(write_trajectory_csv(args.out, points, _echo(args)), args.out)
    return EXIT_OK


def cmd_simulate_stream(args) -> int:
    base = generate_ba(args.n, args.m, args.base_seed)
    kwargs = _metrics_kwargs(args)
    stream, labels = synthesize_labeled_stream(
        base, args.ticks, args.window or [], seed=args.seed, rewire_fraction=args.rewire,
        metrics_fn=lambda g: compute_metrics(g, **kwargs),
    )
    header = _echo(args)
    write_metrics_csv(args.out_metrics, stream, header)
    write_labels_csv(args.out_labels, [m.bin_id for m in stream], labels, header)
    return EXIT_OK


def _load_scored(args):
    _require(args.metrics)
    _require(args.labels)
    stream = read_metrics_csv(args.metrics)
    ticks, labels = read_labels_csv(args.labels)
    if ticks != [m.bin_id for m in stream]:
        raise SchemaError("label ticks do not match metric bin ids")
    return stream, labels


def cmd_evaluate(args) -> int:
    stream, labels = _load_scored(args)
    report = evaluate(stream, labels, _detector_cfg(args), b=args.b)
    _emit(write_report_json(args.out, report), args.out)
    return EXIT_OK


def cmd_sweep(args) -> int:
    stream, labels = _load_scored(args)
    rows = k_sweep(stream, labels, _detector_cfg(args), args.k_grid)
    _emit(write_sweep_csv(args.out, rows, _echo(args)), args.out)
    return EXIT_OK


def cmd_roc(args) -> int:
    stream, labels = _load_scored(args)
    points, area = roc_curve(stream, labels, _detector_cfg(args), args.lambda_grid)
    _emit(write_roc_csv(args.out, points, _echo(args) + [f"auc={area!r}"]), args.out)
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    pre = argparse.ArgumentParser(add_help=False, allow_abbrev=False)
    pre.add_argument("--config", type=Path, default=None)
    # --config may appear anywhere on the line
    known, argv = pre.parse_known_args(argv)
    parser = build_parser()
    try:
        if known.config is not None:
            _require(known.config)
            _apply_config(parser, load_config(known.config))
    except FileNotFoundError as exc:
        print(f"topoanomaly: error: {exc}", file=sys.stderr)
        return EXIT_MISSING_INPUT
    except ConfigError as exc:
        print(f"topoanomaly: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        msg, code = exc, EXIT_MISSING_INPUT
    except SchemaError as exc:
        msg, code = exc, EXIT_SCHEMA
    except ValueError as exc:
        msg, code = exc, EXIT_INVALID
    print(f"topoanomaly: error: {msg}", file=sys.stderr)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
