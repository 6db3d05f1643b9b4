"""Command-line entry point.

Exit codes: 0 success, 1 verification failure, 2 usage or config error,
3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from . import __version__
from .bench import run_bench
from .config import resolve
from .sim import PRESETS, SAMPLERS, ConfigError, run_ensemble
from .stats import evaluate, matrix_csv, stats_csv, summary
from .verify import SUITES, run_suite

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3


def _write(path: Path, text: str) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(text)


def cmd_simulate(args) -> int:
    try:
        text = Path(args.config).read_text() if args.config else None
    except OSError as e:
        print(f"error: cannot read config: {e}", file=sys.stderr)
        return EXIT_USAGE
    if text is None and args.preset is None:
        print("error: give --config, --preset, or both", file=sys.stderr)
        return EXIT_USAGE
    try:
        cfg = resolve(text, args.preset, source=args.config or "<none>",
                      sampler=args.sampler, seeds=args.seeds, base_seed=args.base_seed)
    except (ConfigError, TypeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE

    started = time.perf_counter()
    record = run_ensemble(cfg, workers=args.workers)
    stats, verdict = evaluate(record)
    out = Path(args.out)
    files = {"stats": out / "stats.csv", "summary": out / "summary.json", "manifest": out / "manifest.json"}
    if args.raw:
        files["matrix"] = out / "matrix.csv"
    try:
        out.mkdir(parents=True, exist_ok=True)
        _write(files["stats"], stats_csv(cfg, stats, verdict))
        _write(files["summary"], json.dumps(summary(record, stats, verdict), indent=2) + "\n")
        if args.raw:
            _write(files["matrix"], matrix_csv(record))
        manifest = {
            "config_digest": cfg.digest(),
            "config": cfg.canonical().splitlines(),
            "version": __version__,
            "duration_s": round(time.perf_counter() - started, 3),
            "outputs": {k: str(v) for k, v in files.items()},
        }
        _write(files["manifest"], json.dumps(manifest, indent=2) + "\n")
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO

    s = summary(record, stats, verdict)[cfg.sampler]
    print(f"{cfg.sampler}: {s['seeds']} seeds x {s['transitions']} transitions, "
          f"counts in [{s['min_count']}, {s['max_count']}], conserved={s['conserved']}, "
          f"oracle checks {s['pass_count']}/{s['checked']}")
    print(f"wrote {', '.join(str(p) for p in files.values())}")
    return EXIT_OK


def cmd_verify(args) -> int:
    if args.suite not in SUITES:
        print(f"error: unknown suite {args.suite!r}; choose from {', '.join(SUITES)}", file=sys.stderr)
        return EXIT_USAGE
    result = run_suite(args.suite, args.seeds)
    print(result.report())
    return EXIT_OK if result.passed else EXIT_FAIL


def _sizes(text: str) -> list[int]:
    try:
        sizes = [float(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad size list {text!r}") from None
    if not sizes or any(s < 1 or not s.is_integer() for s in sizes):
        raise argparse.ArgumentTypeError(f"sizes must be positive integers, got {text!r}")
    return [int(s) for s in sizes]


def cmd_bench(args) -> int:
    try:
        report = run_bench(args.sizes, args.sampler, args.batch, args.secs)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    text = json.dumps(report, indent=2) + "\n"
    if args.out:
        try:
            _write(Path(args.out), text)
        except OSError as e:
            print(f"error: {e}", file=sys.stderr)
            return EXIT_IO
    print(text, end="")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rrreplay", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run a multi-seed sample-count simulation")
    sim.add_argument("--config", help="key=value config file")
    sim.add_argument("--preset", choices=sorted(PRESETS))
    sim.add_argument("--sampler", choices=sorted(SAMPLERS))
    sim.add_argument("--seeds", type=int)
    sim.add_argument("--base-seed", type=int)
    sim.add_argument("--raw", action="store_true", help="also write the seeds x ids count matrix")
    sim.add_argument("--workers", type=int, default=1)
    sim.add_argument("--out", required=True)
    sim.set_defaults(func=cmd_simulate)

    ver = sub.add_parser("verify", help="run a named verification suite")
    ver.add_argument("suite", help=", ".join(SUITES))
    ver.add_argument("--seeds", type=int)
    ver.set_defaults(func=cmd_verify)

    bench = sub.add_parser("bench", help="measure sampler throughput and latency")
    bench.add_argument("--sizes", type=_sizes, default=_sizes("1e3,1e4,1e5,1e6"))
    bench.add_argument("--sampler", default="rrc")
    bench.add_argument("--batch", type=int, default=32)
    bench.add_argument("--secs", type=float, default=1.0, help="time budget per size")
    bench.add_argument("--out", help="also write the JSON report here")
    bench.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
