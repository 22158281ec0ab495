"""Command line entry point: ``dynoprimal run`` and ``dynoprimal gen``."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from typing import List, Optional

from .harness import EXIT_INPUT, RunOptions, run
from .partition import PartitionError
from .stream import MODES, StreamError, generate_stream, parse_stream

log = logging.getLogger("dynoprimal")


def _run(args: argparse.Namespace) -> int:
    try:
        with open(args.stream) as fh:
            stream = parse_stream(fh.read())
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except StreamError as exc:
        print(f"error: {args.stream}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    if args.mode and args.mode != stream.mode:
        print(f"error: stream is in {stream.mode} mode, --mode says {args.mode}", file=sys.stderr)
        return EXIT_INPUT

    opts = RunOptions(
        verify=args.verify,
        verify_every=args.verify_every,
        oracle=args.oracle,
        trials=args.trials,
        seed=args.seed,
        epsilon=args.epsilon,
        c=args.c,
    )
    out = None
    try:
        if args.metrics_out:
            out = open(args.metrics_out, "w", newline="")
        result = run(stream, opts, csv_out=out)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except PartitionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    finally:
        if out is not None:
            out.close()

    for failure in result.failures[: args.max_report]:
        print(f"FAIL {failure}", file=sys.stderr)
    if len(result.failures) > args.max_report:
        print(f"... {len(result.failures) - args.max_report} more failures", file=sys.stderr)
    if result.sampling is not None:
        s = result.sampling
        print(f"sampling: {s.outside}/{s.probes} probes outside 3 sigma over {s.trials} trials "
              f"({'ok' if s.ok else 'too many'})")
    print(json.dumps(result.summary, sort_keys=True))
    return result.exit_code


def _gen(args: argparse.Namespace) -> int:
    stream = generate_stream(
        mode=args.mode,
        n=args.n,
        updates=args.updates,
        f=args.f,
        mu=args.mu,
        eps=args.epsilon,
        delete_ratio=args.delete_ratio,
        window=args.window,
        max_cap=args.max_cap,
        hubs=args.hubs,
        seed=args.seed,
    )
    text = stream.to_text()
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dynoprimal", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="replay an update stream")
    r.add_argument("--mode", choices=MODES)
    r.add_argument("--stream", required=True, help="stream file")
    r.add_argument("--epsilon", type=float, help="override the stream's eps")
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--verify", choices=("none", "invariants", "full"), default="invariants")
    r.add_argument("--verify-every", type=int, default=1, metavar="K",
                   help="checkpoint every K updates; 0 checks only the end")
    r.add_argument("--oracle", action="store_true", help="compare against exact oracles at checkpoints")
    r.add_argument("--trials", type=int, default=0, help="resampling trials (bmatching)")
    r.add_argument("--c", type=float, help="sampling constant for bmatching")
    r.add_argument("--metrics-out", help="CSV output path")
    r.add_argument("--max-report", type=int, default=20)
    r.set_defaults(func=_run)

    g = sub.add_parser("gen", help="generate a random update stream")
    g.add_argument("--mode", choices=MODES, default="hypergraph")
    g.add_argument("--n", type=int, default=100)
    g.add_argument("--updates", type=int, default=1000)
    g.add_argument("--f", type=int, default=2)
    g.add_argument("--mu", type=float, default=1.0)
    g.add_argument("--epsilon", type=float, default=0.1)
    g.add_argument("--delete-ratio", type=float, default=0.5)
    g.add_argument("--window", type=int)
    g.add_argument("--max-cap", type=int, default=3)
    g.add_argument("--hubs", type=float, default=0.0)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out")
    g.set_defaults(func=_gen)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
