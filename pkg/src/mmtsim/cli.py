"""Command-line front end.

Subcommands:
  build           generate an MMT topology and write its canonical export
  verify          re-derive a topology export and check it structurally
  run             execute the ten-step broadcast, write metrics + trace
  demo-butterfly  coded multicast on the built-in seven-node demo network
  report          turn metrics files into plot series, tables and figures

Exit codes: 0 success / verified, 1 usage, 2 verification failure,
3 I/O or parse failure, 4 internal invariant breach.
"""

from __future__ import annotations

import argparse
import gzip
import sys
from pathlib import Path

from . import aab, butterfly, engine, report, topology
from .errors import (
    InvalidParameterError,
    ParseError,
    StructuralError,
    UnsupportedParameterError,
)
from .gf import Field

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VERIFY = 2
EXIT_IO = 3
EXIT_INTERNAL = 4


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse default exits 2; we reserve that
        raise _UsageError(message)


def _write_text(path: Path, text: str) -> None:
    if str(path).endswith(".gz"):
        with gzip.open(path, "wt") as fh:
            fh.write(text)
    else:
        path.write_text(text)


def _read_text(path: Path) -> str:
    if str(path).endswith(".gz"):
        with gzip.open(path, "rt") as fh:
            return fh.read()
    return path.read_text()


def _power_of_two(n: int) -> int:
    if n < 2 or n & (n - 1):
        raise _UsageError(f"--n must be a power of two >= 2, got {n}")
    return n


def cmd_build(args) -> int:
    g = topology.build_mmt(args.n)
    text = topology.export_topology(g)
    _write_text(Path(args.out), text)
    metrics = topology.graph_metrics(g)
    print(f"wrote MMT({args.n}): {metrics['node_count']} nodes, "
          f"{metrics['edge_count_total']} links -> {args.out}")
    return EXIT_OK


def cmd_verify(args) -> int:
    text = _read_text(Path(args.topology))
    parsed = topology.parse_topology(text)
    rebuilt = topology.build_mmt(parsed.n)
    if parsed != rebuilt:
        print(f"topology file disagrees with a fresh MMT({parsed.n}) build")
        return EXIT_VERIFY
    if topology.export_topology(parsed) != text:
        print("topology file is not in canonical form")
        return EXIT_VERIFY
    print(f"verified MMT({parsed.n}): {parsed.node_count} nodes, "
          f"{len(parsed.links)} links")
    return EXIT_OK


def cmd_run(args) -> int:
    n = _power_of_two(args.n)
    cfg = engine.RunConfig(
        n=n,
        mode=args.mode,
        field=Field(args.field_u),
        payload_len=args.payload_len,
        seed=args.seed,
        coeff_mode=args.coeff_mode,
        policy=args.policy,
        retry_limit=args.retry_limit,
        workers=args.workers,
    )
    g = topology.build_mmt(n)
    result = engine.run(g, cfg)
    if args.out_metrics:
        _write_text(Path(args.out_metrics), result.metrics.to_csv())
    if args.out_trace:
        _write_text(Path(args.out_trace), engine.trace_text(result))
    missing = engine.verify_all_to_all(result)
    totals = result.metrics.executed_rounds()
    print(f"run n={n} mode={args.mode} seed={args.seed}: "
          f"{sum(totals.values())} rounds, "
          f"{result.metrics.decode_failures} decode failures, "
          f"{result.metrics.retry_rounds} retry rounds")
    if missing:
        print(f"verification FAILED: {len(missing)} processors incomplete")
        for pid, absent in missing[:5]:
            print(f"  {pid} missing {len(absent)} sources")
        return EXIT_VERIFY
    print("verification passed: every processor holds every message")
    return EXIT_OK


def cmd_demo_butterfly(args) -> int:
    if args.trials < 1:
        raise _UsageError("--trials must be >= 1")
    fld = Field(args.field_u)
    rep = butterfly.run_trials(
        fld, seed=args.seed, trials=args.trials,
        uses_per_trial=args.uses, coeff_mode=args.coeff_mode,
    )
    violations = butterfly.audit_rank_bounds(rep)
    if args.show_network:
        print("nodes: " + " ".join(butterfly.DEMO_NODES))
        for u, v in butterfly.DEMO_EDGES:
            print(f"edge {u} -> {v}")
    print(f"demo: field=GF(2^{args.field_u}) trials={rep.trials} "
          f"uses/trial={rep.uses_per_trial} coeff_mode={rep.coeff_mode}")
    first = rep.results[0]
    merged = first.uses[0].merged_vector
    print(f"trial 0 merged vector at P5: {merged}")
    for sink in butterfly.DEMO_SINKS:
        ok = sum(1 for r in rep.results if r.sink_decoded[sink])
        print(f"  {sink}: decoded in {ok}/{rep.trials} trials")
    print(f"aggregate failure rate: {rep.failure_rate:.4f}")
    print(f"rank/max-flow violations: {len(violations)}")
    if args.out:
        lines = ["trial,sink,rank,decoded"]
        for res in rep.results:
            for sink in butterfly.DEMO_SINKS:
                lines.append(
                    f"{res.trial},{sink},{res.sink_rank[sink]},"
                    f"{int(res.sink_decoded[sink])}"
                )
        _write_text(Path(args.out), "\n".join(lines) + "\n")
    return EXIT_OK if not violations else EXIT_INTERNAL


def cmd_report(args) -> int:
    metrics = engine.Metrics.from_csv(_read_text(Path(args.metrics)))
    compare = None
    if args.compare:
        compare = engine.Metrics.from_csv(_read_text(Path(args.compare)))
    written = report.generate_report(metrics, Path(args.out_dir), compare)
    for path in written:
        print(f"wrote {path}")
    return EXIT_OK


def _build_parser() -> _Parser:
    parser = _Parser(prog="mmtsim",
                     description="network-coded all-to-all broadcast on MMT")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", help="generate and export an MMT topology")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("verify", help="check a topology export file")
    p.add_argument("--topology", required=True)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("run", help="execute the ten-step broadcast")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--mode", choices=[aab.PLAIN, aab.CODED], default=aab.PLAIN)
    p.add_argument("--field-u", type=int, default=8)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--payload-len", type=int, default=16)
    p.add_argument("--coeff-mode", choices=["uniform", "nonzero"], default="uniform")
    p.add_argument("--policy", choices=["report", "retry"], default="report")
    p.add_argument("--retry-limit", type=int, default=3)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out-metrics")
    p.add_argument("--out-trace")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("demo-butterfly",
                       help="coded multicast on the built-in demo network")
    p.add_argument("--field-u", type=int, default=8)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--uses", type=int, default=2)
    p.add_argument("--coeff-mode", choices=list(butterfly.COEFF_MODES),
                   default="uniform")
    p.add_argument("--show-network", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_demo_butterfly)

    p = sub.add_parser("report", help="series files and figures from metrics")
    p.add_argument("--metrics", required=True)
    p.add_argument("--compare")
    p.add_argument("--out-dir", default="report")
    p.set_defaults(func=cmd_report)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (UnsupportedParameterError, InvalidParameterError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except StructuralError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
