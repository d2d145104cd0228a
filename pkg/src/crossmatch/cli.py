"""Command-line entry point: ``crossmatch {stat,null,compare,matrix,bench}``.

Every command prints one output record (JSON by default, or the
command's result table as CSV / markdown). Exit codes: 0 success,
2 usage error, 3 input parse error, 4 precondition violation,
5 internal consistency failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import secrets
import sys
import time
from contextlib import contextmanager
from fractions import Fraction
from itertools import combinations
from pathlib import Path

import numpy as np

from .core import Metric, ParseError, build_distance_matrix, pooled_from_groups
from .embedding_io import load_collection
from .inference import cross_match_test, expected_cross_matches, null_distribution, p_value
from .matching import min_weight_perfect_matching
from .resampling import ProtocolConfig, run_protocol

SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_PARSE = 3
EXIT_PRECONDITION = 4
EXIT_INTERNAL = 5

log = logging.getLogger("crossmatch")


class _Timer:
    def __init__(self) -> None:
        self.ms: dict[str, float] = {}

    @contextmanager
    def phase(self, name: str):
        t0 = time.perf_counter()
        try:
            yield
        finally:
            self.ms[name] = self.ms.get(name, 0.0) + (time.perf_counter() - t0) * 1e3


def _frac(p: Fraction | None) -> str | None:
    return None if p is None else f"{p.numerator}/{p.denominator}"


TIE_NOTE = (
    "c1 may differ between equally-optimal matchings; with continuous data ties have probability zero"
)
_MATCHING_COMMANDS = ("stat", "compare", "matrix")


def _record(command: str, inputs: list, config: dict, results: dict, timer: _Timer | None) -> dict:
    rec = {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "inputs": inputs,
        "config": config,
        "results": results,
        "timing_ms": None if timer is None else {k: round(v, 3) for k, v in timer.ms.items()},
    }
    if command in _MATCHING_COMMANDS:
        rec["notes"] = [TIE_NOTE]
    return rec


def _load(path: str, args, timer: _Timer):
    with timer.phase("load"):
        return load_collection(
            path, fmt=args.input_format, skip_malformed=args.skip_malformed, limit=args.limit
        )


def _input_entry(path: str, coll) -> dict:
    entry = {"path": str(path), "size": len(coll), "dim": coll.dim}
    if coll.dropped:
        entry["dropped_lines"] = coll.dropped
    return entry


def _seed(args) -> int:
    return args.seed if args.seed is not None else secrets.randbits(64)


def cmd_stat(args) -> tuple[dict, list[dict]]:
    timer = _Timer()
    a = _load(args.file_a, args, timer)
    b = _load(args.file_b, args, timer)
    with timer.phase("test"):
        sample = pooled_from_groups(a.vectors, b.vectors)
        res = cross_match_test(sample, args.metric, args.mode)
    results = {
        "c0": res.c0,
        "c1": res.c1,
        "c2": res.c2,
        "n": res.n,
        "m": res.m,
        "weight": res.weight,
        "exact": res.exact,
        "p_value": res.p_value_float,
        "p_value_exact": _frac(res.p_value),
        "dropped_index": res.dropped_index,
        "null_mean_c1": expected_cross_matches(res.n, res.m),
    }
    config = {"metric": Metric.parse(args.metric).cli_name, "mode": args.mode}
    rec = _record("stat", [_input_entry(args.file_a, a), _input_entry(args.file_b, b)],
                  config, results, timer if args.timing else None)
    return rec, [results]


def cmd_null(args) -> tuple[dict, list[dict]]:
    timer = _Timer()
    with timer.phase("null"):
        dist = null_distribution(args.n, args.m)
        table = [
            {"c1": c, "pmf": float(f), "cdf": float(F), "pmf_exact": _frac(f), "cdf_exact": _frac(F)}
            for c, f, F in zip(dist.support, dist.pmf, dist.cdf)
        ]
        results = {"n": args.n, "m": args.m, "null_mean_c1": expected_cross_matches(args.n, args.m),
                   "table": table}
        if args.observed is not None:
            p = p_value(args.n, args.m, args.observed)
            results.update(observed=args.observed, p_value=float(p), p_value_exact=_frac(p))
    rec = _record("null", [], {"n": args.n, "m": args.m, "observed": args.observed},
                  results, timer if args.timing else None)
    return rec, table


def _protocol_config(args) -> ProtocolConfig:
    return ProtocolConfig(
        seed=_seed(args),
        sample_size=args.sample_size,
        repetitions=args.reps,
        metric=Metric.parse(args.metric),
        mode=args.mode,
        vocab_cap=args.vocab_cap if args.vocab_cap > 0 else None,
    )


def _compare_payload(agg, per_rep: bool) -> dict:
    cfg = agg.config
    out = {
        "mean_c1": agg.mean_c1,
        "sd_c1": agg.sd_c1,
        "mean_p": agg.mean_p,
        "null_mean_c1": expected_cross_matches(cfg.sample_size, cfg.sample_size),
        "rejection_rate_0.05": agg.rejection_rate(0.05) if cfg.mode == "exact" else None,
        "collection_sizes": list(agg.sizes),
        "same_collection": agg.same_collection,
    }
    if per_rep:
        out["per_rep"] = [
            {"rep": i, "seed": r.seed, "c1": r.c1, "p_value": r.p_value_float}
            for i, r in enumerate(agg.per_rep)
        ]
    return out


def cmd_compare(args) -> tuple[dict, list[dict]]:
    timer = _Timer()
    a = _load(args.file_a, args, timer)
    b = _load(args.file_b, args, timer)
    config = _protocol_config(args)
    with timer.phase("protocol"):
        agg = run_protocol(a, b, config, workers=args.workers)
    results = _compare_payload(agg, args.per_rep)
    rec = _record("compare", [_input_entry(args.file_a, a), _input_entry(args.file_b, b)],
                  config.as_dict(), results, timer if args.timing else None)
    row = {k: v for k, v in results.items() if k not in ("per_rep", "collection_sizes", "same_collection")}
    return rec, [row]


def read_matrix_spec(path) -> list[tuple[str, Path]]:
    """Parse ``<label> <path>`` lines; relative paths resolve against the spec's folder."""
    base = Path(path).parent
    entries = []
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror or exc}") from exc
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split(None, 1)
        if len(parts) != 2:
            raise ParseError(f"{path}:{lineno}: expected '<label> <path>'")
        label, p = parts[0], Path(parts[1].strip())
        entries.append((label, p if p.is_absolute() else base / p))
    labels = [lab for lab, _ in entries]
    if len(set(labels)) != len(labels):
        raise ParseError(f"{path}: duplicate labels")
    if len(entries) < 2:
        raise ParseError(f"{path}: need at least two collections")
    return entries


def _fmt_cell(key: str, value) -> str:
    if value is None:
        return "-"
    return f"{value:.2f}" if key == "mean_c1" else f"{value:.3g}"


def cmd_matrix(args) -> tuple[dict, list[dict]]:
    timer = _Timer()
    entries = sorted(read_matrix_spec(args.spec_file), key=lambda e: e[0])
    labels = [lab for lab, _ in entries]
    colls = {lab: _load(str(p), args, timer) for lab, p in entries}
    config = _protocol_config(args)
    cells = []
    grid = {key: [[None] * len(labels) for _ in labels] for key in ("mean_c1", "mean_p")}
    with timer.phase("protocol"):
        for (i, la), (j, lb) in combinations(enumerate(labels), 2):
            try:
                agg = run_protocol(colls[la], colls[lb], config, workers=args.workers)
            except ValueError as exc:
                raise type(exc)(f"pair {la} vs {lb}: {exc}") from exc
            cell = {"a": la, "b": lb, **_compare_payload(agg, False)}
            cells.append(cell)
            for key in grid:
                grid[key][i][j] = grid[key][j][i] = cell[key]
    tables = {
        key: [["-" if i == j else v for j, v in enumerate(row)] for i, row in enumerate(g)]
        for key, g in grid.items()
    }
    results = {"labels": labels, "cells": cells, "tables": tables}
    inputs = [_input_entry(str(p), colls[lab]) | {"label": lab} for lab, p in entries]
    rec = _record("matrix", inputs, config.as_dict(), results, timer if args.timing else None)
    key = args.value
    rows = [
        {"": la, **{lb: ("-" if i == j else _fmt_cell(key, grid[key][i][j])) for j, lb in enumerate(labels)}}
        for i, la in enumerate(labels)
    ]
    return rec, rows


def growth_exponent(sizes, times) -> float:
    """Slope of log(time) against log(N), least squares."""
    slope, _ = np.polyfit(np.log(np.asarray(sizes, float)), np.log(np.asarray(times, float)), 1)
    return float(slope)


def run_bench(sizes, dim: int = 300, seed: int = 0, repeats: int = 1) -> list[dict]:
    """Time distance build and exact matching on Gaussian data for each N."""
    for N in sizes:
        if N < 2 or N % 2:
            raise ValueError(f"benchmark sizes must be even and >= 2, got {N}")
    # compile the solver outside the timed region
    min_weight_perfect_matching(build_distance_matrix(np.eye(4)))
    rows = []
    for N in sizes:
        rng = np.random.default_rng([seed, N])
        x = rng.standard_normal((N, dim))
        build, match = [], []
        for _ in range(repeats):
            t0 = time.perf_counter()
            dm = build_distance_matrix(x)
            t1 = time.perf_counter()
            min_weight_perfect_matching(dm)
            t2 = time.perf_counter()
            build.append((t1 - t0) * 1e3)
            match.append((t2 - t1) * 1e3)
        rows.append({"N": N, "build_ms": float(np.median(build)), "match_ms": float(np.median(match))})
    return rows


def cmd_bench(args) -> tuple[dict, list[dict]]:
    seed = _seed(args)
    rows = run_bench(args.sizes, dim=args.dim, seed=seed, repeats=args.repeats)
    exponent = growth_exponent([r["N"] for r in rows], [r["match_ms"] for r in rows]) if len(rows) > 1 else None
    results = {"rows": rows, "match_growth_exponent": exponent}
    config = {"sizes": list(args.sizes), "dim": args.dim, "seed": seed, "repeats": args.repeats}
    timing = {f"match_N{r['N']}": r["match_ms"] for r in rows} | {
        f"build_N{r['N']}": r["build_ms"] for r in rows
    }
    rec = _record("bench", [], config, results, None)
    rec["timing_ms"] = timing
    return rec, rows


def _emit(record: dict, rows: list[dict], fmt: str, out) -> None:
    if fmt == "json":
        out.write(json.dumps(record, indent=2) + "\n")
        return
    if not rows:
        return
    cols = list(rows[0])
    if fmt == "csv":
        writer = csv.DictWriter(out, fieldnames=cols, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
        return
    out.write("| " + " | ".join(cols) + " |\n")
    out.write("|" + "|".join("---" for _ in cols) + "|\n")
    for row in rows:
        out.write("| " + " | ".join("" if row[c] is None else str(row[c]) for c in cols) + " |\n")


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def _u64(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "csv", "markdown"), default="json")
    common.add_argument("--timing", action="store_true", help="include wall-clock timings (breaks byte-identical reruns)")
    common.add_argument("-v", "--verbose", action="store_true")

    data = argparse.ArgumentParser(add_help=False)
    data.add_argument("--metric", choices=("euclidean", "sqeuclidean", "cosine", "manhattan"), default="euclidean")
    data.add_argument("--mode", choices=("exact", "greedy"), default="exact")
    data.add_argument("--skip-malformed", action="store_true")
    data.add_argument("--limit", type=_positive_int, default=None, help="read at most this many rows per file")
    data.add_argument("--input-format", choices=("auto", "vec", "points"), default="auto")

    proto = argparse.ArgumentParser(add_help=False)
    proto.add_argument("--sample-size", type=_positive_int, default=200)
    proto.add_argument("--reps", type=_positive_int, default=500)
    proto.add_argument("--seed", type=_u64, default=None)
    proto.add_argument("--vocab-cap", type=int, default=100_000, help="0 disables the cap")
    proto.add_argument("--workers", type=_positive_int, default=1)

    parser = argparse.ArgumentParser(prog="crossmatch", description="Exact cross-match two-sample test.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("stat", parents=[common, data], help="one test on two files")
    p.add_argument("file_a")
    p.add_argument("file_b")
    p.set_defaults(func=cmd_stat)

    p = sub.add_parser("null", parents=[common], help="exact null distribution table")
    p.add_argument("n", type=int)
    p.add_argument("m", type=int)
    p.add_argument("--observed", type=int, default=None)
    p.set_defaults(func=cmd_null)

    p = sub.add_parser("compare", parents=[common, data, proto], help="repeated-subsampling comparison")
    p.add_argument("file_a")
    p.add_argument("file_b")
    p.add_argument("--per-rep", action="store_true", help="include the per-repetition series")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("matrix", parents=[common, data, proto], help="compare every pair listed in a spec file")
    p.add_argument("spec_file")
    p.add_argument("--value", choices=("mean_c1", "mean_p"), default="mean_p",
                   help="cell value for csv/markdown output")
    p.set_defaults(func=cmd_matrix)

    p = sub.add_parser("bench", parents=[common], help="time exact matching across sizes")
    p.add_argument("--sizes", type=_positive_int, nargs="+", default=[100, 200, 400, 800])
    p.add_argument("--dim", type=_positive_int, default=300)
    p.add_argument("--repeats", type=_positive_int, default=1)
    p.add_argument("--seed", type=_u64, default=None)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) and EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        record, rows = args.func(args)
    except ParseError as exc:
        print(f"crossmatch: parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except ValueError as exc:
        print(f"crossmatch: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except AssertionError as exc:
        print(f"crossmatch: internal check failed: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    buf = io.StringIO()
    _emit(record, rows, args.format, buf)
    out.write(buf.getvalue())
    return EXIT_OK


def main_entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    main_entry()
