"""Command-line entry point.

One binary, subcommand style. Standard output carries machine-readable
payloads only; all diagnostics go to standard error. Every run emits a small
manifest (subcommand, input hashes, versions, wall time) for reproducibility,
either to --manifest or to standard error.

Exit codes: 0 success, 1 validation or usage error, 2 I/O error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
import time
from pathlib import Path

from .closure import build_closure, read_closure, write_closure
from .errors import TablinkError
from .evalbench import bench, evaluate, read_gold
from .index import Index, load_index, save_index
from .ingest import ingest_dump
from .kb import EntityId, load_config, read_edges, read_records
from .linker import LinkCache, cached_link, result_to_obj
from .synth import generate_synthetic_kb
from .tables import (
    annotation_to_obj,
    link_table,
    read_annotation,
    read_table,
    read_table_csv,
    write_annotation,
)
from .version import FORMAT_VERSION, __version__

log = logging.getLogger(__name__)


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse exits with code 2 on usage errors; the contract here is 1."""

    def error(self, message):
        raise _UsageError(message)


def _file_hash(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fp:
        for chunk in iter(lambda: fp.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _emit(obj: dict, out: str | None) -> None:
    text = json.dumps(obj, ensure_ascii=False, indent=2) + "\n"
    if out:
        with open(out, "w", encoding="utf-8", newline="\n") as fp:
            fp.write(text)
    else:
        sys.stdout.write(text)


def _load_table(path: str, has_header: bool):
    if path.lower().endswith(".csv"):
        return read_table_csv(path, has_header=has_header)
    return read_table(path)


def _comma_list(raw: str | None) -> list[str]:
    if not raw:
        return []
    return [part.strip() for part in raw.split(",") if part.strip()]


# subcommand bodies -----------------------------------------------------------
# Each returns (payload-emitted?, manifest fields). Payload writing happens
# inside so --out targets work uniformly.


def _cmd_ingest(args) -> dict:
    watchlist = [EntityId.parse(p) for p in _comma_list(args.watchlist)]
    stats = ingest_dump(args.dump, args.out_records, args.out_edges,
                        watchlist=watchlist, jobs=args.jobs)
    _emit(stats.to_obj(), None)
    return {}


def _cmd_closure(args) -> dict:
    edges = list(read_edges(args.edges))
    extra = []
    if args.records:
        seen = set()
        for record in read_records(args.records):
            for t in record.direct_types:
                if t not in seen:
                    seen.add(t)
                    extra.append(t)
        extra.sort()
    closure = build_closure(edges, extra_nodes=extra)
    write_closure(args.out, closure)
    _emit({"nodes": len(closure), "edges_in": len(edges),
           "rejected_edges": len(closure.rejected_edges)}, None)
    return {"closure_hash": _file_hash(args.out)}


def _cmd_build_index(args) -> dict:
    records = list(read_records(args.records))
    index = Index(records)
    save_index(index, args.out)
    _emit({"build_id": index.build_id, "record_count": len(index)}, None)
    return {"index_build_id": index.build_id}


def _cmd_link(args) -> dict:
    index = load_index(args.index)
    closure = read_closure(args.closure)
    config = load_config(args.config)
    cache = LinkCache(args.cache) if args.cache else None
    expected = _comma_list(args.expect) or None
    result = cached_link(args.mention, args.mode, index, closure, config,
                         context=args.context, expected_types=expected,
                         cache=cache)
    _emit(result_to_obj(result), args.out)
    return {"config_hash": config.content_hash,
            "index_build_id": index.build_id,
            "closure_hash": _file_hash(args.closure)}


def _cmd_link_table(args) -> dict:
    index = load_index(args.index)
    closure = read_closure(args.closure)
    config = load_config(args.config)
    cache = LinkCache(args.cache) if args.cache else None
    table = _load_table(args.table, args.has_header)
    annotation = link_table(table, index, closure, config, cache=cache,
                            jobs=args.jobs)
    if args.out:
        write_annotation(args.out, annotation)
    else:
        _emit(annotation_to_obj(annotation), None)
    return {"config_hash": config.content_hash,
            "index_build_id": index.build_id,
            "closure_hash": _file_hash(args.closure)}


def _cmd_eval(args) -> dict:
    root = Path(args.annotations)
    paths = sorted(root.glob("*.json")) if root.is_dir() else [root]
    annotations = [read_annotation(p) for p in paths]
    report = evaluate(annotations, read_gold(args.gold))
    _emit(report.to_obj(), args.out)
    return {}


def _cmd_bench(args) -> dict:
    index = load_index(args.index)
    closure = read_closure(args.closure)
    config = load_config(args.config)
    with open(args.mentions, "r", encoding="utf-8") as fp:
        mentions = [line.rstrip("\n") for line in fp if line.strip()]
    latencies = [float(x) for x in _comma_list(args.online_latency)]
    if len(latencies) != 2:
        raise _UsageError("--online-latency needs two comma-separated numbers")
    projection = None
    if args.projection:
        parts = _comma_list(args.projection)
        if len(parts) != 3:
            raise _UsageError("--projection needs tables,cells,seconds")
        projection = (int(parts[0]), int(parts[1]), float(parts[2]))
    report = bench(mentions, index, closure, config,
                   online_latencies=(latencies[0], latencies[1]),
                   scale=args.scale, projection=projection)
    _emit(report.to_obj(), args.out)
    return {"config_hash": config.content_hash,
            "index_build_id": index.build_id,
            "closure_hash": _file_hash(args.closure)}


def _cmd_gen_kb(args) -> dict:
    res = generate_synthetic_kb(args.out, seed=args.seed, n_items=args.items,
                                n_types=args.types, n_tables=args.tables)
    _emit({"out_dir": str(res.out_dir), "labeled": res.labeled,
           "unlabeled": res.unlabeled, "malformed": res.malformed,
           "files": res.truth["files"]}, None)
    return {}


def _build_parser() -> _Parser:
    parser = _Parser(prog="tablink", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version",
                        version=f"tablink {__version__} (format {FORMAT_VERSION})")
    parser.add_argument("--verbose", action="store_true",
                        help="log at INFO level on standard error")
    parser.add_argument("--manifest", metavar="PATH",
                        help="write the run manifest to PATH instead of standard error")
    sub = parser.add_subparsers(dest="command", metavar="SUBCOMMAND")

    p = sub.add_parser("ingest", help="parse an entity dump into records and edges")
    p.add_argument("--dump", required=True)
    p.add_argument("--out-records", required=True)
    p.add_argument("--out-edges", required=True)
    p.add_argument("--watchlist", help="comma-separated property ids to flag")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=_cmd_ingest)

    p = sub.add_parser("closure", help="build the type-ancestor closure from edges")
    p.add_argument("--edges", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--records", help="also include these records' direct types as nodes")
    p.set_defaults(func=_cmd_closure)

    p = sub.add_parser("build-index", help="build the candidate index from records")
    p.add_argument("--records", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_build_index)

    p = sub.add_parser("link", help="link one mention string")
    p.add_argument("--mention", required=True)
    p.add_argument("--mode", choices=["cell", "header"], default="cell")
    p.add_argument("--context")
    p.add_argument("--expect", help="comma-separated expected type names")
    p.add_argument("--index", required=True)
    p.add_argument("--closure", required=True)
    p.add_argument("--config", required=True)
    p.add_argument("--cache", help="cache directory")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_link)

    p = sub.add_parser("link-table", help="annotate a whole table")
    p.add_argument("--table", required=True, help="table JSON, or CSV by suffix")
    p.add_argument("--has-header", action="store_true",
                   help="CSV input: first row is the header row")
    p.add_argument("--index", required=True)
    p.add_argument("--closure", required=True)
    p.add_argument("--config", required=True)
    p.add_argument("--cache", help="cache directory")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_link_table)

    p = sub.add_parser("eval", help="score annotations against a gold file")
    p.add_argument("--annotations", required=True,
                   help="annotation file, or directory of *.json annotations")
    p.add_argument("--gold", required=True)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("bench", help="compare offline linking with simulated online latency")
    p.add_argument("--mentions", required=True, help="one mention per line")
    p.add_argument("--index", required=True)
    p.add_argument("--closure", required=True)
    p.add_argument("--config", required=True)
    p.add_argument("--online-latency", default="12,18",
                   help="candidate,type stage delays in time units")
    p.add_argument("--scale", type=float, default=1.0,
                   help="multiplier applied to the injected delays")
    p.add_argument("--projection", help="tables,cells_per_table,seconds_per_mention")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_bench)

    p = sub.add_parser("gen-kb", help="generate a deterministic synthetic corpus")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--items", type=int, default=2000)
    p.add_argument("--types", type=int, default=120)
    p.add_argument("--tables", type=int, default=6)
    p.set_defaults(func=_cmd_gen_kb)

    return parser


def run(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        sys.stderr.write(parser.format_usage())
        sys.stderr.write(f"error: {exc}\n")
        return 1
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)

    logging.basicConfig(stream=sys.stderr,
                        level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")

    if not getattr(args, "func", None):
        sys.stderr.write(parser.format_usage())
        sys.stderr.write("error: a subcommand is required\n")
        return 1

    started = time.perf_counter()
    try:
        manifest_fields = args.func(args)
    except _UsageError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    except TablinkError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    except json.JSONDecodeError as exc:
        sys.stderr.write(f"error: invalid JSON input: {exc}\n")
        return 1
    except OSError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2

    manifest = {
        "subcommand": args.command,
        "config_hash": None,
        "index_build_id": None,
        "closure_hash": None,
        "artifact_version": __version__,
        "format_version": FORMAT_VERSION,
        "wall_time_s": round(time.perf_counter() - started, 6),
    }
    manifest.update(manifest_fields)
    text = json.dumps(manifest, ensure_ascii=False) + "\n"
    if args.manifest:
        with open(args.manifest, "w", encoding="utf-8", newline="\n") as fp:
            fp.write(text)
    else:
        sys.stderr.write(text)
    return 0


def main(argv: list[str] | None = None) -> int:
    return run(argv)


if __name__ == "__main__":
    sys.exit(main())
