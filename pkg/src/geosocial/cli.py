"""Command-line interface.

    geosocial ingest BUSINESS USER REVIEW --out graph.json
    geosocial train  --snapshot graph.json --model-out model.json
    geosocial evaluate --snapshot graph.json --model model.json
    geosocial query  --snapshot graph.json --model model.json --user U \\
                     --keywords sushi,ramen --lat 36.1 --lon -115.1 --radius-m 5000 --k 10
    geosocial stats  --snapshot graph.json

Exit codes: 0 ok, 1 I/O, 2 parse or usage, 3 data, 4 lookup.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Sequence

from . import __version__
from .alpha import count_stats
from .config import AppConfig, ConfigError, load_config
from .errors import (
    CorruptSnapshot,
    EmptyKeywords,
    EmptyTestSet,
    InvalidCoordinate,
    NoReviews,
    OriginNotUser,
    ParseError,
    TooFewExamples,
    UnknownNode,
    UnsupportedSnapshotVersion,
)
from .forest import RandomForestModel, evaluate, graph_training_sets, train
from .graph import EdgeKind, GeoPoint, GeosocialGraph
from .ingest import IngestConfig, ingest_files
from .pipeline import Recommendation, optimize
from .query import Candidate, Query, tkngk

log = logging.getLogger("geosocial")

EXIT_OK, EXIT_IO, EXIT_PARSE, EXIT_DATA, EXIT_LOOKUP = 0, 1, 2, 3, 4


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


# output -------------------------------------------------------------------


def _emit(args: argparse.Namespace, payload: Any, table: str) -> None:
    if args.format == "json":
        sys.stdout.write(json.dumps(payload, sort_keys=True, indent=2) + "\n")
    else:
        sys.stdout.write(table + ("\n" if table and not table.endswith("\n") else ""))


def _kv_table(d: dict) -> str:
    width = max((len(k) for k in d), default=0)
    return "\n".join(f"{k.ljust(width)}  {v}" for k, v in d.items())


def _grid(headers: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    cells = [list(map(str, headers))] + [[str(c) for c in r] for r in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(headers))]
    return "\n".join("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in cells)


# loading helpers ----------------------------------------------------------


def _load_graph(path: str) -> GeosocialGraph:
    try:
        return GeosocialGraph.load_snapshot(path)
    except OSError as exc:
        raise CliError(EXIT_IO, f"cannot read snapshot {path}: {exc}") from exc
    except (CorruptSnapshot, UnsupportedSnapshotVersion) as exc:
        raise CliError(EXIT_DATA, f"bad snapshot {path}: {exc}") from exc


def _load_model(path: str) -> RandomForestModel:
    try:
        return RandomForestModel.load(path)
    except OSError as exc:
        raise CliError(EXIT_IO, f"cannot read model {path}: {exc}") from exc
    except (CorruptSnapshot, UnsupportedSnapshotVersion) as exc:
        raise CliError(EXIT_DATA, f"bad model {path}: {exc}") from exc


def _write(path: str, text: str) -> None:
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise CliError(EXIT_IO, f"cannot write {path}: {exc}") from exc


# commands -----------------------------------------------------------------


def cmd_ingest(args: argparse.Namespace, cfg: AppConfig) -> int:
    from .graph import dumps_snapshot

    try:
        graph, report = ingest_files(args.business, args.user, args.review,
                                     IngestConfig(strict=cfg.strict_ingest))
    except OSError as exc:
        raise CliError(EXIT_IO, f"cannot read input: {exc}") from exc
    except ParseError as exc:
        raise CliError(EXIT_PARSE, f"parse error at {exc}") from exc
    except ValueError as exc:
        raise CliError(EXIT_PARSE, f"invalid input: {exc}") from exc
    _write(args.out, dumps_snapshot(graph))
    _emit(args, report.as_dict(), _kv_table(report.as_dict()))
    return EXIT_OK


def cmd_train(args: argparse.Namespace, cfg: AppConfig) -> int:
    from .forest import dumps_model

    graph = _load_graph(args.snapshot)
    try:
        train_set, test_set = graph_training_sets(graph, cfg.split_ratio, cfg.seed, cfg.augment)
        model = train(train_set, cfg.forest_config())
    except (TooFewExamples, NoReviews) as exc:
        raise CliError(EXIT_DATA, f"not enough labeled service providers: {exc}") from exc
    _write(args.model_out, dumps_model(model))
    _emit_report(args, evaluate(model, test_set), len(train_set))
    return EXIT_OK


def cmd_evaluate(args: argparse.Namespace, cfg: AppConfig) -> int:
    graph = _load_graph(args.snapshot)
    model = _load_model(args.model)
    try:
        train_set, test_set = graph_training_sets(graph, cfg.split_ratio, cfg.seed, cfg.augment)
        report = evaluate(model, test_set)
    except (EmptyTestSet, NoReviews, TooFewExamples) as exc:
        raise CliError(EXIT_DATA, f"nothing to evaluate: {exc}") from exc
    _emit_report(args, report, len(train_set))
    return EXIT_OK


def _emit_report(args: argparse.Namespace, report, n_train: int) -> None:
    payload = {
        "accuracy": report.accuracy,
        "confusion": report.confusion,
        "n_test": report.n_test,
        "n_train": n_train,
    }
    table = _kv_table({"accuracy": f"{report.accuracy:.4f}", "n_train": n_train,
                       "n_test": report.n_test})
    table += "\nconfusion (rows = true rank 1..5, cols = predicted):\n"
    table += "\n".join("  " + " ".join(f"{c:6d}" for c in row) for row in report.confusion)
    _emit(args, payload, table)


def _candidate_row(graph: GeosocialGraph, pos: int, c: Candidate | Recommendation) -> dict:
    sp = graph.service_provider(c.sp)
    row = {
        "position": pos,
        "sp": c.sp,
        "business_id": sp.external_id,
        "name": sp.name,
        "path": [graph.node(n).external_id for n in c.path],
    }
    if isinstance(c, Recommendation):
        row.update(rank=c.rank, score_c=c.score_c, alpha=c.alpha, path_cost=c.path_cost)
    else:
        row.update(path_cost=c.cost)
    return row


def _run_query(graph, model, cfg: AppConfig, spec: dict) -> dict:
    try:
        origin = graph.user_id(spec["user"])
    except UnknownNode as exc:
        raise CliError(EXIT_LOOKUP, f"unknown user {spec['user']!r}") from exc
    keywords = spec["keywords"]
    if isinstance(keywords, str):
        keywords = keywords.split(",")
    keywords = {k.strip().lower() for k in keywords if k.strip()}
    try:
        q = Query(origin, keywords, GeoPoint(spec["lat"], spec["lon"]), spec["radius_m"], spec["k"])
        raw = tkngk(graph, q)
    except (EmptyKeywords, InvalidCoordinate, OriginNotUser, ValueError) as exc:
        raise CliError(EXIT_PARSE, f"invalid query: {exc}") from exc
    recs = optimize(graph, q, raw, model, cfg.alpha_params(), cfg.alpha_scope)
    return {
        "optimized": [_candidate_row(graph, i + 1, r) for i, r in enumerate(recs)],
        "raw": [_candidate_row(graph, i + 1, c) for i, c in enumerate(raw)],
    }


def _query_table(result: dict, show_raw: bool) -> str:
    headers = ("#", "name", "rank", "score_c", "alpha", "cost", "path")
    rows = [
        (r["position"], r["name"], r["rank"], f"{r['score_c']:.3f}", f"{r['alpha']:.3f}",
         f"{r['path_cost']:.3f}", " > ".join(r["path"]))
        for r in result["optimized"]
    ]
    out = _grid(headers, rows) if rows else "(no results)"
    if show_raw:
        raw_rows = [(r["position"], r["name"], f"{r['path_cost']:.3f}", " > ".join(r["path"]))
                    for r in result["raw"]]
        out += "\n\nraw order:\n" + (_grid(("#", "name", "cost", "path"), raw_rows)
                                     if raw_rows else "(no results)")
    return out


def cmd_query(args: argparse.Namespace, cfg: AppConfig) -> int:
    graph = _load_graph(args.snapshot)
    model = _load_model(args.model)

    def shape(result: dict) -> Any:
        return result if args.show_raw else result["optimized"]

    if args.batch:
        try:
            with open(args.batch, encoding="utf-8") as fh:
                specs = [json.loads(line) for line in fh if line.strip()]
        except OSError as exc:
            raise CliError(EXIT_IO, f"cannot read batch file: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise CliError(EXIT_PARSE, f"bad batch file: {exc}") from exc
        graph.compiled()

        def one(spec: dict) -> tuple[int, Any]:
            try:
                return EXIT_OK, _run_query(graph, model, cfg, spec)
            except CliError as exc:
                return exc.code, {"error": str(exc)}
            except KeyError as exc:
                return EXIT_PARSE, {"error": f"missing field {exc}"}

        with ThreadPoolExecutor(max_workers=args.workers) as pool:
            outcomes = list(pool.map(one, specs))
        payload, blocks = [], []
        for i, (code, result) in enumerate(outcomes, start=1):
            if code != EXIT_OK:
                payload.append(result)
                blocks.append(f"query {i}: {result['error']}")
            else:
                payload.append(shape(result))
                blocks.append(f"query {i}:\n" + _query_table(result, args.show_raw))
        _emit(args, payload, "\n\n".join(blocks))
        return max((code for code, _ in outcomes), default=EXIT_OK)

    missing = [f for f in ("user", "keywords", "lat", "lon", "radius_m", "k") if getattr(args, f) is None]
    if missing:
        raise CliError(EXIT_PARSE, "missing query arguments: " + ", ".join("--" + m.replace("_", "-")
                                                                          for m in missing))
    spec = {f: getattr(args, f) for f in ("user", "keywords", "lat", "lon", "radius_m", "k")}
    result = _run_query(graph, model, cfg, spec)
    _emit(args, shape(result), _query_table(result, args.show_raw))
    return EXIT_OK


def graph_stats(graph: GeosocialGraph) -> dict:
    counts = [graph.sp_stats(sp.id).count for sp in graph.sps]
    n_friend = sum(1 for e in graph.edges() if e.kind is EdgeKind.FRIENDSHIP)
    if counts:
        cs = count_stats(counts)
        cstats = {"min": cs.min, "max": cs.max, "average": cs.average, "n": cs.n}
    else:
        cstats = {"min": 0, "max": 0, "average": 0.0, "n": 0}
    return {
        "nodes": len(graph),
        "users": len(graph.users),
        "sps": len(counts),
        "edges": graph.n_edges,
        "friendship_edges": n_friend,
        "review_edges": graph.n_edges - n_friend,
        "reviews_total": sum(counts),
        "count_stats": cstats,
    }


def cmd_stats(args: argparse.Namespace, cfg: AppConfig) -> int:
    stats = graph_stats(_load_graph(args.snapshot))
    flat = {k: v for k, v in stats.items() if k != "count_stats"}
    flat.update({f"count_{k}": v for k, v in stats["count_stats"].items()})
    _emit(args, stats, _kv_table(flat))
    return EXIT_OK


def cmd_synth(args: argparse.Namespace, cfg: AppConfig) -> int:
    from .synthetic import write_yelp_corpus

    try:
        paths = write_yelp_corpus(args.out_dir, cfg.seed, args.businesses, args.users, args.reviews)
    except OSError as exc:
        raise CliError(EXIT_IO, f"cannot write corpus: {exc}") from exc
    _emit(args, paths, _kv_table(paths))
    return EXIT_OK


# argument parsing ---------------------------------------------------------


def _global_options(parser: argparse.ArgumentParser, suppress: bool) -> None:
    default = argparse.SUPPRESS if suppress else None
    parser.add_argument("--config", default=default, help="flat key = value config file")
    parser.add_argument("--format", choices=("table", "json"),
                        default=argparse.SUPPRESS if suppress else "table")
    parser.add_argument("--seed", type=int, default=default)
    parser.add_argument("-v", "--verbose", action="store_true",
                        default=argparse.SUPPRESS if suppress else False)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="geosocial", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    _global_options(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)

    def command(name: str, help: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help)
        _global_options(p, suppress=True)
        return p

    p = command("ingest", "build a graph snapshot from Yelp-style JSON-lines files")
    p.add_argument("business")
    p.add_argument("user")
    p.add_argument("review")
    p.add_argument("--out", required=True, help="snapshot path to write")
    p.add_argument("--strict", dest="strict_ingest", action="store_true", default=None,
                   help="abort on the first malformed line")
    p.set_defaults(func=cmd_ingest)

    p = command("train", "train the rank classifier on a snapshot")
    p.add_argument("--snapshot", required=True)
    p.add_argument("--model-out", required=True)
    p.add_argument("--n-trees", type=int)
    p.add_argument("--max-depth", type=int)
    p.add_argument("--min-samples-split", type=int)
    p.add_argument("--features-per-split", type=int)
    p.add_argument("--split-ratio", type=float)
    p.add_argument("--augment", type=int, help="synthetic queries per SP")
    p.set_defaults(func=cmd_train)

    p = command("evaluate", "score a saved model on the holdout split of a snapshot")
    p.add_argument("--snapshot", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--split-ratio", type=float)
    p.add_argument("--augment", type=int, help="synthetic queries per SP")
    p.set_defaults(func=cmd_evaluate)

    p = command("query", "run a T-kNGK query and re-rank the results")
    p.add_argument("--snapshot", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--user")
    p.add_argument("--keywords", help="comma-separated keywords")
    p.add_argument("--lat", type=float)
    p.add_argument("--lon", type=float)
    p.add_argument("--radius-m", type=float)
    p.add_argument("--k", type=int)
    p.add_argument("--beta", type=float)
    p.add_argument("--gamma", type=float)
    p.add_argument("--alpha-scope", choices=("candidates", "global"))
    p.add_argument("--show-raw", action="store_true", help="also print the raw T-kNGK order")
    p.add_argument("--batch", help="JSON-lines file of queries (user, keywords, lat, lon, radius_m, k)")
    p.add_argument("--workers", type=int, default=4)
    p.set_defaults(func=cmd_query)

    p = command("stats", "print graph and review-count statistics")
    p.add_argument("--snapshot", required=True)
    p.set_defaults(func=cmd_stats)

    p = command("synth", "write a seeded synthetic Yelp-style corpus")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--businesses", type=int, default=200)
    p.add_argument("--users", type=int, default=500)
    p.add_argument("--reviews", type=int, default=5000)
    p.set_defaults(func=cmd_synth)
    return parser


CONFIG_FLAGS = ("seed", "beta", "gamma", "alpha_scope", "n_trees", "max_depth", "min_samples_split",
                "features_per_split", "split_ratio", "augment", "strict_ingest")


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    overrides = {k: getattr(args, k) for k in CONFIG_FLAGS if getattr(args, k, None) is not None}
    try:
        cfg = load_config(args.config, overrides)
        return args.func(args, cfg)
    except CliError as exc:
        print(f"geosocial: {exc}", file=sys.stderr)
        return exc.code
    except ConfigError as exc:
        print(f"geosocial: config error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except OSError as exc:
        print(f"geosocial: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
