"""Command-line entry point wiring the library into reproducible experiments.

Subcommands: features, ranks, synth, rerank, eval, sweep, graph-dump.
All outputs are written atomically; inputs are never mutated. Parallelism
is capped by the RERANK_THREADS environment variable (0 = auto).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import corpus_io, evaluation, features, graph, ranking
from .fusion import fuse

DEFAULTS = dict(k=10, alpha0=0.8, depth=2, method="directed", score="max")


def _add_graph_args(p, k_list=False):
    if k_list:
        p.add_argument("--k", type=str, default="10", help="comma-separated k values")
    else:
        p.add_argument("--k", type=int, default=DEFAULTS["k"], help="neighbor count")
    p.add_argument("--alpha0", type=float, default=DEFAULTS["alpha0"], help="decay base")
    p.add_argument("--depth", type=int, default=DEFAULTS["depth"], help="BFS expansion depth")
    p.add_argument("--max-nodes", type=int, default=None, help="node cap per graph")
    p.add_argument(
        "--method", choices=["directed", "undirected"], default=DEFAULTS["method"]
    )
    p.add_argument("--score", choices=["max", "sum"], default=DEFAULTS["score"],
                   help="candidate score: best incoming edge or their sum")


def _params(args):
    return graph.GraphParams(
        k=args.k, alpha0=args.alpha0, depth=args.depth, max_nodes=args.max_nodes
    )


def _load_tables(paths):
    tables = [corpus_io.load_rank_table(p) for p in paths]
    labels = [Path(p).stem for p in paths]
    return tables, labels


def cmd_features(args):
    manifest = [
        line.strip()
        for line in Path(args.manifest).read_text(encoding="utf-8").splitlines()
        if line.strip()
    ]
    for p in manifest:
        if not Path(p).is_file():
            raise FileNotFoundError(f"manifest entry not found: {p}")
    matrix = features.features_from_manifest(manifest, args.bins, args.exponent)
    corpus_io.save_feature_matrix(matrix, args.out)


def cmd_ranks(args):
    matrix = corpus_io.load_feature_matrix(args.features)
    corpus_io.save_rank_table(features.build_rank_table(matrix), args.out)


def cmd_synth(args):
    spec = corpus_io.SynthSpec(
        n_groups=args.groups,
        group_size=args.group_size,
        dims=args.dims,
        n_spaces=args.spaces,
        intra_spread=args.intra_spread,
        inter_spread=args.inter_spread,
        agreement=args.agreement,
        seed=args.seed,
    )
    spaces, gt = corpus_io.synth_generate(spec)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for i, matrix in enumerate(spaces):
        corpus_io.save_feature_matrix(matrix, out / f"space{i}_features.txt")
        corpus_io.save_rank_table(features.build_rank_table(matrix), out / f"space{i}_ranks.txt")
    corpus_io.save_ground_truth(gt, out / "ground_truth.txt")


def _queries(args, tables):
    if args.gt:
        return corpus_io.load_ground_truth(args.gt, n=tables[0].n).queries
    return list(range(tables[0].n))


def cmd_rerank(args):
    tables, labels = _load_tables(args.tables)
    params = _params(args)
    header = (
        f"method={args.method} k={args.k} alpha0={args.alpha0:g} "
        f"depth={args.depth} score={args.score}"
    )
    ranked = [
        ranking.rerank(tables, q, params, method=args.method, score=args.score, labels=labels)
        for q in _queries(args, tables)
    ]
    corpus_io.atomic_write_text(args.out, ranking.ranked_lists_to_text(ranked, header))


def cmd_eval(args):
    tables, labels = _load_tables(args.tables)
    gt = corpus_io.load_ground_truth(args.gt, n=tables[0].n)
    baseline, reranked = evaluation.evaluate(
        tables, gt, _params(args), method=args.method, metric=args.metric,
        labels=labels, score=args.score,
    )
    corpus_io.atomic_write_text(args.out, evaluation.reports_to_tsv([baseline, reranked]))
    if args.per_query:
        corpus_io.atomic_write_text(args.per_query, evaluation.per_query_tsv(reranked))


def cmd_sweep(args):
    tables, labels = _load_tables(args.tables)
    gt = corpus_io.load_ground_truth(args.gt, n=tables[0].n)
    k_values = [int(tok) for tok in args.k.split(",") if tok]
    if not k_values:
        raise ValueError("--k must list at least one value")
    params = graph.GraphParams(
        k=k_values[0], alpha0=args.alpha0, depth=args.depth, max_nodes=args.max_nodes
    )
    reports = evaluation.sweep_k(
        tables, gt, params, k_values, method=args.method, metric=args.metric,
        labels=labels, score=args.score,
    )
    corpus_io.atomic_write_text(args.out, evaluation.reports_to_tsv(reports))


def cmd_graph_dump(args):
    tables, labels = _load_tables(args.tables)
    params = _params(args)
    if args.method == "directed":
        graphs = [graph.build_directed_graph(t, args.query, params) for t in tables]
    else:
        graphs = [graph.build_undirected_graph(t, args.query, params) for t in tables]
    from dataclasses import replace

    graphs = [replace(g, sources=(lab,)) for g, lab in zip(graphs, labels)]
    g = graphs[0] if len(graphs) == 1 else fuse(graphs)
    corpus_io.atomic_write_text(args.out, graph.graph_to_text(g))


def build_parser():
    parser = argparse.ArgumentParser(
        prog="graphrerank",
        description="k-NN graph reranking for content-based image search",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("features", help="HSV histograms for a P6 image manifest")
    p.add_argument("--manifest", required=True, help="file listing image paths in id order")
    p.add_argument("--out", required=True)
    p.add_argument("--bins", type=int, default=10, help="bins per HSV channel")
    p.add_argument("--exponent", type=float, default=0.5, help="power scaling exponent")
    p.set_defaults(func=cmd_features)

    p = sub.add_parser("ranks", help="exact-NN rank table from a feature matrix")
    p.add_argument("--features", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ranks)

    p = sub.add_parser("synth", help="generate a grouped synthetic corpus")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--groups", type=int, required=True)
    p.add_argument("--group-size", type=int, default=4)
    p.add_argument("--dims", type=int, default=8)
    p.add_argument("--spaces", type=int, default=2)
    p.add_argument("--intra-spread", type=float, default=0.1)
    p.add_argument("--inter-spread", type=float, default=1.0)
    p.add_argument("--agreement", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("rerank", help="rerank queries over one or more rank tables")
    p.add_argument("--tables", nargs="+", required=True)
    p.add_argument("--gt", default=None, help="restrict to ground-truth queries")
    p.add_argument("--out", required=True)
    _add_graph_args(p)
    p.set_defaults(func=cmd_rerank)

    p = sub.add_parser("eval", help="score baseline and reranked retrieval")
    p.add_argument("--tables", nargs="+", required=True)
    p.add_argument("--gt", required=True)
    p.add_argument("--metric", choices=["ns", "map"], default="ns")
    p.add_argument("--out", required=True)
    p.add_argument("--per-query", default=None, help="optional per-query detail TSV")
    _add_graph_args(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("sweep", help="evaluate across a list of k values")
    p.add_argument("--tables", nargs="+", required=True)
    p.add_argument("--gt", required=True)
    p.add_argument("--metric", choices=["ns", "map"], default="ns")
    p.add_argument("--out", required=True)
    _add_graph_args(p, k_list=True)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("graph-dump", help="export one query's graph as an edge list")
    p.add_argument("--tables", nargs="+", required=True)
    p.add_argument("--query", type=int, required=True)
    p.add_argument("--out", required=True)
    _add_graph_args(p)
    p.set_defaults(func=cmd_graph_dump)

    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except Exception as exc:  # one-line diagnostic, nonzero exit
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
