"""Retrieval-quality metrics and experiment drivers.

Conventions: average precision excludes the query from its own list and
from the relevant count (Holidays protocol); the N-S score counts the query
as its own first result, so the maximum is 4 with groups of four (UKBench
protocol).
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

from .ranking import RankedList, rerank

__all__ = [
    "MetricReport",
    "average_precision",
    "ns_score",
    "evaluate",
    "sweep_k",
    "reports_to_tsv",
    "per_query_tsv",
]


@dataclass(frozen=True)
class MetricReport:
    metric: str
    method: str
    k: int
    alpha0: float
    depth: int
    per_query: dict

    @property
    def aggregate(self):
        if not self.per_query:
            raise ValueError("empty report has no aggregate")
        return sum(self.per_query.values()) / len(self.per_query)


def average_precision(ranked, relevant):
    """AP over the query-excluded list; the query never counts as relevant."""
    rel = set(int(r) for r in relevant) - {ranked.query}
    if not rel:
        raise ValueError("no relevant images besides the query itself")
    hits = 0
    total = 0.0
    for p, img in enumerate(ranked.order, start=1):
        if img in rel:
            hits += 1
            total += hits / p
    return total / len(rel)


def ns_score(ranked, query, relevant):
    """Relevant count among the query plus its top three results; in [0, 4]."""
    groupmates = set(int(r) for r in relevant) - {int(query)}
    return 1.0 + len(set(ranked.order[:3]) & groupmates)


def _thread_count():
    raw = os.environ.get("RERANK_THREADS", "0")
    try:
        cap = int(raw)
    except ValueError:
        cap = 0
    if cap <= 0:
        cap = min(os.cpu_count() or 1, 8)
    return cap


def _map_queries(fn, queries):
    workers = min(_thread_count(), len(queries)) if queries else 1
    if workers <= 1:
        return [fn(q) for q in queries]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, queries))


def evaluate(
    tables,
    ground_truth,
    params,
    method="directed",
    metric="ns",
    labels=None,
    scales=None,
    score="max",
    target_len=None,
):
    """Score every ground-truth query; returns (baseline, reranked) reports.

    The baseline report scores tables[0]'s raw orderings without reranking.
    """
    if metric not in ("ns", "map"):
        raise ValueError("metric must be 'ns' or 'map'")
    tables = list(tables)
    queries = ground_truth.queries

    def value(ranked, q):
        rel = ground_truth.relevant[q]
        if metric == "ns":
            return ns_score(ranked, q, rel)
        return average_precision(ranked, rel)

    def base_one(q):
        return value(RankedList(q, tuple(tables[0].lists[q]), "initial"), q)

    def rerank_one(q):
        ranked = rerank(
            tables, q, params, method=method, target_len=target_len,
            score=score, labels=labels, scales=scales,
        )
        return value(ranked, q)

    base_vals = _map_queries(base_one, queries)
    rr_vals = _map_queries(rerank_one, queries)
    fused = "-fused" if len(tables) > 1 else ""
    common = dict(metric=metric, k=params.k, alpha0=params.alpha0, depth=params.depth)
    baseline = MetricReport(method="baseline", per_query=dict(zip(queries, base_vals)), **common)
    reranked = MetricReport(
        method=f"rerank-{method}{fused}", per_query=dict(zip(queries, rr_vals)), **common
    )
    return baseline, reranked


def sweep_k(tables, ground_truth, params, k_values, method="directed", metric="ns", **kw):
    """One reranked MetricReport per k, for plot-ready TSV emission."""
    n = list(tables)[0].n
    for k in k_values:
        if k > n - 1:
            raise ValueError(f"k={k} exceeds corpus bound {n - 1}")
    reports = []
    for k in k_values:
        _, reranked = evaluate(
            tables, ground_truth, replace(params, k=k), method=method, metric=metric, **kw
        )
        reports.append(reranked)
    return reports


def reports_to_tsv(reports):
    lines = ["metric\tmethod\tk\talpha0\tdepth\tvalue"]
    for r in reports:
        lines.append(
            f"{r.metric}\t{r.method}\t{r.k}\t{r.alpha0:g}\t{r.depth}\t{r.aggregate:.6f}"
        )
    return "".join(line + "\n" for line in lines)


def per_query_tsv(report):
    lines = ["query\tvalue"]
    for q in sorted(report.per_query):
        lines.append(f"{q}\t{report.per_query[q]:.6f}")
    return "".join(line + "\n" for line in lines)
