import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from graphrerank.corpus_io import SynthSpec, synth_generate
from graphrerank.evaluation import (
    MetricReport,
    average_precision,
    evaluate,
    ns_score,
    per_query_tsv,
    reports_to_tsv,
    sweep_k,
)
from graphrerank.features import build_rank_table
from graphrerank.graph import GraphParams
from graphrerank.ranking import RankedList


def ranked_with_relevant_at(positions, n_relevant, length=None):
    """Query 0; relevant ids 1..n_relevant placed at the given 1-based positions."""
    length = length or max(positions, default=0)
    order = []
    rel_iter = iter(range(1, n_relevant + 1))
    filler = itertools.count(1000)
    for p in range(1, length + 1):
        order.append(next(rel_iter) if p in positions else next(filler))
    return RankedList(0, tuple(order)), set(range(1, n_relevant + 1))


class TestAveragePrecision:
    def test_perfect_ranking(self):
        ranked, rel = ranked_with_relevant_at({1, 2, 3}, 3, length=10)
        assert average_precision(ranked, rel) == 1.0

    def test_positions_one_and_three(self):
        ranked, rel = ranked_with_relevant_at({1, 3}, 2, length=5)
        assert average_precision(ranked, rel) == pytest.approx(5 / 6)

    def test_nothing_retrieved(self):
        ranked, rel = ranked_with_relevant_at(set(), 2, length=5)
        assert average_precision(ranked, rel) == 0.0

    def test_query_never_counts_as_relevant(self):
        ranked = RankedList(0, (1, 2))
        assert average_precision(ranked, {0, 1}) == 1.0

    def test_empty_effective_relevant_rejected(self):
        ranked = RankedList(0, (1, 2))
        with pytest.raises(ValueError):
            average_precision(ranked, {0})

    def test_tail_permutation_invariance(self):
        a, rel = ranked_with_relevant_at({2, 3}, 2, length=8)
        tail = list(a.order[3:])
        b = RankedList(0, a.order[:3] + tuple(reversed(tail)))
        assert average_precision(a, rel) == average_precision(b, rel)

    @settings(max_examples=100, deadline=None)
    @given(seed=st.integers(0, 10**9))
    def test_never_exceeds_one(self, seed):
        rng = np.random.default_rng(seed)
        length = int(rng.integers(1, 30))
        n_rel = int(rng.integers(1, length + 1))
        positions = set(
            int(p) + 1 for p in rng.choice(length, size=rng.integers(0, n_rel + 1), replace=False)
        )
        ranked, rel = ranked_with_relevant_at(positions, n_rel, length=length)
        assert 0.0 <= average_precision(ranked, rel) <= 1.0


class TestNsScore:
    def test_perfect_group_retrieval(self):
        ranked = RankedList(0, (1, 2, 3, 9, 8))
        assert ns_score(ranked, 0, {0, 1, 2, 3}) == 4.0

    def test_no_groupmate_retrieved(self):
        ranked = RankedList(0, (9, 8, 7, 1))
        assert ns_score(ranked, 0, {0, 1, 2, 3}) == 1.0

    def test_integer_valued(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            order = tuple(int(x) for x in rng.permutation(np.arange(1, 10)))
            score = ns_score(RankedList(0, order), 0, {0, 1, 2, 3})
            assert score == int(score)

    def test_random_permutation_expectation(self):
        # closed form: 1 + 3 * 3/(n-1) for group size 4
        rng = np.random.default_rng(123)
        n = 40
        total = 0.0
        trials = 20000
        for _ in range(trials):
            order = tuple(int(x) for x in rng.permutation(np.arange(1, n)))
            total += ns_score(RankedList(0, order), 0, {0, 1, 2, 3})
        expectation = 1 + 3 * 3 / (n - 1)
        assert total / trials == pytest.approx(expectation, abs=0.02)

    def test_exhaustive_six_image_corpus(self):
        relevant = {0, 1, 2, 3}
        for perm in itertools.permutations(range(1, 6)):
            naive = 1 + sum(1 for x in perm[:3] if x in relevant and x != 0)
            assert ns_score(RankedList(0, perm), 0, relevant) == naive


class TestMetricReport:
    def test_aggregate_is_exact_mean(self):
        report = MetricReport("ns", "baseline", 10, 0.8, 2, {0: 1.0, 1: 3.0, 2: 2.0})
        assert report.aggregate == (1.0 + 3.0 + 2.0) / 3

    def test_empty_report_rejected(self):
        with pytest.raises(ValueError):
            MetricReport("ns", "baseline", 10, 0.8, 2, {}).aggregate

    def test_tsv_shape(self):
        reports = [
            MetricReport("ns", "baseline", 10, 0.8, 2, {0: 1.0}),
            MetricReport("ns", "rerank-directed", 10, 0.8, 2, {0: 2.0}),
        ]
        lines = reports_to_tsv(reports).splitlines()
        assert lines[0] == "metric\tmethod\tk\talpha0\tdepth\tvalue"
        assert len(lines) == 3
        assert lines[1].split("\t") == ["ns", "baseline", "10", "0.8", "2", "1.000000"]

    def test_per_query_tsv(self):
        report = MetricReport("ns", "baseline", 10, 0.8, 2, {1: 1.0, 0: 2.0})
        lines = per_query_tsv(report).splitlines()
        assert lines == ["query\tvalue", "0\t2.000000", "1\t1.000000"]


def synth_tables(spec):
    spaces, gt = synth_generate(spec)
    return [build_rank_table(m) for m in spaces], gt


class TestEvaluate:
    def test_rerank_at_least_baseline_on_clean_corpus(self):
        spec = SynthSpec(
            n_groups=10, group_size=4, dims=6, n_spaces=1,
            intra_spread=0.05, inter_spread=1.0, agreement=1.0, seed=3,
        )
        tables, gt = synth_tables(spec)
        for metric in ("ns", "map"):
            baseline, reranked = evaluate(tables, gt, GraphParams(k=5), metric=metric)
            assert reranked.aggregate >= baseline.aggregate

    def test_group_size_one_degenerate_ns(self):
        spec = SynthSpec(n_groups=8, group_size=1, dims=4, n_spaces=1, seed=4)
        tables, gt = synth_tables(spec)
        for method in ("directed", "undirected"):
            baseline, reranked = evaluate(
                tables, gt, GraphParams(k=3), method=method, metric="ns"
            )
            assert baseline.aggregate == 1.0
            assert reranked.aggregate == 1.0

    def test_self_fusion_matches_single_table(self):
        # doubling every weight cannot change any argmax
        spec = SynthSpec(
            n_groups=8, group_size=4, dims=6, n_spaces=1,
            intra_spread=0.1, inter_spread=1.0, agreement=0.8, seed=9,
        )
        tables, gt = synth_tables(spec)
        params = GraphParams(k=6)
        _, single = evaluate(tables, gt, params, metric="ns")
        _, fused = evaluate([tables[0], tables[0]], gt, params, metric="ns")
        assert fused.per_query == single.per_query

    def test_method_labels(self):
        spec = SynthSpec(n_groups=4, group_size=2, dims=4, n_spaces=2, seed=1)
        tables, gt = synth_tables(spec)
        _, single = evaluate([tables[0]], gt, GraphParams(k=3))
        _, fused = evaluate(tables, gt, GraphParams(k=3))
        assert single.method == "rerank-directed"
        assert fused.method == "rerank-directed-fused"

    def test_unknown_metric_rejected(self):
        spec = SynthSpec(n_groups=4, group_size=2, dims=4, n_spaces=1, seed=1)
        tables, gt = synth_tables(spec)
        with pytest.raises(ValueError):
            evaluate(tables, gt, GraphParams(k=3), metric="accuracy")

    def test_thread_env_does_not_change_results(self, monkeypatch):
        spec = SynthSpec(
            n_groups=6, group_size=4, dims=4, n_spaces=1, agreement=0.7, seed=13
        )
        tables, gt = synth_tables(spec)
        monkeypatch.setenv("RERANK_THREADS", "1")
        serial = evaluate(tables, gt, GraphParams(k=5))
        monkeypatch.setenv("RERANK_THREADS", "4")
        threaded = evaluate(tables, gt, GraphParams(k=5))
        assert serial[1].per_query == threaded[1].per_query


class TestSweepK:
    def test_singleton_sweep_equals_evaluate(self):
        spec = SynthSpec(
            n_groups=6, group_size=4, dims=4, n_spaces=1, agreement=0.9, seed=2
        )
        tables, gt = synth_tables(spec)
        params = GraphParams(k=10)
        reports = sweep_k(tables, gt, params, [10])
        _, want = evaluate(tables, gt, params)
        assert len(reports) == 1
        assert reports[0].per_query == want.per_query

    def test_row_per_k(self):
        spec = SynthSpec(
            n_groups=6, group_size=4, dims=4, n_spaces=1, agreement=0.9, seed=2
        )
        tables, gt = synth_tables(spec)
        reports = sweep_k(tables, gt, GraphParams(k=5), [3, 5, 8])
        assert [r.k for r in reports] == [3, 5, 8]
        assert len(reports_to_tsv(reports).splitlines()) == 4

    def test_k_beyond_corpus_rejected(self):
        spec = SynthSpec(n_groups=3, group_size=2, dims=4, n_spaces=1, seed=2)
        tables, gt = synth_tables(spec)
        with pytest.raises(ValueError):
            sweep_k(tables, gt, GraphParams(k=2), [2, 50])

    def test_directed_flatter_than_undirected_across_k(self):
        # qualitative robustness gap between the two weighting schemes: on a
        # fused two-space corpus with partial agreement, blowing k up drags
        # the Jaccard weights down much harder than the reciprocal-rank ones
        spec = SynthSpec(
            n_groups=50, group_size=4, dims=8, n_spaces=2,
            intra_spread=0.25, inter_spread=1.0, agreement=0.7, seed=0,
        )
        tables, gt = synth_tables(spec)
        params = GraphParams(k=10)
        directed = sweep_k(tables, gt, params, [10, 60], method="directed")
        undirected = sweep_k(tables, gt, params, [10, 60], method="undirected")
        d_drop = directed[0].aggregate - directed[1].aggregate
        u_drop = undirected[0].aggregate - undirected[1].aggregate
        assert u_drop > d_drop
