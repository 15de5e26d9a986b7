import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dingdate.periods import PERIODS, Period
from dingdate.policy import (
    DimensionMismatchError,
    DuplicateIdError,
    InvalidDistributionError,
    Outcome,
    ZeroVectorError,
    build_index,
    cosine_similarity,
    decide,
    load_index,
    query_references,
)


def one_hot(index: int) -> list[float]:
    probs = [0.0] * 11
    probs[index] = 1.0
    return probs


class TestDecide:
    def test_one_hot_with_chronological_tie_break(self):
        shang_late = PERIODS.index(Period.parse("Shang.Late"))
        decision = decide(one_hot(shang_late))
        assert decision.outcome is Outcome.DATED
        assert decision.ranked[0] == (Period.parse("Shang.Late"), 1.0)
        # zero-probability slots fill with the chronologically earliest
        assert [str(p) for p, _ in decision.ranked[1:]] == [
            "Shang.Early", "WesternZhou.Early", "WesternZhou.Mid",
        ]

    def test_uniform_is_dated_first_four_chronological(self):
        decision = decide([1 / 11] * 11)
        assert decision.outcome is Outcome.DATED
        assert [str(p) for p, _ in decision.ranked] == [
            "Shang.Early", "Shang.Late", "WesternZhou.Early", "WesternZhou.Mid",
        ]

    def test_max_below_gate_is_other_stuffs(self):
        probs = [0.049] * 11  # sub-normalized: mass 0.539, rest implicitly rejected
        decision = decide(probs)
        assert decision.outcome is Outcome.OTHER_STUFFS
        assert decision.ranked == ()
        assert decision.top1_probability == pytest.approx(0.049)

    def test_exactly_five_percent_is_dated(self):
        probs = [0.05] + [0.04] * 10
        decision = decide(probs)
        assert decision.outcome is Outcome.DATED
        assert decision.top1_probability == 0.05

    def test_just_below_boundary(self):
        probs = [0.0499] + [0.04] * 10
        assert decide(probs).outcome is Outcome.OTHER_STUFFS

    def test_probabilities_non_increasing_and_distinct(self):
        rng = np.random.default_rng(0)
        for _ in range(200):
            probs = rng.dirichlet(np.ones(11))
            decision = decide(probs)
            values = [v for _, v in decision.ranked]
            assert values == sorted(values, reverse=True)
            periods = [p for p, _ in decision.ranked]
            assert len(set(periods)) == 4

    def test_wrong_arity(self):
        with pytest.raises(InvalidDistributionError):
            decide([0.5, 0.5])

    def test_negative_rejected(self):
        probs = [1.2] + [-0.02] * 10
        with pytest.raises(InvalidDistributionError):
            decide(probs)

    def test_sum_above_one_rejected(self):
        with pytest.raises(InvalidDistributionError):
            decide([0.2] * 11)

    def test_nan_rejected(self):
        with pytest.raises(InvalidDistributionError):
            decide([math.nan] + [0.0] * 10)

    def test_all_zero_rejected(self):
        with pytest.raises(InvalidDistributionError):
            decide([0.0] * 11)

    @given(st.lists(st.floats(0.001, 1.0), min_size=11, max_size=11))
    @settings(max_examples=100, deadline=None)
    def test_scale_independent_ranking(self, raw):
        # the chosen period set depends on ordering plus the gate only
        values = np.array(raw)
        probs = values / values.sum()
        decision = decide(probs.tolist())
        assert decision.outcome is Outcome.DATED
        order = sorted(range(11), key=lambda i: (-probs[i], i))
        assert [p for p, _ in decision.ranked] == [PERIODS[i] for i in order[:4]]


class TestCosine:
    def test_self_similarity_is_one(self):
        vec = [0.3, -1.2, 4.0]
        assert cosine_similarity(vec, vec) == pytest.approx(1.0, abs=1e-7)

    def test_orthogonal(self):
        assert cosine_similarity([1.0, 0.0], [0.0, 1.0]) == 0.0

    def test_hand_evaluated(self):
        # 32 / (sqrt(14) * sqrt(77)) = 0.974632
        value = cosine_similarity([1, 2, 3], [4, 5, 6])
        assert value == pytest.approx(0.9746318, abs=1e-6)

    def test_zero_vector_rejected(self):
        with pytest.raises(ZeroVectorError):
            cosine_similarity([0.0, 0.0], [1.0, 0.0])

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            cosine_similarity([1.0, 2.0], [1.0, 2.0, 3.0])

    @given(
        st.lists(st.floats(-10, 10), min_size=2, max_size=8),
        st.lists(st.floats(-10, 10), min_size=2, max_size=8),
        st.floats(0.001, 100),
    )
    @settings(max_examples=100, deadline=None)
    def test_symmetry_and_positive_scaling(self, a, b, c):
        from hypothesis import assume

        n = min(len(a), len(b))
        a, b = a[:n], b[:n]
        assume(any(v != 0 for v in a) and any(v != 0 for v in b))
        assert cosine_similarity(a, b) == pytest.approx(
            cosine_similarity(b, a), abs=1e-7
        )
        scaled = [c * v for v in a]
        assert cosine_similarity(a, scaled) == pytest.approx(1.0, abs=1e-7)


def brute_force_top_k(items, query, k):
    """Full-sort oracle: cosine per pair, sort by (-sim, id)."""
    sims = []
    for item_id, vec in items:
        dot = sum(float(x) * float(y) for x, y in zip(vec, query))
        na = math.sqrt(sum(float(x) ** 2 for x in vec))
        nb = math.sqrt(sum(float(y) ** 2 for y in query))
        sims.append((item_id, dot / (na * nb)))
    sims.sort(key=lambda pair: (-pair[1], pair[0]))
    return [item_id for item_id, _ in sims[:k]]


class TestIndex:
    def test_empty_index_valid(self):
        index = build_index([])
        assert len(index) == 0

    def test_mixed_dimensions_rejected(self):
        rng = np.random.default_rng(1)
        with pytest.raises(DimensionMismatchError):
            build_index([("a", rng.standard_normal(16)), ("b", rng.standard_normal(32))])

    def test_duplicate_id_rejected(self):
        vec = np.ones(4)
        with pytest.raises(DuplicateIdError):
            build_index([("a", vec), ("a", vec)])

    def test_zero_vector_rejected(self):
        with pytest.raises(ZeroVectorError):
            build_index([("a", np.zeros(4))])

    def test_single_item_any_k(self):
        index = build_index([("only", np.array([1.0, 2.0]))])
        for k in (1, 3, 10):
            hits = query_references(index, [1.0, 1.0], k)
            assert [h.artifact_id for h in hits] == ["only"]

    def test_short_index_returns_all(self):
        rng = np.random.default_rng(2)
        items = [(f"x{i}", rng.standard_normal(8)) for i in range(3)]
        index = build_index(items)
        assert len(query_references(index, rng.standard_normal(8), 5)) == 3

    def test_query_dimension_mismatch(self):
        index = build_index([("a", np.ones(4))])
        with pytest.raises(DimensionMismatchError):
            query_references(index, np.ones(5), 1)

    def test_zero_query_rejected(self):
        index = build_index([("a", np.ones(4))])
        with pytest.raises(ZeroVectorError):
            query_references(index, np.zeros(4), 1)

    def test_thousand_items_fifty_queries_match_brute_force(self):
        rng = np.random.default_rng(3)
        items = [(f"item{i:04d}", rng.standard_normal(64).astype(np.float32))
                 for i in range(1000)]
        index = build_index(items)
        for _ in range(50):
            query = rng.standard_normal(64)
            got = [h.artifact_id for h in query_references(index, query, 5)]
            want = brute_force_top_k(items, query, 5)
            assert got == want

    def test_deliberate_duplicate_vectors_tie_by_id(self):
        rng = np.random.default_rng(4)
        shared = rng.standard_normal(16).astype(np.float32)
        items = [("zz", shared), ("aa", shared), ("mm", shared),
                 ("bb", rng.standard_normal(16).astype(np.float32))]
        index = build_index(items)
        hits = query_references(index, shared, 3)
        assert [h.artifact_id for h in hits] == ["aa", "mm", "zz"]
        assert all(h.similarity == pytest.approx(1.0, abs=1e-7) for h in hits[:3])

    def test_insertion_order_irrelevant(self):
        rng = np.random.default_rng(5)
        items = [(f"i{i}", rng.standard_normal(8)) for i in range(20)]
        query = rng.standard_normal(8)
        forward = build_index(items)
        backward = build_index(list(reversed(items)))
        shuffled_items = items[:]
        rng.shuffle(shuffled_items)
        shuffled = build_index(shuffled_items)
        expect = query_references(forward, query, 5)
        assert query_references(backward, query, 5) == expect
        assert query_references(shuffled, query, 5) == expect

    def test_returned_similarities_dominate_rest(self):
        rng = np.random.default_rng(6)
        items = [(f"i{i}", rng.standard_normal(12)) for i in range(40)]
        index = build_index(items)
        query = rng.standard_normal(12)
        hits = query_references(index, query, 5)
        sims = [h.similarity for h in hits]
        assert sims == sorted(sims, reverse=True)
        chosen = {h.artifact_id for h in hits}
        others = [
            cosine_similarity(vec, query)
            for item_id, vec in items
            if item_id not in chosen
        ]
        assert min(sims) >= max(others) - 1e-12

    def test_sidecar_round_trip(self, tmp_path):
        rng = np.random.default_rng(7)
        items = [(f"art{i}", rng.standard_normal(16).astype(np.float32))
                 for i in range(9)]
        index = build_index(items)
        path = tmp_path / "index.bin"
        index.save(path)
        loaded = load_index(path)
        assert loaded.ids == index.ids
        assert np.array_equal(loaded.matrix, index.matrix)
        query = rng.standard_normal(16)
        assert query_references(loaded, query, 4) == query_references(index, query, 4)

    def test_empty_sidecar_round_trip(self, tmp_path):
        index = build_index([])
        path = tmp_path / "empty.bin"
        index.save(path)
        assert len(load_index(path)) == 0
