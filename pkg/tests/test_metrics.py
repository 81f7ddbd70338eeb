import math
import random
from functools import lru_cache

import pytest
from hypothesis import given, strategies as st

from vipho.errors import (
    DegenerateInput,
    EmptyInput,
    EmptyReference,
    ShapeMismatch,
)
from vipho.g2p import analyze_orthographic
from vipho.metrics import (
    AlignmentTrace,
    ErrorCounts,
    align,
    char_error_rate,
    classification_metrics,
    component_error_counts,
    component_error_rates,
    error_rate,
    frequency_bias,
    grouped_report,
    phone_error_rate,
    unique_correct_words,
    word_error_rate,
)


# --- independent oracles ---

def oracle_cost(ref, hyp):
    """Exhaustive minimum edit cost by plain recursion over subproblems."""
    ref, hyp = tuple(ref), tuple(hyp)

    @lru_cache(maxsize=None)
    def go(i, j):
        if i == len(ref):
            return len(hyp) - j
        if j == len(hyp):
            return len(ref) - i
        return min(go(i + 1, j + 1) + (ref[i] != hyp[j]),
                   go(i + 1, j) + 1,
                   go(i, j + 1) + 1)

    return go(0, 0)


def oracle_pearson(xs, ys):
    n = len(xs)
    mx, my = sum(xs) / n, sum(ys) / n
    num = sum((a - mx) * (b - my) for a, b in zip(xs, ys))
    dx = math.sqrt(sum((a - mx) ** 2 for a in xs))
    dy = math.sqrt(sum((b - my) ** 2 for b in ys))
    return num / (dx * dy)


def oracle_ranks(vals):
    positions = {}
    for pos, v in enumerate(sorted(vals), start=1):
        positions.setdefault(v, []).append(pos)
    return [sum(positions[v]) / len(positions[v]) for v in vals]


def oracle_spearman(xs, ys):
    return oracle_pearson(oracle_ranks(xs), oracle_ranks(ys))


# --- alignment ---

def test_identity_alignment():
    trace = align(list("abc"), list("abc"))
    assert [op.kind for op in trace.ops] == ["match"] * 3
    assert error_rate(trace.counts()) == 0.0


def test_counts_fields():
    c = align(list("kitten"), list("sitting")).counts()
    assert (c.substitutions, c.deletions, c.insertions) == (2, 0, 1)
    assert c.reference_length == 6
    assert c.errors == 3
    assert c.matches == 4


def test_alignment_cost_matches_oracle_random():
    rng = random.Random(20240814)
    for _ in range(300):
        ref = [rng.randrange(5) for _ in range(rng.randrange(9))]
        hyp = [rng.randrange(5) for _ in range(rng.randrange(9))]
        assert align(ref, hyp).counts().errors == oracle_cost(ref, hyp)


@given(st.lists(st.integers(0, 4), max_size=8),
       st.lists(st.integers(0, 4), max_size=8))
def test_alignment_cost_matches_oracle_property(ref, hyp):
    assert align(ref, hyp).counts().errors == oracle_cost(ref, hyp)


@given(st.lists(st.integers(0, 4), max_size=8),
       st.lists(st.integers(0, 4), max_size=8))
def test_count_identities(ref, hyp):
    c = align(ref, hyp).counts()
    assert c.reference_length == len(ref)
    assert c.matches + c.substitutions + c.insertions == len(hyp)
    assert c.matches >= 0


def test_tie_break_prefers_match():
    trace = align(["a", "b"], ["b"])
    assert [op.kind for op in trace.ops] == ["delete", "match"]


def test_tie_break_prefers_substitute_over_delete_insert():
    trace = align(["a", "b"], ["b", "a"])
    assert [op.kind for op in trace.ops] == ["substitute", "substitute"]


def test_trace_indices_point_at_tokens():
    ref, hyp = ["x", "y", "z"], ["y", "q"]
    for op in align(ref, hyp).ops:
        if op.kind in ("match", "substitute"):
            assert op.ref_index is not None and op.hyp_index is not None
        elif op.kind == "delete":
            assert op.hyp_index is None
        else:
            assert op.ref_index is None


def test_empty_reference_raises():
    with pytest.raises(EmptyReference):
        error_rate(align([], ["a"]).counts())
    with pytest.raises(EmptyReference):
        word_error_rate("", "ba")


def test_wer_cer_per():
    assert word_error_rate("ba hoàng", "ba hoàng") == 0.0
    assert word_error_rate("ba hoàng", "ba") == 0.5
    assert char_error_rate("ab cd", "ab") == 3 / 5
    ref = [analyze_orthographic(w) for w in ("bà",)]
    hyp = [analyze_orthographic(w) for w in ("ba",)]
    assert phone_error_rate(ref, hyp) == pytest.approx(1 / 3)
    assert phone_error_rate(ref, ref) == 0.0


def test_wer_accepts_token_lists():
    assert word_error_rate(["ba", "cá"], ["ba", "cá"]) == 0.0


# --- component error rates ---

def test_tone_only_substitution():
    ref = [(5, 6, 7)]
    hyp = [(5, 6, 8)]
    rates = component_error_rates(ref, hyp)
    assert rates == {"initial": 0.0, "rhyme": 0.0, "tone": 1.0}


def test_component_deletion_hits_all_components():
    ref = [(5, 6, 7), (8, 9, 10)]
    hyp = [(5, 6, 7)]
    counts = component_error_counts(ref, hyp)
    for c in ("initial", "rhyme", "tone"):
        assert counts[c].deletions == 1
        assert counts[c].substitutions == 0
        assert counts[c].reference_length == 2


def test_component_counts_against_recount(vocab):
    rng = random.Random(7)

    def random_triplets(k):
        return [(rng.randrange(4, 10), rng.randrange(4, 12), rng.randrange(4, 8))
                for _ in range(k)]

    for _ in range(100):
        ref = random_triplets(rng.randrange(1, 10))
        hyp = random_triplets(rng.randrange(0, 10))
        got = component_error_counts(ref, hyp)
        trace = align([tuple(t) for t in ref], [tuple(t) for t in hyp])
        for idx, name in enumerate(("initial", "rhyme", "tone")):
            s = sum(1 for op in trace.ops if op.kind == "substitute"
                    and ref[op.ref_index][idx] != hyp[op.hyp_index][idx])
            d = sum(1 for op in trace.ops if op.kind == "delete")
            i = sum(1 for op in trace.ops if op.kind == "insert")
            assert got[name] == ErrorCounts(s, d, i, len(ref))
        # deletion and insertion mass is identical across components
        assert len({got[c].deletions for c in got}) == 1
        assert len({got[c].insertions for c in got}) == 1


# --- grouped reports ---

def test_grouped_report_micro_average():
    pairs = [
        ("ba cá", "ba cá", "north"),
        ("ba cá", "ba xx", "north"),
        ("hoàng", "hoàng", "south"),
    ]
    report = grouped_report(pairs)
    assert report.overall.reference_length == 5
    assert report.overall_rate == pytest.approx(1 / 5)
    assert report.groups["north"].counts.reference_length == 4
    assert report.groups["north"].rate == pytest.approx(1 / 4)
    assert report.groups["south"].rate == 0.0
    assert report.groups["north"].pairs == 2
    # group reference lengths partition the overall reference length
    assert sum(g.counts.reference_length for g in report.groups.values()) \
        == report.overall.reference_length


def test_grouped_report_unlabeled_pairs_pool_into_overall():
    report = grouped_report([("ba", "ba")])
    assert report.groups == {}
    assert report.overall_rate == 0.0


def test_grouped_report_empty_input():
    with pytest.raises(EmptyInput):
        grouped_report([])


def test_identical_files_give_zero_rates():
    pairs = [("ba cá hoàng", "ba cá hoàng", "g1"), ("kiệm", "kiệm", "g2")]
    report = grouped_report(pairs)
    assert report.overall_rate == 0.0
    assert all(g.rate == 0.0 for g in report.groups.values())


# --- lexical statistics ---

def test_unique_correct_words():
    pairs = [("ba ba cá", "ba xx cá"), ("ba", "")]
    assert unique_correct_words(pairs) == 2


def test_unique_correct_words_empty_hyp():
    assert unique_correct_words([("ba cá", "")]) == 0


def make_bias_corpus(n_types, rng):
    """Synthesizes refs/hyps realizing a chosen recall per word type."""
    train = {}
    pairs = []
    expected_x = []
    expected_y = []
    for i in range(n_types):
        w = f"t{i}"
        f = rng.randrange(0, 40)
        k = rng.randrange(1, 6)
        m = rng.randrange(0, k + 1)
        train[w] = f
        pairs.append((" ".join([w] * k), " ".join([w] * m + ["zz"] * (k - m))))
        expected_x.append(math.log1p(f))
        expected_y.append(m / k)
    return train, pairs, expected_x, expected_y


def test_frequency_bias_matches_direct_formulas():
    rng = random.Random(99)
    train, pairs, xs, ys = make_bias_corpus(50, rng)
    result = frequency_bias(train, pairs)
    assert result.n_types == 50
    assert result.pearson == pytest.approx(oracle_pearson(xs, ys), abs=1e-9)
    assert result.spearman == pytest.approx(oracle_spearman(xs, ys), abs=1e-9)


def test_frequency_bias_accepts_corpus_iterable():
    train_lines = ["ba ba cá", "ba hoàng"]
    pairs = [("ba cá hoàng", "ba cá xx")]
    result = frequency_bias(train_lines, pairs)
    assert result.n_types == 3


def test_spearman_is_one_for_monotone_recall():
    # distinct frequencies, recall strictly increasing with frequency
    n = 20
    train = {f"t{i}": i for i in range(n)}
    pairs = [(" ".join([f"t{i}"] * n), " ".join([f"t{i}"] * i + ["zz"] * (n - i)))
             for i in range(n)]
    result = frequency_bias(train, pairs)
    assert result.spearman == pytest.approx(1.0)


def test_spearman_invariant_under_monotone_transform():
    rng = random.Random(3)
    train, pairs, _, _ = make_bias_corpus(30, rng)
    base = frequency_bias(train, pairs)
    squared = {w: f * f * 3 for w, f in train.items()}  # strictly monotone in f
    transformed = frequency_bias(squared, pairs)
    assert transformed.spearman == pytest.approx(base.spearman, abs=1e-12)


def test_frequency_bias_degenerate():
    with pytest.raises(DegenerateInput):
        frequency_bias({"ba": 3}, [("ba", "ba")])
    with pytest.raises(DegenerateInput):
        # constant recall of 1.0 across both types: zero variance
        frequency_bias({"ba": 3, "cá": 1}, [("ba cá", "ba cá")])


# --- classification ---

def test_classification_metrics():
    scores = classification_metrics(list("aabc"), list("abbb"))
    assert scores.accuracy == 0.5
    assert scores.macro_f1 == pytest.approx((2 / 3 + 1 / 2 + 0.0) / 3)


def test_classification_perfect():
    scores = classification_metrics([1, 2, 3], [1, 2, 3])
    assert scores.accuracy == 1.0
    assert scores.macro_f1 == 1.0


def test_classification_errors():
    with pytest.raises(ShapeMismatch):
        classification_metrics([1], [1, 2])
    with pytest.raises(EmptyInput):
        classification_metrics([], [])
