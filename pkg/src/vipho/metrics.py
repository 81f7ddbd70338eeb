"""Error metrics for syllable-level ASR output.

Alignment is minimum edit distance over arbitrary hashable tokens with a
fixed tie-break (match > substitute > delete > insert) so traces are
deterministic.  All aggregation is micro-averaged: counts are summed first
and divided once.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Mapping, Sequence

import numpy as np

from .errors import DegenerateInput, EmptyInput, EmptyReference, ShapeMismatch

MATCH = "match"
SUBSTITUTE = "substitute"
DELETE = "delete"
INSERT = "insert"


@dataclass(frozen=True)
class AlignOp:
    kind: str
    ref_index: int | None
    hyp_index: int | None


@dataclass(frozen=True)
class ErrorCounts:
    substitutions: int = 0
    deletions: int = 0
    insertions: int = 0
    reference_length: int = 0

    @property
    def matches(self) -> int:
        return self.reference_length - self.substitutions - self.deletions

    @property
    def errors(self) -> int:
        return self.substitutions + self.deletions + self.insertions

    def __add__(self, other: "ErrorCounts") -> "ErrorCounts":
        return ErrorCounts(
            self.substitutions + other.substitutions,
            self.deletions + other.deletions,
            self.insertions + other.insertions,
            self.reference_length + other.reference_length,
        )


@dataclass(frozen=True)
class AlignmentTrace:
    ops: tuple[AlignOp, ...]

    def counts(self) -> ErrorCounts:
        kinds = Counter(op.kind for op in self.ops)
        return ErrorCounts(
            substitutions=kinds[SUBSTITUTE],
            deletions=kinds[DELETE],
            insertions=kinds[INSERT],
            reference_length=kinds[MATCH] + kinds[SUBSTITUTE] + kinds[DELETE],
        )


def align(ref: Sequence[Hashable], hyp: Sequence[Hashable]) -> AlignmentTrace:
    """Minimum-edit alignment of hyp against ref.

    Unit costs for substitute/delete/insert.  When several traces reach the
    minimum cost the backtrace prefers match, then substitute, then delete,
    then insert.
    """
    m, n = len(ref), len(hyp)
    dist = [[0] * (n + 1) for _ in range(m + 1)]
    for i in range(1, m + 1):
        dist[i][0] = i
    for j in range(1, n + 1):
        dist[0][j] = j
    for i in range(1, m + 1):
        row, above = dist[i], dist[i - 1]
        r = ref[i - 1]
        for j in range(1, n + 1):
            diag = above[j - 1] + (r != hyp[j - 1])
            row[j] = min(diag, above[j] + 1, row[j - 1] + 1)

    ops: list[AlignOp] = []
    i, j = m, n
    while i > 0 or j > 0:
        here = dist[i][j]
        if i > 0 and j > 0 and ref[i - 1] == hyp[j - 1] and here == dist[i - 1][j - 1]:
            ops.append(AlignOp(MATCH, i - 1, j - 1))
            i, j = i - 1, j - 1
        elif i > 0 and j > 0 and ref[i - 1] != hyp[j - 1] and here == dist[i - 1][j - 1] + 1:
            ops.append(AlignOp(SUBSTITUTE, i - 1, j - 1))
            i, j = i - 1, j - 1
        elif i > 0 and here == dist[i - 1][j] + 1:
            ops.append(AlignOp(DELETE, i - 1, None))
            i -= 1
        else:
            ops.append(AlignOp(INSERT, None, j - 1))
            j -= 1
    ops.reverse()
    return AlignmentTrace(tuple(ops))


def error_rate(counts: ErrorCounts) -> float:
    """(S + D + I) / N; undefined when the reference is empty."""
    if counts.reference_length == 0:
        raise EmptyReference("error rate undefined for an empty reference")
    return counts.errors / counts.reference_length


def _tokens(value) -> list:
    return value.split() if isinstance(value, str) else list(value)


def word_error_rate(ref, hyp) -> float:
    return error_rate(align(_tokens(ref), _tokens(hyp)).counts())


def char_error_rate(ref, hyp) -> float:
    """Character-level rate; word sequences are joined with single spaces."""
    ref_s = ref if isinstance(ref, str) else " ".join(ref)
    hyp_s = hyp if isinstance(hyp, str) else " ".join(hyp)
    return error_rate(align(list(ref_s), list(hyp_s)).counts())


def phone_error_rate(ref_syllables, hyp_syllables) -> float:
    """Phoneme-level rate over flattened syllables (tone always included)."""
    ref_p = [p for s in ref_syllables for p in s.phonemes()]
    hyp_p = [p for s in hyp_syllables for p in s.phonemes()]
    return error_rate(align(ref_p, hyp_p).counts())


COMPONENTS = ("initial", "rhyme", "tone")


def component_error_counts(ref_triplets: Sequence, hyp_triplets: Sequence
                           ) -> dict[str, ErrorCounts]:
    """Per-component counts from one syllable-level alignment.

    Syllables align as whole triplets; a substituted syllable counts a
    substitution only for the components that actually differ, while every
    deleted or inserted syllable counts against all three components.  Each
    component shares the syllable reference length.
    """
    trace = align([tuple(t) for t in ref_triplets],
                  [tuple(t) for t in hyp_triplets])
    n = len(ref_triplets)
    subs = dict.fromkeys(COMPONENTS, 0)
    dels = dict.fromkeys(COMPONENTS, 0)
    ins = dict.fromkeys(COMPONENTS, 0)
    for op in trace.ops:
        if op.kind == DELETE:
            for c in COMPONENTS:
                dels[c] += 1
        elif op.kind == INSERT:
            for c in COMPONENTS:
                ins[c] += 1
        elif op.kind == SUBSTITUTE:
            r, h = ref_triplets[op.ref_index], hyp_triplets[op.hyp_index]
            for c, rv, hv in zip(COMPONENTS, r, h):
                if rv != hv:
                    subs[c] += 1
    return {c: ErrorCounts(subs[c], dels[c], ins[c], n) for c in COMPONENTS}


def component_error_rates(ref_triplets: Sequence, hyp_triplets: Sequence
                          ) -> dict[str, float]:
    counts = component_error_counts(ref_triplets, hyp_triplets)
    return {c: error_rate(k) for c, k in counts.items()}


@dataclass(frozen=True)
class GroupResult:
    counts: ErrorCounts
    rate: float | None
    pairs: int


@dataclass(frozen=True)
class LexicalStats:
    unique_correct: int
    pearson: float
    spearman: float
    n_types: int


@dataclass
class EvalReport:
    overall: ErrorCounts
    overall_rate: float | None
    groups: dict[str, GroupResult] = field(default_factory=dict)
    components: dict[str, ErrorCounts] | None = None
    lexical: LexicalStats | None = None


def grouped_report(pairs: Iterable[tuple]) -> EvalReport:
    """Micro-averaged rates overall and per metadata label.

    `pairs` yields (ref_tokens, hyp_tokens) or (ref_tokens, hyp_tokens,
    label); unlabeled pairs count toward the overall figures only.
    """
    overall = ErrorCounts()
    group_counts: dict[str, ErrorCounts] = {}
    group_pairs: dict[str, int] = {}
    seen = False
    for pair in pairs:
        ref, hyp, label = pair if len(pair) == 3 else (*pair, None)
        seen = True
        counts = align(_tokens(ref), _tokens(hyp)).counts()
        overall = overall + counts
        if label is not None:
            label = str(label)
            group_counts[label] = group_counts.get(label, ErrorCounts()) + counts
            group_pairs[label] = group_pairs.get(label, 0) + 1
    if not seen:
        raise EmptyInput("no evaluation pairs")
    groups = {
        label: GroupResult(
            counts=c,
            rate=None if c.reference_length == 0 else error_rate(c),
            pairs=group_pairs[label],
        )
        for label, c in sorted(group_counts.items())
    }
    rate = None if overall.reference_length == 0 else error_rate(overall)
    return EvalReport(overall=overall, overall_rate=rate, groups=groups)


def unique_correct_words(pairs: Iterable[tuple]) -> int:
    """Number of distinct reference words matched at least once."""
    correct: set = set()
    for ref, hyp, *_ in pairs:
        ref_t, hyp_t = _tokens(ref), _tokens(hyp)
        for op in align(ref_t, hyp_t).ops:
            if op.kind == MATCH:
                correct.add(ref_t[op.ref_index])
    return len(correct)


@dataclass(frozen=True)
class FrequencyBias:
    pearson: float
    spearman: float
    n_types: int


def _pearson(x: np.ndarray, y: np.ndarray) -> float:
    if x.shape != y.shape:
        raise ShapeMismatch(f"paired samples differ in length: {x.shape} vs {y.shape}")
    if x.size < 2:
        raise DegenerateInput("need at least two points for a correlation")
    xc = x - x.mean()
    yc = y - y.mean()
    sx = float(np.sqrt((xc * xc).sum()))
    sy = float(np.sqrt((yc * yc).sum()))
    if sx == 0.0 or sy == 0.0:
        raise DegenerateInput("zero variance makes the correlation undefined")
    return float((xc * yc).sum() / (sx * sy))


def _average_ranks(values: np.ndarray) -> np.ndarray:
    """1-based ranks; tied values all receive the mean of their ranks."""
    order = np.argsort(values, kind="stable")
    ranks = np.empty(values.size, dtype=float)
    i = 0
    sorted_vals = values[order]
    while i < values.size:
        j = i
        while j + 1 < values.size and sorted_vals[j + 1] == sorted_vals[i]:
            j += 1
        ranks[order[i:j + 1]] = (i + j) / 2 + 1
        i = j + 1
    return ranks


def frequency_bias(train_corpus, pairs: Iterable[tuple]) -> FrequencyBias:
    """Correlation between training-set familiarity and per-type recall.

    Familiarity of a word type is log(1 + training frequency); recall is the
    fraction of its reference occurrences the hypothesis got right.  Types
    are every word occurring at least once in the references.  Returns both
    the Pearson r and the Spearman rho (computed over average ranks).
    """
    if isinstance(train_corpus, Mapping):
        freq = Counter(train_corpus)
    else:
        freq = Counter(w for seq in train_corpus for w in _tokens(seq))

    occurrences: Counter = Counter()
    matched: Counter = Counter()
    for ref, hyp, *_ in pairs:
        ref_t, hyp_t = _tokens(ref), _tokens(hyp)
        occurrences.update(ref_t)
        for op in align(ref_t, hyp_t).ops:
            if op.kind == MATCH:
                matched[ref_t[op.ref_index]] += 1

    types = sorted(occurrences)
    if len(types) < 2:
        raise DegenerateInput("need at least two word types")
    x = np.log1p([freq[w] for w in types]).astype(float)
    y = np.array([matched[w] / occurrences[w] for w in types], dtype=float)
    r = _pearson(x, y)
    rho = _pearson(_average_ranks(x), _average_ranks(y))
    return FrequencyBias(pearson=r, spearman=rho, n_types=len(types))


@dataclass(frozen=True)
class ClassificationScores:
    accuracy: float
    macro_f1: float


def classification_metrics(gold: Sequence, pred: Sequence) -> ClassificationScores:
    """Accuracy and macro-F1 over the union of gold and predicted labels.

    A class with zero precision+recall contributes an F1 of zero, so absent
    or never-predicted classes drag the macro average down rather than being
    silently skipped.
    """
    if len(gold) != len(pred):
        raise ShapeMismatch(f"gold and pred differ in length: {len(gold)} vs {len(pred)}")
    if not gold:
        raise EmptyInput("no classification examples")
    classes = sorted(set(gold) | set(pred), key=repr)
    correct = sum(g == p for g, p in zip(gold, pred))
    f1s = []
    for c in classes:
        tp = sum(1 for g, p in zip(gold, pred) if g == c and p == c)
        fp = sum(1 for g, p in zip(gold, pred) if g != c and p == c)
        fn = sum(1 for g, p in zip(gold, pred) if g == c and p != c)
        f1s.append(0.0 if tp == 0 else 2 * tp / (2 * tp + fp + fn))
    return ClassificationScores(accuracy=correct / len(gold),
                                macro_f1=float(np.mean(f1s)))
