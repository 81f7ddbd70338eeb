"""Acceptance suite: one test per shipped guarantee.

Each test prints a single PASS line with its headline numbers; run with
`pytest -v -s tests/test_acceptance.py` to see them.  Time budgets are
asserted with wall-clock measurements, so the suite doubles as a smoke
check that nothing regressed into accidental quadratic behavior.
"""

import itertools
import json
import math
import random
import statistics
import time
from functools import lru_cache

import numpy as np
import pytest

from vipho import (
    analyze_orthographic,
    build_inventory,
    build_vocabulary,
    char_error_rate,
    component_error_counts,
    component_error_rates,
    default_dictionary,
    detokenize,
    example_words,
    frequency_bias,
    parse_ipa,
    phone_error_rate,
    render_syllable,
    tokenize,
    word_error_rate,
)
from vipho.cli import main
from vipho.decoder import (
    DecoderConfig,
    decode_greedy,
    exact_match_rate,
    grad_check,
    init_params,
    loss_and_grads,
    predict_step,
    synth_dataset,
    token_accuracy,
    train,
)
from vipho.metrics import align


def report(label: str, detail: str) -> None:
    print(f"PASS  {label}: {detail}")


def test_inventory_cardinalities():
    start = time.perf_counter()
    inv = build_inventory.__wrapped__()
    elapsed = time.perf_counter() - start
    assert len(inv.initials) == 23
    assert len(inv.vowels) == 15
    assert len(inv.finals) == 10
    assert len(inv.tones) == 6
    assert inv.glide.ipa == "w̯"
    initial_forms = sum(len(i.forms) for i in inv.initials)
    final_forms = sum(len(f.forms) for f in inv.finals)
    assert initial_forms == 26
    assert final_forms == 12
    assert elapsed < 1.0
    report("inventory", f"23/15/10/6 phonemes, {initial_forms}+{final_forms} "
                        f"written forms, built in {elapsed:.3f}s")


def test_reference_analyses():
    hoang = analyze_orthographic("hoàng")
    assert hoang.initial is not None and hoang.initial.ipa == "h"
    assert hoang.glide is not None and hoang.glide.ipa == "w̯"
    assert hoang.vowel.ipa == "a"
    assert hoang.final is not None and hoang.final.ipa == "ŋ"
    assert hoang.tone.name == "low_falling"
    assert hoang.ipa() == "hw̯aŋ˨˨˩˩"

    kiem = analyze_orthographic("kiệm")
    assert kiem.initial is not None and kiem.initial.ipa == "k"
    assert kiem.glide is None
    assert kiem.vowel.ipa == "ie"
    assert kiem.final is not None and kiem.final.ipa == "m"
    assert kiem.tone.mark == "̣"  # dot below
    assert kiem.tone.contour == "˧˧ʔ˥˥"
    report("reference analyses", "hoàng -> hw̯aŋ˨˨˩˩, kiệm carries the "
                                 "dot-diacritic tone")


def test_full_corpus_roundtrips():
    start = time.perf_counter()
    words = example_words()
    dictionary = default_dictionary()
    vocab = build_vocabulary(dictionary)

    ortho_failures = [w for w in words
                      if detokenize(tokenize(w, dictionary, vocab).triplets,
                                    vocab) != w]
    phono_failures = []
    for word, ipa in dictionary.items():
        syllable = parse_ipa(ipa)
        if analyze_orthographic(render_syllable(syllable)) != syllable:
            phono_failures.append(word)

    elapsed = time.perf_counter() - start
    assert len(words) >= 150
    assert ortho_failures == []
    assert phono_failures == []
    assert elapsed < 5.0
    report("roundtrips", f"{len(words)}/{len(words)} orthographic and "
                         f"{len(dictionary)}/{len(dictionary)} phonemic "
                         f"in {elapsed:.2f}s")


def test_tokenize_scales_linearly():
    dictionary = default_dictionary()
    vocab = build_vocabulary(dictionary)
    base = " ".join(example_words() * 4)
    big = " ".join([base] * 10)

    def median_time(text: str) -> float:
        tokenize(text, dictionary, vocab)  # warm caches
        runs = []
        for _ in range(5):
            t0 = time.perf_counter()
            tokenize(text, dictionary, vocab)
            runs.append(time.perf_counter() - t0)
        return statistics.median(runs)

    t1 = median_time(base)
    t10 = median_time(big)
    assert t10 <= 12 * t1, f"10x input took {t10 / t1:.1f}x the time"
    report("linearity", f"10x input costs {t10 / t1:.1f}x "
                        f"({t1 * 1e3:.1f}ms -> {t10 * 1e3:.1f}ms)")


def oracle_cost(ref: tuple, hyp: tuple) -> int:
    @lru_cache(maxsize=None)
    def go(i: int, j: int) -> int:
        if i == len(ref):
            return len(hyp) - j
        if j == len(hyp):
            return len(ref) - i
        best = go(i + 1, j + 1) + (ref[i] != hyp[j])
        return min(best, go(i + 1, j) + 1, go(i, j + 1) + 1)

    return go(0, 0)


def test_alignment_matches_exhaustive_oracle():
    start = time.perf_counter()
    rng = random.Random(20260814)
    syllables = [parse_ipa(ipa) for ipa in
                 list(default_dictionary().values())[:30]]
    checked = 0
    for _ in range(220):
        alphabet = "abcde"[:rng.randint(1, 5)]
        ref = tuple(rng.choice(alphabet) for _ in range(rng.randint(0, 8)))
        hyp = tuple(rng.choice(alphabet) for _ in range(rng.randint(0, 8)))
        counts = align(list(ref), list(hyp)).counts()
        assert counts.errors == oracle_cost(ref, hyp)
        checked += 1
        if not ref:
            continue
        want = oracle_cost(ref, hyp) / len(ref)
        assert abs(word_error_rate(" ".join(ref), " ".join(hyp)) - want) < 1e-12

        ref_chars = tuple(" ".join(ref))
        hyp_chars = tuple(" ".join(hyp))
        want_cer = oracle_cost(ref_chars, hyp_chars) / len(ref_chars)
        assert abs(char_error_rate(" ".join(ref), " ".join(hyp)) - want_cer) < 1e-12

        ref_syl = [syllables[ord(c) - ord("a")] for c in ref]
        hyp_syl = [syllables[ord(c) - ord("a")] for c in hyp]
        ref_ph = tuple(p for s in ref_syl for p in s.phonemes())
        hyp_ph = tuple(p for s in hyp_syl for p in s.phonemes())
        want_per = oracle_cost(ref_ph, hyp_ph) / len(ref_ph)
        assert abs(phone_error_rate(ref_syl, hyp_syl) - want_per) < 1e-12
    elapsed = time.perf_counter() - start
    assert checked >= 200
    assert elapsed < 30.0
    report("alignment oracle", f"{checked} random pairs, WER/CER/PER within "
                               f"1e-12, in {elapsed:.2f}s")


def test_component_error_definitions():
    rates = component_error_rates([(5, 6, 7)], [(5, 6, 8)])
    assert rates == {"initial": 0.0, "rhyme": 0.0, "tone": 1.0}

    rng = random.Random(99)
    for _ in range(100):
        ref = [(rng.randint(4, 9),) * 3 for _ in range(rng.randint(1, 6))]
        hyp = [tuple(rng.randint(4, 9) for _ in range(3))
               for _ in range(rng.randint(0, 6))]
        counts = component_error_counts(ref, hyp)
        dels = {c.deletions for c in counts.values()}
        ins = {c.insertions for c in counts.values()}
        assert len(dels) == 1 and len(ins) == 1

        # recount substitutions straight off the alignment trace
        trace = align([tuple(t) for t in ref], [tuple(t) for t in hyp])
        for slot, name in enumerate(("initial", "rhyme", "tone")):
            subs = sum(1 for op in trace.ops if op.kind == "substitute"
                       and ref[op.ref_index][slot] != hyp[op.hyp_index][slot])
            assert counts[name].substitutions == subs
    report("component rates", "tone-only substitution -> (0, 0, 1.0); "
                              "D/I mass shared across components on 100 "
                              "random cases")


def pearson_oracle(x, y):
    n = len(x)
    mx, my = sum(x) / n, sum(y) / n
    cov = sum((a - mx) * (b - my) for a, b in zip(x, y))
    vx = math.sqrt(sum((a - mx) ** 2 for a in x))
    vy = math.sqrt(sum((b - my) ** 2 for b in y))
    return cov / (vx * vy)


def rank_oracle(values):
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j < len(order) and values[order[j]] == values[order[i]]:
            j += 1
        mean_rank = (i + j + 1) / 2
        for k in order[i:j]:
            ranks[k] = mean_rank
        i = j
    return ranks


def test_correlations_match_direct_formulas():
    rng = random.Random(7)
    for trial in range(5):
        types = [f"w{i}" for i in range(50)]
        freqs = {w: rng.randint(1, 400) for w in types}
        train = list(itertools.chain.from_iterable(
            [[w] * f for w, f in freqs.items()]))
        pairs = []
        recall = {}
        for w in types:
            n = rng.randint(1, 5)
            k = rng.randint(0, n)
            recall[w] = k / n
            pairs.append(([w] * n, [w] * k + ["zzz"] * (n - k)))
        bias = frequency_bias(train, pairs)
        x = [math.log1p(freqs[w]) for w in types]
        y = [recall[w] for w in types]
        assert abs(bias.pearson - pearson_oracle(x, y)) < 1e-9
        want_rho = pearson_oracle(rank_oracle(x), rank_oracle(y))
        assert abs(bias.spearman - want_rho) < 1e-9

    # a monotone transform of distinct frequencies gives rho exactly 1
    types = [f"m{i}" for i in range(20)]
    train = list(itertools.chain.from_iterable(
        [[w] * (i + 1) for i, w in enumerate(types)]))
    pairs = []
    for i, w in enumerate(types):
        n = 20
        k = i + 1  # recall strictly increases with frequency
        pairs.append(([w] * n, [w] * k + ["zzz"] * (n - k)))
    bias = frequency_bias(train, pairs)
    assert abs(bias.spearman - 1.0) < 1e-12
    report("correlations", "Pearson/Spearman within 1e-9 of direct formulas "
                           "on 5x50 types; monotone case gives rho = 1")


def test_decoder_numerics_and_overfit():
    start = time.perf_counter()

    # simplex and joint-mass guarantees
    cfg = DecoderConfig(dim=8, heads=2, v_initial=8, v_rhyme=10, v_tone=7,
                        seed=11)
    params = init_params(cfg)
    rng = np.random.default_rng(0)
    for _ in range(20):
        out = predict_step(rng.normal(size=cfg.dim), params)
        for p in (out.p_initial, out.p_rhyme, out.p_tone):
            assert abs(p.sum() - 1.0) < 1e-6
        joint = out.p_initial.sum() * out.p_rhyme.sum() * out.p_tone.sum()
        assert abs(joint - 1.0) < 1e-6

    # scalar-arithmetic recomputation of one prediction step at dim=4
    tiny = DecoderConfig(dim=4, heads=2, v_initial=6, v_rhyme=7, v_tone=5,
                         seed=2)
    tp = init_params(tiny)
    f = np.random.default_rng(6).normal(size=4)
    got = predict_step(f, tp)

    def mat(w, v, b):
        return [sum(w[i][j] * v[j] for j in range(len(v))) + b[i]
                for i in range(len(b))]

    def soft(z):
        mx = max(z)
        e = [math.exp(v - mx) for v in z]
        return [v / sum(e) for v in e]

    rhyme_logits = mat(tp.w_rhyme, f, tp.b_rhyme)
    gate = [1 / (1 + math.exp(-v)) for v in mat(tp.gate_w, f, tp.gate_b)]
    mod = [math.tanh(v) for v in mat(tp.gate_wr, rhyme_logits, tp.gate_br)]
    fused = [g * m for g, m in zip(gate, mod)]
    trunk = [math.tanh(v) for v in mat(tp.w_fuse, fused, tp.b_fuse)]
    assert np.allclose(got.p_rhyme, soft(rhyme_logits), atol=1e-12)
    assert np.allclose(got.p_initial, soft(mat(tp.w_initial, trunk,
                                               tp.b_initial)), atol=1e-12)
    assert np.allclose(got.p_tone, soft(mat(tp.w_tone, trunk, tp.b_tone)),
                       atol=1e-12)

    # analytic gradients against central differences, every tensor probed
    data = synth_dataset(cfg, n_seqs=3, frames=5, seed=21)

    def objective(p):
        return loss_and_grads(data, p, cfg)

    worst = grad_check(objective, init_params(cfg), epsilon=1e-5, samples=220,
                       seed=5)
    assert worst < 1e-4

    # toy overfit: memorize 20 sequences from scratch
    big = DecoderConfig(dim=32, heads=4, v_initial=12, v_rhyme=16, v_tone=10,
                        seed=0)
    batch = synth_dataset(big, n_seqs=20, seed=1234)
    trained = init_params(big)
    losses = train(batch, trained, big, steps=2000, lr=0.5, stop_accuracy=1.0)
    acc = token_accuracy(batch, trained, big)
    exact = exact_match_rate(batch, trained, big)
    elapsed = time.perf_counter() - start
    assert len(losses) <= 2000
    assert acc >= 0.99
    assert exact >= 18 / 20
    assert elapsed < 120.0
    report("decoder", f"grad check {worst:.2e} < 1e-4, overfit to "
                      f"{acc:.0%} tokens / {exact * 20:.0f}/20 exact in "
                      f"{len(losses)} steps ({elapsed:.1f}s)")


def test_cli_end_to_end(tmp_path, capsys):
    words = example_words()
    lines = [" ".join(words[i:i + 8]) for i in range(0, len(words), 8)]
    source = "\n".join(lines) + "\n"
    src = tmp_path / "corpus.txt"
    src.write_text(source, encoding="utf-8")

    assert main(["tokenize", str(src)]) == 0
    tokenized = capsys.readouterr().out
    ref = tmp_path / "ref.jsonl"
    ref.write_text(tokenized, encoding="utf-8")

    assert main(["detokenize", str(ref)]) == 0
    assert capsys.readouterr().out == source

    meta = tmp_path / "meta.txt"
    meta.write_text("".join(f"g{i % 3}\n" for i in range(len(lines))),
                    encoding="utf-8")
    assert main(["evaluate", "--ref", str(ref), "--hyp", str(ref),
                 "--meta", str(meta)]) == 0
    report_json = json.loads(capsys.readouterr().out)
    overall = report_json["overall"]
    assert overall["rate"] == 0.0
    assert overall["substitutions"] == overall["deletions"] == \
        overall["insertions"] == 0
    assert overall["reference_length"] == len(words)
    group_n = sum(g["reference_length"] for g in report_json["groups"].values())
    assert group_n == overall["reference_length"]
    report("cli", f"{len(lines)}-line roundtrip byte-identical; self-evaluate "
                  f"all-zero; group N sums to {group_n}")
