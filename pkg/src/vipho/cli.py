"""Command-line interface.

Data goes to stdout, diagnostics to stderr.  Exit codes: 0 success,
1 usage error, 2 data error.  A key=value config file can set the default
dictionary path and OOV policy; command-line flags win over the file.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

from . import decoder as dec
from .errors import ViphoError
from .g2p import Dictionary, build_dictionary, default_dictionary, tokenize
from .inventory import Vocabulary, build_vocabulary
from .metrics import (
    ErrorCounts,
    align,
    component_error_counts,
    error_rate,
    frequency_bias,
    grouped_report,
    unique_correct_words,
)
from .p2g import detokenize

CONFIG_KEYS = ("dict", "on_oov")
DEFAULT_CONFIG = "vipho.cfg"


def load_config(path: str | None) -> dict[str, str]:
    """Parse a key=value config file; unknown keys are rejected."""
    if path is None:
        if not os.path.exists(DEFAULT_CONFIG):
            return {}
        path = DEFAULT_CONFIG
    cfg: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for n, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, eq, value = line.partition("=")
            key, value = key.strip(), value.strip()
            if not eq or key not in CONFIG_KEYS:
                raise ViphoError(f"{path}:{n}: expected one of "
                                 f"{'|'.join(CONFIG_KEYS)} = value")
            cfg[key] = value
    return cfg


def _read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _load_dictionary(args) -> Dictionary:
    cfg = load_config(args.config)
    path = args.dict or cfg.get("dict")
    if path is None:
        return default_dictionary()
    return Dictionary.from_tsv(_read_text(path))


def _oov_policy(args) -> str:
    cfg = load_config(args.config)
    policy = args.on_oov or cfg.get("on_oov") or "skip"
    if policy not in ("skip", "fail"):
        raise ViphoError(f"on_oov must be skip or fail, got {policy!r}")
    return policy


def _read_jsonl(path: str, field: str) -> list[dict]:
    records = []
    for n, line in enumerate(_read_text(path).splitlines(), 1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ViphoError(f"{path}:{n}: not valid JSON: {exc}") from None
        if field not in record:
            raise ViphoError(f"{path}:{n}: record lacks the {field!r} field")
        records.append(record)
    return records


def cmd_tokenize(args) -> int:
    dictionary = _load_dictionary(args)
    vocab = build_vocabulary(dictionary)
    policy = _oov_policy(args)
    for line in _read_text(args.input).splitlines():
        out = tokenize(line, dictionary, vocab, on_oov=policy)
        record = {"words": list(out.words),
                  "triplets": [list(t) for t in out.triplets],
                  "dropped": out.dropped}
        print(json.dumps(record, ensure_ascii=False))
    return 0


def cmd_detokenize(args) -> int:
    dictionary = _load_dictionary(args)
    vocab = build_vocabulary(dictionary)
    for record in _read_jsonl(args.input, "triplets"):
        print(detokenize([tuple(t) for t in record["triplets"]], vocab))
    return 0


def _counts_json(counts: ErrorCounts) -> dict:
    rate = None if counts.reference_length == 0 else error_rate(counts)
    return {"substitutions": counts.substitutions,
            "deletions": counts.deletions,
            "insertions": counts.insertions,
            "reference_length": counts.reference_length,
            "rate": rate}


def _load_eval_pairs(args):
    refs = _read_jsonl(args.ref, "words")
    hyps = _read_jsonl(args.hyp, "words")
    if len(refs) != len(hyps):
        raise ViphoError(f"{args.ref} has {len(refs)} records but "
                         f"{args.hyp} has {len(hyps)}")
    labels: list[str | None] = [None] * len(refs)
    if args.meta:
        lines = _read_text(args.meta).splitlines()
        if len(lines) != len(refs):
            raise ViphoError(f"{args.meta} has {len(lines)} lines for "
                             f"{len(refs)} records")
        labels = [line.strip() or None for line in lines]
    return refs, hyps, labels


def _token_pairs(refs, hyps, labels, level, vocab: Vocabulary | None):
    for ref, hyp, label in zip(refs, hyps, labels):
        if level == "word":
            yield ref["words"], hyp["words"], label
        elif level == "char":
            yield list(" ".join(ref["words"])), list(" ".join(hyp["words"])), label
        else:  # phone
            out = []
            for record in (ref, hyp):
                syls = [vocab.decode_triplet(tuple(t)) for t in record["triplets"]]
                out.append([p for s in syls for p in s.phonemes()])
            yield out[0], out[1], label


def cmd_evaluate(args) -> int:
    refs, hyps, labels = _load_eval_pairs(args)
    table_rows: list[tuple] = []
    if args.level == "component":
        overall = {c: ErrorCounts() for c in ("initial", "rhyme", "tone")}
        groups: dict[str, dict[str, ErrorCounts]] = {}
        pair_counts: dict[str, int] = {}
        for ref, hyp, label in zip(refs, hyps, labels):
            counts = component_error_counts(
                [tuple(t) for t in ref["triplets"]],
                [tuple(t) for t in hyp["triplets"]])
            for c, k in counts.items():
                overall[c] = overall[c] + k
            if label is not None:
                slot = groups.setdefault(label, {c: ErrorCounts() for c in overall})
                for c, k in counts.items():
                    slot[c] = slot[c] + k
                pair_counts[label] = pair_counts.get(label, 0) + 1
        report = {
            "level": "component",
            "n_pairs": len(refs),
            "overall": {c: _counts_json(k) for c, k in overall.items()},
            "groups": {label: {"pairs": pair_counts[label],
                               **{c: _counts_json(k) for c, k in by.items()}}
                       for label, by in sorted(groups.items())},
        }
        for c, k in overall.items():
            table_rows.append(("overall", c, len(refs), k))
        for label, by in sorted(groups.items()):
            for c, k in by.items():
                table_rows.append((label, c, pair_counts[label], k))
    else:
        vocab = None
        if args.level == "phone":
            vocab = build_vocabulary(_load_dictionary(args))
        pairs = list(_token_pairs(refs, hyps, labels, args.level, vocab))
        result = grouped_report(pairs)
        report = {
            "level": args.level,
            "n_pairs": len(refs),
            "overall": _counts_json(result.overall),
            "groups": {label: {"pairs": g.pairs, **_counts_json(g.counts)}
                       for label, g in result.groups.items()},
        }
        table_rows.append(("overall", "-", len(refs), result.overall))
        for label, g in result.groups.items():
            table_rows.append((label, "-", g.pairs, g.counts))

    print(json.dumps(report, ensure_ascii=False, indent=2))
    if args.table:
        with open(args.table, "w", encoding="utf-8") as fh:
            fh.write("group\tcomponent\tpairs\tN\tS\tD\tI\trate\n")
            for label, comp, pairs_n, k in table_rows:
                rate = "-" if k.reference_length == 0 else f"{error_rate(k):.4f}"
                fh.write(f"{label}\t{comp}\t{pairs_n}\t{k.reference_length}\t"
                         f"{k.substitutions}\t{k.deletions}\t{k.insertions}\t{rate}\n")
    return 0


def cmd_lexicon_report(args) -> int:
    train_lines = _read_text(args.train).splitlines()
    refs = _read_jsonl(args.ref, "words")
    hyps = _read_jsonl(args.hyp, "words")
    if len(refs) != len(hyps):
        raise ViphoError(f"{args.ref} has {len(refs)} records but "
                         f"{args.hyp} has {len(hyps)}")
    pairs = [(r["words"], h["words"]) for r, h in zip(refs, hyps)]
    bias = frequency_bias(train_lines, pairs)
    report = {
        "unique_correct": unique_correct_words(pairs),
        "pearson": bias.pearson,
        "spearman": bias.spearman,
        "n_types": bias.n_types,
    }
    print(json.dumps(report, ensure_ascii=False, indent=2))
    return 0


def cmd_build_dict(args) -> int:
    words = _read_text(args.input).split()
    dictionary, skipped = build_dictionary(words)
    sys.stdout.write(dictionary.to_tsv())
    if skipped:
        print(f"skipped {len(skipped)} non-syllables: {' '.join(skipped)}",
              file=sys.stderr)
    print(f"built {len(dictionary)} entries", file=sys.stderr)
    return 0


def cmd_decoder_demo(args) -> int:
    config = dec.DecoderConfig(dim=args.dim, heads=args.heads,
                               v_initial=args.v_initial, v_rhyme=args.v_rhyme,
                               v_tone=args.v_tone, seed=args.seed)
    data = dec.synth_dataset(config, n_seqs=args.sequences, seed=args.seed + 1)
    params = dec.init_params(config)
    start = time.perf_counter()
    losses = dec.train(data, params, config, steps=args.steps, lr=args.lr,
                       stop_accuracy=1.0)
    elapsed = time.perf_counter() - start
    summary = {
        "sequences": args.sequences,
        "steps_run": len(losses),
        "initial_loss": losses[0],
        "final_loss": losses[-1],
        "token_accuracy": dec.token_accuracy(data, params, config),
        "exact_match": dec.exact_match_rate(data, params, config),
        "seconds": round(elapsed, 2),
    }
    print(f"trained {len(losses)} steps in {elapsed:.1f}s, "
          f"loss {losses[0]:.3f} -> {losses[-1]:.4f}", file=sys.stderr)
    print(json.dumps(summary, ensure_ascii=False, indent=2))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vipho",
        description="Vietnamese phonemic tokenization and ASR evaluation tools.")
    parser.add_argument("--config", default=None,
                        help=f"key=value config file (default: ./{DEFAULT_CONFIG} if present)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("tokenize", help="transcript lines to id-triplet JSONL")
    p.add_argument("input", nargs="?", default="-", help="text file or - for stdin")
    p.add_argument("--dict", default=None, help="dictionary TSV path")
    p.add_argument("--on-oov", choices=("skip", "fail"), default=None)
    p.set_defaults(func=cmd_tokenize)

    p = sub.add_parser("detokenize", help="id-triplet JSONL back to text lines")
    p.add_argument("input", nargs="?", default="-")
    p.add_argument("--dict", default=None)
    p.set_defaults(func=cmd_detokenize)

    p = sub.add_parser("evaluate", help="error rates between two tokenized files")
    p.add_argument("--ref", required=True, help="reference JSONL")
    p.add_argument("--hyp", required=True, help="hypothesis JSONL")
    p.add_argument("--level", choices=("word", "char", "phone", "component"),
                   default="word")
    p.add_argument("--meta", default=None,
                   help="per-line group labels, one per record")
    p.add_argument("--table", default=None, help="write a TSV summary here")
    p.add_argument("--dict", default=None)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("lexicon-report",
                       help="lexical overlap and frequency-bias statistics")
    p.add_argument("--train", required=True, help="training transcript text")
    p.add_argument("--ref", required=True, help="reference JSONL")
    p.add_argument("--hyp", required=True, help="hypothesis JSONL")
    p.set_defaults(func=cmd_lexicon_report)

    p = sub.add_parser("build-dict", help="wordlist to pronunciation TSV")
    p.add_argument("input", nargs="?", default="-")
    p.set_defaults(func=cmd_build_dict)

    p = sub.add_parser("decoder-demo", help="overfit the decoder on synthetic data")
    p.add_argument("--dim", type=int, default=32)
    p.add_argument("--heads", type=int, default=4)
    p.add_argument("--sequences", type=int, default=20)
    p.add_argument("--steps", type=int, default=2000)
    p.add_argument("--lr", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--v-initial", type=int, default=12)
    p.add_argument("--v-rhyme", type=int, default=16)
    p.add_argument("--v-tone", type=int, default=10)
    p.set_defaults(func=cmd_decoder_demo)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    try:
        return args.func(args)
    except ViphoError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
