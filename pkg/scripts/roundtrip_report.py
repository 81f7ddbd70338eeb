#!/usr/bin/env python3
"""Report bidirectional conversion fidelity over the bundled lexicon.

Checks every seed word through tokenize -> detokenize and every dictionary
pronunciation through render -> analyze, then prints a per-direction tally
with any failures spelled out.  Optionally dumps the conversion rule table
and the pronunciation dictionary for inspection.
"""

import argparse
import sys
import time

from vipho import (
    analyze_orthographic,
    build_vocabulary,
    default_dictionary,
    detokenize,
    example_words,
    export_rule_table,
    parse_ipa,
    render_syllable,
    tokenize,
)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--rules", metavar="FILE",
                        help="also write the rule table TSV here")
    parser.add_argument("--dict-out", metavar="FILE",
                        help="also write the pronunciation dictionary here")
    args = parser.parse_args()

    words = example_words()
    dictionary = default_dictionary()
    vocab = build_vocabulary(dictionary)

    start = time.perf_counter()
    ortho_bad = []
    for word in words:
        out = tokenize(word, dictionary, vocab)
        back = detokenize(out.triplets, vocab)
        if back != word or out.dropped:
            ortho_bad.append((word, back))

    phono_bad = []
    for word, ipa in dictionary.items():
        syllable = parse_ipa(ipa)
        written = render_syllable(syllable)
        if analyze_orthographic(written) != syllable:
            phono_bad.append((word, ipa, written))
    elapsed = time.perf_counter() - start

    print(f"lexicon size:            {len(words)}")
    print(f"orthographic roundtrip:  {len(words) - len(ortho_bad)}/{len(words)}")
    print(f"phonemic roundtrip:      {len(dictionary) - len(phono_bad)}/{len(dictionary)}")
    print(f"wall time:               {elapsed:.3f}s")
    for word, back in ortho_bad:
        print(f"  FAIL text side: {word!r} came back as {back!r}")
    for word, ipa, written in phono_bad:
        print(f"  FAIL ipa side: {word!r} ({ipa}) rendered as {written!r}")

    if args.rules:
        with open(args.rules, "w", encoding="utf-8") as fh:
            fh.write(export_rule_table())
        print(f"rule table written to {args.rules}")
    if args.dict_out:
        with open(args.dict_out, "w", encoding="utf-8") as fh:
            fh.write(dictionary.to_tsv())
        print(f"dictionary written to {args.dict_out}")

    return 1 if (ortho_bad or phono_bad) else 0


if __name__ == "__main__":
    sys.exit(main())
