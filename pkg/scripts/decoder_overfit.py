#!/usr/bin/env python3
"""Overfit the syllable decoder on synthetic batches across several seeds.

Trains from scratch on a handful of random acoustic/target pairs and prints
the loss curve plus final teacher-forced accuracy and greedy exact-match for
each seed.  Useful when touching the backward pass: a broken gradient shows
up here as a curve that stalls long before memorization.
"""

import argparse
import sys
import time

from vipho.decoder import (
    DecoderConfig,
    exact_match_rate,
    init_params,
    synth_dataset,
    token_accuracy,
    train,
)


def run_trial(args, seed: int) -> bool:
    config = DecoderConfig(dim=args.dim, heads=args.heads,
                           v_initial=args.v_initial, v_rhyme=args.v_rhyme,
                           v_tone=args.v_tone, seed=seed)
    data = synth_dataset(config, n_seqs=args.sequences, seed=seed + 1)
    params = init_params(config)
    start = time.perf_counter()
    losses = train(data, params, config, steps=args.steps, lr=args.lr,
                   stop_accuracy=1.0)
    elapsed = time.perf_counter() - start
    acc = token_accuracy(data, params, config)
    exact = exact_match_rate(data, params, config)

    print(f"\nseed {seed}: {len(losses)} steps, {elapsed:.1f}s")
    stride = max(1, len(losses) // 8)
    for i in range(0, len(losses), stride):
        print(f"  step {i:5d}  loss {losses[i]:9.4f}")
    print(f"  step {len(losses) - 1:5d}  loss {losses[-1]:9.4f}")
    print(f"  token accuracy {acc:.3f}, exact match "
          f"{exact * args.sequences:.0f}/{args.sequences}")
    return acc >= 0.99 and exact >= 0.9


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--dim", type=int, default=32)
    parser.add_argument("--heads", type=int, default=4)
    parser.add_argument("--sequences", type=int, default=20)
    parser.add_argument("--steps", type=int, default=2000)
    parser.add_argument("--lr", type=float, default=0.5)
    parser.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2])
    parser.add_argument("--v-initial", type=int, default=12)
    parser.add_argument("--v-rhyme", type=int, default=16)
    parser.add_argument("--v-tone", type=int, default=10)
    args = parser.parse_args()

    results = [run_trial(args, seed) for seed in args.seeds]
    print(f"\n{sum(results)}/{len(results)} seeds memorized the batch")
    return 0 if all(results) else 1


if __name__ == "__main__":
    sys.exit(main())
