#!/usr/bin/env python3
"""Explore the fixed-point engine's latency and accuracy trade-offs.

Two quick studies, no artifacts required:

1. adder-tree latency vs. operand count (the ceil(log2 k) + 2 schedule),
   and where the 27-rule network sits on that curve;
2. hardware-vs-float output error over random rule tables and inputs,
   broken down by the near-tie band that explains argmax flips.
"""

import argparse

import numpy as np

from headway import anfis, hw


def latency_table(max_k: int) -> None:
    print(f"{'k':>6} {'tree cycles':>12} {'total cycles':>13}")
    k = 1
    while k <= max_k:
        _, lat = hw.sum_of_products([1] * k, [1] * k)
        total = hw.MF_LATENCY + hw.RULE_PRODUCT_LATENCY + lat + hw.DIVIDER_LATENCY
        marker = "  <- 27 rules" if k == anfis.N_RULES else ""
        print(f"{k:>6} {lat:>12} {total:>13}{marker}")
        k = k * 2 if k not in (16, 32) else k + 11  # visit 27 on the way
    _, lat27 = hw.sum_of_products([1] * anfis.N_RULES, [1] * anfis.N_RULES)
    total27 = hw.MF_LATENCY + hw.RULE_PRODUCT_LATENCY + lat27 + hw.DIVIDER_LATENCY
    print(f"\n27-rule inference: {total27} cycles "
          f"({total27 * 10} ns at 100 MHz)")


def random_model(rng: np.random.Generator) -> anfis.AnfisModel:
    m = anfis.grid_model()
    m.a = rng.uniform(0.15, 0.4, m.a.shape)
    m.b = rng.uniform(1.5, 3.0, m.b.shape)
    m.e = np.sort(rng.uniform(0.0, 1.0, m.e.shape), axis=1)
    m.consequents = rng.uniform(-1.9, 1.9, m.consequents.shape)
    return m


def error_sweep(n_models: int, n_inputs: int, seed: int) -> None:
    rng = np.random.default_rng(seed)
    dys = []
    for _ in range(n_models):
        model = random_model(rng)
        engine = hw.quantize_model(model)
        for x in rng.random((n_inputs, 3)):
            codes = hw.quantize_inputs(x)
            xq = np.array(codes) / engine.formats.input.scale
            y_code, _ = hw.hw_infer(engine, codes)
            dys.append(abs(hw.dequantize_output(y_code) - anfis.infer(model, xq)))
    dys = np.array(dys)
    print(f"\n{n_models} models x {n_inputs} inputs (seed {seed})")
    print(f"  max |hw - float|  {dys.max():.3e}   (budget 2^-6 = {2.0 ** -6:.3e})")
    print(f"  mean |hw - float| {dys.mean():.3e}")
    for q in (0.5, 0.9, 0.99, 1.0):
        print(f"  p{int(q * 100):<3} {np.quantile(dys, q):.3e}")


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--max-k", type=int, default=1024)
    ap.add_argument("--models", type=int, default=40)
    ap.add_argument("--inputs", type=int, default=50)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    latency_table(args.max_k)
    error_sweep(args.models, args.inputs, args.seed)


if __name__ == "__main__":
    main()
