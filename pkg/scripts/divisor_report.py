#!/usr/bin/env python3
"""Degree and divisor report for the builtin structures.

For each builtin: the bidegree matrix of the coordinate map, the vanishing
orders of the coefficient lift on the candidate loci, the balance
identity N p_i = sum_j d[i][j] p_j + h_i, and the Neumann-Dirichlet counts
over a few levels (whose growth mirrors the divisor's presence).
"""

import argparse

from fractal_spectra.config import BUILTIN_NAMES, load_config
from fractal_spectra.renorm import balance_report
from fractal_spectra.spectra import level_spectrum
from fractal_spectra.verify import divisor_loci


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--levels", type=int, default=4)
    args = ap.parse_args()

    for name in BUILTIN_NAMES:
        cfg = load_config(name)
        print(f"== {name}")
        loci, _ = divisor_loci(cfg)
        if cfg.chart is None:
            print("   no chart; skipping")
            continue
        if loci is None:
            loci = []
        degrees, orders, h, flags = balance_report(cfg.structure, cfg.chart, loci)
        ranks = cfg.chart.ranks
        print(f"   degree matrix d[i][j]: {degrees.tolist()}  (block ranks {ranks})")
        for (j, a, b), order in zip(loci, orders):
            print(f"   locus {a:+.3g} u_{j} + {b:+.3g} v_{j} = 0: order {order}")
        n = cfg.structure.num_copies
        for i, flag in enumerate(flags):
            rhs = " + ".join(
                f"{degrees[i][jj]}*{ranks[jj]}" for jj in range(len(ranks))
            )
            print(f"   balance pair {i}: {n}*{ranks[i]} = ({rhs}) + {h[i]}"
                  f"  [{'ok' if flag else 'BROKEN'}]")
        counts = [
            level_spectrum(cfg.structure, cfg.network, cfg.measure, k, "nd").count
            for k in range(1, args.levels + 1)
        ]
        print(f"   N-D counts, levels 1..{args.levels}: {counts}")


if __name__ == "__main__":
    main()
