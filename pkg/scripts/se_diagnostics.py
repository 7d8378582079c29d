"""Compare IV standard errors with a multinomial bootstrap.

Reports, for random count tables at several sample sizes, the ratio of the
fixed-weight delta-method SE and of the full multinomial delta-method SE to
the bootstrap standard deviation of IV.

    python3 scripts/se_diagnostics.py --tables 10 --reps 5000
"""

import argparse

import numpy as np

from infocredit.woe import information_value, iv_se_multinomial, woe_table_from_counts


def bootstrap_sd(good, bad, reps, rng):
    ng, nb = good.sum(), bad.sum()
    g = rng.multinomial(ng, good / ng, size=reps).astype(float)
    b = rng.multinomial(nb, bad / nb, size=reps).astype(float)
    zero = (g == 0).any(axis=1) | (b == 0).any(axis=1)
    g[zero] += 0.5
    b[zero] += 0.5
    pg = g / g.sum(axis=1, keepdims=True)
    pb = b / b.sum(axis=1, keepdims=True)
    return np.sum((pg - pb) * np.log(pg / pb), axis=1).std(ddof=1)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--tables", type=int, default=10)
    ap.add_argument("--reps", type=int, default=5000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    rng = np.random.default_rng(args.seed)
    print(f"{'n':>6} {'bins':>4} {'iv':>7} {'fixed/boot':>10} {'full/boot':>9}")
    for n in (200, 2_000, 20_000):
        for _ in range(args.tables):
            k = int(rng.integers(3, 7))
            good = np.maximum(np.round(rng.dirichlet(np.full(k, 4.0)) * n), 1)
            bad = np.maximum(np.round(rng.dirichlet(np.full(k, 4.0)) * n), 1)
            t = woe_table_from_counts(good, bad)
            est = information_value(t)
            sd = bootstrap_sd(good.astype(int), bad.astype(int), args.reps, rng)
            print(f"{n:6d} {k:4d} {est.iv:7.4f} {est.se / sd:10.3f} "
                  f"{iv_se_multinomial(t) / sd:9.3f}")


if __name__ == "__main__":
    main()
