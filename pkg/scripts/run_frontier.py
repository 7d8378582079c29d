"""Trace the fairness-budget frontier on synthetic data and print it.

    python3 scripts/run_frontier.py --seed 7 --correlation 0.5
"""

import argparse

from infocredit.binning import fit_all
from infocredit.pareto import FairnessBudgetSweep, prepare_scorecard_data, sweep_frontier
from infocredit.synthdata import GeneratorConfig, generate
from infocredit.woe import build_woe_table


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=20_000)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--correlation", type=float, default=0.5)
    ap.add_argument("--epsilons", type=float, nargs="+",
                    default=list(FairnessBudgetSweep().epsilons))
    ap.add_argument("--workers", type=int, default=None)
    args = ap.parse_args(argv)

    ds = generate(GeneratorConfig(n_rows=args.n, seed=args.seed,
                                  group_feature_correlation=args.correlation))
    schemes = fit_all(ds.X, ds.default, ds.protected, ds.feature_names)
    data = prepare_scorecard_data(schemes, [build_woe_table(s) for s in schemes], ds)
    points = sweep_frontier(data, FairnessBudgetSweep(epsilons=tuple(args.epsilons)),
                            workers=args.workers)
    print(f"{'eps':>5} {'iv_model':>9} {'iv_dem':>8} {'auc':>6} {'air':>6} feasible  flags")
    for p in points:
        print(f"{p.epsilon:5.2f} {p.iv_model:9.4f} {p.iv_demographic:8.4f} {p.auc:6.4f} "
              f"{p.air:6.3f} {str(p.feasible):8}  {','.join(p.flags)}")
    for p in points[:1] + points[-1:]:
        coefs = ", ".join(f"{n}={c:.3f}" for n, c in zip(p.model.feature_names,
                                                         p.model.coefficients))
        print(f"eps={p.epsilon}: {coefs}")


if __name__ == "__main__":
    main()
