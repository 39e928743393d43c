#!/usr/bin/env python3
"""Sweep the market over user counts at three externality levels.

Writes results/user_scaling.csv with one row per (n, alpha) point and a
short trend summary to stdout: provider profit should grow with the user
count and with the externality strength, while the premium coefficient
falls as the externality strengthens.
"""

import pathlib
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

from chainsure import ExperimentConfig, run_sweep

HERE = pathlib.Path(__file__).resolve().parents[1]


def main():
    config = ExperimentConfig.from_json(HERE / "configs" / "user_scaling.json")
    out = HERE / "results" / "user_scaling.csv"
    out.parent.mkdir(exist_ok=True)
    rows = run_sweep(config, csv_path=out)
    print(f"wrote {len(rows)} rows to {out}")
    for alpha in config.alpha:
        series = [r for r in rows if r.alpha == alpha]
        profits = [r.profit_provider for r in series]
        gammas = [r.gamma_star for r in series]
        print(
            f"alpha={alpha:g}: provider profit {profits[0]:.1f} -> {profits[-1]:.1f} "
            f"over n={series[0].n_users}..{series[-1].n_users}, "
            f"gamma* ~ {sum(gammas) / len(gammas):.4f}"
        )


if __name__ == "__main__":
    main()
