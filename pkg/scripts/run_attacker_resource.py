#!/usr/bin/env python3
"""Sweep the attacker's computing resource across block sizes.

Writes results/attacker_resource.csv. Expected shape: the provider's
profit falls and its absolute infrastructure spend rises as the attacker
grows; larger blocks (more transactions at stake) push the investment
ratio higher at every attacker level.
"""

import pathlib
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

from chainsure import ExperimentConfig, run_sweep

HERE = pathlib.Path(__file__).resolve().parents[1]


def main():
    config = ExperimentConfig.from_json(HERE / "configs" / "attacker_resource.json")
    out = HERE / "results" / "attacker_resource.csv"
    out.parent.mkdir(exist_ok=True)
    rows = run_sweep(config, csv_path=out)
    print(f"wrote {len(rows)} rows to {out}")
    for n_t in config.tx_per_block:
        series = [r for r in rows if r.tx_per_block == n_t]
        print(f"tx_per_block={n_t}:")
        for r in series:
            print(
                f"  a={r.attacker_resource:6.1f}  hbar*={r.hbar_star:.4f}  "
                f"h*={r.investment:8.1f}  profit_P={r.profit_provider:9.1f}  "
                f"gamma*={r.gamma_star:.4f}"
            )


if __name__ == "__main__":
    main()
