#!/usr/bin/env python3
"""Efficiency of the steering function while sensing, over the nine source positions.

    python scripts/efficiency_table.py [--n 16 --K 48] [--out out/table]
"""
import argparse
from pathlib import Path

from hsfsense.experiments import ExperimentConfig, run_sweep, sweep_to_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=40)
    ap.add_argument("--K", type=int, default=300)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="out/table")
    args = ap.parse_args()

    cfg = ExperimentConfig(n=args.n, K=args.K, seed=args.seed).validate()
    rows = [r.row for r in run_sweep(cfg)]
    print(f"{'phi':>5} {'theta':>6} {'P/Pmax':>8} {'sigma':>8}   baseline {rows[0].baseline_ratio:.3f}")
    for r in rows:
        print(f"{r.phi:5g} {r.theta:6g} {r.efficiency:8.4f} {r.sigma:8.4f}")
    print(f"mean efficiency {sum(r.efficiency for r in rows) / len(rows):.4f}")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "efficiency.csv").write_text(sweep_to_csv(rows), encoding="utf-8", newline="\n")


if __name__ == "__main__":
    main()
