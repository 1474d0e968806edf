"""Alternate the two six-agent trust matrices and report how the tail behaves.

Writes the trajectory as CSV and prints the root-band magnitude together with
the oscillation amplitude and peak of each non-root agent over the final window.

    python scripts/reproduce_switching.py [--steps 5000] [--window 500] [--csv out.csv]
"""

from __future__ import annotations

import argparse
from pathlib import Path

import numpy as np

from polaris.cli import predict, trajectory_csv
from polaris.dynamics import band_statistics, simulate_discrete
from polaris.scenario import load_scenario


def main(argv: list[str] | None = None) -> None:
    parser = argparse.ArgumentParser(description="P1/P2 switching run")
    parser.add_argument("--steps", type=int, default=5000)
    parser.add_argument("--window", type=int, default=500)
    parser.add_argument("--csv", type=Path, default=Path("p1_p2_switching.csv"))
    args = parser.parse_args(argv)

    sc = load_scenario("p1_p2_switching")
    pred = predict(sc)
    traj = simulate_discrete(sc.schedule, sc.x0, args.steps)
    args.csv.write_text(trajectory_csv(traj))

    roots = sorted(pred.roots)
    c, _ = band_statistics(traj, roots)
    last = traj.states[-args.window :]
    print(f"prediction: {pred.kind} ({pred.justification}), roots {roots}")
    print(f"root magnitude at step {args.steps}: {c[-1]:.12f}")
    for v in range(sc.n):
        if v in roots:
            continue
        print(f"agent {v}: amplitude {np.ptp(last[:, v]):.4f}, peak |x| {np.abs(last[:, v]).max():.6f}")
    print(f"wrote {args.csv}")


if __name__ == "__main__":
    main()
