"""Run ``check`` over every bundled scenario and summarize the verdicts.

    python scripts/run_golden.py [--out DIR] [--jobs N]
"""

from __future__ import annotations

import argparse
import sys

from polaris.cli import main as cli_main
from polaris.scenario import bundled_scenarios


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", default="golden_out")
    parser.add_argument("--jobs", type=int, default=4)
    args = parser.parse_args(argv)
    names = bundled_scenarios()
    status = cli_main(["check", *names, "--out", args.out, "--jobs", str(args.jobs)])
    print(f"{len(names)} scenarios checked, exit status {status}")
    return status


if __name__ == "__main__":
    sys.exit(main())
