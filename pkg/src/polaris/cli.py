"""Command line entry point: ``polaris simulate|predict|check <scenario>...``.

Exit codes: 0 ok, 1 validation error, 2 check mismatch, 3 I/O error.
"""

from __future__ import annotations

import argparse
import io
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from polaris.dynamics import (
    DiscreteSchedule,
    Trajectory,
    band_statistics,
    simulate_continuous,
    simulate_discrete,
)
from polaris.lift import signed_laplacian
from polaris.limits import (
    CLUSTER,
    CONSENSUS,
    INCONCLUSIVE,
    NEUTRALIZE,
    POLARIZE,
    OutcomePrediction,
    classify_switching,
    predict_fixed,
)
from polaris.scenario import Scenario, ScenarioError, load_scenario

log = logging.getLogger("polaris")

EXIT_OK, EXIT_VALIDATION, EXIT_MISMATCH, EXIT_IO = 0, 1, 2, 3

LIMIT_TOL = 1e-4
ZERO_TOL = 1e-6
SIDE_TOL = 1e-6
BAND_TOL = 1e-6


@dataclass
class RunResult:
    status: int
    artifacts: list[Path] = field(default_factory=list)
    messages: list[str] = field(default_factory=list)


def fmt(v: float) -> str:
    return format(float(v), ".17g")


def trajectory_csv(traj: Trajectory) -> str:
    n = traj.states.shape[1]
    buf = io.StringIO()
    buf.write(",".join(["t"] + [f"x{i}" for i in range(n)]) + "\n")
    for t, row in zip(traj.times, traj.states):
        tt = str(int(t)) if traj.model == "discrete" else fmt(t)
        buf.write(",".join([tt] + [fmt(v) for v in row]) + "\n")
    return buf.getvalue()


def report_csv(pred: OutcomePrediction, checks: list[tuple[str, bool, str]] | None = None) -> str:
    def sset(s):
        return "" if s is None else " ".join(str(v) for v in sorted(s))

    rows = [
        ("kind", pred.kind),
        ("justification", pred.justification),
        ("C", "" if pred.magnitude is None else fmt(pred.magnitude)),
        ("value", "" if pred.value is None else fmt(pred.value)),
        ("set_one", sset(pred.partition and pred.partition.set_one)),
        ("set_two", sset(pred.partition and pred.partition.set_two)),
        ("roots", sset(pred.roots)),
        ("predicted_limit", "" if pred.predicted_limit is None else " ".join(fmt(v) for v in pred.predicted_limit)),
        ("reason", pred.reason or ""),
    ]
    for name, ok, detail in checks or []:
        rows.append((f"check:{name}", f"{'pass' if ok else 'fail'} {detail}".strip()))
    return "".join(f"{k},{v}\n" for k, v in rows)


def predict(sc: Scenario) -> OutcomePrediction:
    s = sc.schedule
    if s.is_fixed:
        k = s.pattern[0] if isinstance(s, DiscreteSchedule) else s.pieces[0][0]
        m = s.graphs[k] if isinstance(s, DiscreteSchedule) else signed_laplacian(s.graphs[k])
        return predict_fixed(m, sc.x0)
    return classify_switching(s)


def simulate(sc: Scenario) -> Trajectory:
    if sc.model == "discrete":
        return simulate_discrete(sc.schedule, sc.x0, int(sc.horizon))
    return simulate_continuous(sc.schedule, sc.x0, sc.horizon, sc.method, sc.dt)


def _tail(traj: Trajectory) -> np.ndarray:
    return traj.states[-max(2, len(traj) // 10) :]


def cross_check(sc: Scenario, pred: OutcomePrediction, traj: Trajectory) -> list[tuple[str, bool, str]]:
    """Compare a prediction with a simulated trajectory; one (name, ok, detail) per check."""
    x = traj.final
    out = []
    if pred.kind == INCONCLUSIVE:
        return [("prediction", False, f"inconclusive: {pred.reason}")]
    if pred.predicted_limit is not None:
        err = float(np.abs(x - pred.predicted_limit).max())
        out.append(("limit", err <= LIMIT_TOL, f"max|x(T)-limit|={err:.3e}"))
    if pred.kind == NEUTRALIZE:
        nx_ = float(np.abs(x).max())
        out.append(("zero", nx_ < ZERO_TOL, f"|x(T)|inf={nx_:.3e}"))
        return out
    if pred.kind == CONSENSUS:
        spread = float(np.ptp(x))
        out.append(("consensus", spread < SIDE_TOL, f"spread={spread:.3e}"))
        return out
    part = pred.partition
    one, two = sorted(part.set_one), sorted(part.set_two)
    spread = max(np.ptp(x[one]), np.ptp(x[two]) if two else 0.0)
    opposite = float(np.abs(x[one].mean() + x[two].mean())) if two else 0.0
    out.append(("sides", spread < SIDE_TOL and opposite < SIDE_TOL, f"within-side={spread:.3e} opposite={opposite:.3e}"))
    if pred.kind == POLARIZE:
        nz = float(np.abs(x).min())
        out.append(("nonzero", nz > ZERO_TOL, f"min|x(T)|={nz:.3e}"))
    if pred.kind == CLUSTER and len(pred.roots) < sc.n:
        tail = Trajectory(np.arange(len(_tail(traj))), _tail(traj), traj.model)
        c, m = band_statistics(tail, pred.roots)
        excess = float((m - c[-1]).max())
        out.append(("band", excess <= BAND_TOL, f"max M - C(T) over tail={excess:.3e}"))
    return out


def run(sc: Scenario, mode: str, out_dir: Path | str = ".") -> RunResult:
    out_dir = Path(out_dir)
    res = RunResult(EXIT_OK)
    traj_path = out_dir / sc.outputs.get("trajectory", f"{sc.name}.csv")
    report_path = out_dir / sc.outputs.get("report", f"{sc.name}.report.csv")
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        if mode in ("simulate", "check"):
            traj = simulate(sc)
            traj_path.write_text(trajectory_csv(traj))
            res.artifacts.append(traj_path)
        if mode in ("predict", "check"):
            pred = predict(sc)
            checks = cross_check(sc, pred, traj) if mode == "check" else None
            report_path.write_text(report_csv(pred, checks))
            res.artifacts.append(report_path)
            res.messages.append(f"{sc.name}: {pred.kind} ({pred.justification})")
            for name, ok, detail in checks or []:
                res.messages.append(f"{sc.name}: {'PASS' if ok else 'FAIL'} {name} {detail}")
                if not ok:
                    res.status = EXIT_MISMATCH
    except OSError as exc:
        res.status = EXIT_IO
        res.messages.append(f"{sc.name}: I/O error: {exc}")
    return res


def _run_ref(ref: str, mode: str, out_dir: str) -> RunResult:
    try:
        sc = load_scenario(ref)
    except FileNotFoundError as exc:
        return RunResult(EXIT_IO, messages=[str(exc)])
    except OSError as exc:
        return RunResult(EXIT_IO, messages=[f"{ref}: {exc}"])
    except ScenarioError as exc:
        return RunResult(EXIT_VALIDATION, messages=[f"{ref}: {exc}"])
    try:
        return run(sc, mode, out_dir)
    except ValueError as exc:
        return RunResult(EXIT_VALIDATION, messages=[f"{ref}: {exc}"])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="polaris", description="Signed opinion dynamics: simulate, predict, cross-check.")
    parser.add_argument("mode", choices=["simulate", "predict", "check"])
    parser.add_argument("scenarios", nargs="+", help="scenario files or bundled scenario names")
    parser.add_argument("--jobs", type=int, default=1, help="run scenarios concurrently in N processes")
    parser.add_argument("--out", default=".", help="output directory (default: current)")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO, format="%(message)s")
    if args.jobs > 1 and len(args.scenarios) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_run_ref, args.scenarios, [args.mode] * len(args.scenarios), [args.out] * len(args.scenarios)))
    else:
        results = [_run_ref(ref, args.mode, args.out) for ref in args.scenarios]
    for r in results:
        for msg in r.messages:
            log.info(msg)
        for p in r.artifacts:
            log.info("wrote %s", p)
    return max(r.status for r in results)


if __name__ == "__main__":
    sys.exit(main())
