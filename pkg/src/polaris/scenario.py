"""Scenario files: YAML documents describing one experiment.

Example::

    name: p1_fixed
    model: discrete            # or continuous
    graphs:
      - name: P1
        n: 6
        self_weights: [1, 1, 1, 1, 1, 1]   # optional, default 1.0
        edges:                              # `from` influences `to`
          - {from: 2, to: 0, weight: -1}
    schedule:
      pattern: [P1]            # discrete: graph names cycled step by step
      intervals: [1]           # joint-connectivity window lengths (optional)
      gamma: 0.25              # optional lower bound on nonzero |p_ij|
    x0: [0.9, 0.7, -0.9, -1, 0.2, 0.9]     # or {random: {seed: 1, low: -1, high: 1}}
    horizon: 2000              # steps (discrete) or time (continuous)

A continuous schedule uses ``pieces: [{graph: G, dwell: 0.5}, ...]``,
``dwell_set``, optional ``weight_bounds: [low, high]`` and ``intervals``
(counted in pieces), plus ``integration: {method: exact|rk4, dt: 0.01}``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np
import yaml

from polaris.dynamics import ContinuousSchedule, DiscreteSchedule
from polaris.lift import TrustMatrix, weights_to_trust_matrix
from polaris.signed_graph import SignedDigraph


class ScenarioError(ValueError):
    """Malformed or invalid scenario; the message names the offending field."""


@dataclass(eq=False)
class Scenario:
    name: str
    model: str
    graph_names: list[str]
    graphs: list[SignedDigraph]
    self_weights: list[np.ndarray]
    schedule: DiscreteSchedule | ContinuousSchedule
    x0: np.ndarray
    horizon: float
    method: str = "exact"
    dt: float = 1e-2
    outputs: dict = field(default_factory=dict)
    source: Path | None = None

    @property
    def n(self) -> int:
        return self.schedule.n


def bundled_scenarios() -> list[str]:
    root = resources.files("polaris") / "scenarios"
    return sorted(p.name[: -len(".yaml")] for p in root.iterdir() if p.name.endswith(".yaml"))


def resolve_scenario_path(ref: str | Path) -> Path:
    """A filesystem path, or the name of a bundled scenario."""
    p = Path(ref)
    if p.exists():
        return p
    bundled = resources.files("polaris") / "scenarios" / f"{ref}.yaml"
    if bundled.is_file():
        return Path(str(bundled))
    raise FileNotFoundError(f"no scenario file or bundled scenario named {ref!r}")


def _need(d: dict, key: str, where: str):
    if not isinstance(d, dict) or key not in d:
        raise ScenarioError(f"{where}: missing field '{key}'")
    return d[key]


def _graph(spec: dict, where: str, model: str) -> tuple[str, SignedDigraph, np.ndarray, TrustMatrix | None]:
    name = str(_need(spec, "name", where))
    if "matrix" in spec:
        if model != "discrete":
            raise ScenarioError(f"{where}.matrix: only discrete scenarios accept a trust matrix")
        try:
            p = TrustMatrix(np.array(spec["matrix"], dtype=float))
        except ValueError as exc:
            raise ScenarioError(f"{where}.matrix: {exc}") from exc
        return name, p.graph, np.diag(p.entries).copy(), p
    n = int(_need(spec, "n", where))
    try:
        g = SignedDigraph.from_records(n, spec.get("edges") or [])
    except (KeyError, TypeError) as exc:
        raise ScenarioError(f"{where}.edges: each record needs from, to, weight ({exc})") from exc
    except ValueError as exc:
        raise ScenarioError(f"{where}.edges: {exc}") from exc
    w = np.asarray(spec.get("self_weights", np.ones(n)), dtype=float)
    if w.shape != (n,):
        raise ScenarioError(f"{where}.self_weights: expected {n} values")
    if np.any(~(w > 0)):
        raise ScenarioError(f"{where}.self_weights: self weight must be positive")
    return name, g, w, None


def _x0(spec, n: int) -> np.ndarray:
    if isinstance(spec, dict):
        rnd = _need(spec, "random", "x0")
        if "seed" not in rnd:
            raise ScenarioError("x0.random: seed is mandatory for a random initial state")
        low, high = float(rnd.get("low", -1.0)), float(rnd.get("high", 1.0))
        return np.random.default_rng(int(rnd["seed"])).uniform(low, high, n)
    x = np.asarray(spec, dtype=float)
    if x.shape != (n,):
        raise ScenarioError(f"x0: expected {n} values, got {x.size}")
    return x


def parse_scenario(doc: dict, source: Path | None = None) -> Scenario:
    if not isinstance(doc, dict):
        raise ScenarioError("scenario must be a mapping at the top level")
    name = str(_need(doc, "name", "scenario"))
    model = str(doc.get("model", "discrete"))
    if model not in ("discrete", "continuous"):
        raise ScenarioError(f"model: expected 'discrete' or 'continuous', got {model!r}")
    gspecs = _need(doc, "graphs", "scenario")
    if not isinstance(gspecs, list) or not gspecs:
        raise ScenarioError("graphs: expected a nonempty list")
    names, graphs, weights, matrices = [], [], [], []
    for k, spec in enumerate(gspecs):
        gname, g, w, p = _graph(spec, f"graphs[{k}]", model)
        if gname in names:
            raise ScenarioError(f"graphs[{k}].name: duplicate graph name {gname!r}")
        names.append(gname)
        graphs.append(g)
        weights.append(w)
        matrices.append(p)
    if len({g.n for g in graphs}) != 1:
        raise ScenarioError("graphs: all graphs must have the same vertex count")
    index = {nm: k for k, nm in enumerate(names)}

    def lookup(ref, where):
        if ref not in index:
            raise ScenarioError(f"{where}: unknown graph {ref!r}")
        return index[ref]

    sched = doc.get("schedule") or {}
    intervals = sched.get("intervals")
    try:
        if model == "discrete":
            pattern = [lookup(r, f"schedule.pattern[{k}]") for k, r in enumerate(sched.get("pattern", [names[0]]))]
            mats = tuple(
                p if p is not None else weights_to_trust_matrix(g, w)
                for p, g, w in zip(matrices, graphs, weights)
            )
            schedule = DiscreteSchedule(mats, tuple(pattern), intervals and tuple(intervals), sched.get("gamma"))
        else:
            raw = sched.get("pieces") or [{"graph": names[0], "dwell": 1.0}]
            pieces = tuple(
                (lookup(_need(pc, "graph", f"schedule.pieces[{k}]"), f"schedule.pieces[{k}].graph"),
                 float(_need(pc, "dwell", f"schedule.pieces[{k}]")))
                for k, pc in enumerate(raw)
            )
            dwell_set = tuple(sched.get("dwell_set") or sorted({tau for _, tau in pieces}))
            bounds = sched.get("weight_bounds")
            schedule = ContinuousSchedule(
                tuple(graphs), pieces, dwell_set, bounds and tuple(bounds), intervals and tuple(intervals)
            )
    except ScenarioError:
        raise
    except (ValueError, IndexError) as exc:
        raise ScenarioError(f"schedule: {exc}") from exc

    x0 = _x0(_need(doc, "x0", "scenario"), graphs[0].n)
    horizon = float(_need(doc, "horizon", "scenario"))
    if horizon <= 0 or (model == "discrete" and horizon != int(horizon)):
        raise ScenarioError("horizon: expected a positive step count (discrete) or time (continuous)")
    integ = doc.get("integration") or {}
    method = str(integ.get("method", "exact"))
    dt = float(integ.get("dt", 1e-2))
    if method not in ("exact", "rk4"):
        raise ScenarioError(f"integration.method: expected 'exact' or 'rk4', got {method!r}")
    if dt <= 0:
        raise ScenarioError("integration.dt: must be positive")
    return Scenario(
        name=name,
        model=model,
        graph_names=names,
        graphs=graphs,
        self_weights=weights,
        schedule=schedule,
        x0=x0,
        horizon=horizon,
        method=method,
        dt=dt,
        outputs=dict(doc.get("outputs") or {}),
        source=source,
    )


def load_scenario(path: str | Path) -> Scenario:
    """Read and fully validate a scenario file (path or bundled scenario name)."""
    path = resolve_scenario_path(path)
    try:
        doc = yaml.safe_load(path.read_text())
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f" at line {mark.line + 1}, column {mark.column + 1}" if mark else ""
        raise ScenarioError(f"{path}: parse error{where}: {exc}") from exc
    return parse_scenario(doc, path)
