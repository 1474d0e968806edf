"""Trajectory simulation for the discrete and continuous signed averaging models."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from polaris.lift import (
    TrustMatrix,
    lift_laplacian,
    lift_stochastic,
    signed_laplacian,
)
from polaris.signed_graph import SignedDigraph

DWELL_TOL = 1e-9
CONVERGED_DELTA = 1e-10
CONVERGED_RUN = 50


# -- schedules ---------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class DiscreteSchedule:
    """Periodic switching among trust matrices.

    At step ``t`` the matrix ``graphs[pattern[t % len(pattern)]]`` is applied.
    ``intervals`` are the lengths of the consecutive windows over which joint
    connectivity is required; they repeat cyclically, so their maximum is the
    uniform bound on window length.  ``gamma`` bounds every nonzero entry
    magnitude from below and is computed when not given.
    """

    graphs: tuple[TrustMatrix, ...]
    pattern: tuple[int, ...] = (0,)
    intervals: tuple[int, ...] | None = None
    gamma: float | None = None

    def __post_init__(self):
        graphs = tuple(self.graphs)
        if not graphs:
            raise ValueError("schedule needs at least one graph")
        n = graphs[0].n
        if any(p.n != n for p in graphs):
            raise ValueError("all trust matrices must have the same dimension")
        pattern = tuple(int(k) for k in self.pattern)
        if not pattern:
            raise ValueError("empty selector pattern")
        for k in pattern:
            if not 0 <= k < len(graphs):
                raise IndexError(f"selector index {k} out of range for {len(graphs)} graphs")
        intervals = tuple(int(k) for k in (self.intervals or (len(pattern),)))
        if not intervals or any(k <= 0 for k in intervals):
            raise ValueError("interval lengths must be positive")
        floor = min(p.min_nonzero_magnitude() for p in graphs)
        gamma = floor if self.gamma is None else float(self.gamma)
        if not 0 < gamma <= 1:
            raise ValueError(f"gamma must lie in (0, 1], got {gamma}")
        if floor < gamma:
            raise ValueError(
                f"nonzero entry magnitude {floor:.6g} is below the declared lower bound gamma={gamma:.6g}"
            )
        object.__setattr__(self, "graphs", graphs)
        object.__setattr__(self, "pattern", pattern)
        object.__setattr__(self, "intervals", intervals)
        object.__setattr__(self, "gamma", gamma)

    @classmethod
    def fixed(cls, p: TrustMatrix) -> "DiscreteSchedule":
        return cls((p,))

    @property
    def n(self) -> int:
        return self.graphs[0].n

    @property
    def is_fixed(self) -> bool:
        return len(set(self.pattern)) == 1

    @property
    def interval_bound(self) -> int:
        return max(self.intervals)

    def index_at(self, t: int) -> int:
        return self.pattern[t % len(self.pattern)]

    def matrix_at(self, t: int) -> TrustMatrix:
        return self.graphs[self.index_at(t)]

    def windows(self) -> list[list[int]]:
        """Graph indices active in each distinct joint-connectivity window.

        Windows are enumerated until the pair (phase in pattern, phase in
        interval list) repeats, which covers every window that ever occurs.
        """
        seen = set()
        out = []
        t, k = 0, 0
        while True:
            state = (t % len(self.pattern), k % len(self.intervals))
            if state in seen:
                return out
            seen.add(state)
            length = self.intervals[k % len(self.intervals)]
            out.append([self.index_at(s) for s in range(t, t + length)])
            t += length
            k += 1


def _is_dwell_combination(tau: float, dwell_set: Sequence[float]) -> bool:
    """Whether ``tau`` is a sum of elements of ``dwell_set`` (repetition allowed)."""
    base = sorted(dwell_set)

    def search(rest: float, start: int) -> bool:
        if abs(rest) <= DWELL_TOL * max(1.0, tau):
            return True
        for idx in range(start, len(base)):
            d = base[idx]
            if d > rest + DWELL_TOL:
                break
            if search(rest - d, idx):
                return True
        return False

    return tau > 0 and search(tau, 0)


@dataclass(frozen=True, eq=False)
class ContinuousSchedule:
    """Piecewise-constant signed graphs with dwell times.

    ``pieces`` is a cycle of ``(graph index, dwell)`` pairs repeated forever;
    ``intervals`` counts pieces per joint-connectivity window, cyclically.
    """

    graphs: tuple[SignedDigraph, ...]
    pieces: tuple[tuple[int, float], ...]
    dwell_set: tuple[float, ...]
    weight_bounds: tuple[float, float] | None = None
    intervals: tuple[int, ...] | None = None

    def __post_init__(self):
        graphs = tuple(self.graphs)
        if not graphs:
            raise ValueError("schedule needs at least one graph")
        n = graphs[0].n
        if any(g.n != n for g in graphs):
            raise ValueError("all graphs must have the same vertex count")
        dwell_set = tuple(float(d) for d in self.dwell_set)
        if not dwell_set or any(d <= 0 for d in dwell_set):
            raise ValueError("dwell set must hold positive numbers")
        pieces = tuple((int(k), float(tau)) for k, tau in self.pieces)
        if not pieces:
            raise ValueError("schedule needs at least one piece")
        for k, tau in pieces:
            if not 0 <= k < len(graphs):
                raise IndexError(f"piece graph index {k} out of range for {len(graphs)} graphs")
            if not _is_dwell_combination(tau, dwell_set):
                raise ValueError(f"dwell {tau} is not a positive-integer combination of {dwell_set}")
        mags = [abs(w) for g in graphs for w in g.edges.values()]
        bounds = self.weight_bounds
        if bounds is None:
            bounds = (min(mags), max(mags)) if mags else (1.0, 1.0)
        lo, hi = float(bounds[0]), float(bounds[1])
        if not 0 < lo <= hi:
            raise ValueError(f"weight bounds must satisfy 0 < low <= high, got {bounds}")
        if mags and (min(mags) < lo or max(mags) > hi):
            raise ValueError(f"edge weight magnitudes outside declared bounds [{lo}, {hi}]")
        intervals = tuple(int(k) for k in (self.intervals or (len(pieces),)))
        if any(k <= 0 for k in intervals):
            raise ValueError("interval lengths must be positive")
        object.__setattr__(self, "graphs", graphs)
        object.__setattr__(self, "pieces", pieces)
        object.__setattr__(self, "dwell_set", dwell_set)
        object.__setattr__(self, "weight_bounds", (lo, hi))
        object.__setattr__(self, "intervals", intervals)

    @classmethod
    def fixed(cls, g: SignedDigraph, dwell: float = 1.0) -> "ContinuousSchedule":
        return cls((g,), ((0, dwell),), (dwell,))

    @property
    def n(self) -> int:
        return self.graphs[0].n

    @property
    def is_fixed(self) -> bool:
        return len({k for k, _ in self.pieces}) == 1

    def windows(self) -> list[list[int]]:
        seen = set()
        out = []
        p, k = 0, 0
        m = len(self.pieces)
        while True:
            state = (p % m, k % len(self.intervals))
            if state in seen:
                return out
            seen.add(state)
            length = self.intervals[k % len(self.intervals)]
            out.append([self.pieces[(p + s) % m][0] for s in range(length)])
            p += length
            k += 1


# -- trajectories ------------------------------------------------------------


@dataclass(eq=False)
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    model: str = "discrete"
    boundaries: list[int] | None = None

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.states = np.asarray(self.states, dtype=float)
        if len(self.times) != len(self.states):
            raise ValueError("times and states differ in length")

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    def __len__(self) -> int:
        return len(self.times)


@dataclass
class LiftReport:
    antisymmetry_defect: float
    primal_deviation: float
    extras: dict = field(default_factory=dict)


def _as_state(x0, n: int) -> np.ndarray:
    x = np.array(x0, dtype=float).reshape(-1)
    if x.shape != (n,):
        raise ValueError(f"state has {x.size} entries, expected {n}")
    if not np.all(np.isfinite(x)):
        raise ValueError("state has non-finite entries")
    return x


def _matvec(m: np.ndarray, x: np.ndarray) -> np.ndarray:
    # column-by-column accumulation keeps the summation order fixed (left to right)
    out = m[:, 0] * x[0]
    for j in range(1, m.shape[1]):
        out = out + m[:, j] * x[j]
    return out


def step_discrete(p: TrustMatrix, x) -> np.ndarray:
    return _matvec(p.entries, _as_state(x, p.n))


def _iterate(mats: Sequence[np.ndarray], pattern: Sequence[int], x0: np.ndarray, steps: int) -> np.ndarray:
    states = np.empty((steps + 1, x0.size))
    states[0] = x0
    x = x0
    period = len(pattern)
    for t in range(steps):
        x = _matvec(mats[pattern[t % period]], x)
        states[t + 1] = x
    return states


def simulate_discrete(s: DiscreteSchedule, x0, steps: int) -> Trajectory:
    if steps <= 0:
        raise ValueError("steps must be a positive integer")
    x = _as_state(x0, s.n)
    mats = [p.entries for p in s.graphs]
    return Trajectory(np.arange(steps + 1), _iterate(mats, s.pattern, x, steps), "discrete")


def converged_step(traj: Trajectory, delta: float = CONVERGED_DELTA, run: int = CONVERGED_RUN) -> int | None:
    """First index after which consecutive states stay within ``delta`` for ``run`` steps."""
    diffs = np.abs(np.diff(traj.states, axis=0)).max(axis=1)
    count = 0
    for k, d in enumerate(diffs):
        count = count + 1 if d < delta else 0
        if count >= run:
            return k + 1
    return None


# -- continuous model --------------------------------------------------------


def expm(a: np.ndarray, order: int = 18) -> np.ndarray:
    """Matrix exponential by scaling and squaring a truncated Taylor series.

    The matrix is scaled by ``2**-s`` until its 1-norm is at most 1/2; a series
    of fixed ``order`` is then accurate to roughly machine precision before
    squaring back up.
    """
    a = np.asarray(a, dtype=float)
    n = a.shape[0]
    norm = np.abs(a).sum(axis=0).max() if n else 0.0
    s = max(0, int(math.ceil(math.log2(norm / 0.5)))) if norm > 0.5 else 0
    scaled = a / (2.0**s)
    term = np.eye(n)
    out = np.eye(n)
    for k in range(1, order + 1):
        term = term @ scaled / k
        out = out + term
    for _ in range(s):
        out = out @ out
    return out


def _rk4_step(neg_l: np.ndarray, x: np.ndarray, h: float) -> np.ndarray:
    k1 = neg_l @ x
    k2 = neg_l @ (x + 0.5 * h * k1)
    k3 = neg_l @ (x + 0.5 * h * k2)
    k4 = neg_l @ (x + h * k3)
    return x + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


def _continuous_run(mats, s: ContinuousSchedule, x0, horizon: float, method: str, dt: float):
    if horizon <= 0:
        raise ValueError("horizon must be positive")
    if not dt > 0:
        raise ValueError("dt must be positive")
    if method not in ("exact", "rk4"):
        raise ValueError(f"unknown method {method!r}; use 'exact' or 'rk4'")
    if method == "rk4" and dt > min(tau for _, tau in s.pieces) + DWELL_TOL:
        raise ValueError("dt must not exceed the smallest dwell for the fixed-step integrator")
    times = [0.0]
    states = [x0]
    boundaries = [0]
    x = x0
    t = 0.0
    k = 0
    cache = {}
    while t < horizon - DWELL_TOL:
        g, tau = s.pieces[k % len(s.pieces)]
        tau = min(tau, horizon - t)
        sub = max(1, int(math.ceil(tau / dt - 1e-9)))
        h = tau / sub
        neg = -mats[g]
        if method == "exact":
            key = (g, h)
            if key not in cache:
                cache[key] = expm(neg * h)
            prop = cache[key]
        for m in range(1, sub + 1):
            x = prop @ x if method == "exact" else _rk4_step(neg, x, h)
            times.append(t + m * h)
            states.append(x)
        t += tau
        times[-1] = t
        boundaries.append(len(times) - 1)
        k += 1
    return np.array(times), np.array(states), boundaries


def simulate_continuous(
    s: ContinuousSchedule, x0, horizon: float, method: str = "exact", dt: float = 1e-2
) -> Trajectory:
    """Integrate ``x' = -L x`` piece by piece.

    Each dwell is split into equal substeps no longer than ``dt``; ``exact``
    propagates a substep with the matrix exponential, ``rk4`` with one classical
    Runge-Kutta step.  Both modes therefore sample identical times.  Indices of
    piece boundaries are stored in ``traj.boundaries``.
    """
    x = _as_state(x0, s.n)
    mats = [signed_laplacian(g).entries for g in s.graphs]
    times, states, bounds = _continuous_run(mats, s, x, horizon, method, dt)
    return Trajectory(times, states, "continuous", bounds)


def simulate_lifted(s: DiscreteSchedule | ContinuousSchedule, x0, horizon, method: str = "exact", dt: float = 1e-2):
    """Simulate the doubled system from ``y(0) = (x0, -x0)``.

    Returns the ``y`` trajectory and a report of the largest relative defect
    ``|y_i + y_{n+i}|`` and the largest relative gap between ``y[:n]`` and the
    primal trajectory.
    """
    x = _as_state(x0, s.n)
    y0 = np.concatenate([x, -x])
    if isinstance(s, DiscreteSchedule):
        mats = [lift_stochastic(p).entries for p in s.graphs]
        ys = _iterate(mats, s.pattern, y0, int(horizon))
        ytraj = Trajectory(np.arange(int(horizon) + 1), ys, "discrete")
        primal = simulate_discrete(s, x, int(horizon))
    else:
        mats = [lift_laplacian(g).entries for g in s.graphs]
        times, ys, _ = _continuous_run(mats, s, y0, horizon, method, dt)
        ytraj = Trajectory(times, ys, "continuous")
        primal = simulate_continuous(s, x, horizon, method, dt)
    n = s.n
    ys = ytraj.states
    scale = max(1.0, float(np.abs(ys).max()))
    defect = float(np.abs(ys[:, :n] + ys[:, n:]).max()) / scale
    deviation = float(np.abs(ys[:, :n] - primal.states).max()) / scale
    return ytraj, LiftReport(defect, deviation)


def band_statistics(traj: Trajectory, roots) -> tuple[np.ndarray, np.ndarray]:
    """Per-time largest opinion magnitude over the roots and over everyone else."""
    roots = sorted(set(roots))
    n = traj.states.shape[1]
    rest = [v for v in range(n) if v not in roots]
    if not roots:
        raise ValueError("root set must be nonempty")
    if not rest:
        raise ValueError("root set covers every vertex; no complement to measure")
    mag = np.abs(traj.states)
    return mag[:, roots].max(axis=1), mag[:, rest].max(axis=1)
