"""Closed-form asymptotics and outcome classification.

For a fixed graph with a spanning tree whose root block is balanced, the lifted
matrix reorders into

    [[Q1, 0,  0  ],
     [0,  Q1, 0  ],
     [Q31, Q32, Q33]]

and its powers converge to a rank-two projector built from the stationary
vector of ``Q1`` and two absorption vectors.  The continuous model is handled by
uniformizing the lifted Laplacian ``W`` into ``I - eps*W``, which has the same
limit projector.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from polaris.dynamics import ContinuousSchedule, DiscreteSchedule
from polaris.lift import (
    SignedLaplacian,
    TreeCanonicalForm,
    TrustMatrix,
    lift_laplacian,
    lift_stochastic,
    tree_canonical_form,
)
from polaris.signed_graph import (
    BalancePartition,
    NoSpanningTree,
    SignedDigraph,
    check_balance,
    common_bipartition,
    is_strongly_connected,
    root_vertex_set,
    union_digraph,
    union_graphs,
)

POLARIZE = "polarize"
NEUTRALIZE = "neutralize"
CLUSTER = "cluster"
CONSENSUS = "consensus"
INCONCLUSIVE = "inconclusive"

STATIONARY_CHECK_TOL = 1e-12
SPECTRAL_MARGIN = 1e-12


class PreconditionError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class StationaryData:
    xi: np.ndarray
    eta1: np.ndarray
    eta2: np.ndarray
    limit_matrix: np.ndarray
    r: int


@dataclass(frozen=True, eq=False)
class OutcomePrediction:
    kind: str
    justification: str
    partition: BalancePartition | None = None
    roots: frozenset[int] | None = None
    magnitude: float | None = None
    value: float | None = None
    reason: str | None = None
    predicted_limit: np.ndarray | None = None

    @property
    def band(self) -> tuple[float, float] | None:
        if self.kind == CLUSTER and self.magnitude is not None:
            return (-self.magnitude, self.magnitude)
        return None


def _check_stochastic(q: np.ndarray, what: str) -> None:
    if q.ndim != 2 or q.shape[0] != q.shape[1]:
        raise PreconditionError(f"{what} must be square")
    if np.any(q < 0):
        raise PreconditionError(f"{what} has negative entries")
    if not np.allclose(q.sum(axis=1), 1.0, rtol=0, atol=1e-10):
        raise PreconditionError(f"{what} is not row-stochastic")


def stationary_left_vector(q1) -> np.ndarray:
    """Normalized nonnegative left fixed vector of an irreducible stochastic matrix.

    Solved directly from ``(Q1^T - I) xi = 0, sum(xi) = 1`` and cross-checked
    against a row of ``Q1^(2^k)`` obtained by repeated squaring.
    """
    q1 = np.asarray(q1, dtype=float)
    _check_stochastic(q1, "root block")
    r = q1.shape[0]
    if np.any(np.diag(q1) <= 0):
        raise PreconditionError("root block needs a positive diagonal")
    if r > 1 and not is_strongly_connected(SignedDigraph.from_matrix(q1)):
        raise PreconditionError("root block is reducible")
    a = np.vstack([q1.T - np.eye(r), np.ones((1, r))])
    b = np.zeros(r + 1)
    b[-1] = 1.0
    xi, *_ = np.linalg.lstsq(a, b, rcond=None)

    m = q1
    for _ in range(64):
        nxt = m @ m
        nxt /= nxt.sum(axis=1)[:, None]
        done = np.abs(nxt - m).max() < 1e-15
        m = nxt
        if done:
            break
    gap = np.abs(m - xi[None, :]).max()
    if gap > STATIONARY_CHECK_TOL:
        raise RuntimeError(f"direct solve and powering disagree by {gap:.3e}")
    return np.clip(xi, 0.0, None)


def two_block_limit(q, r: int) -> StationaryData:
    """``lim Q^k`` for a stochastic ``Q`` with two identical decoupled ``r x r`` blocks first.

    Requires the trailing block to have spectral radius below one.
    """
    q = np.asarray(q, dtype=float)
    _check_stochastic(q, "lifted matrix")
    s = q.shape[0]
    if not (0 < r and 2 * r <= s):
        raise PreconditionError(f"block size {r} incompatible with dimension {s}")
    q1, q2 = q[:r, :r], q[r : 2 * r, r : 2 * r]
    if np.any(q[:r, r:] != 0) or np.any(q[r : 2 * r, :r] != 0) or np.any(q[r : 2 * r, 2 * r :] != 0):
        raise PreconditionError("leading blocks are coupled; root block is not structurally balanced")
    if not np.allclose(q1, q2, rtol=0, atol=1e-14):
        raise PreconditionError("the two leading blocks differ")
    q31, q32, q33 = q[2 * r :, :r], q[2 * r :, r : 2 * r], q[2 * r :, 2 * r :]
    t = s - 2 * r
    if t:
        rho = np.abs(np.linalg.eigvals(q33)).max()
        if rho >= 1 - SPECTRAL_MARGIN:
            raise PreconditionError(f"trailing block has spectral radius {rho:.6g} >= 1")
    xi = stationary_left_vector(q1)
    ones = np.ones(r)
    if t:
        lhs = np.eye(t) - q33
        eta1 = np.linalg.solve(lhs, q31 @ ones)
        eta2 = np.linalg.solve(lhs, q32 @ ones)
    else:
        eta1 = eta2 = np.zeros(0)
    lim = np.zeros((s, s))
    lim[:r, :r] = np.outer(ones, xi)
    lim[r : 2 * r, r : 2 * r] = np.outer(ones, xi)
    lim[2 * r :, :r] = np.outer(eta1, xi)
    lim[2 * r :, r : 2 * r] = np.outer(eta2, xi)
    return StationaryData(xi, eta1, eta2, lim, r)


def lifted_block_order(form: TreeCanonicalForm, partition: BalancePartition) -> list[int]:
    """Ordering of the ``2n`` lifted indices that exposes the two decoupled root blocks.

    First block: ``i+`` for roots on side one and ``i-`` for side two, in root
    order; second block mirrors it; then ``+`` and ``-`` copies of the tail.
    """
    n = len(form.permutation)
    roots = form.roots
    tail = form.permutation[form.r :]
    first = [i if partition.side(i) > 0 else n + i for i in roots]
    second = [n + i if partition.side(i) > 0 else i for i in roots]
    return first + second + list(tail) + [n + i for i in tail]


def polarization_magnitude(xi, x_roots, sides) -> float:
    """``|xi . (x_roots with side-two entries negated)|``."""
    flipped = [x if s > 0 else -x for x, s in zip(x_roots, sides)]
    return abs(float(np.dot(xi, flipped)))


def _root_partition(g: SignedDigraph, roots) -> BalancePartition | None:
    sub, labels = g.subgraph(roots)
    part = check_balance(sub)
    if part is None:
        return None
    return BalancePartition(
        frozenset(labels[v] for v in part.set_one), frozenset(labels[v] for v in part.set_two)
    )


def _lifted_chain(m: TrustMatrix | SignedLaplacian) -> np.ndarray:
    if isinstance(m, TrustMatrix):
        return lift_stochastic(m).entries
    w = lift_laplacian(m.graph).entries
    eps = 1.0 / (1.0 + np.diag(w).max())
    return np.eye(w.shape[0]) - eps * w


def fixed_limit(m: TrustMatrix | SignedLaplacian) -> tuple[StationaryData, list[int], BalancePartition, TreeCanonicalForm]:
    """Lifted limit data for a fixed system whose root block is balanced."""
    form = tree_canonical_form(m)
    part = _root_partition(m.graph, form.roots)
    if part is None:
        raise PreconditionError("root block is structurally unbalanced; the lifted limit is zero")
    order = lifted_block_order(form, part)
    q = _lifted_chain(m)
    return two_block_limit(q[np.ix_(order, order)], form.r), order, part, form


def predict_fixed(m: TrustMatrix | SignedLaplacian, x0) -> OutcomePrediction:
    continuous = isinstance(m, SignedLaplacian)
    g = m.graph
    n = g.n
    x0 = np.asarray(x0, dtype=float)
    try:
        roots = root_vertex_set(g)
    except NoSpanningTree as exc:
        return OutcomePrediction(INCONCLUSIVE, "none", reason=f"no spanning tree: {exc}")
    tag = "T7" if continuous else ("T1" if len(roots) == n else "T2")
    if _root_partition(g, roots) is None:
        return OutcomePrediction(NEUTRALIZE, tag, roots=roots, magnitude=0.0, predicted_limit=np.zeros(n))

    data, order, part, form = fixed_limit(m)
    y0 = np.concatenate([x0, -x0])
    y_lim = np.empty(2 * n)
    y_lim[order] = data.limit_matrix @ y0[order]
    x_lim = y_lim[:n]
    sides = [part.side(i) for i in form.roots]
    c = polarization_magnitude(data.xi, x0[list(form.roots)], sides)

    if not g.has_negative_edge():
        value = float(np.dot(data.xi, x0[list(form.roots)]))
        return OutcomePrediction(
            CONSENSUS, "consensus", roots=roots, magnitude=abs(value), value=value, predicted_limit=x_lim
        )
    whole = check_balance(g)
    if whole is not None and whole.set_two:
        return OutcomePrediction(POLARIZE, tag, partition=whole, roots=roots, magnitude=c, predicted_limit=x_lim)
    return OutcomePrediction(CLUSTER, tag, partition=part, roots=roots, magnitude=c, predicted_limit=x_lim)


def classify_switching(s: DiscreteSchedule | ContinuousSchedule) -> OutcomePrediction:
    """Qualitative outcome of a switching schedule from joint-connectivity conditions.

    Connectivity is checked on the union over each window; the bipartition for
    polarization must hold for every graph over all time, so it is sought on the
    all-time union restricted to the common root set.
    """
    continuous = isinstance(s, ContinuousSchedule)
    graphs = list(s.graphs) if continuous else [p.graph for p in s.graphs]
    windows = s.windows()

    window_unions = []
    window_roots = []
    for k, idx in enumerate(windows):
        u = union_graphs([graphs[i] for i in sorted(set(idx))])
        try:
            roots = root_vertex_set(union_digraph(u))
        except NoSpanningTree:
            return OutcomePrediction(INCONCLUSIVE, "none", reason=f"union over window {k} has no spanning tree")
        window_unions.append(u)
        window_roots.append(roots)
    all_strong = all(len(r) == s.n for r in window_roots)

    everything = union_graphs(graphs)
    try:
        roots = root_vertex_set(union_digraph(everything))
    except NoSpanningTree:
        return OutcomePrediction(INCONCLUSIVE, "none", reason="all-time union has no spanning tree")
    common = common_bipartition(everything, roots)

    if common is None:
        blocked = [common_bipartition(u, r) is None for u, r in zip(window_unions, window_roots)]
        if all(blocked):
            tag = "T9" if continuous else ("T4" if all_strong else "T6")
            return OutcomePrediction(NEUTRALIZE, tag, roots=roots)
        k = blocked.index(False)
        return OutcomePrediction(
            INCONCLUSIVE,
            "none",
            roots=roots,
            reason=f"no bipartition over all time, but window {k} admits one on its root set",
        )

    for k, r in enumerate(window_roots):
        if r != roots:
            return OutcomePrediction(
                INCONCLUSIVE,
                "none",
                roots=roots,
                reason=f"root set of window {k} is {sorted(r)}, not the all-time root set {sorted(roots)}",
            )
    if not any(g.has_negative_edge() for g in graphs):
        return OutcomePrediction(CONSENSUS, "consensus", roots=roots)
    tag = "T8" if continuous else ("T3" if all_strong else "T5")
    whole = common_bipartition(everything, range(s.n))
    if whole is not None and whole.set_two:
        return OutcomePrediction(POLARIZE, tag, partition=whole, roots=roots)
    return OutcomePrediction(CLUSTER, tag, partition=common, roots=roots)
