"""System matrices: trust matrices, signed Laplacians, their 2n-dimensional lifts,
and the spanning-tree block form.

The lift doubles the state to ``y = (x, -x)``.  With ``P = P+ - P-`` the signed
update becomes the nonnegative one ``y' = [[P+, P-], [P-, P+]] y``; likewise the
signed Laplacian becomes an ordinary Laplacian on ``2n`` vertices.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from polaris.signed_graph import SignedDigraph, root_vertex_set, scc_decompose

ROW_SUM_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class TrustMatrix:
    """Update matrix ``P`` of the discrete model: positive diagonal, ``|P|`` row-stochastic."""

    entries: np.ndarray

    def __post_init__(self):
        p = np.array(self.entries, dtype=float)
        if p.ndim != 2 or p.shape[0] != p.shape[1]:
            raise ValueError(f"trust matrix must be square, got shape {p.shape}")
        if not np.all(np.isfinite(p)):
            raise ValueError("trust matrix has non-finite entries")
        diag = np.diag(p)
        if np.any(diag <= 0):
            bad = int(np.argmin(diag))
            raise ValueError(f"diagonal entry p[{bad},{bad}]={diag[bad]} must be positive")
        sums = np.abs(p).sum(axis=1)
        worst = int(np.argmax(np.abs(sums - 1.0)))
        if abs(sums[worst] - 1.0) > ROW_SUM_TOL:
            raise ValueError(f"row {worst} of |P| sums to {sums[worst]!r}, not 1")
        p.setflags(write=False)
        object.__setattr__(self, "entries", p)

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    @property
    def graph(self) -> SignedDigraph:
        return SignedDigraph.from_matrix(self.entries)

    def min_nonzero_magnitude(self) -> float:
        a = np.abs(self.entries)
        return float(a[a > 0].min())


@dataclass(frozen=True, eq=False)
class SignedLaplacian:
    entries: np.ndarray

    def __post_init__(self):
        m = np.array(self.entries, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"Laplacian must be square, got shape {m.shape}")
        off = m - np.diag(np.diag(m))
        if not np.allclose(np.diag(m), np.abs(off).sum(axis=1), rtol=0, atol=1e-12):
            raise ValueError("diagonal must equal the sum of off-diagonal magnitudes")
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    @property
    def graph(self) -> SignedDigraph:
        # l_ij = -a_ij off the diagonal
        return SignedDigraph.from_matrix(-self.entries)


@dataclass(frozen=True, eq=False)
class LiftedStochastic:
    entries: np.ndarray

    @property
    def n(self) -> int:
        return self.entries.shape[0] // 2


@dataclass(frozen=True, eq=False)
class LiftedLaplacian:
    entries: np.ndarray

    @property
    def n(self) -> int:
        return self.entries.shape[0] // 2


@dataclass(frozen=True, eq=False)
class TreeCanonicalForm:
    """Relabelling that puts the root component first and the rest in topological order.

    ``permutation[k]`` is the original index of the vertex placed at position ``k``,
    so the permuted matrix is ``m[np.ix_(permutation, permutation)]``.
    """

    permutation: tuple[int, ...]
    root_block: np.ndarray
    coupling: np.ndarray
    tail: np.ndarray
    r: int

    @property
    def matrix(self) -> np.ndarray:
        n = len(self.permutation)
        out = np.zeros((n, n))
        out[: self.r, : self.r] = self.root_block
        out[self.r :, : self.r] = self.coupling
        out[self.r :, self.r :] = self.tail
        return out

    @property
    def roots(self) -> tuple[int, ...]:
        return self.permutation[: self.r]

    def restore(self) -> np.ndarray:
        """Undo the relabelling, recovering the input matrix."""
        inv = np.argsort(self.permutation)
        return self.matrix[np.ix_(inv, inv)]


def weights_to_trust_matrix(g: SignedDigraph, self_weights: Sequence[float] | None = None) -> TrustMatrix:
    """Normalize raw weights: ``p_ij = a_ij / (a_ii + sum_k |a_ik|)``.

    ``self_weights`` defaults to 1.0 for every agent.
    """
    if self_weights is None:
        self_weights = np.ones(g.n)
    w = np.asarray(self_weights, dtype=float)
    if w.shape != (g.n,):
        raise ValueError(f"expected {g.n} self weights, got shape {w.shape}")
    if np.any(~(w > 0)):
        raise ValueError("self weight must be positive")
    a = g.adjacency()
    denom = w + np.abs(a).sum(axis=1)
    p = a / denom[:, None]
    p[np.diag_indices(g.n)] = w / denom
    # renormalize rounding so |P| rows hit 1 within tolerance
    p /= np.abs(p).sum(axis=1)[:, None]
    return TrustMatrix(p)


def split_signs(m) -> tuple[np.ndarray, np.ndarray]:
    m = np.asarray(m, dtype=float)
    return np.where(m > 0, m, 0.0), np.where(m < 0, -m, 0.0)


def lift_stochastic(p: TrustMatrix) -> LiftedStochastic:
    pos, neg = split_signs(p.entries)
    return LiftedStochastic(np.block([[pos, neg], [neg, pos]]))


def signed_laplacian(g: SignedDigraph) -> SignedLaplacian:
    a = g.adjacency()
    lap = -a
    lap[np.diag_indices(g.n)] = np.abs(a).sum(axis=1)
    return SignedLaplacian(lap)


def lift_laplacian(g: SignedDigraph) -> LiftedLaplacian:
    a = g.adjacency()
    pos, neg = split_signs(a)
    d = np.diag(np.abs(a).sum(axis=1))
    zero = np.zeros_like(d)
    return LiftedLaplacian(np.block([[d, zero], [zero, d]]) - np.block([[pos, neg], [neg, pos]]))


def tree_canonical_form(m: TrustMatrix | SignedLaplacian) -> TreeCanonicalForm:
    """Block lower-triangular form with the irreducible root block first.

    Raises NoSpanningTree when the associated graph has several source components.
    """
    g = m.graph
    roots = root_vertex_set(g)
    perm = sorted(roots)
    for comp in scc_decompose(g).components:
        if comp != roots:
            perm.extend(sorted(comp))
    r = len(roots)
    pm = m.entries[np.ix_(perm, perm)]
    return TreeCanonicalForm(
        permutation=tuple(perm),
        root_block=pm[:r, :r].copy(),
        coupling=pm[r:, :r].copy(),
        tail=pm[r:, r:].copy(),
        r=r,
    )
