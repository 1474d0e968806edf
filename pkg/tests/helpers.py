"""Independent oracles and fixtures shared by the test modules."""

from __future__ import annotations

import itertools

import numpy as np

from polaris.lift import TrustMatrix, weights_to_trust_matrix
from polaris.signed_graph import SignedDigraph

# printed six-agent example matrices (0-based agents)
P1 = np.array(
    [
        [1 / 2, 0, -1 / 2, 0, 0, 0],
        [0, 1 / 2, -1 / 2, 0, 0, 0],
        [-1 / 3, -1 / 3, 1 / 3, 0, 0, 0],
        [0, 1 / 4, 1 / 4, 1 / 4, -1 / 4, 0],
        [0, 0, 1 / 2, 0, 1 / 2, 0],
        [0, 0, 0, 1 / 3, 1 / 3, 1 / 3],
    ]
)
P2 = np.array(
    [
        [1 / 3, 1 / 3, -1 / 3, 0, 0, 0],
        [1 / 2, 1 / 2, 0, 0, 0, 0],
        [-1 / 2, 0, 1 / 2, 0, 0, 0],
        [0, 1 / 3, 0, 1 / 3, -1 / 3, 0],
        [0, 0, 1 / 2, 0, 1 / 2, 0],
        [0, 0, 0, -1 / 3, 1 / 3, 1 / 3],
    ]
)
X0 = np.array([0.9, 0.7, -0.9, -1, 0.2, 0.9])

# hand solution of xi^T Q1 = xi^T for Q1 = [[1/2,0,1/2],[0,1/2,1/2],[1/3,1/3,1/3]]:
# xi0 = xi1 by symmetry, xi0/2 + xi2/3 = xi0 -> xi2 = 3/2 xi0, sum 1 -> xi0 = 2/7
XI_P1 = np.array([2 / 7, 2 / 7, 3 / 7])
C_P1 = 5.9 / 7
# tail fixed point: x4 = (x2 + x4)/2 -> x4 = -C; 4 x3 = C - C + x3 - x4 -> x3 = C/3;
# 3 x5 = x3 + x4 + x5 -> x5 = -C/3
LIMIT_P1 = np.array([C_P1, C_P1, -C_P1, C_P1 / 3, -C_P1, -C_P1 / 3])


def p1() -> TrustMatrix:
    return TrustMatrix(P1)


def p2() -> TrustMatrix:
    return TrustMatrix(P2)


def triangle_one_negative() -> SignedDigraph:
    return SignedDigraph(3, {(1, 0): 1.0, (2, 1): 1.0, (0, 2): -1.0})


def brute_partitions(g: SignedDigraph, vertices=None):
    """Every (set_one, set_two) split of ``vertices`` satisfying the balance rule."""
    vs = sorted(range(g.n) if vertices is None else vertices)
    out = []
    for bits in itertools.product((0, 1), repeat=len(vs)):
        side = dict(zip(vs, bits))
        ok = True
        for (i, j), w in g.edges.items():
            if i in side and j in side and (side[i] == side[j]) != (w > 0):
                ok = False
                break
        if ok:
            out.append((frozenset(v for v in vs if side[v] == 0), frozenset(v for v in vs if side[v] == 1)))
    return out


def reach(g: SignedDigraph) -> np.ndarray:
    """Boolean reachability (influence direction), reflexive, by repeated boolean squaring."""
    n = g.n
    r = np.eye(n, dtype=bool)
    for (i, j) in g.edges:
        r[j, i] = True
    for _ in range(int(np.ceil(np.log2(max(n, 2)))) + 1):
        r = r | ((r.astype(int) @ r.astype(int)) > 0)
    return r


def brute_sccs(g: SignedDigraph) -> set[frozenset[int]]:
    r = reach(g)
    return {frozenset(j for j in range(g.n) if r[i, j] and r[j, i]) for i in range(g.n)}


def random_strongly_connected(rng, n, balanced, density=0.3, wlo=0.5, whi=1.5) -> SignedDigraph:
    """Hamiltonian cycle plus random extra edges; at least one negative edge.

    ``balanced=True`` draws signs from a random two-sided partition; otherwise
    signs are random and resampled until the graph is unbalanced.
    """
    while True:
        perm = rng.permutation(n)
        pairs = {(int(perm[(k + 1) % n]), int(perm[k])) for k in range(n)}
        for i in range(n):
            for j in range(n):
                if i != j and rng.random() < density:
                    pairs.add((i, j))
        mags = {p: rng.uniform(wlo, whi) for p in pairs}
        if balanced:
            side = rng.integers(0, 2, n)
            side[0], side[1 + rng.integers(n - 1)] = 0, 1
            edges = {(i, j): m if side[i] == side[j] else -m for (i, j), m in mags.items()}
        else:
            edges = {p: m * (1 if rng.random() < 0.5 else -1) for p, m in mags.items()}
        g = SignedDigraph(n, edges)
        if not g.has_negative_edge():
            continue
        if bool(brute_partitions(g)) == bool(balanced):
            return g


def random_tree_graph(rng, r, tail, wlo=0.5, whi=1.5) -> tuple[SignedDigraph, list[int]]:
    """Balanced strongly connected root block on ``0..r-1`` plus a tail reachable from it.

    Tail signs are random, so the whole graph is usually unbalanced.
    """
    root = random_strongly_connected(rng, r, balanced=True, wlo=wlo, whi=whi)
    n = r + tail
    edges = dict(root.edges)
    for v in range(r, n):
        src = int(rng.integers(0, v))
        edges[(v, src)] = rng.uniform(wlo, whi) * rng.choice([-1, 1])
        for u in range(r, n):
            if u != v and (v, u) not in edges and rng.random() < 0.3:
                edges[(v, u)] = rng.uniform(wlo, whi) * rng.choice([-1, 1])
    # shuffle labels so the root block is not already first
    perm = rng.permutation(n)
    g = SignedDigraph(n, {(int(perm[i]), int(perm[j])): w for (i, j), w in edges.items()})
    return g, sorted(int(perm[k]) for k in range(r))


def trust(g: SignedDigraph, rng=None) -> TrustMatrix:
    w = None if rng is None else rng.uniform(0.5, 1.5, g.n)
    return weights_to_trust_matrix(g, w)
