"""Low-distortion spanning trees with a prescribed high-degree vertex.

The greedy builder starts from the Euclidean minimum spanning tree (whose
path metric is within a factor m-1 of the original by the minimax-path
property) and, while the maximum degree is below the requirement, moves a
leaf onto the current highest-degree vertex, choosing the move with the
smallest resulting distortion.  For point sets of size <= 8 an exhaustive
scan of all labeled trees is available; it finds the minimum-distortion
tree meeting the degree requirement.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InvariantError

# Batched exhaustive enumeration processes Pruefer sequences in chunks to
# bound peak memory (8**6 trees at m = 8).
_EXHAUSTIVE_MAX = 8
_CHUNK = 1 << 15


@dataclass(frozen=True)
class DistortionTree:
    """A spanning tree on point indices with its measured distortion."""

    edges: tuple[tuple[int, int], ...]
    eta_observed: float
    max_degree_vertex: int
    max_degree: int
    degraded: bool = False

    def to_json(self) -> dict:
        return {
            "edges": [list(e) for e in self.edges],
            "eta_observed": self.eta_observed,
            "max_degree_vertex": self.max_degree_vertex,
            "max_degree": self.max_degree,
            "degraded": self.degraded,
        }


def distance_matrix(points: np.ndarray) -> np.ndarray:
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    diff = pts[:, None, :] - pts[None, :, :]
    return np.sqrt(np.sum(diff * diff, axis=2))


def tree_path_metric(dist: np.ndarray, edges) -> np.ndarray:
    """All-pairs path-sum metric of the tree over the given distances."""
    m = dist.shape[0]
    adj: list[list[int]] = [[] for _ in range(m)]
    for i, j in edges:
        adj[i].append(j)
        adj[j].append(i)
    out = np.zeros((m, m))
    for root in range(m):
        seen = [False] * m
        seen[root] = True
        frontier = [root]
        while frontier:
            nxt = []
            for u in frontier:
                du = out[root, u]
                for v in adj[u]:
                    if not seen[v]:
                        seen[v] = True
                        out[root, v] = du + dist[u, v]
                        nxt.append(v)
            frontier = nxt
        if not all(seen):
            raise InvariantError("edge list does not connect all points")
    return out


def _eta(dist: np.ndarray, rho_t: np.ndarray) -> float:
    m = dist.shape[0]
    iu = np.triu_indices(m, k=1)
    d = dist[iu]
    if np.any(d <= 0.0):
        raise DomainError("points must be pairwise distinct")
    return float(np.max(rho_t[iu] / d))


def _degrees(edges, m: int) -> np.ndarray:
    deg = np.zeros(m, dtype=int)
    for i, j in edges:
        deg[i] += 1
        deg[j] += 1
    return deg


def _canonical(edges) -> tuple[tuple[int, int], ...]:
    return tuple(sorted((min(i, j), max(i, j)) for i, j in edges))


def _mst_edges(dist: np.ndarray) -> list[tuple[int, int]]:
    """Kruskal with ties broken by lexicographic index pair."""
    m = dist.shape[0]
    order = sorted(((dist[i, j], i, j) for i in range(m) for j in range(i + 1, m)))
    parent = list(range(m))

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    edges = []
    for _, i, j in order:
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[ri] = rj
            edges.append((i, j))
            if len(edges) == m - 1:
                break
    return edges


def _check_domination(dist: np.ndarray, rho_t: np.ndarray):
    # Path sums dominate the direct distance up to representation noise.
    slack = 1e-12 * max(1.0, float(dist.max()))
    if np.any(rho_t < dist - slack):
        raise InvariantError("tree path metric fails to dominate the distance")


def _required(m: int, required_degree: int | None) -> int:
    if required_degree is None:
        required_degree = math.ceil(math.log2(m))
    if not 1 <= required_degree <= m - 1:
        raise DomainError(f"required_degree must lie in [1, {m - 1}], got {required_degree}")
    return required_degree


def build_tree(
    points: np.ndarray,
    required_degree: int | None = None,
    eta_budget: float | None = None,
    method: str = "greedy",
) -> DistortionTree:
    """Spanning tree with max degree >= required_degree (default the base-2
    log of the point count) and small observed distortion.

    With an eta_budget, a greedy result over budget falls back to the
    exhaustive scan when feasible; the degraded flag is set only when the
    budget still cannot be met.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    m = pts.shape[0]
    if m < 2:
        raise DomainError("need at least two points")
    need = _required(m, required_degree)
    dist = distance_matrix(pts)
    if np.any(dist[np.triu_indices(m, k=1)] <= 0.0):
        raise DomainError("points must be pairwise distinct")

    if method == "exhaustive":
        edges, eta = _exhaustive_best(dist, need)
    elif method == "greedy":
        edges, eta = _greedy(dist, need)
        if eta_budget is not None and eta > eta_budget and m <= _EXHAUSTIVE_MAX:
            ex_edges, ex_eta = _exhaustive_best(dist, need)
            if ex_eta < eta:
                edges, eta = ex_edges, ex_eta
    else:
        raise DomainError(f"unknown method {method!r}")

    rho_t = tree_path_metric(dist, edges)
    _check_domination(dist, rho_t)
    deg = _degrees(edges, m)
    hub = int(np.argmax(deg))
    degraded = eta_budget is not None and eta > eta_budget
    return DistortionTree(
        edges=_canonical(edges),
        eta_observed=eta,
        max_degree_vertex=hub,
        max_degree=int(deg[hub]),
        degraded=degraded,
    )


def _greedy(dist: np.ndarray, need: int) -> tuple[list[tuple[int, int]], float]:
    m = dist.shape[0]
    edges = _mst_edges(dist)
    eta = _eta(dist, tree_path_metric(dist, edges))
    while True:
        deg = _degrees(edges, m)
        hub = int(np.argmax(deg))
        if deg[hub] >= need:
            return edges, eta
        neighbor = {}
        for i, j in edges:
            if deg[i] == 1:
                neighbor[i] = j
            if deg[j] == 1:
                neighbor[j] = i
        movable = sorted(l for l, nb in neighbor.items() if l != hub and nb != hub)
        if not movable:
            raise InvariantError("no movable leaf although the tree is not a star")
        best = None
        for leaf in movable:
            trial = [e for e in edges if leaf not in e]
            trial.append((min(leaf, hub), max(leaf, hub)))
            trial_eta = _eta(dist, tree_path_metric(dist, trial))
            if best is None or trial_eta < best[0]:
                best = (trial_eta, leaf, trial)
        eta, _, edges = best


def _all_pruefer(m: int, lo: int, hi: int) -> np.ndarray:
    """Pruefer sequences with lexicographic ranks in [lo, hi)."""
    ranks = np.arange(lo, hi, dtype=np.int64)
    seq = np.empty((ranks.size, m - 2), dtype=np.int64)
    for pos in range(m - 2 - 1, -1, -1):
        seq[:, pos] = ranks % m
        ranks //= m
    return seq


def _decode_pruefer(seq: np.ndarray, m: int) -> np.ndarray:
    """Batched standard decode; returns edges of shape (B, m-1, 2)."""
    b = seq.shape[0]
    rows = np.arange(b)
    degree = np.ones((b, m), dtype=np.int64)
    np.add.at(degree, (np.repeat(rows, m - 2), seq.ravel()), 1)
    edges = np.empty((b, m - 1, 2), dtype=np.int64)
    for pos in range(m - 2):
        leaf = np.argmax(degree == 1, axis=1)
        v = seq[:, pos]
        edges[:, pos, 0] = leaf
        edges[:, pos, 1] = v
        degree[rows, leaf] -= 1
        degree[rows, v] -= 1
    first = np.argmax(degree == 1, axis=1)
    degree[rows, first] = 0
    second = np.argmax(degree == 1, axis=1)
    edges[:, m - 2, 0] = first
    edges[:, m - 2, 1] = second
    return edges


def _batch_path_metric(edges: np.ndarray, dist: np.ndarray) -> np.ndarray:
    b, _, _ = edges.shape
    m = dist.shape[0]
    rows = np.arange(b)
    big = float(dist.max()) * (m + 1.0) + 1.0
    d = np.full((b, m, m), big)
    d[:, np.arange(m), np.arange(m)] = 0.0
    for t in range(m - 1):
        i = edges[:, t, 0]
        j = edges[:, t, 1]
        w = dist[i, j]
        d[rows, i, j] = w
        d[rows, j, i] = w
    for mid in range(m):
        np.minimum(d, d[:, :, mid, None] + d[:, mid, None, :], out=d)
    return d


def _exhaustive_best(dist: np.ndarray, need: int) -> tuple[list[tuple[int, int]], float]:
    """Minimum observed distortion over every labeled tree whose maximum
    degree meets the requirement; first such tree in Pruefer order wins
    ties."""
    m = dist.shape[0]
    if m > _EXHAUSTIVE_MAX:
        raise DomainError(f"exhaustive search is limited to {_EXHAUSTIVE_MAX} points")
    if m == 2:
        return [(0, 1)], 1.0
    iu = np.triu_indices(m, k=1)
    direct = dist[iu]
    total = m ** (m - 2)
    best_eta = math.inf
    best_edges: np.ndarray | None = None
    for lo in range(0, total, _CHUNK):
        seq = _all_pruefer(m, lo, min(lo + _CHUNK, total))
        # Vertex degree is its count in the sequence plus one.
        counts = np.zeros((seq.shape[0], m), dtype=np.int64)
        np.add.at(counts, (np.repeat(np.arange(seq.shape[0]), m - 2), seq.ravel()), 1)
        ok = counts.max(axis=1) + 1 >= need
        if not np.any(ok):
            continue
        edges = _decode_pruefer(seq[ok], m)
        rho_t = _batch_path_metric(edges, dist)
        etas = np.max(rho_t[:, iu[0], iu[1]] / direct, axis=1)
        idx = int(np.argmin(etas))
        if float(etas[idx]) < best_eta:
            best_eta = float(etas[idx])
            best_edges = edges[idx]
    if best_edges is None:
        raise InvariantError("no labeled tree meets the degree requirement")
    return [(int(i), int(j)) for i, j in best_edges], best_eta
