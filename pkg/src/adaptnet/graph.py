"""Directed sensor-network graphs: construction, balancing, reachability.

Convention: ``sensing_weights[i, j]`` is the weight agent ``i`` places on
information received *from* agent ``j`` (row = receiver). Information flows
from the source through source links and then along sensing edges j -> i.
Agents are 1-based in the edge-list API, 0-based in the stored arrays.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GraphError
from .linalg import eigenvalues

BALANCE_TOL = 1e-12


@dataclass(frozen=True)
class SensorNetwork:
    """Immutable weighted digraph of m sensing agents plus source links."""

    m: int
    sensing_weights: np.ndarray  # (m, m), zero diagonal, nonnegative
    source_weights: np.ndarray  # (m,), nonnegative

    def __post_init__(self):
        w = np.asarray(self.sensing_weights, dtype=float)
        w0 = np.asarray(self.source_weights, dtype=float)
        if w.shape != (self.m, self.m) or w0.shape != (self.m,):
            raise GraphError(
                f"weight shapes {w.shape}/{w0.shape} do not match m={self.m}"
            )
        if np.any(w < 0) or np.any(w0 < 0):
            raise GraphError("negative weights are not allowed")
        if np.any(np.diag(w) != 0):
            raise GraphError("self-loops (nonzero diagonal) are not allowed")
        if not np.any(w0 > 0):
            raise GraphError("at least one agent must have a source link")
        object.__setattr__(self, "sensing_weights", w)
        object.__setattr__(self, "source_weights", w0)

    @property
    def in_degrees(self) -> np.ndarray:
        return self.sensing_weights.sum(axis=1)

    @property
    def total_weights(self) -> np.ndarray:
        return self.in_degrees + self.source_weights

    def is_balanced(self, tol: float = BALANCE_TOL) -> bool:
        return bool(np.all(np.abs(self.total_weights - 1.0) <= tol))


@dataclass(frozen=True)
class LaplacianBundle:
    """Adjacency/Laplacian matrices of a balanced network plus its spectrum."""

    adjacency_m: np.ndarray  # sensing adjacency
    adjacency_0: np.ndarray  # diag of source weights
    total_weight: np.ndarray  # diag of total incoming weights
    laplacian: np.ndarray  # total_weight - adjacency_m
    min_real_eig: float
    positive_stable: bool


def build_network(sensing_edges, source_edges, m: int) -> SensorNetwork:
    """Build a network from explicit edge lists (agents numbered 1..m).

    ``sensing_edges`` holds (i, j, weight) triples meaning "agent i listens to
    agent j"; ``source_edges`` holds (i, weight) pairs. Self-loops, indices
    outside 1..m, nonpositive weights and duplicate edges are rejected with an
    error naming the offending edge.
    """
    if m < 1:
        raise GraphError(f"agent count must be >= 1, got {m}")
    w = np.zeros((m, m))
    w0 = np.zeros(m)
    for i, j, weight in sensing_edges:
        if not (1 <= i <= m and 1 <= j <= m):
            raise GraphError(f"sensing edge ({i},{j}) has an index outside 1..{m}")
        if i == j:
            raise GraphError(f"sensing edge ({i},{j}) is a self-loop")
        if weight <= 0:
            raise GraphError(f"sensing edge ({i},{j}) has nonpositive weight {weight}")
        if w[i - 1, j - 1] != 0:
            raise GraphError(f"duplicate sensing edge ({i},{j})")
        w[i - 1, j - 1] = weight
    for i, weight in source_edges:
        if not 1 <= i <= m:
            raise GraphError(f"source edge ({i}) has an index outside 1..{m}")
        if weight <= 0:
            raise GraphError(f"source edge ({i}) has nonpositive weight {weight}")
        if w0[i - 1] != 0:
            raise GraphError(f"duplicate source edge ({i})")
        w0[i - 1] = weight
    return SensorNetwork(m=m, sensing_weights=w, source_weights=w0)


def normalize_balanced(net: SensorNetwork) -> SensorNetwork:
    """Rescale every row so total incoming weight is exactly 1 (idempotent)."""
    totals = net.total_weights
    isolated = np.nonzero(totals <= 0)[0]
    if isolated.size:
        raise GraphError(f"agent {isolated[0] + 1} has no incoming weight at all")
    return SensorNetwork(
        m=net.m,
        sensing_weights=net.sensing_weights / totals[:, None],
        source_weights=net.source_weights / totals,
    )


def check_source_reachability(net: SensorNetwork) -> bool:
    """BFS from the source along the information-flow direction."""
    visited = set(np.nonzero(net.source_weights > 0)[0].tolist())
    frontier = list(visited)
    w = net.sensing_weights
    while frontier:
        j = frontier.pop()
        for i in np.nonzero(w[:, j] > 0)[0]:
            if i not in visited:
                visited.add(int(i))
                frontier.append(int(i))
    return len(visited) == net.m


def laplacian_bundle(net: SensorNetwork) -> LaplacianBundle:
    """Assemble adjacency and augmented-Laplacian matrices with spectrum check.

    Requires a balanced, source-reachable network; positive stability of the
    Laplacian is verified numerically rather than assumed.
    """
    if not net.is_balanced():
        raise GraphError(
            "network is not balanced (row sums differ from 1); "
            "call normalize_balanced first"
        )
    if not check_source_reachability(net):
        raise GraphError("not every agent is reachable from the source")
    a_m = net.sensing_weights.copy()
    a_0 = np.diag(net.source_weights)
    w_tot = np.diag(net.total_weights)
    lap = w_tot - a_m
    min_re = eigenvalues(lap).min_real_part
    return LaplacianBundle(
        adjacency_m=a_m,
        adjacency_0=a_0,
        total_weight=w_tot,
        laplacian=lap,
        min_real_eig=min_re,
        positive_stable=bool(min_re > 1e-10),
    )


# Built-in topologies. At m=4 these reproduce the benchmark weight assignments
# exactly; for other m they extend in the natural way.


def star_network(m: int) -> SensorNetwork:
    """Every agent listens to the source only, weight 1."""
    return build_network([], [(i, 1.0) for i in range(1, m + 1)], m)


def cyclic_network(m: int, ring_weight: float = 0.3) -> SensorNetwork:
    """Bidirectional ring with equal ring weights plus a uniform source link.

    Source weight is 1 - 2*ring_weight so the balanced condition holds by
    construction. For m = 2 the two ring directions reach the same neighbor
    and merge into a single edge of double weight.
    """
    if not 0 < ring_weight < 0.5:
        raise GraphError(f"ring weight must lie in (0, 0.5), got {ring_weight}")
    src = 1.0 - 2.0 * ring_weight
    if m == 1:
        return build_network([], [(1, 1.0)], 1)
    edges = []
    if m == 2:
        edges = [(1, 2, 2 * ring_weight), (2, 1, 2 * ring_weight)]
    else:
        for i in range(1, m + 1):
            nxt = i % m + 1
            prv = (i - 2) % m + 1
            edges.append((i, nxt, ring_weight))
            edges.append((i, prv, ring_weight))
    return build_network(edges, [(i, src) for i in range(1, m + 1)], m)


def path_network(m: int) -> SensorNetwork:
    """Directed chain source -> 1 -> 2 -> ... -> m, all weights 1.

    The chain is directed forward; a backward edge would break the balanced
    condition given the unit source link on agent 1.
    """
    edges = [(i, i - 1, 1.0) for i in range(2, m + 1)]
    return build_network(edges, [(1, 1.0)], m)


BUILTIN_TOPOLOGIES = {
    "star": star_network,
    "cyclic": cyclic_network,
    "path": path_network,
}
