# connectivity.py
#
# Strong connectivity, vertex connectivity and Menger path systems for tournaments.
# Vertex capacities are enforced on a split network: every vertex v becomes an
# in-half (2i) and an out-half (2i + 1) joined by a unit-capacity arc, and every
# tournament arc u -> v becomes out(u) -> in(v). Maximum flows are computed with
# scipy's compiled solvers; path systems are read back lowest-id first so they
# are reproducible from run to run.

import logging
from dataclasses import dataclass
from typing import FrozenSet, Iterable, List, Optional, Tuple

import networkx as nx
import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import breadth_first_order, maximum_flow

from tournament import Tournament, TournamentInputError

Path = Tuple[int, ...]


class UncuttablePair(ValueError):
    """Raised when a vertex cut is requested for a pair joined by an arc."""


@dataclass(frozen=True)
class CutWitness:
    separator: FrozenSet[int]
    side_from: FrozenSet[int]
    side_to: FrozenSet[int]


# --- Flow network plumbing ---

def _in(i: int) -> int:
    return 2 * i


def _out(i: int) -> int:
    return 2 * i + 1


class SplitNetwork:
    """
    The vertex-split flow network of a tournament. Arc capacities are n so that
    every minimum cut consists of unit vertex arcs only.
    For set routing, arcs into source vertices are dropped, sink vertices lose
    their in -> out arc, and a super source and super sink are attached.
    """

    def __init__(self, tournament: Tournament, sources: Iterable[int] = (), sinks: Iterable[int] = ()):
        self.tournament = tournament
        n = tournament.n
        source_idx = [tournament.index_of[v] for v in sources]
        sink_idx = [tournament.index_of[v] for v in sinks]
        self.super_source = 2 * n
        self.super_sink = 2 * n + 1
        self.size = 2 * n + 2

        src_set, sink_set = set(source_idx), set(sink_idx)
        us, vs = np.nonzero(tournament.matrix)
        keep = ~np.isin(vs, list(src_set)) if src_set else np.ones(len(vs), dtype=bool)
        rows = [2 * us[keep] + 1]
        cols = [2 * vs[keep]]
        caps = [np.full(int(keep.sum()), max(n, 1), dtype=np.int32)]

        through = [i for i in range(n) if i not in sink_set]
        rows.append(np.array([_in(i) for i in through], dtype=np.int64))
        cols.append(np.array([_out(i) for i in through], dtype=np.int64))
        caps.append(np.ones(len(through), dtype=np.int32))

        if source_idx:
            rows.append(np.full(len(source_idx), self.super_source))
            cols.append(np.array([_out(i) for i in source_idx]))
            caps.append(np.ones(len(source_idx), dtype=np.int32))
        if sink_idx:
            rows.append(np.array([_in(i) for i in sink_idx]))
            cols.append(np.full(len(sink_idx), self.super_sink))
            caps.append(np.ones(len(sink_idx), dtype=np.int32))

        self.capacity = csr_matrix(
            (np.concatenate(caps).astype(np.int32),
             (np.concatenate(rows).astype(np.int64), np.concatenate(cols).astype(np.int64))),
            shape=(self.size, self.size),
        )

    def flow(self, source: int, sink: int, method: str = "dinic"):
        return maximum_flow(self.capacity, source, sink, method=method)

    def residual_reach(self, result, source: int) -> FrozenSet[int]:
        """Nodes reachable from `source` in the residual network of `result`."""
        flow = result.flow.toarray()
        residual = self.capacity.toarray() - np.maximum(flow, 0) + np.maximum(flow.T, 0)
        order = breadth_first_order(csr_matrix(residual > 0), source, directed=True, return_predecessors=False)
        return frozenset(int(x) for x in order)


# --- Operations ---

def is_strong(tournament: Tournament) -> bool:
    if tournament.n == 0:
        raise TournamentInputError("Strong connectivity is undefined for the empty tournament.")
    return nx.is_strongly_connected(tournament.to_networkx())


def local_connectivity(tournament: Tournament, s: int, t: int, network: Optional[SplitNetwork] = None) -> int:
    """Maximum number of internally disjoint s -> t paths, for a pair with no arc s -> t."""
    if s == t:
        raise TournamentInputError("Local connectivity needs two distinct vertices.")
    if tournament.has_arc(s, t):
        raise UncuttablePair(f"Arc {s}->{t} exists; no vertex set separates the pair.")
    network = network or SplitNetwork(tournament)
    index = tournament.index_of
    return int(network.flow(_out(index[s]), _in(index[t])).flow_value)


def _scan_local_cuts(tournament: Tournament, stop_below: Optional[int] = None) -> int:
    """
    Minimum local cut over ordered non-arc pairs, capped at n - 1. Only pairs
    that touch a prefix W of the vertex order are scanned, and W grows until it
    is larger than the best cut seen: a minimum separator S misses a vertex of
    W whenever |W| > |S|, and that vertex is cut off from some other vertex.
    With `stop_below` set, returns as soon as a cut smaller than it appears.
    """
    network = SplitNetwork(tournament)
    n = tournament.n
    best = n - 1
    labels = tournament.labels
    for scanned, w in enumerate(labels):
        if scanned > best or (stop_below is not None and scanned >= stop_below):
            break
        for z in labels:
            if z == w:
                continue
            s, t = (z, w) if tournament.has_arc(w, z) else (w, z)
            value = local_connectivity(tournament, s, t, network)
            if value < best:
                best = value
                logging.debug(f"Local cut {s}->{t} of size {value}")
            if stop_below is not None and best < stop_below:
                return best
    return best


def vertex_connectivity(tournament: Tournament) -> int:
    """Largest k such that the tournament is k-strong; 0 iff it is not strong."""
    if tournament.n < 2:
        raise TournamentInputError("Vertex connectivity needs at least two vertices.")
    if not is_strong(tournament):
        return 0
    return _scan_local_cuts(tournament)


def is_k_strong(tournament: Tournament, k: int) -> bool:
    if k < 1:
        raise TournamentInputError(f"k-strongness needs k >= 1, got {k}.")
    if tournament.n < k + 1:
        return False
    return _scan_local_cuts(tournament, stop_below=k) >= k


def _decompose(network: SplitNetwork, flow: np.ndarray, start: int) -> List[int]:
    """Follows the unit of flow leaving out(start) to the super sink; returns vertex indices."""
    walk = [start]
    node = _out(start)
    while True:
        # an out-half carries at most one unit, so exactly one in-half receives it
        node = int(np.flatnonzero(flow[node] > 0).min())
        walk.append(node // 2)
        if flow[node, network.super_sink] > 0:
            return walk
        node += 1


def disjoint_paths_between_sets(tournament: Tournament, sources: Iterable[int], sinks: Iterable[int],
                                k: int) -> Optional[List[Path]]:
    """
    k pairwise vertex-disjoint paths, each leaving `sources` once and stopping at
    its first vertex of `sinks`, or None when fewer than k exist (Menger).
    """
    S, Z = sorted(set(sources)), sorted(set(sinks))
    if not S or not Z or set(S) & set(Z):
        raise TournamentInputError("Source and sink sets must be nonempty and disjoint.")
    if k < 1 or len(S) < k or len(Z) < k:
        raise TournamentInputError(f"Need 1 <= k <= min(|S|, |Z|), got k={k}, |S|={len(S)}, |Z|={len(Z)}.")
    tournament.require(S + Z)

    network = SplitNetwork(tournament, S, Z)
    result = network.flow(network.super_source, network.super_sink, method="edmonds_karp")
    if result.flow_value < k:
        logging.debug(f"Only {result.flow_value} disjoint paths from {S} to {Z}; {k} requested.")
        return None

    flow = result.flow.toarray()
    labels = tournament.labels
    paths = []
    for i in sorted(int(j) // 2 for j in np.flatnonzero(flow[network.super_source] > 0)):
        walk = _decompose(network, flow, i)
        paths.append(tuple(labels[x] for x in walk))
        if len(paths) == k:
            break
    return paths


def max_disjoint_paths_between_sets(tournament: Tournament, sources: Iterable[int], sinks: Iterable[int]) -> int:
    """Menger number: the largest k for which disjoint_paths_between_sets succeeds."""
    S, Z = sorted(set(sources)), sorted(set(sinks))
    if not S or not Z or set(S) & set(Z):
        raise TournamentInputError("Source and sink sets must be nonempty and disjoint.")
    network = SplitNetwork(tournament, S, Z)
    return int(network.flow(network.super_source, network.super_sink).flow_value)


def min_vertex_cut(tournament: Tournament, s: int, t: int) -> CutWitness:
    """A minimum vertex set whose removal destroys every s -> t path."""
    if s == t:
        raise TournamentInputError("A vertex cut needs two distinct vertices.")
    if tournament.has_arc(s, t):
        raise UncuttablePair(f"Arc {s}->{t} exists; no vertex set separates the pair.")
    network = SplitNetwork(tournament)
    index, labels = tournament.index_of, tournament.labels
    source = _out(index[s])
    result = network.flow(source, _in(index[t]))
    reach = network.residual_reach(result, source)

    separator = frozenset(labels[i] for i in range(tournament.n) if _in(i) in reach and _out(i) not in reach)
    side_from = frozenset(
        labels[i] for i in range(tournament.n)
        if labels[i] not in separator and (_in(i) in reach or _out(i) in reach)
    )
    side_to = frozenset(tournament.labels) - separator - side_from
    logging.debug(f"Min cut {s}->{t}: separator {sorted(separator)} (flow {result.flow_value})")
    return CutWitness(separator=separator, side_from=side_from, side_to=side_to)
