# genverify.py
#
# Tournament generators and independent verifiers. Generators are seeded by a
# splitmix64 stream so that a (kind, n, seed) triple names one tournament on every
# platform. The verifiers deliberately share no code with the solvers they check:
# verify_linkage re-walks paths arc by arc, and the brute-force cut oracles
# enumerate vertex subsets with networkx doing the reachability work.

import itertools
import logging
from dataclasses import asdict, dataclass
from typing import Dict, FrozenSet, Iterable, Iterator, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np

from exact_linkage import InstanceTooLarge, Linkage
from tournament import Tournament, TournamentInputError

# --- Configuration Constants ---
MAX_ENUMERATION_N = 6
MAX_ORACLE_N = 12
UINT64_MASK = (1 << 64) - 1


class SplitMix64:
    """splitmix64 with the standard increment and mixing constants."""

    def __init__(self, seed: int):
        if not isinstance(seed, (int, np.integer)) or seed < 0 or seed > UINT64_MASK:
            raise TournamentInputError(f"Seed must be an unsigned 64-bit integer, got {seed!r}.")
        self.state = int(seed)

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & UINT64_MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & UINT64_MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & UINT64_MASK
        return z ^ (z >> 31)

    def bit(self) -> int:
        """Top bit of the next output."""
        return self.next_u64() >> 63

    def below(self, bound: int) -> int:
        """Uniform-enough integer in [0, bound) by reduction modulo `bound`."""
        if bound < 1:
            raise TournamentInputError(f"Bound must be positive, got {bound}.")
        return self.next_u64() % bound


# --- Generators ---

def random_tournament(n: int, seed: int) -> Tournament:
    """Orients pair (i, j), i < j, as i -> j when the next bit is 1; pairs in lexicographic order."""
    if n < 1:
        raise TournamentInputError(f"A random tournament needs n >= 1, got {n}.")
    rng = SplitMix64(seed)
    matrix = np.zeros((n, n), dtype=bool)
    for i, j in itertools.combinations(range(n), 2):
        if rng.bit():
            matrix[i, j] = True
        else:
            matrix[j, i] = True
    return Tournament(matrix)


def rotational_tournament(n: int, symbols: Iterable[int]) -> Tournament:
    """Arc i -> j iff (j - i) mod n lies in `symbols`."""
    S = {int(d) for d in symbols}
    if n < 1 or n % 2 == 0:
        raise TournamentInputError(f"Rotational tournaments need odd n, got {n}.")
    if any(d < 1 or d >= n for d in S):
        raise TournamentInputError(f"Symbols must lie in 1..{n - 1}, got {sorted(S)}.")
    for d in range(1, n):
        if (d in S) == ((n - d) in S):
            raise TournamentInputError(f"Exactly one of {d} and {n - d} must be a symbol.")
    matrix = np.zeros((n, n), dtype=bool)
    rows = np.arange(n)
    for d in S:
        matrix[rows, (rows + d) % n] = True
    return Tournament(matrix)


def _is_prime(q: int) -> bool:
    if q < 2:
        return False
    return all(q % d for d in range(2, int(q ** 0.5) + 1))


def quadratic_residues(q: int) -> FrozenSet[int]:
    return frozenset((x * x) % q for x in range(1, q))


def paley_tournament(q: int) -> Tournament:
    if not _is_prime(q) or q % 4 != 3:
        raise TournamentInputError(f"Paley tournaments need a prime q = 3 (mod 4), got {q}.")
    return rotational_tournament(q, quadratic_residues(q))


def enumerate_tournaments(n: int) -> Iterator[Tournament]:
    """All 2^C(n,2) labelled tournaments; bit 1 on pair (i, j) means i -> j."""
    if n < 1:
        raise TournamentInputError(f"Enumeration needs n >= 1, got {n}.")
    if n > MAX_ENUMERATION_N:
        raise InstanceTooLarge(f"Enumerating tournaments on {n} vertices; guard is n <= {MAX_ENUMERATION_N}.")
    pairs = list(itertools.combinations(range(n), 2))
    for bits in itertools.product((0, 1), repeat=len(pairs)):
        matrix = np.zeros((n, n), dtype=bool)
        for (i, j), bit in zip(pairs, bits):
            if bit:
                matrix[i, j] = True
            else:
                matrix[j, i] = True
        yield Tournament(matrix)


def choose_terminals(n: int, k: int, seed: int) -> Tuple[List[int], List[int]]:
    """2k distinct vertices from a partial Fisher-Yates shuffle; the first k are sources."""
    if k < 1 or 2 * k > n:
        raise TournamentInputError(f"Cannot choose {2 * k} distinct terminals among {n} vertices.")
    rng = SplitMix64(seed)
    order = list(range(n))
    for i in range(2 * k):
        j = i + rng.below(n - i)
        order[i], order[j] = order[j], order[i]
    return order[:k], order[k:2 * k]


# --- Verifiers ---

@dataclass
class LinkageReport:
    ok: bool
    violation: Optional[str] = None
    path: Optional[int] = None
    step: Optional[int] = None
    vertex: Optional[int] = None

    def to_dict(self) -> Dict:
        return asdict(self)


def verify_linkage(tournament: Tournament, sources: Sequence[int], sinks: Sequence[int],
                   linkage: Linkage) -> LinkageReport:
    """Checks a claimed linkage from scratch and locates the first violation."""
    try:
        paths = [list(path) for path in linkage.paths]
        sources, sinks = list(sources), list(sinks)
    except (AttributeError, TypeError):
        return LinkageReport(ok=False, violation="linkage has no readable path list")

    if len(sources) != len(sinks):
        return LinkageReport(ok=False, violation=f"{len(sources)} sources but {len(sinks)} sinks")
    if len(paths) != len(sources):
        return LinkageReport(ok=False, violation=f"{len(paths)} paths for {len(sources)} terminal pairs")

    owner: Dict[int, int] = {}
    for i, path in enumerate(paths):
        if not path:
            return LinkageReport(ok=False, violation="empty path", path=i)
        if path[0] != sources[i]:
            return LinkageReport(ok=False, violation=f"path starts at {path[0]}, not at source {sources[i]}",
                                 path=i, step=0, vertex=path[0])
        if path[-1] != sinks[i]:
            return LinkageReport(ok=False, violation=f"path ends at {path[-1]}, not at sink {sinks[i]}",
                                 path=i, step=len(path) - 1, vertex=path[-1])
        for step, v in enumerate(path):
            if not isinstance(v, (int, np.integer)) or isinstance(v, bool) or v not in tournament:
                return LinkageReport(ok=False, violation=f"{v!r} is not a vertex", path=i, step=step, vertex=v)
            if v in owner:
                where = "repeats within the path" if owner[v] == i else f"is shared with path {owner[v]}"
                return LinkageReport(ok=False, violation=f"vertex {v} {where}", path=i, step=step, vertex=v)
            owner[v] = i
            if step and not tournament.has_arc(path[step - 1], v):
                return LinkageReport(ok=False, violation=f"{path[step - 1]}->{v} is not an arc",
                                     path=i, step=step, vertex=v)
    return LinkageReport(ok=True)


def _guard_oracle(tournament: Tournament) -> None:
    if tournament.n > MAX_ORACLE_N:
        raise InstanceTooLarge(f"Subset enumeration on {tournament.n} vertices; guard is n <= {MAX_ORACLE_N}.")


def min_separator_bruteforce(tournament: Tournament, sources: Iterable[int],
                             sinks: Iterable[int]) -> Tuple[int, FrozenSet[int]]:
    """Smallest vertex set meeting every path from `sources` to `sinks` (it may contain terminals)."""
    S, Z = set(sources), set(sinks)
    tournament.require(S | Z)
    if not S or not Z or S & Z:
        raise TournamentInputError("Source and sink sets must be nonempty and disjoint.")
    _guard_oracle(tournament)
    graph = tournament.to_networkx()
    for size in range(min(len(S), len(Z)) + 1):
        for cut in itertools.combinations(tournament.vertices, size):
            rest = graph.subgraph(set(tournament.vertices) - set(cut))
            reach = set()
            for s in S - set(cut):
                reach |= nx.descendants(rest, s) | {s}
            if not reach & (Z - set(cut)):
                return size, frozenset(cut)
    # unreachable: S itself is always a separator
    return len(S), frozenset(S)


def vertex_connectivity_bruteforce(tournament: Tournament) -> int:
    """Size of the smallest vertex set whose removal leaves a non-strong tournament, capped at n - 1."""
    if tournament.n < 2:
        raise TournamentInputError("Vertex connectivity needs at least two vertices.")
    _guard_oracle(tournament)
    graph = tournament.to_networkx()
    for size in range(tournament.n - 1):
        for cut in itertools.combinations(tournament.vertices, size):
            if not nx.is_strongly_connected(graph.subgraph(set(tournament.vertices) - set(cut))):
                logging.debug(f"Brute-force cut {list(cut)}")
                return size
    return tournament.n - 1
