# exact_linkage.py
#
# Exact, exponential linkage solver for desk-scale tournaments. Given source/sink
# pairs it extends one path at a time by depth-first search, pruning any branch
# in which a pending source can no longer reach its sink through the vertices
# that are still free. Absence of a result is a proof that no linkage exists.
# The same engine certifies anchored pairs and backs the k-linkedness oracle.

import itertools
import logging
from collections import deque
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Set, Tuple

from tournament import Tournament, TournamentInputError

Path = Tuple[int, ...]
Pair = Tuple[int, int]

# --- Configuration Constants ---
MAX_BRUTEFORCE_K = 3
MAX_BRUTEFORCE_N = 16


class InstanceTooLarge(TournamentInputError):
    """Raised when an exhaustive search is asked to run beyond its size guard."""


class BudgetExhausted(RuntimeError):
    """Raised when a SearchBudget runs out of node visits."""


class SearchBudget:
    """Counts depth-first node visits across any number of solver calls."""

    def __init__(self, limit: Optional[int] = None):
        self.limit = limit
        self.visited = 0

    def tick(self) -> None:
        self.visited += 1
        if self.limit is not None and self.visited > self.limit:
            raise BudgetExhausted(f"Search budget of {self.limit} node visits exhausted.")


@dataclass(frozen=True)
class Linkage:
    """Pairwise vertex-disjoint paths; paths[i] runs from pairs[i][0] to pairs[i][1]."""
    pairs: Tuple[Pair, ...]
    paths: Tuple[Path, ...]

    @property
    def k(self) -> int:
        return len(self.pairs)

    def vertices(self) -> FrozenSet[int]:
        return frozenset(v for path in self.paths for v in path)

    def to_dict(self) -> Dict:
        return {
            "k": self.k,
            "sources": [s for s, _ in self.pairs],
            "sinks": [t for _, t in self.pairs],
            "paths": [list(path) for path in self.paths],
        }

    @classmethod
    def from_dict(cls, data: Dict) -> "Linkage":
        try:
            pairs = tuple(zip((int(s) for s in data["sources"]), (int(t) for t in data["sinks"])))
            paths = tuple(tuple(int(v) for v in path) for path in data["paths"])
        except (KeyError, TypeError, ValueError) as e:
            raise TournamentInputError(f"Malformed linkage document: {e}") from None
        return cls(pairs=pairs, paths=paths)


def _validate_pairs(tournament: Tournament, pairs: Sequence[Pair], allowed: Optional[FrozenSet[int]]) -> None:
    endpoints = [v for pair in pairs for v in pair]
    tournament.require(endpoints)
    if len(set(endpoints)) != len(endpoints):
        raise TournamentInputError(f"Linkage endpoints must be pairwise distinct, got {list(pairs)}.")
    if allowed is not None and not set(endpoints) <= allowed:
        raise TournamentInputError("Every linkage endpoint must lie inside the allowed vertex set.")


def _reaches(successors: Dict[int, Tuple[int, ...]], start: int, goal: int, free: Set[int]) -> bool:
    """BFS from `start` to `goal` whose inner vertices are drawn from `free`."""
    seen = {start}
    queue = deque([start])
    while queue:
        v = queue.popleft()
        for w in successors[v]:
            if w == goal:
                return True
            if w in free and w not in seen:
                seen.add(w)
                queue.append(w)
    return False


def find_linkage(tournament: Tournament, pairs: Sequence[Pair], allowed: Optional[Iterable[int]] = None,
                 budget: Optional[SearchBudget] = None) -> Optional[Linkage]:
    """
    First linkage in search order realising `pairs` inside `allowed` (default:
    all vertices), or None when none exists. Each path is grown from its source;
    the direct step onto the sink is tried first, then free out-neighbours in
    ascending id order.
    """
    pairs = [(int(s), int(t)) for s, t in pairs]
    allowed_set = frozenset(allowed) if allowed is not None else None
    _validate_pairs(tournament, pairs, allowed_set)
    if not pairs:
        return Linkage(pairs=(), paths=())

    successors = tournament.successors
    endpoints = {v for pair in pairs for v in pair}
    pool = set(allowed_set) if allowed_set is not None else set(tournament.vertices)
    free = pool - endpoints
    paths: List[List[int]] = []

    def feasible(i: int, head: int) -> bool:
        if not _reaches(successors, head, pairs[i][1], free):
            return False
        return all(_reaches(successors, s, t, free) for s, t in pairs[i + 1:])

    def extend(i: int, path: List[int]) -> bool:
        if budget is not None:
            budget.tick()
        head, sink = path[-1], pairs[i][1]
        if head == sink:
            paths.append(list(path))
            if i + 1 == len(pairs) or extend(i + 1, [pairs[i + 1][0]]):
                return True
            paths.pop()
            return False
        if not feasible(i, head):
            return False
        outs = successors[head]
        steps = ([sink] if sink in outs else []) + [w for w in outs if w in free]
        for w in steps:
            if w != sink:
                free.discard(w)
            path.append(w)
            if extend(i, path):
                return True
            path.pop()
            if w != sink:
                free.add(w)
        return False

    if not extend(0, [pairs[0][0]]):
        logging.debug(f"No linkage for pairs {pairs}")
        return None
    return Linkage(pairs=tuple(pairs), paths=tuple(tuple(p) for p in paths))


def is_k_linked_bruteforce(tournament: Tournament, k: int,
                           force: bool = False) -> Tuple[bool, Optional[Tuple[Pair, ...]]]:
    """
    Exhaustive k-linkedness test over every ordered choice of disjoint sources
    and sinks. Returns (True, None) or (False, violating pairs).
    """
    if k < 1:
        raise TournamentInputError(f"k must be at least 1, got {k}.")
    if tournament.n < 2 * k:
        raise TournamentInputError(f"k-linkedness needs at least {2 * k} vertices, got {tournament.n}.")
    if not force and (k > MAX_BRUTEFORCE_K or tournament.n > MAX_BRUTEFORCE_N):
        raise InstanceTooLarge(
            f"Refusing exhaustive k-linkedness with k={k}, n={tournament.n} "
            f"(guard k <= {MAX_BRUTEFORCE_K}, n <= {MAX_BRUTEFORCE_N}); pass force to override."
        )

    # hardest choices first: weak sources (low out-degree), then weak sinks (low in-degree)
    source_order = sorted(tournament.vertices, key=lambda v: (tournament.out_degree(v), v))
    sink_order = sorted(tournament.vertices, key=lambda v: (tournament.in_degree(v), v))
    checked = 0
    for sources in itertools.permutations(source_order, k):
        rest = [v for v in sink_order if v not in sources]
        for sinks in itertools.permutations(rest, k):
            pairs = tuple(zip(sources, sinks))
            checked += 1
            if find_linkage(tournament, pairs) is None:
                logging.info(f"Not {k}-linked: no linkage for {list(pairs)} (after {checked} choices)")
                return False, pairs
    logging.info(f"{k}-linked: all {checked} source/sink choices linked")
    return True, None
