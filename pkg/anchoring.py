# anchoring.py
#
# Anchored vertex sets. X anchors Y when every way of matching X onto Y can be
# realised by disjoint paths in the ambient tournament. Verification runs the
# exact solver once per permutation; the search walks candidate pairs in a fixed
# order and returns the first pair that verifies. Any tournament on at least
# 9p - 6 vertices is known to contain such a pair, so an exhausted search on a
# large enough tournament is reported as a lemma violation.

import itertools
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Iterator, Optional, Sequence, Tuple

from exact_linkage import BudgetExhausted, InstanceTooLarge, Linkage, SearchBudget, find_linkage
from tournament import Tournament, TournamentInputError

Permutation = Tuple[int, ...]

# --- Configuration Constants ---
MAX_ANCHOR_P = 4


class NotAnchored(RuntimeError):
    """Raised when a permutation of a supposedly anchored pair has no linkage."""


class LemmaViolation(RuntimeError):
    """Raised by callers when an exhaustive search fails on a tournament of order >= 9p - 6."""

    def __init__(self, message: str, search: Optional["AnchorSearch"] = None):
        super().__init__(message)
        self.search = search
        self.trace = None


class AnchorOutcome(str, Enum):
    FOUND = "found"
    EXHAUSTED = "exhausted"
    BUDGET_EXHAUSTED = "budget_exhausted"
    LEMMA_VIOLATION = "lemma_violation"


def lemma_order(p: int) -> int:
    """Order from which every tournament is guaranteed an anchored pair of size p."""
    return 9 * p - 6


@dataclass
class AnchoredPair:
    X: Tuple[int, ...]
    Y: Tuple[int, ...]
    certificates: Dict[Permutation, Linkage] = field(default_factory=dict, compare=False, repr=False)

    @property
    def p(self) -> int:
        return len(self.X)

    def permutations(self) -> Iterator[Permutation]:
        return itertools.permutations(range(self.p))

    def to_dict(self) -> Dict:
        return {"p": self.p, "X": list(self.X), "Y": list(self.Y)}


@dataclass
class AnchorSearch:
    outcome: AnchorOutcome
    p: int
    n: int
    pair: Optional[AnchoredPair] = None
    candidates_tried: int = 0
    nodes_visited: int = 0

    def to_dict(self) -> Dict:
        return {
            "outcome": self.outcome.value,
            "p": self.p,
            "n": self.n,
            "pair": self.pair.to_dict() if self.pair else None,
            "candidates_tried": self.candidates_tried,
            "nodes_visited": self.nodes_visited,
        }


def _check_sets(tournament: Tournament, X: Sequence[int], Y: Sequence[int]) -> None:
    tournament.require(list(X) + list(Y))
    if not X or len(X) != len(Y):
        raise TournamentInputError(f"Anchoring needs equal, nonzero sizes; got |X|={len(X)}, |Y|={len(Y)}.")
    if len(set(X)) != len(X) or len(set(Y)) != len(Y) or set(X) & set(Y):
        raise TournamentInputError("Anchoring needs disjoint sets without repeated vertices.")
    if len(X) > MAX_ANCHOR_P:
        raise InstanceTooLarge(f"Anchoring checks {len(X)}! permutations; guard is p <= {MAX_ANCHOR_P}.")


def anchors(tournament: Tournament, X: Sequence[int], Y: Sequence[int],
            budget: Optional[SearchBudget] = None) -> bool:
    """True iff every pairing x_i -> y_pi(i) has a disjoint path system."""
    X, Y = tuple(sorted(X)), tuple(sorted(Y))
    _check_sets(tournament, X, Y)
    for perm in itertools.permutations(range(len(X))):
        pairs = [(X[i], Y[perm[i]]) for i in range(len(X))]
        if find_linkage(tournament, pairs, budget=budget) is None:
            logging.debug(f"{list(X)} does not anchor {list(Y)}: permutation {perm} fails")
            return False
    return True


def anchoring_linkage(tournament: Tournament, pair: AnchoredPair, perm: Permutation) -> Linkage:
    """Disjoint paths x_i -> y_perm[i]; computed on first request and cached on the pair."""
    perm = tuple(int(i) for i in perm)
    if sorted(perm) != list(range(pair.p)):
        raise TournamentInputError(f"{perm} is not a permutation of 0..{pair.p - 1}.")
    if perm not in pair.certificates:
        pairs = [(pair.X[i], pair.Y[perm[i]]) for i in range(pair.p)]
        linkage = find_linkage(tournament, pairs)
        if linkage is None:
            raise NotAnchored(f"{list(pair.X)} does not anchor {list(pair.Y)}: permutation {perm} has no linkage.")
        pair.certificates[perm] = linkage
    return pair.certificates[perm]


def _candidates(tournament: Tournament, p: int) -> Iterator[Tuple[Tuple[int, ...], Tuple[int, ...]]]:
    for X in itertools.combinations(tournament.vertices, p):
        rest = [v for v in tournament.vertices if v not in X]
        for Y in itertools.combinations(rest, p):
            yield X, Y


def _promising(tournament: Tournament, X: Sequence[int], Y: Sequence[int]) -> bool:
    """Every x has an arc into Y; candidates failing this are only tried in the second pass."""
    return all(any(tournament.has_arc(x, y) for y in Y) for x in X)


def find_anchored_pair(tournament: Tournament, p: int, budget: Optional[int] = None) -> AnchorSearch:
    """
    First anchored pair of size p in search order. Candidates whose sources all
    have an arc into Y are tried first, the rest afterwards, so the outcome only
    reports exhaustion once every candidate has been verified.
    """
    if p < 1:
        raise TournamentInputError(f"p must be at least 1, got {p}.")
    if p > MAX_ANCHOR_P:
        raise InstanceTooLarge(f"Anchoring checks {p}! permutations; guard is p <= {MAX_ANCHOR_P}.")
    search = AnchorSearch(outcome=AnchorOutcome.EXHAUSTED, p=p, n=tournament.n)
    nodes = SearchBudget(budget)
    try:
        for first_pass in (True, False):
            for X, Y in _candidates(tournament, p):
                if _promising(tournament, X, Y) != first_pass:
                    continue
                search.candidates_tried += 1
                if anchors(tournament, X, Y, budget=nodes):
                    search.outcome = AnchorOutcome.FOUND
                    search.pair = AnchoredPair(X=X, Y=Y)
                    logging.debug(f"Anchored pair X={list(X)} Y={list(Y)} after {search.candidates_tried} candidates")
                    return search
    except BudgetExhausted:
        search.outcome = AnchorOutcome.BUDGET_EXHAUSTED
        logging.warning(f"Anchored-pair search (p={p}, n={tournament.n}) stopped: budget of {budget} node visits spent")
        return search
    finally:
        search.nodes_visited = nodes.visited

    if tournament.n >= lemma_order(p):
        search.outcome = AnchorOutcome.LEMMA_VIOLATION
        logging.error(
            f"LEMMA-VIOLATION: no anchored pair of size {p} in a tournament on "
            f"{tournament.n} >= {lemma_order(p)} vertices"
        )
    return search
