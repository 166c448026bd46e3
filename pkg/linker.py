# linker.py
#
# Builds k vertex-disjoint paths x_i -> y_i in a tournament by the staged
# construction behind the (13k-6)-strong / out-degree 28k-13 linkage bound:
#
#   1. stages     greedy pairs (u_i, v_i) peeled off T - (X0 u Y0), 9k - 6 times
#   2. core       an anchored pair V' -> V'' among the v_i, with partners U'
#   3. first legs short paths x_i -> ... -> v'_i through fresh vertices X', X''
#   4. last legs  k disjoint paths V'' -> Y0 in what is left (Menger)
#   5. stitch     middle legs inside V* from the anchoring certificate
#
# Every inequality the construction depends on is evaluated on the actual sets
# and written to an assertion log. In strict mode the two hypotheses of the bound are
# checked up front and every inequality that depends on them is binding; unchecked mode runs
# on any input, records hypothesis-dependent shortfalls and stops only with a
# typed error.

import json
import logging
import operator
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, FrozenSet, List, Optional, Sequence, Tuple

from anchoring import (AnchoredPair, AnchorOutcome, AnchorSearch, LemmaViolation, anchoring_linkage,
                       find_anchored_pair)
from connectivity import disjoint_paths_between_sets, is_k_strong, max_disjoint_paths_between_sets
from exact_linkage import BudgetExhausted, Linkage
from genverify import verify_linkage
from tournament import Tournament, TournamentInputError

Path = Tuple[int, ...]

# --- Configuration Constants ---
MODES = ("strict", "unchecked")
RELATIONS = {"<=": operator.le, ">=": operator.ge, "==": operator.eq}


def strength_threshold(k: int) -> int:
    return 13 * k - 6


def outdegree_threshold(k: int) -> int:
    return 28 * k - 13


def stage_count(k: int) -> int:
    return 9 * k - 6


# --- Errors ---

class LinkerError(RuntimeError):
    """Base class for every typed failure of the linkage pipeline."""


class StageConstructionError(LinkerError):
    pass


class SelectionExhausted(LinkerError):
    def __init__(self, message: str, diagnostic: Dict[str, Any]):
        super().__init__(message)
        self.diagnostic = diagnostic


class MengerFailure(LinkerError):
    pass


class PreconditionViolation(LinkerError):
    def __init__(self, report: "PreconditionReport"):
        super().__init__("; ".join(report.reasons()))
        self.report = report


class AssertionViolation(LinkerError):
    """An enforced inequality failed. `trace` holds everything computed up to that point."""

    def __init__(self, entry: "Assertion", trace: Optional["LinkTrace"] = None):
        super().__init__(f"Assertion {entry.eq} failed: {entry.lhs} {entry.relation} {entry.rhs} ({entry.context})")
        self.entry = entry
        self.trace = trace


# --- Assertion log ---

@dataclass
class Assertion:
    eq: str
    lhs: Any
    rhs: Any
    relation: str
    passed: bool
    enforced: bool
    context: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict:
        return {
            "eq": self.eq,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "relation": self.relation,
            "pass": self.passed,
            "enforced": self.enforced,
            "context": self.context,
        }


class AssertionLog:
    """
    Records instantiated inequalities. `scope` decides whether a failure stops
    the run: "always" entries bind in both modes, "strict" entries only in
    strict mode, "record" entries never.
    """

    def __init__(self, strict: bool):
        self.strict = strict
        self.entries: List[Assertion] = []

    def check(self, eq: str, lhs, rhs, relation: str = "<=", scope: str = "always", **context) -> bool:
        passed = bool(RELATIONS[relation](lhs, rhs))
        enforced = scope == "always" or (scope == "strict" and self.strict)
        entry = Assertion(eq=eq, lhs=lhs, rhs=rhs, relation=relation, passed=passed, enforced=enforced,
                          context=context)
        self.entries.append(entry)
        if not passed:
            if enforced:
                logging.error(f"ASSERTION FAILED {eq}: {lhs} {relation} {rhs} {context}")
                raise AssertionViolation(entry)
            logging.warning(f"Unenforced shortfall {eq}: {lhs} {relation} {rhs} {context}")
        return passed

    def failures(self) -> List[Assertion]:
        return [entry for entry in self.entries if not entry.passed]


# --- Domain types ---

@dataclass
class PreconditionReport:
    k: int
    n: int
    strength_threshold: int
    outdegree_threshold: int
    k_strong: bool
    min_out_degree: int
    order_bound: int

    @property
    def outdegree_ok(self) -> bool:
        return self.min_out_degree >= self.outdegree_threshold

    @property
    def order_ok(self) -> bool:
        return self.n >= self.order_bound

    @property
    def passed(self) -> bool:
        return self.k_strong and self.outdegree_ok

    def reasons(self) -> List[str]:
        reasons = []
        if not self.k_strong:
            reasons.append(f"not {self.strength_threshold}-strong")
        if not self.outdegree_ok:
            reasons.append(f"minimum out-degree {self.min_out_degree} < {self.outdegree_threshold}")
        return reasons

    def to_dict(self) -> Dict:
        data = asdict(self)
        data.update(outdegree_ok=self.outdegree_ok, order_ok=self.order_ok, passed=self.passed)
        return data


@dataclass(frozen=True)
class Stage:
    i: int
    u: int
    v: int
    A: Tuple[int, ...]
    d_u: int

    def to_dict(self) -> Dict:
        return {"i": self.i, "u": self.u, "v": self.v, "A": list(self.A), "d_u": self.d_u}


@dataclass(frozen=True)
class CorePair:
    """Index i of the core: u'_i -> v'_i came from stage j, with A'_i = A_j."""
    i: int
    u: int
    v: int
    j: int
    A: Tuple[int, ...]
    # D_1 u ... u D_{j-1}; V(T_{j-1}) is V(T) minus these and the terminals
    earlier: FrozenSet[int] = field(default=frozenset(), repr=False)

    def to_dict(self) -> Dict:
        return {"i": self.i, "u": self.u, "v": self.v, "j": self.j, "A": list(self.A)}


@dataclass
class CoreSelection:
    V: Tuple[int, ...]
    V_prime: Tuple[int, ...]
    V_dprime: Tuple[int, ...]
    V_star: Tuple[int, ...]
    U_prime: Tuple[int, ...]
    U_star: Tuple[int, ...]
    pairing: List[CorePair]
    anchored: AnchoredPair
    search: AnchorSearch

    def to_dict(self) -> Dict:
        return {
            "V": list(self.V),
            "Vp": list(self.V_prime),
            "Vpp": list(self.V_dprime),
            "Vstar": list(self.V_star),
            "Up": list(self.U_prime),
            "Ustar": list(self.U_star),
            "pairing": [pair.to_dict() for pair in self.pairing],
            "anchor_search": self.search.to_dict(),
        }


@dataclass
class FirstLegs:
    X_prime: Tuple[int, ...]
    I_hat: Tuple[int, ...]
    X_dprime: Dict[int, int]
    paths: Tuple[Path, ...]
    forms: Tuple[int, ...]
    membership: List[Dict[str, Any]] = field(default_factory=list)

    def to_dict(self) -> Dict:
        return {
            "Xp": list(self.X_prime),
            "Ihat": list(self.I_hat),
            "Xpp": {str(i): x for i, x in sorted(self.X_dprime.items())},
            "P": [list(path) for path in self.paths],
            "forms": list(self.forms),
            "tprime_membership": self.membership,
        }


@dataclass
class LinkTrace:
    k: int
    mode: str
    sources: Tuple[int, ...]
    sinks: Tuple[int, ...]
    preconditions: Optional[PreconditionReport] = None
    stages: List[Stage] = field(default_factory=list)
    core: Optional[CoreSelection] = None
    first: Optional[FirstLegs] = None
    R: List[Path] = field(default_factory=list)
    M: List[Path] = field(default_factory=list)
    Q: Optional[Linkage] = None
    assertions: List[Assertion] = field(default_factory=list)

    def to_dict(self) -> Dict:
        return {
            "k": self.k,
            "mode": self.mode,
            "sources": list(self.sources),
            "sinks": list(self.sinks),
            "preconditions": self.preconditions.to_dict() if self.preconditions else None,
            "stages": [stage.to_dict() for stage in self.stages],
            "core": self.core.to_dict() if self.core else None,
            "first": self.first.to_dict() if self.first else None,
            "R": [list(path) for path in self.R],
            "M": [list(path) for path in self.M],
            "Q": [list(path) for path in self.Q.paths] if self.Q else None,
            "assertions": [entry.to_dict() for entry in self.assertions],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


# --- Pipeline ---

def _check_terminals(tournament: Tournament, X0: Sequence[int], Y0: Sequence[int], k: Optional[int] = None) -> int:
    tournament.require(list(X0) + list(Y0))
    if not X0 or len(X0) != len(Y0):
        raise TournamentInputError(f"Need equally many sources and sinks, at least one; got {len(X0)} and {len(Y0)}.")
    if len(set(X0) | set(Y0)) != 2 * len(X0):
        raise TournamentInputError("Sources and sinks must be 2k distinct vertices.")
    if k is not None and len(X0) != k:
        raise TournamentInputError(f"Expected {k} terminal pairs, got {len(X0)}.")
    return len(X0)


def check_preconditions(tournament: Tournament, k: int) -> PreconditionReport:
    """Evaluates the two hypotheses of the linkage bound for `k`."""
    if k < 1:
        raise TournamentInputError(f"k must be at least 1, got {k}.")
    report = PreconditionReport(
        k=k,
        n=tournament.n,
        strength_threshold=strength_threshold(k),
        outdegree_threshold=outdegree_threshold(k),
        k_strong=is_k_strong(tournament, strength_threshold(k)),
        min_out_degree=tournament.min_out_degree(),
        order_bound=2 * outdegree_threshold(k) + 1,
    )
    logging.info(f"Preconditions for k={k}: {'met' if report.passed else '; '.join(report.reasons())}")
    return report


def build_stages(tournament: Tournament, X0: Sequence[int], Y0: Sequence[int], k: int,
                 log: Optional[AssertionLog] = None) -> List[Stage]:
    log = log or AssertionLog(strict=False)
    _check_terminals(tournament, X0, Y0, k)
    count = stage_count(k)
    current = tournament.remove(list(X0) + list(Y0))
    logging.info(f"--- Stage construction: {count} stages on {current.n} vertices ---")
    if current.n < 2 * count:
        raise StageConstructionError(f"{count} stages need {2 * count} vertices, only {current.n} remain.")

    stages = []
    for i in range(1, count + 1):
        if current.n == 0:
            raise StageConstructionError(f"Stage {i}: T_{i - 1} is empty.")
        u = current.min_out_degree_vertex()
        N = current.out_neighbors(u)
        if not N:
            raise StageConstructionError(f"Stage {i}: u_{i}={u} has no out-neighbour in T_{i - 1}.")
        v = current.induced(N).min_out_degree_vertex()
        A = tuple(sorted(N & current.out_neighbors(v)))
        stage = Stage(i=i, u=u, v=v, A=A, d_u=current.out_degree(u))

        log.check("eq1", len(A), (stage.d_u - 1) / 2, i=i, u=u, v=v)
        for z in A:
            log.check("eq2", len(A), (current.out_degree(z) - 1) / 2, i=i, z=z)
            log.check("eq3", len(A), (tournament.out_degree(z) - 1) / 2, i=i, z=z)
        logging.debug(f"Stage {i}: u={u} v={v} |A|={len(A)} d_u={stage.d_u}")
        stages.append(stage)
        current = current.remove([u, v])

    log.check("card_U", len({s.u for s in stages}), count, "==")
    log.check("card_V", len({s.v for s in stages}), count, "==")
    return stages


def choose_anchored_core(tournament: Tournament, stages: Sequence[Stage], k: int,
                         log: Optional[AssertionLog] = None, budget: Optional[int] = None) -> CoreSelection:
    log = log or AssertionLog(strict=False)
    V = tuple(sorted(s.v for s in stages))
    logging.info(f"--- Anchored core: searching T<V> on {len(V)} vertices for p={k} ---")
    search = find_anchored_pair(tournament.induced(V), k, budget=budget)
    if search.outcome is AnchorOutcome.BUDGET_EXHAUSTED:
        raise BudgetExhausted(f"Anchored-pair search on {len(V)} vertices ran out of its budget of {budget}.")
    if search.outcome is not AnchorOutcome.FOUND:
        raise LemmaViolation(f"LEMMA-VIOLATION: no anchored pair of size {k} among V={list(V)}", search)

    pair = search.pair
    V_star = tuple(v for v in V if v not in pair.X and v not in pair.Y)
    by_v = {s.v: s for s in stages}
    pairing = []
    for i, v in enumerate(pair.X, start=1):
        stage = by_v[v]
        earlier = frozenset(x for s in stages[:stage.i - 1] for x in (s.u, s.v))
        pairing.append(CorePair(i=i, u=stage.u, v=v, j=stage.i, A=stage.A, earlier=earlier))
        log.check("arc_uv", tournament.has_arc(stage.u, v), True, "==", i=i, u=stage.u, v=v)
        for z in stage.A:
            log.check("eq4", len(stage.A), (tournament.out_degree(z) - 1) / 2, i=i, z=z)

    U_prime = tuple(p.u for p in pairing)
    U_star = tuple(sorted({s.u for s in stages} - set(U_prime)))
    logging.info(f"Core: V'={list(pair.X)} V''={list(pair.Y)} U'={list(U_prime)}")
    return CoreSelection(V=V, V_prime=pair.X, V_dprime=pair.Y, V_star=V_star, U_prime=U_prime, U_star=U_star,
                         pairing=pairing, anchored=pair, search=search)


def select_first_legs(tournament: Tournament, X0: Sequence[int], Y0: Sequence[int], core: CoreSelection, k: int,
                      log: Optional[AssertionLog] = None) -> FirstLegs:
    log = log or AssertionLog(strict=False)
    logging.info("--- First legs: x_i -> x'_i (-> x''_i) -> v'_i ---")
    reserved = set(X0) | set(Y0) | set(core.U_prime) | set(core.V)
    log.check("card_12k6", len(reserved), 12 * k - 6, "==")
    t_prime = set(tournament.vertices) - reserved

    X_prime: List[int] = []
    for i, x in enumerate(X0, start=1):
        candidates = sorted(tournament.out_neighbors(x) & t_prime)
        log.check("tprime_outdeg", len(candidates), 16 * k - 7, ">=", scope="strict", i=i, x=x)
        free = [w for w in candidates if w not in X_prime]
        if not free:
            raise SelectionExhausted(
                f"No unused out-neighbour of x_{i}={x} in T'.",
                {"leg": "x'", "i": i, "x": x, "candidates": candidates, "taken": list(X_prime)},
            )
        X_prime.append(free[0])

    I_hat = tuple(
        p.i for p, xp in zip(core.pairing, X_prime)
        if tournament.has_arc(xp, p.v) or tournament.has_arc(xp, p.u)
    )
    blocked = reserved | set(X_prime)
    log.check("card_14k7", len(X0) + len(Y0) + len(core.U_prime) + len(core.V) + len(X_prime) + k - 1,
              14 * k - 7, "==")

    X_dprime: Dict[int, int] = {}
    membership = []
    for p, xp in zip(core.pairing, X_prime):
        if p.i in I_hat:
            continue
        A = set(p.A)
        d = tournament.out_degree(xp)
        in_A = xp in A
        log.check("eq5", len(A), (d - 1) / 2, scope="always" if in_A else "record", i=p.i, x_prime=xp, in_A=in_A)
        log.check("eq6", 14 * k - 7, (d - 1) / 2, scope="strict", i=p.i, x_prime=xp)
        log.check("eq6_sum", len(A) + 14 * k - 7, d - 1, scope="strict", i=p.i, x_prime=xp)
        log.check("eq6_total", len(A) + 14 * k - 6, d, scope="strict", i=p.i, x_prime=xp)

        outside = sorted(tournament.out_neighbors(xp) - A - blocked)
        log.check("xpp_room", len(outside), k, ">=", scope="strict", i=p.i, x_prime=xp)
        eligible = [w for w in outside if tournament.has_arc(w, p.u) or tournament.has_arc(w, p.v)]
        log.check("xpp_arc", len(eligible), k, ">=", scope="record", i=p.i, x_prime=xp)
        free = [w for w in eligible if w not in X_dprime.values()]
        diagnostic = {
            "leg": "x''", "i": p.i, "x_prime": xp, "in_A": in_A,
            "tprime_membership_hypothesis": xp not in p.earlier,
            "outside": outside, "eligible": eligible, "taken": sorted(X_dprime.values()),
        }
        if not free:
            raise SelectionExhausted(f"No eligible out-neighbour of x'_{p.i}={xp} for x''_{p.i}.", diagnostic)
        X_dprime[p.i] = free[0]
        membership.append({
            "i": p.i,
            "x_prime": xp,
            "x_prime_in_A": in_A,
            "x_prime_hypothesis": xp not in p.earlier,
            "x_dprime": free[0],
            "x_dprime_hypothesis": free[0] not in p.earlier,
            "rejected_without_arc": len(outside) - len(eligible),
        })

    paths, forms = [], []
    for p, x, xp in zip(core.pairing, X0, X_prime):
        head = [x, xp] if p.i in I_hat else [x, xp, X_dprime[p.i]]
        if tournament.has_arc(head[-1], p.v):
            paths.append(tuple(head + [p.v]))
        else:
            paths.append(tuple(head + [p.u, p.v]))
        forms.append({(2, 3): 1, (2, 4): 2, (3, 4): 3, (3, 5): 4}[(len(head), len(paths[-1]))])

    used = [v for path in paths for v in path]
    log.check("P_disjoint", len(set(used)), len(used), "==")
    logging.info(f"First legs: X'={X_prime} I^={list(I_hat)} X''={X_dprime} forms={forms}")
    return FirstLegs(X_prime=tuple(X_prime), I_hat=I_hat, X_dprime=X_dprime, paths=tuple(paths),
                     forms=tuple(forms), membership=membership)


def route_terminal_legs(tournament: Tournament, X0: Sequence[int], Y0: Sequence[int], core: CoreSelection,
                        first: FirstLegs, k: int, log: Optional[AssertionLog] = None) -> List[Path]:
    log = log or AssertionLog(strict=False)
    deleted = (set(X0) | set(core.U_prime) | set(core.V_prime) | set(core.V_star)
               | set(first.X_prime) | set(first.X_dprime.values()))
    log.check("tstar_deletion", len(deleted), 12 * k - 6)
    t_star = tournament.remove(deleted)
    logging.info(f"--- Last legs: {k} disjoint paths V'' -> Y0 in T* ({t_star.n} vertices) ---")
    log.check("tstar_k_strong", is_k_strong(t_star, k), True, "==", scope="strict", n=t_star.n)

    paths = disjoint_paths_between_sets(t_star, core.V_dprime, Y0, k)
    if paths is None:
        found = max_disjoint_paths_between_sets(t_star, core.V_dprime, Y0)
        log.check("menger", found, k, ">=", scope="strict")
        raise MengerFailure(f"Only {found} disjoint paths from V''={list(core.V_dprime)} to Y0={list(Y0)} in T*.")

    by_end = {path[-1]: path for path in paths}
    R = [by_end[y] for y in Y0]
    on_p = {v for path in first.paths for v in path}
    log.check("R_avoids_P", len(on_p.intersection(v for path in R for v in path)), 0, "==")
    return R


def stitch(tournament: Tournament, core: CoreSelection, first: FirstLegs, R: Sequence[Path], k: int,
           log: Optional[AssertionLog] = None) -> Tuple[Linkage, List[Path]]:
    """Q_i = P_i M_i R_i, with M taken from the anchoring certificate inside T<V>."""
    log = log or AssertionLog(strict=False)
    perm = tuple(core.V_dprime.index(path[0]) for path in R)
    certificate = anchoring_linkage(tournament.induced(core.V), core.anchored, perm)
    M = list(certificate.paths)

    inner = {v for path in M for v in path[1:-1]}
    log.check("M_inner", len(inner - set(core.V_star)), 0, "==")

    Q = []
    for P, M_i, R_i in zip(first.paths, M, R):
        if P[-1] != M_i[0] or M_i[-1] != R_i[0]:
            raise LinkerError(f"Endpoint mismatch while stitching {P} / {M_i} / {R_i}.")
        Q.append(tuple(P) + tuple(M_i[1:]) + tuple(R_i[1:]))
    sources = tuple(path[0] for path in first.paths)
    sinks = tuple(path[-1] for path in R)
    linkage = Linkage(pairs=tuple(zip(sources, sinks)), paths=tuple(Q))

    report = verify_linkage(tournament, sources, sinks, linkage)
    log.check("Q_verified", report.ok, True, "==", violation=report.violation)
    return linkage, M


def link(tournament: Tournament, X0: Sequence[int], Y0: Sequence[int], mode: str = "strict",
         anchor_budget: Optional[int] = None) -> Tuple[Linkage, LinkTrace]:
    if mode not in MODES:
        raise TournamentInputError(f"Mode must be one of {MODES}, got {mode!r}.")
    X0, Y0 = [int(x) for x in X0], [int(y) for y in Y0]
    k = _check_terminals(tournament, X0, Y0)
    logging.info(f"--- Linking {k} pairs on {tournament.n} vertices ({mode}) ---")

    report = check_preconditions(tournament, k)
    if mode == "strict" and not report.passed:
        raise PreconditionViolation(report)

    trace = LinkTrace(k=k, mode=mode, sources=tuple(X0), sinks=tuple(Y0), preconditions=report)
    log = AssertionLog(strict=mode == "strict")
    trace.assertions = log.entries
    try:
        trace.stages = build_stages(tournament, X0, Y0, k, log)
        trace.core = choose_anchored_core(tournament, trace.stages, k, log, budget=anchor_budget)
        trace.first = select_first_legs(tournament, X0, Y0, trace.core, k, log)
        trace.R = route_terminal_legs(tournament, X0, Y0, trace.core, trace.first, k, log)
        trace.Q, trace.M = stitch(tournament, trace.core, trace.first, trace.R, k, log)
    except (AssertionViolation, LemmaViolation) as e:
        e.trace = trace
        raise

    logging.info(f"Linked {k} pairs; {len(log.entries)} assertions logged, {len(log.failures())} unenforced shortfalls")
    return trace.Q, trace
