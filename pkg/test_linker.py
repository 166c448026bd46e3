# test_linker.py
#
# Tests for the staged linkage construction: thresholds, precondition reports,
# the assertion log, each step in isolation and end-to-end runs on a seeded
# tournament that meets the k=2 hypotheses.

import json
from dataclasses import replace

import pytest

from anchoring import AnchorOutcome, AnchorSearch, LemmaViolation
from exact_linkage import BudgetExhausted
from genverify import LinkageReport, choose_terminals, random_tournament, rotational_tournament, verify_linkage
from linker import (AssertionLog, AssertionViolation, LinkerError, MengerFailure, PreconditionViolation,
                    SelectionExhausted, StageConstructionError, build_stages, check_preconditions, choose_anchored_core,
                    link, outdegree_threshold, route_terminal_legs, select_first_legs, stage_count, stitch,
                    strength_threshold)
from tournament import Tournament, TournamentInputError


@pytest.fixture(scope="module")
def linked_k2(qualifying_instance):
    """One strict k=2 run on the qualifying instance, shared by the identity checks."""
    tournament, seed = qualifying_instance
    X0, Y0 = choose_terminals(tournament.n, 2, seed)
    Q, trace = link(tournament, X0, Y0, mode="strict")
    return tournament, X0, Y0, Q, trace


class TestThresholds:
    """Thresholds as functions of k."""

    @pytest.mark.parametrize("k, strength, outdegree, stages", [(1, 7, 15, 3), (2, 20, 43, 12), (3, 33, 71, 21)])
    def test_values(self, k, strength, outdegree, stages):
        """Unit Test: 13k - 6, 28k - 13 and 9k - 6."""
        assert strength_threshold(k) == strength
        assert outdegree_threshold(k) == outdegree
        assert stage_count(k) == stages


class TestPreconditions:
    """check_preconditions reports."""

    def test_c3_fails_both(self, c3):
        """Unit Test: C3 is neither 7-strong nor of minimum out-degree 15."""
        report = check_preconditions(c3, 1)
        assert not report.passed
        assert report.reasons() == ["not 7-strong", "minimum out-degree 1 < 15"]
        assert report.order_bound == 31 and not report.order_ok

    def test_qualifying_instance(self, qualifying_instance):
        """Unit Test: the shared n=160 fixture meets both k=2 hypotheses and the order bound."""
        tournament, _ = qualifying_instance
        report = check_preconditions(tournament, 2)
        assert report.passed and report.order_ok
        assert report.to_dict()["passed"] is True

    def test_invalid_k(self, c3):
        """Unit Test: k = 0 is an input error."""
        with pytest.raises(TournamentInputError):
            check_preconditions(c3, 0)


class TestAssertionLog:
    """Scopes of AssertionLog.check."""

    def test_passing_entry(self):
        """Unit Test: a satisfied inequality is recorded and returns True."""
        log = AssertionLog(strict=True)
        assert log.check("eq1", 3, 4.5, i=1)
        assert log.entries[0].to_dict() == {"eq": "eq1", "lhs": 3, "rhs": 4.5, "relation": "<=", "pass": True,
                                            "enforced": True, "context": {"i": 1}}

    def test_always_scope_raises_in_both_modes(self):
        """Unit Test: an 'always' failure raises even when the log is not strict."""
        for strict in (True, False):
            log = AssertionLog(strict=strict)
            with pytest.raises(AssertionViolation) as excinfo:
                log.check("card_U", 2, 3, "==")
            assert excinfo.value.entry.eq == "card_U"
            assert log.failures() == [excinfo.value.entry]

    def test_strict_scope(self):
        """Unit Test: a 'strict' failure raises only in a strict log."""
        with pytest.raises(AssertionViolation):
            AssertionLog(strict=True).check("eq6", 21, 20.5, scope="strict")
        log = AssertionLog(strict=False)
        assert not log.check("eq6", 21, 20.5, scope="strict")
        assert log.entries[0].enforced is False

    def test_record_scope_never_raises(self):
        """Unit Test: a 'record' failure is logged and nothing more."""
        log = AssertionLog(strict=True)
        assert not log.check("eq5", 30, 10, scope="record")
        assert len(log.failures()) == 1


class TestStages:
    """build_stages."""

    def test_too_few_vertices(self, paley7):
        """Unit Test: Paley7 minus two terminals leaves 5 vertices, fewer than 3 stages need."""
        with pytest.raises(StageConstructionError, match="3 stages need 6 vertices"):
            build_stages(paley7, [0], [1], 1)

    def test_rotational15_first_stage(self):
        """Unit Test: after removing 0 and 1, vertex 9 is the first of minimum out-degree 5."""
        t = rotational_tournament(15, range(1, 8))
        first = build_stages(t, [0], [1], 1)[0]
        assert (first.u, first.d_u) == (9, 5)
        # N+(9) = {10, ..., 14} is transitive with sink 14
        assert first.v == 14 and first.A == ()

    @pytest.mark.parametrize("seed", range(3))
    def test_stages_recomputed(self, seed):
        """Unit Test: every stage matches an independent recomputation of the greedy rule."""
        t = random_tournament(30, seed)
        X0, Y0 = [0], [1]
        log = AssertionLog(strict=False)
        stages = build_stages(t, X0, Y0, 1, log)
        removed = set(X0) | set(Y0)
        for stage in stages:
            current = t.remove(removed)
            degrees = {v: current.out_degree(v) for v in current.vertices}
            assert stage.u == min(degrees, key=lambda v: (degrees[v], v))
            N = current.out_neighbors(stage.u)
            inner = {v: len(current.out_neighbors(v) & N) for v in N}
            assert stage.v == min(inner, key=lambda v: (inner[v], v))
            assert set(stage.A) == N & current.out_neighbors(stage.v)
            removed |= {stage.u, stage.v}
        assert len(stages) == 3 and not log.failures()
        assert {entry.eq for entry in log.entries} >= {"eq1", "card_U", "card_V"}


@pytest.fixture(scope="module")
def steps_k2(qualifying_instance):
    """Stages, core, first legs and last legs of the qualifying instance, built step by step."""
    tournament, seed = qualifying_instance
    X0, Y0 = choose_terminals(tournament.n, 2, seed)
    log = AssertionLog(strict=False)
    stages = build_stages(tournament, X0, Y0, 2, log)
    core = choose_anchored_core(tournament, stages, 2, log)
    first = select_first_legs(tournament, X0, Y0, core, 2, log)
    R = route_terminal_legs(tournament, X0, Y0, core, first, 2, log)
    return tournament, X0, Y0, stages, core, first, R


def hide_arcs(mocker, hidden):
    """Makes has_arc report False for every (a, b) with hidden(a, b); other arcs are untouched."""
    original = Tournament.has_arc
    mocker.patch.object(Tournament, "has_arc", autospec=True,
                        side_effect=lambda self, a, b: False if hidden(a, b) else original(self, a, b))


class TestCoreStep:
    """choose_anchored_core."""

    def test_core_partition(self, steps_k2):
        """Unit Test: V', V'' and V* partition V, and each v'_i keeps the u of its own stage."""
        tournament, _, _, stages, core, _, _ = steps_k2
        assert set(core.V_prime) | set(core.V_dprime) | set(core.V_star) == {s.v for s in stages}
        assert not set(core.V_prime) & set(core.V_dprime)
        by_v = {s.v: s for s in stages}
        for pair in core.pairing:
            assert (pair.u, pair.j, pair.A) == (by_v[pair.v].u, by_v[pair.v].i, by_v[pair.v].A)
            assert tournament.has_arc(pair.u, pair.v)
            assert pair.earlier == {x for s in stages[:pair.j - 1] for x in (s.u, s.v)}
        assert set(core.U_star) == {s.u for s in stages} - set(core.U_prime)


class TestFirstLegStep:
    """select_first_legs, including the branches a typical run never takes."""

    def test_forms_match_paths(self, steps_k2):
        """Unit Test: forms 1 and 2 are exactly the shortcut indices, and each form fixes the path length."""
        _, _, _, _, core, first, _ = steps_k2
        for pair, path, form in zip(core.pairing, first.paths, first.forms):
            assert (form <= 2) == (pair.i in first.I_hat)
            assert len(path) == {1: 3, 2: 4, 3: 4, 4: 5}[form]
            assert path[-1] == pair.v
            assert (pair.u in path) == (form in (2, 4))

    @pytest.mark.parametrize("blocked_end, form", [("u", 3), ("v", 4)])
    def test_second_hop_forms(self, steps_k2, mocker, blocked_end, form):
        """Unit Test: with every shortcut from X' hidden, each leg takes an x'' and the requested last hop."""
        tournament, X0, Y0, _, core, first, _ = steps_k2
        X_prime = set(first.X_prime)
        ends = set(core.U_prime) | set(core.V_prime)
        blocked = set(core.U_prime) if blocked_end == "u" else set(core.V_prime)
        hide_arcs(mocker, lambda a, b: b in blocked or (a in X_prime and b in ends))

        forced = select_first_legs(tournament, X0, Y0, core, 2, AssertionLog(strict=False))
        assert forced.I_hat == ()
        assert forced.X_prime == first.X_prime
        assert forced.forms == (form, form)
        assert [len(path) for path in forced.paths] == [{3: 4, 4: 5}[form]] * 2

    def test_membership_flags(self, steps_k2, mocker):
        """Unit Test: each x'' choice is recorded with whether x' and x'' lie outside the earlier stages."""
        tournament, X0, Y0, _, core, first, _ = steps_k2
        X_prime = set(first.X_prime)
        ends = set(core.U_prime) | set(core.V_prime)
        hide_arcs(mocker, lambda a, b: a in X_prime and b in ends)

        forced = select_first_legs(tournament, X0, Y0, core, 2, AssertionLog(strict=False))
        assert [entry["i"] for entry in forced.membership] == [1, 2]
        for pair, entry in zip(core.pairing, forced.membership):
            assert entry["x_prime"] == forced.X_prime[pair.i - 1]
            assert entry["x_dprime"] == forced.X_dprime[pair.i]
            assert entry["x_prime_in_A"] == (entry["x_prime"] in pair.A)
            assert entry["x_prime_hypothesis"] == (entry["x_prime"] not in pair.earlier)
            assert entry["x_dprime_hypothesis"] == (entry["x_dprime"] not in pair.earlier)
            assert entry["rejected_without_arc"] >= 0
        assert forced.to_dict()["tprime_membership"] == forced.membership

    def test_selection_exhausted_diagnostic(self, steps_k2, mocker):
        """Unit Test: with no vertex reaching U' or V', the x'' selection stops with a diagnostic."""
        tournament, X0, Y0, _, core, _, _ = steps_k2
        ends = set(core.U_prime) | set(core.V_prime)
        hide_arcs(mocker, lambda a, b: b in ends)

        log = AssertionLog(strict=False)
        check = mocker.spy(log, "check")
        with pytest.raises(SelectionExhausted) as excinfo:
            select_first_legs(tournament, X0, Y0, core, 2, log)
        diagnostic = excinfo.value.diagnostic
        assert diagnostic["leg"] == "x''" and diagnostic["i"] == 1
        assert diagnostic["eligible"] == [] and diagnostic["outside"]
        arc_entry = next(entry for entry in log.entries if entry.eq == "xpp_arc")
        assert not arc_entry.passed and not arc_entry.enforced
        # recorded in both modes, never binding
        arc_call = next(c for c in check.call_args_list if c.args[0] == "xpp_arc")
        assert arc_call.kwargs["scope"] == "record"


class TestLastLegStep:
    """route_terminal_legs."""

    def test_paths_end_in_sink_order(self, steps_k2):
        """Unit Test: R_i starts in V'' and ends at y_i, avoiding P and V*."""
        _, _, Y0, _, core, first, R = steps_k2
        assert [path[-1] for path in R] == Y0
        assert {path[0] for path in R} == set(core.V_dprime)
        on_p = {v for path in first.paths for v in path}
        assert not on_p & {v for path in R for v in path}

    def test_menger_failure(self, steps_k2, mocker):
        """Unit Test: when the flow finds too few paths, unchecked mode records the count and raises."""
        tournament, X0, Y0, _, core, first, _ = steps_k2
        mocker.patch("linker.disjoint_paths_between_sets", return_value=None)
        mocker.patch("linker.max_disjoint_paths_between_sets", return_value=1)
        log = AssertionLog(strict=False)
        with pytest.raises(MengerFailure, match="Only 1 disjoint paths"):
            route_terminal_legs(tournament, X0, Y0, core, first, 2, log)
        entry = log.entries[-1]
        assert (entry.eq, entry.lhs, entry.rhs, entry.passed, entry.enforced) == ("menger", 1, 2, False, False)


class TestStitchStep:
    """stitch."""

    def test_stitched_linkage(self, steps_k2):
        """Unit Test: Q_i is P_i, then M_i, then R_i, and the result verifies."""
        tournament, X0, Y0, _, core, first, R = steps_k2
        Q, M = stitch(tournament, core, first, R, 2)
        for P, M_i, R_i, Q_i in zip(first.paths, M, R, Q.paths):
            assert Q_i == tuple(P) + tuple(M_i[1:]) + tuple(R_i[1:])
        assert verify_linkage(tournament, X0, Y0, Q).ok

    def test_endpoint_mismatch(self, steps_k2):
        """Unit Test: first legs that end at the wrong v'_i are refused."""
        tournament, _, _, _, core, first, R = steps_k2
        swapped = replace(first, paths=tuple(reversed(first.paths)))
        with pytest.raises(LinkerError, match="Endpoint mismatch"):
            stitch(tournament, core, swapped, R, 2)


class TestLinkErrors:
    """Typed failures of link()."""

    def test_strict_c3(self, c3):
        """Unit Test: strict mode refuses C3 with both reasons."""
        with pytest.raises(PreconditionViolation) as excinfo:
            link(c3, [0], [2], mode="strict")
        assert "not 7-strong" in str(excinfo.value)
        assert excinfo.value.report.min_out_degree == 1

    def test_unchecked_c3(self, c3):
        """Unit Test: unchecked mode runs and stops at stage construction."""
        with pytest.raises(StageConstructionError):
            link(c3, [0], [2], mode="unchecked")

    @pytest.mark.parametrize("X0, Y0", [([0], [0]), ([0, 1], [2]), ([], []), ([0], [9])])
    def test_invalid_terminals(self, paley7, X0, Y0):
        """Unit Test: overlapping, unbalanced, empty or unknown terminals are input errors."""
        with pytest.raises(TournamentInputError):
            link(paley7, X0, Y0, mode="unchecked")

    def test_invalid_mode(self, paley7):
        """Unit Test: only 'strict' and 'unchecked' are modes."""
        with pytest.raises(TournamentInputError):
            link(paley7, [0], [1], mode="lenient")

    def test_lemma_violation_carries_trace(self, qualifying_instance, mocker):
        """Unit Test: a failed anchored-pair search stops the run with the stages in its trace."""
        tournament, seed = qualifying_instance
        mocker.patch("linker.find_anchored_pair",
                     return_value=AnchorSearch(outcome=AnchorOutcome.LEMMA_VIOLATION, p=2, n=12, candidates_tried=9))
        X0, Y0 = choose_terminals(tournament.n, 2, seed)
        with pytest.raises(LemmaViolation) as excinfo:
            link(tournament, X0, Y0)
        assert excinfo.value.search.candidates_tried == 9
        assert len(excinfo.value.trace.stages) == 12
        assert excinfo.value.trace.core is None

    def test_anchor_budget(self, qualifying_instance):
        """Unit Test: a one-visit budget for the anchored-pair search is a budget error."""
        tournament, seed = qualifying_instance
        X0, Y0 = choose_terminals(tournament.n, 2, seed)
        with pytest.raises(BudgetExhausted):
            link(tournament, X0, Y0, anchor_budget=1)

    def test_assertion_violation_carries_trace(self, qualifying_instance, mocker):
        """Unit Test: a forced final-verification failure raises with every earlier step in the trace."""
        tournament, seed = qualifying_instance
        mocker.patch("linker.verify_linkage", return_value=LinkageReport(ok=False, violation="forced"))
        X0, Y0 = choose_terminals(tournament.n, 2, seed)
        with pytest.raises(AssertionViolation) as excinfo:
            link(tournament, X0, Y0)
        trace = excinfo.value.trace
        assert excinfo.value.entry.eq == "Q_verified"
        assert trace.core is not None and trace.first is not None and len(trace.R) == 2
        assert trace.assertions[-1].context == {"violation": "forced"}
        json.loads(trace.to_json())


class TestEndToEnd:
    """Strict k=2 linkage on the qualifying instance."""

    def test_linkage_verifies(self, linked_k2):
        """Integration Test: the produced linkage passes the independent verifier."""
        tournament, X0, Y0, Q, _ = linked_k2
        assert verify_linkage(tournament, X0, Y0, Q).ok
        assert [path[0] for path in Q.paths] == X0
        assert [path[-1] for path in Q.paths] == Y0

    def test_set_identities(self, linked_k2):
        """Integration Test: the core and first-leg sets have the sizes the construction promises."""
        _, X0, Y0, _, trace = linked_k2
        core, first = trace.core, trace.first
        assert len(trace.stages) == 12
        assert len(core.V_prime) == len(core.V_dprime) == len(core.U_prime) == len(first.X_prime) == 2
        assert len(core.V_star) == 8 and len(core.U_star) == 10
        assert set(core.V) == set(core.V_prime) | set(core.V_dprime) | set(core.V_star)
        assert len(first.X_dprime) + len(first.I_hat) == 2
        assert set(first.forms) <= {1, 2, 3, 4}

    def test_path_segments(self, linked_k2):
        """Integration Test: Q_i runs through v'_i, enters V'' once, and only M uses V*."""
        _, _, _, Q, trace = linked_k2
        core = trace.core
        for i, path in enumerate(Q.paths):
            assert core.V_prime[i] in path
            assert len(set(path) & set(core.V_dprime)) == 1
            assert trace.M[i][0] == core.V_prime[i]
            assert trace.R[i][0] == trace.M[i][-1]
            assert not set(trace.R[i]) & set(core.V_star)

    def test_enforced_entries_all_pass(self, linked_k2):
        """Integration Test: every enforced inequality passed and the final check is logged."""
        _, _, _, _, trace = linked_k2
        assert all(entry.passed for entry in trace.assertions if entry.enforced)
        eqs = {entry.eq for entry in trace.assertions}
        assert {"eq1", "card_12k6", "card_14k7", "tstar_deletion", "M_inner", "Q_verified"} <= eqs

    def test_trace_is_deterministic(self, linked_k2):
        """Integration Test: a second run yields a byte-identical JSON trace."""
        tournament, X0, Y0, _, trace = linked_k2
        _, again = link(tournament, X0, Y0, mode="strict")
        assert again.to_json() == trace.to_json()
        data = json.loads(trace.to_json())
        assert list(data) == ["k", "mode", "sources", "sinks", "preconditions", "stages", "core", "first",
                              "R", "M", "Q", "assertions"]

    def test_unchecked_mode_agrees(self, linked_k2):
        """Integration Test: on a qualifying input both modes build the same linkage."""
        tournament, X0, Y0, Q, _ = linked_k2
        assert link(tournament, X0, Y0, mode="unchecked")[0] == Q


class TestUncheckedRuns:
    """Unchecked mode below the thresholds."""

    @pytest.mark.parametrize("seed", range(5))
    def test_small_random(self, seed):
        """Unit Test: on n=30, k=1 the run either verifies or stops with a typed linker error."""
        t = random_tournament(30, seed)
        X0, Y0 = choose_terminals(30, 1, seed)
        try:
            Q, trace = link(t, X0, Y0, mode="unchecked")
        except LinkerError:
            return
        assert verify_linkage(t, X0, Y0, Q).ok
        assert trace.Q == Q
