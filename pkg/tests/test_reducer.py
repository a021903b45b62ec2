from fractions import Fraction

import pytest
from conftest import assert_value_preserving, build_game, oracle_values, random_stopping_game

from stopgames import (
    NodeKind,
    NonStoppingGameError,
    Polarity,
    apply_trivial_reductions,
    check_assumptions,
    find_terminal_valued,
    generate_fully_reduced,
    merge_terminal_valued,
    reduce_game,
    scc_condense,
    validate_structure,
)
from stopgames.generate import RatioSpec
from stopgames.reduce import find_terminal_valued_with_stats, replay_reduction

MINIMAL = build_game([("avg", (2, 3))])


def test_max_with_one_terminal_arc_merges_into_terminal():
    g = build_game([("max", (4, 2)), ("avg", (3, 4))])
    reduced, report = apply_trivial_reductions(g)
    assert (1, 4, "terminal-arc") in report.merges
    assert report.constant_nodes[1] == 1
    assert_value_preserving(g, reduced, report)


def test_max_with_zero_terminal_arc_merges_into_sibling():
    g = build_game([("max", (3, 2)), ("avg", (3, 4))])
    reduced, report = apply_trivial_reductions(g)
    assert report.merges[0] == (1, 2, "terminal-arc")
    assert_value_preserving(g, reduced, report)


def test_min_terminal_rules_mirrored():
    g = build_game([("min", (4, 2)), ("avg", (3, 4))])
    _, report = apply_trivial_reductions(g)
    assert report.merges[0] == (1, 2, "terminal-arc")
    g2 = build_game([("min", (3, 2)), ("avg", (3, 4))])
    _, report2 = apply_trivial_reductions(g2)
    assert (1, 3, "terminal-arc") in report2.merges
    assert report2.constant_nodes[1] == 0


def test_identical_arcs_merge():
    g = build_game([("avg", (2, 2)), ("avg", (3, 4))])
    reduced, report = apply_trivial_reductions(g)
    assert (1, 2, "identical-arcs") in report.merges
    assert_value_preserving(g, reduced, report)


def test_average_self_arc_merges_with_other_target():
    g = build_game([("avg", (1, 2)), ("avg", (3, 4))])
    reduced, report = apply_trivial_reductions(g)
    assert (1, 2, "self-arc") in report.merges
    assert_value_preserving(g, reduced, report)


def test_zero_indegree_deletion_and_recovery():
    g = build_game([("max", (2, 3)), ("avg", (4, 5)), ("avg", (4, 5))])
    reduced, report = apply_trivial_reductions(g)
    assert 1 in report.removed_zero_indegree
    assert_value_preserving(g, reduced, report)


def test_unreachable_terminal_collapses_everything():
    # nothing points at the 0-terminal, so every node is worth 1
    g = build_game([("avg", (2, 4)), ("avg", (1, 4))])
    reduced, report = apply_trivial_reductions(g)
    assert reduced.n == 2
    assert report.constant_nodes == {1: 1, 2: 1}
    assert_value_preserving(g, reduced, report)


def test_trivial_reductions_on_random_games_preserve_values():
    shrunk = 0
    for seed in range(120):
        g = random_stopping_game(seed, max_nodes=10)
        reduced, report = apply_trivial_reductions(g)
        assert validate_structure(reduced) == []
        assert_value_preserving(g, reduced, report)
        if reduced.n < g.n:
            shrunk += 1
    assert shrunk > 30


def test_replay_reproduces_reduced_game():
    for seed in range(40):
        g = random_stopping_game(seed, max_nodes=10)
        reduced, report = reduce_game(g)
        assert replay_reduction(g, report) == reduced


def test_terminal_adjacent_pair_or_degenerate_after_trivial():
    for seed in range(80):
        g = random_stopping_game(seed, max_nodes=10)
        reduced, _ = apply_trivial_reductions(g)
        if reduced.n == 2:
            continue
        to0 = {
            i
            for i in range(1, reduced.n - 1)
            if reduced.terminal0 in reduced.arcs_of(i)
        }
        to1 = {
            i
            for i in range(1, reduced.n - 1)
            if reduced.terminal1 in reduced.arcs_of(i)
        }
        assert all(reduced.kind(i) is NodeKind.AVERAGE for i in to0 | to1)
        distinct_pair = to0 and to1 and len(to0 | to1) >= 2
        if not distinct_pair:
            vals = oracle_values(reduced)
            assert all(
                vals[i] == Fraction(1, 2) for i in range(1, reduced.n - 1)
            )


def test_one_valued_propagation_examples():
    two_avg = build_game([("avg", (2, 4)), ("avg", (1, 4))])
    assert find_terminal_valued(two_avg, Polarity.ONE) == {1, 2, 4}
    assert find_terminal_valued(MINIMAL, Polarity.ONE) == {3}
    assert find_terminal_valued(MINIMAL, Polarity.ZERO) == {2}


def test_terminal_valued_requires_stopping():
    bad = build_game([("max", (2, 4)), ("min", (1, 4))])
    with pytest.raises(NonStoppingGameError):
        find_terminal_valued(bad, Polarity.ONE)


def test_terminal_valued_matches_oracle_and_linear_cost():
    for seed in range(120):
        g = random_stopping_game(seed, max_nodes=11)
        vals = oracle_values(g)
        one, examined_one = find_terminal_valued_with_stats(g, Polarity.ONE)
        zero, examined_zero = find_terminal_valued_with_stats(g, Polarity.ZERO)
        assert one == {i for i, v in vals.items() if v == 1}
        assert zero == {i for i, v in vals.items() if v == 0}
        assert examined_one <= 2 * g.n
        assert examined_zero <= 2 * g.n


def test_merge_terminal_valued_degenerate_case():
    g = build_game([("avg", (2, 4)), ("avg", (1, 4))])
    reduced, report = merge_terminal_valued(g)
    assert reduced.n == 2
    assert {(1, 4, "one-valued"), (2, 4, "one-valued")} == set(report.merges)


def test_merge_terminal_valued_identity_on_clean_instance():
    g, _ = generate_fully_reduced(RatioSpec(32, 4), seed=77)
    merged, report = merge_terminal_valued(g)
    assert merged == g
    assert report.merges == []


def test_merge_terminal_valued_idempotent_and_clean():
    for seed in range(60):
        g = random_stopping_game(seed, max_nodes=11)
        merged, _ = merge_terminal_valued(g)
        if merged.n > 2:
            assert find_terminal_valued(merged, Polarity.ONE) == {merged.terminal1}
            assert find_terminal_valued(merged, Polarity.ZERO) == {merged.terminal0}
            again, report = merge_terminal_valued(merged)
            assert again == merged and report.merges == []


def test_merge_terminal_valued_preserves_values():
    for seed in range(60):
        g = random_stopping_game(seed, max_nodes=10)
        merged, report = merge_terminal_valued(g)
        assert_value_preserving(g, merged, report)


def test_scc_single_component_on_fully_reduced():
    g, _ = generate_fully_reduced(RatioSpec(32, 2), seed=5)
    comps = scc_condense(g)
    assert len(comps) == 1
    assert comps[0].nodes == set(range(1, g.n - 1))


def test_scc_two_disjoint_chains():
    g = build_game([("avg", (1, 4)), ("avg", (2, 3))])
    comps = scc_condense(g)
    assert sorted(sorted(c.nodes) for c in comps) == [[1], [2]]
    for comp in comps:
        for src, arc_idx, dst in comp.boundary:
            assert src in comp.nodes and dst not in comp.nodes
            assert g.arcs_of(src)[arc_idx] == dst


def test_scc_emission_is_reverse_topological():
    for seed in range(60):
        g = random_stopping_game(seed, max_nodes=12)
        comps = scc_condense(g)
        seen = set()
        for comp in comps:
            for _, _, dst in comp.boundary:
                assert g.kind(dst).is_terminal or dst in seen
            seen |= comp.nodes


def test_check_assumptions_minimal_game():
    ck = check_assumptions(MINIMAL)
    assert ck.stopping
    assert not ck.terminal_adjacent_average_pair  # only one terminal-adjacent average
    assert ck.single_scc_or_two_constants  # the two-constants branch carries it
    assert not ck.single_nonterminal_scc
    assert not ck.fully_reduced


def test_check_assumptions_flags_terminal_decision_arc():
    g = build_game([("max", (2, 4)), ("avg", (3, 4))])
    ck = check_assumptions(g)
    assert not ck.no_terminal_decision_arcs


def test_check_assumptions_on_fully_reduced_instance():
    g, _ = generate_fully_reduced(RatioSpec(32, 6), seed=3)
    ck = check_assumptions(g)
    assert ck.fully_reduced and ck.single_nonterminal_scc
    assert all(ok for _, ok in ck.items())
