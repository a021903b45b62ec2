from fractions import Fraction

import pytest
from conftest import (
    all_strategy_pairs,
    build_game,
    oracle_pair_values,
    random_pair,
    random_stopping_game,
)

from stopgames import (
    EXACT,
    FLOAT,
    NonStoppingGameError,
    Player,
    Strategy,
    StrategyPair,
    ValueVector,
    best_response,
    evaluate_strategy_pair,
    is_stable,
    reachable_to_terminal,
    switchable_set,
)
from stopgames.evaluate import value_vector_from_json, value_vector_to_json
from stopgames.rng import Rng

MINIMAL = build_game([("avg", (2, 3))])
CHAIN = build_game([("avg", (2, 4)), ("avg", (3, 4))])
CYCLE4 = build_game([("max", (2, 4)), ("min", (1, 4))])

EMPTY_PAIR = StrategyPair(Strategy(Player.MAX, {}), Strategy(Player.MIN, {}))


def pair(g, sigma_bits=None, tau_bits=None):
    sigma = Strategy(Player.MAX, dict(zip(g.max_nodes, sigma_bits or [])))
    tau = Strategy(Player.MIN, dict(zip(g.min_nodes, tau_bits or [])))
    return StrategyPair(sigma, tau)


def test_reachability_minimal():
    assert reachable_to_terminal(MINIMAL, EMPTY_PAIR) == {1, 2, 3}


def test_reachability_closed_cycle():
    sp = pair(CYCLE4, sigma_bits=[0], tau_bits=[0])
    assert reachable_to_terminal(CYCLE4, sp) == {3, 4}


def test_reachability_full_on_stopping_games():
    for seed in range(100):
        g = random_stopping_game(seed)
        sp = random_pair(g, Rng(seed * 31 + 7))
        assert reachable_to_terminal(g, sp) == set(range(1, g.n + 1))


def test_evaluate_minimal_exact():
    v = evaluate_strategy_pair(MINIMAL, EMPTY_PAIR, EXACT)
    assert v.value(1) == Fraction(1, 2)
    assert v.value(2) == 0 and v.value(3) == 1


def test_evaluate_chain_hand_solved():
    v = evaluate_strategy_pair(CHAIN, EMPTY_PAIR, EXACT)
    assert [v.value(i) for i in range(1, 5)] == [
        Fraction(3, 4),
        Fraction(1, 2),
        Fraction(0),
        Fraction(1),
    ]


def test_evaluate_zero_sets_trapped_nodes():
    sp = pair(CYCLE4, sigma_bits=[0], tau_bits=[0])
    v = evaluate_strategy_pair(CYCLE4, sp, EXACT)
    assert v.value(1) == 0 and v.value(2) == 0


def test_evaluate_matches_fixpoint_oracle():
    for seed in range(60):
        g = random_stopping_game(seed, max_nodes=10)
        sp = random_pair(g, Rng(seed + 5000))
        got = evaluate_strategy_pair(g, sp, FLOAT)
        want = oracle_pair_values(g, sp)
        for i in range(1, g.n + 1):
            assert got.value(i) == pytest.approx(want[i], abs=1e-9)


def test_exact_and_float_agree():
    for seed in range(40):
        g = random_stopping_game(seed, max_nodes=12)
        sp = random_pair(g, Rng(seed + 9000))
        exact = evaluate_strategy_pair(g, sp, EXACT)
        fl = evaluate_strategy_pair(g, sp, FLOAT)
        for i in range(1, g.n + 1):
            assert abs(float(exact.value(i)) - fl.value(i)) <= 1e-9


def test_exact_and_float_agree_midsize():
    # a few hundred nodes, enough averages to exercise the modular path
    from stopgames.generate import RatioSpec, generate_fully_reduced

    for size, ratio in ((256, 8), (500, 4)):
        g, _ = generate_fully_reduced(RatioSpec(size, ratio), seed=size + ratio)
        sp = random_pair(g, Rng(size * 7 + ratio))
        exact = evaluate_strategy_pair(g, sp, EXACT)
        fl = evaluate_strategy_pair(g, sp, FLOAT)
        for i in range(1, g.n + 1):
            assert abs(float(exact.value(i)) - fl.value(i)) <= 1e-9


def test_evaluate_rejects_incomplete_strategy():
    with pytest.raises(ValueError):
        evaluate_strategy_pair(CYCLE4, EMPTY_PAIR)


def test_is_stable_examples():
    good = ValueVector((Fraction(1, 2), Fraction(0), Fraction(1)), EXACT)
    bad = ValueVector((0.4, 0.0, 1.0), FLOAT)
    assert is_stable(MINIMAL, good, 0)
    assert not is_stable(MINIMAL, bad, 1e-9)


def test_switchable_empty_iff_stable():
    for seed in range(50):
        g = random_stopping_game(seed, max_nodes=10)
        sp = random_pair(g, Rng(seed + 123))
        v = evaluate_strategy_pair(g, sp, EXACT)
        stable = is_stable(g, v, 0)
        empty = not switchable_set(g, v, Player.MAX) and not switchable_set(
            g, v, Player.MIN
        )
        assert stable == empty


def test_switchable_detects_better_arc():
    # max node choosing a 0-valued child with a 1-valued alternative
    g = build_game([("max", (3, 4)), ("avg", (3, 4))])
    v = ValueVector((Fraction(0), Fraction(1, 2), Fraction(0), Fraction(1)), EXACT)
    assert switchable_set(g, v, Player.MAX) == {1}


def test_switching_improves_max_values():
    improved = 0
    for seed in range(200):
        g = random_stopping_game(seed, max_nodes=10)
        rng = Rng(seed + 321)
        sp = random_pair(g, rng)
        v = evaluate_strategy_pair(g, sp, EXACT)
        flips = switchable_set(g, v, Player.MAX)
        if not flips:
            continue
        choice = dict(sp.sigma.choice)
        for i in flips:
            choice[i] = 1 - choice[i]
        v2 = evaluate_strategy_pair(
            g, StrategyPair(Strategy(Player.MAX, choice), sp.tau), EXACT
        )
        assert all(v2.value(i) >= v.value(i) for i in range(1, g.n + 1))
        improved += 1
    assert improved > 20


def test_best_response_min_picks_smaller_subgame():
    # min chooses between a 1/4-valued chain and a 3/4-valued chain
    g = build_game(
        [
            ("min", (2, 3)),
            ("avg", (4, 5)),  # value 1/4
            ("avg", (4, 6)),  # value 3/4
            ("avg", (5, 6)),  # value 1/2
        ]
    )
    tau, v = best_response(g, Strategy(Player.MAX, {}), Player.MIN, EXACT)
    assert tau.choice == {1: 0}
    assert v.value(1) == Fraction(1, 4)


def test_best_response_vacuous_without_responder_nodes():
    tau, v = best_response(MINIMAL, Strategy(Player.MAX, {}), Player.MIN, EXACT)
    assert tau.choice == {}
    assert v.value(1) == Fraction(1, 2)


def test_best_response_rejects_non_stopping():
    with pytest.raises(NonStoppingGameError):
        best_response(CYCLE4, Strategy(Player.MAX, {1: 0}), Player.MIN)


def test_best_response_matches_enumeration():
    for seed in range(40):
        g = random_stopping_game(seed, max_nodes=10)
        rng = Rng(seed + 777)
        sigma = Strategy(Player.MAX, {i: rng.randbelow(2) for i in g.max_nodes})
        _, got = best_response(g, sigma, Player.MIN, EXACT)
        best = None
        for sp in all_strategy_pairs(g):
            if sp.sigma.choice != sigma.choice:
                continue
            v = evaluate_strategy_pair(g, sp, EXACT)
            if best is None:
                best = list(v.values)
            else:
                best = [min(x, y) for x, y in zip(best, v.values)]
        assert list(got.values) == best


def test_value_vector_json_round_trip():
    v = evaluate_strategy_pair(CHAIN, EMPTY_PAIR, EXACT)
    text = value_vector_to_json(v)
    assert '"3/4"' in text
    back = value_vector_from_json(text)
    assert back == v
    vf = evaluate_strategy_pair(CHAIN, EMPTY_PAIR, FLOAT)
    assert value_vector_from_json(value_vector_to_json(vf)) == vf
