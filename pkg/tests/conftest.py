"""Shared builders and independent oracles for the test suite.

The oracles here deliberately re-implement semantics from scratch (path
searches, fixed-pair fixpoint iteration, strategy enumeration) so that
library code is checked against something that does not share its code
paths.
"""

from __future__ import annotations

import itertools
from fractions import Fraction

from stopgames import (
    Game,
    NodeKind,
    PartialGame,
    Player,
    Strategy,
    StrategyPair,
)
from stopgames.generate import GenParams, Variant, generate_basic
from stopgames.rng import Rng

KIND = {
    "max": NodeKind.MAX,
    "min": NodeKind.MIN,
    "avg": NodeKind.AVERAGE,
    "t0": NodeKind.TERMINAL0,
    "t1": NodeKind.TERMINAL1,
}


def build_game(entries) -> Game:
    """Compact game builder: entries are (kind, (j, k)) per non-terminal
    node in id order; the two terminals are appended automatically."""
    n = len(entries) + 2
    kinds = [KIND[k] for k, _ in entries] + [NodeKind.TERMINAL0, NodeKind.TERMINAL1]
    arcs = [tuple(a) for _, a in entries] + [(), ()]
    return Game(n, tuple(kinds), tuple(arcs))


def random_full_game(rng: Rng, decision_nodes: int, allow_self_arcs: bool = True) -> Game:
    """Random well-formed game, frequently non-stopping; arc targets are
    uniform over all nodes."""
    n = decision_nodes + 2
    entries = []
    for i in range(1, n - 1):
        kind = ("max", "min", "avg")[rng.randbelow(3)]
        while True:
            a = 1 + rng.randbelow(n)
            b = 1 + rng.randbelow(n)
            if allow_self_arcs or (a != i and b != i):
                break
        entries.append((kind, (a, b)))
    return build_game(entries)


def random_stopping_game(seed: int, max_nodes: int = 12) -> Game:
    """Small random stopping game via the basic generator with random
    node-type counts."""
    rng = Rng(seed)
    total = 5 + rng.randbelow(max_nodes - 4)  # 5..max_nodes
    budget = total - 2
    a = 1 + rng.randbelow(budget - 2)
    b = 1 + rng.randbelow(budget - a - 1)
    c = budget - a - b
    return generate_basic(
        GenParams(n=total, a=a, b=b, c=c, seed=rng.u64(), variant=Variant.BASIC)
    )


def random_pair(g: Game, rng: Rng) -> StrategyPair:
    return StrategyPair(
        Strategy(Player.MAX, {i: rng.randbelow(2) for i in g.max_nodes}),
        Strategy(Player.MIN, {i: rng.randbelow(2) for i in g.min_nodes}),
    )


def all_strategy_pairs(g: Game):
    max_nodes, min_nodes = g.max_nodes, g.min_nodes
    for sigma_bits in itertools.product((0, 1), repeat=len(max_nodes)):
        sigma = Strategy(Player.MAX, dict(zip(max_nodes, sigma_bits)))
        for tau_bits in itertools.product((0, 1), repeat=len(min_nodes)):
            yield StrategyPair(sigma, Strategy(Player.MIN, dict(zip(min_nodes, tau_bits))))


def subgraph_reaches_terminal(g: Game, sp: StrategyPair) -> bool:
    """Independent path oracle: does every node reach a terminal in the
    strategy subgraph?  Forward closure per node, no shared machinery."""
    chosen = {}
    for i in g.max_nodes:
        chosen[i] = g.arcs_of(i)[sp.sigma.choice[i]]
    for i in g.min_nodes:
        chosen[i] = g.arcs_of(i)[sp.tau.choice[i]]
    terminals = {g.terminal0, g.terminal1}
    for start in range(1, g.n + 1):
        seen = {start}
        stack = [start]
        found = start in terminals
        while stack and not found:
            u = stack.pop()
            if u in terminals:
                found = True
                break
            outs = (chosen[u],) if g.kind(u).is_decision else g.arcs_of(u)
            for t in outs:
                if t in terminals:
                    found = True
                    break
                if t not in seen:
                    seen.add(t)
                    stack.append(t)
        if not found:
            return False
    return True


def oracle_is_stopping(g: Game) -> bool:
    return all(subgraph_reaches_terminal(g, sp) for sp in all_strategy_pairs(g))


def oracle_pair_values(g: Game, sp: StrategyPair, sweeps: int = 200000, tol: float = 1e-13):
    """Independent fixed-pair solution: iterate the per-node update from
    zero, which converges to the zero-setting solution."""
    chosen = {}
    for i in g.max_nodes:
        chosen[i] = g.arcs_of(i)[sp.sigma.choice[i]]
    for i in g.min_nodes:
        chosen[i] = g.arcs_of(i)[sp.tau.choice[i]]
    v = [0.0] * (g.n + 1)
    v[g.terminal1] = 1.0
    for _ in range(sweeps):
        delta = 0.0
        nv = v[:]
        for i in range(1, g.n + 1):
            kind = g.kind(i)
            if kind.is_terminal:
                continue
            if kind.is_decision:
                nv[i] = v[chosen[i]]
            else:
                a, b = g.arcs_of(i)
                nv[i] = 0.5 * (v[a] + v[b])
            delta = max(delta, abs(nv[i] - v[i]))
        v = nv
        if delta < tol:
            break
    return v


def brute_force_valid_arcs(pg: PartialGame, m: int) -> set[int]:
    """Add-and-check oracle: every target whose added arc leaves the
    bad core empty."""
    from stopgames import find_bad_core

    p = pg.arcs_of(m)[0]
    valid = set()
    for q in range(1, pg.n + 1):
        if q in (m, p):
            continue
        trial = PartialGame(list(pg.kinds))
        for i in range(1, pg.n + 1):
            for t in pg.arcs_of(i):
                trial.add_arc(i, t)
        trial.add_arc(m, q)
        if not find_bad_core(trial):
            valid.add(q)
    return valid


def oracle_values(g: Game) -> dict[int, Fraction]:
    """Ground-truth optimal values by exhaustive strategy enumeration."""
    from stopgames import solve_brute_force

    res = solve_brute_force(g)
    return {i: res.values.value(i) for i in range(1, g.n + 1)}


def assert_value_preserving(g: Game, reduced: Game, report) -> None:
    """Solving the reduced game and mapping back must reproduce the
    original game's ground-truth values exactly."""
    from stopgames import recover_values

    before = oracle_values(g)
    if reduced.n > 2:
        reduced_vals = oracle_values(reduced)
    else:
        reduced_vals = {1: Fraction(0), 2: Fraction(1)}
    recovered = recover_values(g, report, reduced_vals)
    assert recovered == before


def deep_partial(seed: int, nodes: int) -> tuple[PartialGame, int]:
    """Random bad-core-free partial game plus a max/min node with exactly
    one out-arc, the input shape of the valid-arc search."""
    from stopgames import find_bad_core

    rng = Rng(seed)
    while True:
        n = max(4, nodes)
        kinds = [KIND[("max", "min", "avg")[rng.randbelow(3)]] for _ in range(n - 2)]
        kinds += [NodeKind.TERMINAL0, NodeKind.TERMINAL1]
        pg = PartialGame(kinds)
        for i in range(1, n - 1):
            arc_count = (0, 1, 1, 2, 2)[rng.randbelow(5)]
            for _ in range(arc_count):
                pg.add_arc(i, 1 + rng.randbelow(n))
        if find_bad_core(pg):
            continue
        candidates = [
            i
            for i in range(1, n - 1)
            if pg.kind(i).is_decision and len(pg.arcs_of(i)) == 1
        ]
        if not candidates:
            continue
        return pg, candidates[rng.randbelow(len(candidates))]
