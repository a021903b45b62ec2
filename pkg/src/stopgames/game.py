"""Game graph model for simple stochastic stopping games.

A game is a directed graph over nodes 1..n.  Every non-terminal node is a
max, min, or average node with exactly two ordered out-arcs; node n-1 is
the 0-terminal and node n is the 1-terminal, both without out-arcs.  All
public interfaces use 1-based node ids.

This module also hosts the structural validator, the bad-core fixpoint
that decides whether a game is stopping (every strategy pair gives every
node a path to a terminal), and the canonical JSON instance format.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum


class NonStoppingGameError(ValueError):
    """Raised when an operation that only makes sense on stopping games is
    handed a game with a non-empty bad core."""


class NodeKind(Enum):
    MAX = "max"
    MIN = "min"
    AVERAGE = "avg"
    TERMINAL0 = "t0"
    TERMINAL1 = "t1"

    @property
    def is_terminal(self) -> bool:
        return self in (NodeKind.TERMINAL0, NodeKind.TERMINAL1)

    @property
    def is_decision(self) -> bool:
        return self in (NodeKind.MAX, NodeKind.MIN)


_KIND_FROM_CODE = {k.value: k for k in NodeKind}


@dataclass(frozen=True)
class Game:
    """Immutable game graph.

    ``kinds[i-1]`` is the kind of node i and ``arcs[i-1]`` its ordered
    out-arc pair (empty tuple for terminals).  Instances are hashable and
    safe to share between threads.
    """

    n: int
    kinds: tuple[NodeKind, ...]
    arcs: tuple[tuple[int, ...], ...]

    def kind(self, i: int) -> NodeKind:
        return self.kinds[i - 1]

    def arcs_of(self, i: int) -> tuple[int, ...]:
        return self.arcs[i - 1]

    @property
    def terminal0(self) -> int:
        return self.n - 1

    @property
    def terminal1(self) -> int:
        return self.n

    def nodes_of_kind(self, kind: NodeKind) -> list[int]:
        return [i for i in range(1, self.n + 1) if self.kinds[i - 1] is kind]

    @property
    def max_nodes(self) -> list[int]:
        return self.nodes_of_kind(NodeKind.MAX)

    @property
    def min_nodes(self) -> list[int]:
        return self.nodes_of_kind(NodeKind.MIN)

    @property
    def average_nodes(self) -> list[int]:
        return self.nodes_of_kind(NodeKind.AVERAGE)

    def decision_node_count(self) -> int:
        return sum(1 for k in self.kinds if k.is_decision)

    def parents(self) -> list[list[int]]:
        """Parent lists indexed by node id (entry 0 unused).

        A parent appears once per arc, so duplicate arcs yield duplicate
        entries; that multiplicity is what the linear-cost propagation
        passes rely on.
        """
        par: list[list[int]] = [[] for _ in range(self.n + 1)]
        for i in range(1, self.n + 1):
            for t in self.arcs[i - 1]:
                par[t].append(i)
        return par


class PartialGame:
    """Mutable game under construction: out-degrees may be 0, 1, or 2.

    Single-writer: one generation run owns the instance.  Parent lists and
    in-degrees are maintained incrementally because the generator queries
    them constantly.
    """

    def __init__(self, kinds: list[NodeKind]):
        self.n = len(kinds)
        self.kinds = list(kinds)
        self.arcs: list[list[int]] = [[] for _ in range(self.n)]
        self._parents: list[list[int]] = [[] for _ in range(self.n + 1)]
        self.indegree = [0] * (self.n + 1)

    def kind(self, i: int) -> NodeKind:
        return self.kinds[i - 1]

    def arcs_of(self, i: int) -> tuple[int, ...]:
        return tuple(self.arcs[i - 1])

    @property
    def terminal0(self) -> int:
        return self.n - 1

    @property
    def terminal1(self) -> int:
        return self.n

    def add_arc(self, src: int, dst: int) -> None:
        if self.kinds[src - 1].is_terminal:
            raise ValueError(f"node {src} is a terminal and cannot have arcs")
        if len(self.arcs[src - 1]) >= 2:
            raise ValueError(f"node {src} already has two out-arcs")
        if not 1 <= dst <= self.n:
            raise ValueError(f"arc target {dst} out of range 1..{self.n}")
        self.arcs[src - 1].append(dst)
        self._parents[dst].append(src)
        self.indegree[dst] += 1

    def parents(self) -> list[list[int]]:
        return self._parents

    def freeze(self) -> Game:
        g = Game(self.n, tuple(self.kinds), tuple(tuple(a) for a in self.arcs))
        problems = validate_structure(g)
        if problems:
            raise ValueError("incomplete game: " + "; ".join(problems))
        return g


def validate_structure(g) -> list[str]:
    """Return every violated structural rule of ``g``, empty when valid.

    Accepts a Game (out-degree must be exactly 2) or a PartialGame
    (out-degree at most 2).  Duplicate arcs and self-arcs are legal here;
    the reducer deals with them.
    """
    partial = isinstance(g, PartialGame)
    problems: list[str] = []
    n = g.n
    if n < 2:
        return [f"game needs at least the two terminals, got n={n}"]
    if len(g.kinds) != n or len(g.arcs) != n:
        problems.append("kinds/arcs length does not match n")
        return problems
    if g.kind(n - 1) is not NodeKind.TERMINAL0:
        problems.append(f"node {n - 1} must be the 0-terminal")
    if g.kind(n) is not NodeKind.TERMINAL1:
        problems.append(f"node {n} must be the 1-terminal")
    for i in range(1, n + 1):
        k = g.kind(i)
        if k is NodeKind.TERMINAL0 and i != n - 1:
            problems.append(f"extra 0-terminal at node {i}")
        if k is NodeKind.TERMINAL1 and i != n:
            problems.append(f"extra 1-terminal at node {i}")
        out = g.arcs_of(i)
        if k.is_terminal:
            if out:
                problems.append(f"terminal node {i} has out-arcs")
            continue
        if partial:
            if len(out) > 2:
                problems.append(f"node {i} has out-degree {len(out)}")
        elif len(out) != 2:
            problems.append(f"node {i} has out-degree {len(out)}")
        for t in out:
            if not 1 <= t <= n:
                problems.append(f"arc target out of range: {i} -> {t}")
    return problems


def find_bad_core(g) -> frozenset[int]:
    """Maximal node set in which play can avoid the terminals forever.

    Fixpoint over all non-terminal nodes: repeatedly delete any average
    node with an arc leaving the set and any max/min node with both arcs
    leaving it.  Arcs a PartialGame has not assigned yet count as leaving,
    which keeps the check conservative mid-generation.  The result is
    empty exactly when the game is stopping, and it is a superset of every
    node set in which both players can trap the play.

    Work-queue implementation: each arc is re-examined at most once after
    its target drops out, so the whole check is linear in n.
    """
    n = g.n
    in_set = [False] * (n + 1)
    inside_count = [0] * (n + 1)  # arcs of i that currently stay in the set
    members = []
    for i in range(1, n + 1):
        if not g.kind(i).is_terminal:
            in_set[i] = True
            members.append(i)
    for i in members:
        inside_count[i] = sum(1 for t in g.arcs_of(i) if in_set[t])

    def survives(i: int) -> bool:
        if g.kind(i) is NodeKind.AVERAGE:
            return inside_count[i] == 2
        return inside_count[i] >= 1

    parents = g.parents()
    queue = [i for i in members if not survives(i)]
    while queue:
        i = queue.pop()
        if not in_set[i]:
            continue
        in_set[i] = False
        for p in parents[i]:
            if in_set[p]:
                inside_count[p] -= 1
                if not survives(p):
                    queue.append(p)
    return frozenset(i for i in range(1, n + 1) if in_set[i])


def is_stopping(g) -> bool:
    """True when every strategy pair gives every node a path to a terminal."""
    return not find_bad_core(g)


# --- instance file format ---------------------------------------------------
#
# {"n": int, "nodes": [{"id": int, "kind": "max"|"min"|"avg"|"t0"|"t1",
#                       "arcs": [j, k] or []}, ...]}
# Nodes are listed in ascending id and terminals carry "arcs": [].  The
# serializer below is canonical, so parse-then-serialize is byte-identical
# modulo whitespace in the source.


def game_to_json(g: Game) -> str:
    nodes = [
        {"id": i, "kind": g.kind(i).value, "arcs": list(g.arcs_of(i))}
        for i in range(1, g.n + 1)
    ]
    return json.dumps({"n": g.n, "nodes": nodes}, separators=(",", ":")) + "\n"


def game_from_json(text: str) -> Game:
    data = json.loads(text)
    n = data["n"]
    nodes = data["nodes"]
    if len(nodes) != n:
        raise ValueError(f"instance lists {len(nodes)} nodes but n={n}")
    kinds: list[NodeKind] = [NodeKind.MAX] * n
    arcs: list[tuple[int, ...]] = [()] * n
    seen = set()
    for entry in nodes:
        i = entry["id"]
        if not 1 <= i <= n or i in seen:
            raise ValueError(f"bad or duplicate node id {i}")
        seen.add(i)
        code = entry["kind"]
        if code not in _KIND_FROM_CODE:
            raise ValueError(f"unknown node kind {code!r}")
        kinds[i - 1] = _KIND_FROM_CODE[code]
        arcs[i - 1] = tuple(entry["arcs"])
    g = Game(n, tuple(kinds), tuple(arcs))
    problems = validate_structure(g)
    if problems:
        raise ValueError("invalid instance: " + "; ".join(problems))
    return g


def load_game(path) -> Game:
    with open(path, "r", encoding="utf-8") as fh:
        return game_from_json(fh.read())


def save_game(g: Game, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(game_to_json(g))
