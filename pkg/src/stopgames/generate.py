"""Random stopping-game generators.

Both variants build a game in two phases.  Phase 1 numbers the nodes and
gives every non-terminal a first arc to a strictly higher-numbered node,
which already guarantees a path to a terminal.  Phase 2 hands out second
arcs: average nodes may point anywhere, while each max/min node picks
uniformly from the set of targets that provably cannot close a player-
controlled terminal-free trap (``find_valid_arcs``).  The result is
always a stopping game, and any stopping game without max/min arcs to
terminals can be produced under some seed.

The modified variant additionally plants average nodes next to both
terminals, keeps max/min arcs off the terminals, steers second arcs
toward in-degree-zero nodes, and merges provably 0/1-valued nodes into
the terminals, so that its output usually satisfies the full reduction
checklist out of the box.

Draw order (fixed for reproducibility): kind labels are shuffled first;
first arcs are drawn in ascending node order; each phase-2 loop picks the
pending node by index, then its target.  All randomness comes from the
package's SplitMix64 stream seeded per attempt with ``derive_seed``.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .game import Game, NodeKind, PartialGame
from .reduce import check_assumptions, merge_terminal_valued
from .rng import Rng, derive_seed


class GenerationError(RuntimeError):
    pass


class Variant(Enum):
    BASIC = "basic"
    MODIFIED = "modified"


@dataclass(frozen=True)
class GenParams:
    """Node budget for one generation run: n = a + b + c + 2."""

    n: int
    a: int  # average nodes
    b: int  # min nodes
    c: int  # max nodes
    seed: int
    variant: Variant = Variant.BASIC

    def __post_init__(self):
        if self.n != self.a + self.b + self.c + 2:
            raise ValueError(f"n={self.n} is not a+b+c+2")
        min_a = 2 if self.variant is Variant.MODIFIED else 1
        if self.a < min_a or self.b < 1 or self.c < 1:
            raise ValueError(
                f"{self.variant.value} generation needs a>={min_a}, b,c>=1"
            )


@dataclass(frozen=True)
class RatioSpec:
    """Benchmark cell: target node count and average:max ratio num/4."""

    size: int
    ratio_num: int

    def __post_init__(self):
        if not 1 <= self.ratio_num <= 8:
            raise ValueError("ratio numerator must be in 1..8")
        if self.size < 6:
            raise ValueError("size must be at least 6")


def ratio_counts(size: int, ratio_num: int) -> tuple[int, int, int]:
    """Node counts (a, b, c) realizing ratio a:c = ratio_num:4 with b = c.

    The max count follows from the size, the average count from the exact
    ratio, so totals may drift one or two nodes from the label; realized
    counts are recorded in instance metadata.
    """
    c = round(4 * (size - 2) / (ratio_num + 8))
    c = max(c, 1)
    a = max(2, round(ratio_num * c / 4))
    return a, c, c


@dataclass(frozen=True)
class GenMeta:
    """Sidecar metadata for one generated instance."""

    seed: int
    variant: str
    a: int
    b: int
    c: int
    retries: int
    realized_n: int

    def as_dict(self) -> dict:
        return {
            "seed": self.seed,
            "variant": self.variant,
            "a": self.a,
            "b": self.b,
            "c": self.c,
            "retries": self.retries,
            "realized": {"n": self.realized_n},
        }


def find_valid_arcs(g, m: int) -> set[int]:
    """Targets q such that adding arc (m, q) cannot create a trap.

    ``m`` must be a max or min node with exactly one out-arc.  Starting
    from the ancestors of m (the only candidates that could close a new
    cycle), nodes are restored once they provably cannot sit in any
    player-controlled terminal-free set: an average node with a missing
    arc or an arc to a restored-or-terminal node, or a max/min node whose
    every present arc leads to one.  Terminals themselves are always
    valid targets and are left in the result; generators strip them.

    The returned set excludes m and m's current target.
    """
    if not g.kind(m).is_decision:
        raise ValueError(f"node {m} is not a max or min node")
    out_m = g.arcs_of(m)
    if len(out_m) != 1:
        raise ValueError(f"node {m} must have exactly one out-arc, has {len(out_m)}")
    p = out_m[0]
    n = g.n
    parents = g.parents()

    safe = [True] * (n + 1)
    safe[m] = False
    removed = []
    stack = [m]
    while stack:
        u = stack.pop()
        for par in parents[u]:
            if safe[par]:
                safe[par] = False
                removed.append(par)
                stack.append(par)

    def restorable(v: int) -> bool:
        out = g.arcs_of(v)
        if g.kind(v) is NodeKind.AVERAGE:
            return len(out) < 2 or any(safe[t] for t in out)
        return all(safe[t] for t in out)

    queue = [v for v in removed if restorable(v)]
    while queue:
        v = queue.pop()
        if safe[v] or not restorable(v):
            continue
        safe[v] = True
        for par in parents[v]:
            if not safe[par] and par != m:
                queue.append(par)

    result = {q for q in range(1, n + 1) if safe[q]}
    result.discard(m)
    result.discard(p)
    return result


def _pick_excluding(rng: Rng, n: int, excluded: set[int]) -> int:
    """Uniform node id in 1..n outside ``excluded``."""
    r = rng.randbelow(n - len(excluded))
    x = r + 1
    for e in sorted(excluded):
        if e <= x:
            x += 1
    return x


def _assign_second_arcs_decisions(pg: PartialGame, rng: Rng, prefer_zero_indegree: bool):
    """Phase-2 loop for max/min nodes; False return means a dead end."""
    t0, t1 = pg.terminal0, pg.terminal1
    pending = [
        i
        for i in range(1, pg.n + 1)
        if pg.kind(i).is_decision and len(pg.arcs_of(i)) == 1
    ]
    while pending:
        m = pending.pop(rng.randbelow(len(pending)))
        candidates = sorted(q for q in find_valid_arcs(pg, m) if q not in (t0, t1))
        if not candidates:
            return False
        if prefer_zero_indegree:
            zero = [q for q in candidates if pg.indegree[q] == 0]
            if zero:
                candidates = zero
        pg.add_arc(m, candidates[rng.randbelow(len(candidates))])
    return True


def _complete_average_arcs(pg: PartialGame, rng: Rng):
    pending = [
        i
        for i in range(1, pg.n + 1)
        if pg.kind(i) is NodeKind.AVERAGE and len(pg.arcs_of(i)) == 1
    ]
    while pending:
        m = pending.pop(rng.randbelow(len(pending)))
        first = pg.arcs_of(m)[0]
        pg.add_arc(m, _pick_excluding(rng, pg.n, {m, first}))


def _build_basic(p: GenParams, rng: Rng) -> Game | None:
    n = p.n
    kinds: list[NodeKind] = [NodeKind.MAX] * n
    kinds[n - 2] = NodeKind.TERMINAL0
    kinds[n - 1] = NodeKind.TERMINAL1
    kinds[n - 3] = NodeKind.AVERAGE
    labels = (
        [NodeKind.AVERAGE] * (p.a - 1) + [NodeKind.MIN] * p.b + [NodeKind.MAX] * p.c
    )
    rng.shuffle(labels)
    for i, kind in enumerate(labels):
        kinds[i] = kind
    pg = PartialGame(kinds)

    for v in range(1, n - 1):
        pg.add_arc(v, v + 1 + rng.randbelow(n - v))

    _complete_average_arcs(pg, rng)
    if not _assign_second_arcs_decisions(pg, rng, prefer_zero_indegree=False):
        return None
    return pg.freeze()


def generate_basic(p: GenParams) -> Game:
    """Basic generator; deterministic in ``p.seed``.

    A tiny fraction of attempts can dead-end when the only valid second
    arc left for some max/min node is its own current target; those
    attempts restart on a derived sub-seed, keeping the overall function
    a pure map from parameters to a stopping game.
    """
    if p.variant is not Variant.BASIC:
        raise ValueError("generate_basic needs variant=Variant.BASIC")
    for attempt in range(256):
        g = _build_basic(p, Rng(derive_seed(p.seed, attempt)))
        if g is not None:
            return g
    raise GenerationError(f"basic generation dead-ended 256 times (seed {p.seed})")


def _build_modified(p: GenParams, rng: Rng) -> PartialGame | None:
    n = p.n
    kinds: list[NodeKind] = [NodeKind.MAX] * n
    kinds[n - 2] = NodeKind.TERMINAL0
    kinds[n - 1] = NodeKind.TERMINAL1
    kinds[n - 3] = NodeKind.AVERAGE
    kinds[n - 4] = NodeKind.AVERAGE
    labels = (
        [NodeKind.AVERAGE] * (p.a - 2) + [NodeKind.MIN] * p.b + [NodeKind.MAX] * p.c
    )
    rng.shuffle(labels)
    for i, kind in enumerate(labels):
        kinds[i] = kind
    pg = PartialGame(kinds)
    pg.add_arc(n - 2, n - 1)  # terminal-adjacent average feeding the 0-terminal
    pg.add_arc(n - 3, n)  # and its 1-terminal twin

    for v in range(1, n - 1):
        kind = pg.kind(v)
        if kind is NodeKind.AVERAGE:
            if not pg.arcs_of(v):
                pg.add_arc(v, v + 1 + rng.randbelow(n - v))
        else:
            # max/min first arcs stay off the terminals
            pg.add_arc(v, v + 1 + rng.randbelow(n - 2 - v))

    z = sum(1 for i in range(1, n + 1) if pg.indegree[i] == 0)
    r = rng.randint(max(z - (p.b + p.c), 0), min(p.a, z))
    for _ in range(r):
        eligible = []
        for m in range(1, n + 1):
            if pg.kind(m) is not NodeKind.AVERAGE or len(pg.arcs_of(m)) != 1:
                continue
            first = pg.arcs_of(m)[0]
            if any(
                pg.indegree[q] == 0 and q not in (m, first) for q in range(1, n + 1)
            ):
                eligible.append(m)
        if not eligible:
            break
        m = eligible[rng.randbelow(len(eligible))]
        first = pg.arcs_of(m)[0]
        zq = [
            q
            for q in range(1, n + 1)
            if pg.indegree[q] == 0 and q not in (m, first)
        ]
        pg.add_arc(m, zq[rng.randbelow(len(zq))])

    _complete_average_arcs(pg, rng)
    if not _assign_second_arcs_decisions(pg, rng, prefer_zero_indegree=True):
        return None
    return pg


def generate_reduced(p: GenParams, merge: bool = True) -> Game:
    """Modified generator; merges 0/1-valued nodes unless ``merge=False``."""
    if p.variant is not Variant.MODIFIED:
        raise ValueError("generate_reduced needs variant=Variant.MODIFIED")
    for attempt in range(256):
        pg = _build_modified(p, Rng(derive_seed(p.seed, attempt)))
        if pg is not None:
            g = pg.freeze()
            if not merge:
                return g
            reduced, _ = merge_terminal_valued(g)
            return reduced
    raise GenerationError(f"modified generation dead-ended 256 times (seed {p.seed})")


def generate_fully_reduced(
    spec: RatioSpec, seed: int, retry_cap: int = 10000
) -> tuple[Game, GenMeta]:
    """Generate until an instance satisfies the whole reduction checklist
    (including the single-component form); returns it with its metadata.
    """
    a, b, c = ratio_counts(spec.size, spec.ratio_num)
    for k in range(retry_cap):
        params = GenParams(
            n=a + b + c + 2,
            a=a,
            b=b,
            c=c,
            seed=derive_seed(seed, k),
            variant=Variant.MODIFIED,
        )
        g = generate_reduced(params)
        checklist = check_assumptions(g)
        if checklist.fully_reduced and checklist.single_nonterminal_scc:
            meta = GenMeta(
                seed=seed,
                variant=Variant.MODIFIED.value,
                a=a,
                b=b,
                c=c,
                retries=k,
                realized_n=g.n,
            )
            return g, meta
    raise GenerationError(
        f"no fully reduced instance within {retry_cap} attempts "
        f"(size {spec.size}, ratio {spec.ratio_num}:4, seed {seed})"
    )
