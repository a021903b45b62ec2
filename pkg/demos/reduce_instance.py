"""Walkthrough: the reduction pipeline on a deliberately messy game.

The input packs a max node with a terminal arc, duplicate arcs, an
average self-arc, and an unreferenced node.  The pipeline removes all of
them, then the recovered solution is checked against the original.
"""

from stopgames import (
    Game,
    NodeKind,
    Polarity,
    find_terminal_valued,
    recover_values,
    reduce_game,
    solve_brute_force,
)

K = NodeKind
messy = Game(
    n=9,
    kinds=(K.MAX, K.MIN, K.AVERAGE, K.AVERAGE, K.AVERAGE, K.MAX, K.AVERAGE, K.TERMINAL0, K.TERMINAL1),
    arcs=((9, 3), (3, 3), (3, 4), (5, 9), (4, 8), (2, 5), (8, 9), (), ()),
)

reduced, report = reduce_game(messy)
print(f"reduced {messy.n} nodes down to {reduced.n}")
print("merges applied:")
for removed, absorber, rule in report.merges:
    print(f"  node {removed} -> node {absorber}  ({rule})")
if report.removed_zero_indegree:
    print(f"deleted unreferenced nodes: {report.removed_zero_indegree}")
print(f"renumbering of survivors: {report.renumbering}")

truth = solve_brute_force(messy)
if reduced.n > 2:
    reduced_truth = solve_brute_force(reduced)
    reduced_vals = {i: reduced_truth.values.value(i) for i in range(1, reduced.n + 1)}
else:
    reduced_vals = {1: 0, 2: 1}
recovered = recover_values(messy, report, reduced_vals)
print("\nvalue recovery check:")
for i in range(1, messy.n + 1):
    original = truth.values.value(i)
    print(f"  node {i}: original {original}, recovered {recovered[i]}, match={original == recovered[i]}")

one = find_terminal_valued(messy, Polarity.ONE)
zero = find_terminal_valued(messy, Polarity.ZERO)
print(f"\nforced 1-valued nodes: {sorted(one)}")
print(f"forced 0-valued nodes: {sorted(zero)}")
