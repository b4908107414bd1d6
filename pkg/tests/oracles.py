"""Independent reference computations the tests check the package against.

Everything here is deliberately brute-force or first-principles: set
partition enumeration for minimal tile sets, binomial parity for the fractal
pattern, a generic linear solve for the kinetic steady state, and a literal
three-pass filter for heuristic pair selection.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

from tilesynth import build_mgta, canonical_glues
from tilesynth.patterns import Pattern, make_partition


def set_partitions(items):
    """Every partition of ``items`` into nonempty groups."""
    items = list(items)
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in set_partitions(rest):
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1:]
        yield [[first]] + part


def partitions_refining_colours(pattern: Pattern):
    """All grid partitions whose classes are colour-homogeneous."""
    groups: dict[int, list] = {}
    for cell, c in pattern.cells():
        groups.setdefault(c, []).append(cell)
    pools = [list(set_partitions(cells)) for cells in groups.values()]
    for combo in itertools.product(*pools):
        yield [cls for part in combo for cls in part]


def brute_minimum_tiles(pattern: Pattern) -> int:
    """Smallest constructible partition size, by full enumeration."""
    best = None
    for classes in partitions_refining_colours(pattern):
        if best is not None and len(classes) >= best:
            continue
        state = build_mgta(make_partition(pattern.m, pattern.n, classes))
        if state.is_constructible:
            best = len(classes)
    assert best is not None
    return best


def brute_minimum_tiles_and_glues(pattern: Pattern, max_tiles: int, max_glues: int):
    """Smallest (t, g) with t <= max_tiles, g <= max_glues admitting a
    solution whose assignment is a most-general one; None when none exists.

    Searched lexicographically by t then g, matching the budget loop of the
    logic-programming route.
    """
    witnesses = {}
    for classes in partitions_refining_colours(pattern):
        t = len(classes)
        if t > max_tiles:
            continue
        state = build_mgta(make_partition(pattern.m, pattern.n, classes))
        if not state.is_constructible:
            continue
        quads = canonical_glues(state)
        g = len({gl for quad in quads for gl in quad})
        prev = witnesses.get(t)
        if prev is None or g < prev[0]:
            witnesses[t] = (g, classes)
    for t in range(1, max_tiles + 1):
        if t in witnesses and witnesses[t][0] <= max_glues:
            return t, witnesses[t][0], witnesses[t][1]
    return None


def sierpinski_value(x: int, y: int) -> int:
    """Pascal-triangle parity: 1 iff C(x+y-2, x-1) is odd."""
    return math.comb(x + y - 2, x - 1) % 2


def counter_bit(x: int, y: int) -> int:
    """Bit x-1 of the integer y-1 (least significant bit westernmost)."""
    return (y - 1) >> (x - 1) & 1


def flow_steady_state(m1: int, m2: int, model) -> tuple[float, float]:
    """Frozen-correct and frozen-incorrect probabilities from the kinetic
    trapping flow balance, solved numerically.

    States: empty, correct, one-match, no-match, with unit inflow into empty
    and freezing at rate r* into the two sinks.
    """
    total = 1 + m1 + m2
    rf = model.r_f
    rs = model.r_star
    rr = [model.r_r(b) for b in range(3)]
    a = np.array([
        [-total * rf, rr[2], rr[1], rr[0]],
        [rf, -rr[2] - rs, 0.0, 0.0],
        [m1 * rf, 0.0, -rr[1] - rs, 0.0],
        [m2 * rf, 0.0, 0.0, -rr[0] - rs],
    ])
    b = np.array([-1.0, 0.0, 0.0, 0.0])
    p = np.linalg.solve(a, b)
    p_fc = rs * p[1]
    p_fi = rs * (p[2] + p[3])
    return float(p_fc), float(p_fi)


def naive_survivors(candidates):
    """Literal three-pass filter over (common glues, larger, smaller)."""
    k = list(candidates)
    if not k:
        return []
    best = max(c.common for c in k)
    k = [c for c in k if c.common == best]
    best = max(c.larger for c in k)
    k = [c for c in k if c.larger == best]
    best = max(c.smaller for c in k)
    return [c for c in k if c.smaller == best]


def random_onto_pattern(rng, m: int, n: int, k: int) -> Pattern:
    """Uniform random colouring, resampled until every colour occurs."""
    while True:
        rows = tuple(tuple(rng.randrange(k) for _ in range(m)) for _ in range(n))
        used = {c for row in rows for c in row}
        if len(used) == k:
            return Pattern(m, n, k, rows)
        if k > m * n:
            raise ValueError("cannot be onto")
