"""Coloured grid patterns and the partition algebra shared by the solvers.

Coordinates are 1-based: x runs 1..m from west to east and y runs 1..n from
south to north, matching the direction of assembly growth.  Internally rows
are stored south-first (``rows[y-1][x-1]``); the text file format stores the
top row (y = n) first so a file reads like the picture.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from functools import cached_property


class PatternError(ValueError):
    """Raised for malformed pattern files or inconsistent grids."""


@dataclass(frozen=True)
class Pattern:
    """A k-coloured rectangular grid.

    Every colour index in [0, k) must occur at least once (the colouring is
    onto); this is validated on construction.
    """

    m: int
    n: int
    k: int
    rows: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        if self.m < 1 or self.n < 1 or self.k < 1:
            raise PatternError(f"bad dimensions m={self.m} n={self.n} k={self.k}")
        if len(self.rows) != self.n:
            raise PatternError(f"expected {self.n} rows, got {len(self.rows)}")
        seen = set()
        for row in self.rows:
            if len(row) != self.m:
                raise PatternError(f"expected {self.m} cells per row, got {len(row)}")
            for c in row:
                if not isinstance(c, int) or not 0 <= c < self.k:
                    raise PatternError(f"colour {c!r} out of range [0, {self.k})")
                seen.add(c)
        if len(seen) != self.k:
            missing = sorted(set(range(self.k)) - seen)
            raise PatternError(f"colours never used: {missing}")

    def colour(self, x: int, y: int) -> int:
        return self.rows[y - 1][x - 1]

    def cells(self):
        """Iterate ((x, y), colour) over the grid in row-major order."""
        for y in range(1, self.n + 1):
            for x in range(1, self.m + 1):
                yield (x, y), self.rows[y - 1][x - 1]

    def digest(self) -> str:
        """SHA-256 of the canonical file encoding."""
        return hashlib.sha256(save_pattern(self).encode("ascii")).hexdigest()


@dataclass(frozen=True)
class Partition:
    """A partition of the m*n grid cells into disjoint classes.

    Classes are kept in canonical order (sorted by each class's minimum cell
    in row-major order) and class ids are their indices, so equal partitions
    compare equal structurally.
    """

    m: int
    n: int
    classes: tuple[frozenset[tuple[int, int]], ...]

    def __post_init__(self) -> None:
        cover = set()
        total = 0
        for cls in self.classes:
            if not cls:
                raise PatternError("empty partition class")
            total += len(cls)
            cover |= cls
        expect = {(x, y) for x in range(1, self.m + 1) for y in range(1, self.n + 1)}
        if cover != expect or total != self.m * self.n:
            raise PatternError("classes do not partition the grid")
        keys = [min(_cell_index(self.m, c) for c in cls) for cls in self.classes]
        if keys != sorted(keys):
            raise PatternError("classes not in canonical order")

    @property
    def size(self) -> int:
        return len(self.classes)

    @cached_property
    def class_of(self) -> dict[tuple[int, int], int]:
        out: dict[tuple[int, int], int] = {}
        for i, cls in enumerate(self.classes):
            for cell in cls:
                out[cell] = i
        return out


def _cell_index(m: int, cell: tuple[int, int]) -> int:
    x, y = cell
    return (y - 1) * m + (x - 1)


def make_partition(m: int, n: int, groups) -> Partition:
    """Build a Partition from any iterable of cell groups, canonicalising order."""
    classes = sorted(
        (frozenset(g) for g in groups),
        key=lambda cls: min(_cell_index(m, c) for c in cls),
    )
    return Partition(m, n, tuple(classes))


def initial_partition(m: int, n: int) -> Partition:
    """The all-singletons partition, the root of every search."""
    cells = [(x, y) for y in range(1, n + 1) for x in range(1, m + 1)]
    return make_partition(m, n, ([c] for c in cells))


def colour_partition(pattern: Pattern) -> Partition:
    """The partition induced by the colouring: one class per colour."""
    groups: dict[int, list[tuple[int, int]]] = {c: [] for c in range(pattern.k)}
    for cell, c in pattern.cells():
        groups[c].append(cell)
    return make_partition(pattern.m, pattern.n, groups.values())


def refines(p: Partition, q: Partition) -> bool:
    """True iff every class of q lies inside some class of p (p is coarser)."""
    if (p.m, p.n) != (q.m, q.n):
        raise PatternError("partitions cover different grids")
    class_of = p.class_of
    for cls in q.classes:
        ids = {class_of[cell] for cell in cls}
        if len(ids) > 1:
            return False
    return True


def merge_classes(p: Partition, c1: int, c2: int) -> Partition:
    """Combine two classes of p, returning the coarsened partition."""
    if c1 == c2:
        raise PatternError("cannot merge a class with itself")
    if not (0 <= c1 < p.size and 0 <= c2 < p.size):
        raise PatternError(f"unknown class ids {c1}, {c2}")
    merged = p.classes[c1] | p.classes[c2]
    rest = [cls for i, cls in enumerate(p.classes) if i not in (c1, c2)]
    return make_partition(p.m, p.n, rest + [merged])


def gen_sierpinski(m: int, n: int) -> Pattern:
    """The discrete Sierpinski triangle on an m*n grid.

    Cell (x, y) carries value v = C(x+y-2, x-1) mod 2, i.e. the Pascal
    triangle parity with the right angle of ones at the south-west corner.
    Colour 1 marks v = 1.  Degenerate strips (m == 1 or n == 1) are entirely
    ones and collapse to a single-colour pattern so the colouring stays onto.
    """
    if m < 1 or n < 1:
        raise PatternError("dimensions must be positive")
    if m == 1 or n == 1:
        rows = tuple(tuple(0 for _ in range(m)) for _ in range(n))
        return Pattern(m, n, 1, rows)
    rows = tuple(
        tuple(1 if ((x - 1) & (y - 1)) == 0 else 0 for x in range(1, m + 1))
        for y in range(1, n + 1)
    )
    return Pattern(m, n, 2, rows)


def gen_binary_counter(m: int, n: int) -> Pattern:
    """The binary counter pattern: row y shows y-1 in binary, counting upward.

    Bit x-1 of the row value is shown in column x, so the least significant
    bit sits in the westernmost column.  That is the orientation whose carry
    chain runs west to east, the direction assembly information can travel,
    and the one admitting the classic 4-tile counter.  Colour 1 marks bit 1.
    """
    if m < 1 or n < 1:
        raise PatternError("dimensions must be positive")
    rows = tuple(
        tuple(((y - 1) >> (x - 1)) & 1 for x in range(1, m + 1))
        for y in range(1, n + 1)
    )
    k = 2 if any(any(row) for row in rows) else 1
    return Pattern(m, n, k, rows)


def load_pattern(text: str) -> Pattern:
    """Parse the pattern file format.

    Line 1 is "m n k"; then n rows of m space-separated colour indices, top
    row (y = n) first.  Lines starting with '#' are ignored.
    """
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines:
        raise PatternError("empty pattern file")
    header = lines[0].split()
    if len(header) != 3:
        raise PatternError(f"malformed header {lines[0]!r}, expected 'm n k'")
    try:
        m, n, k = (int(tok) for tok in header)
    except ValueError as exc:
        raise PatternError(f"malformed header {lines[0]!r}") from exc
    body = lines[1:]
    if len(body) != n:
        raise PatternError(f"expected {n} rows, found {len(body)}")
    rows_top_first = []
    for ln in body:
        toks = ln.split()
        if len(toks) != m:
            raise PatternError(f"expected {m} cells in row {ln!r}")
        try:
            row = tuple(int(t) for t in toks)
        except ValueError as exc:
            raise PatternError(f"non-integer cell in row {ln!r}") from exc
        rows_top_first.append(row)
    return Pattern(m, n, k, tuple(reversed(rows_top_first)))


def save_pattern(pattern: Pattern) -> str:
    """Canonical text encoding; load_pattern(save_pattern(p)) == p."""
    out = [f"{pattern.m} {pattern.n} {pattern.k}"]
    for row in reversed(pattern.rows):
        out.append(" ".join(str(c) for c in row))
    return "\n".join(out) + "\n"
