"""Abstract tile assembly at temperature 2 from an L-shaped seed.

Square tiles carry one glue per side; equal glues bind with strength 1 and a
tile may attach once its bonds sum to the temperature.  With strength-1 rule
glues and a seed occupying the west column and south row, growth necessarily
proceeds south-west to north-east and every site is filled through its south
and west sides, so a tile set is deterministic exactly when no two tiles
share their (south, west) glue pair.

This module provides assembly, solution verification against a target
pattern, seed derivation from a desired tile placement, and the tile-system
file format.
"""

from __future__ import annotations

from dataclasses import dataclass

from .patterns import Pattern


class TileSystemError(ValueError):
    """Raised for malformed tile systems or tile-system files."""


class NondeterminismError(TileSystemError):
    """Assembly was requested for a tile set with duplicate (S, W) pairs."""


class StuckError(TileSystemError):
    """No tile fits some frontier site."""

    def __init__(self, x: int, y: int):
        super().__init__(f"no tile attaches at site ({x}, {y})")
        self.site = (x, y)


@dataclass(frozen=True, order=True)
class TileType:
    glue_n: int
    glue_e: int
    glue_s: int
    glue_w: int
    colour: int

    @property
    def glues(self) -> tuple[int, int, int, int]:
        return (self.glue_n, self.glue_e, self.glue_s, self.glue_w)


@dataclass(frozen=True)
class SeedAssembly:
    """The L-shaped border: exposed north glues along the south row and
    exposed east glues along the west column.  The corner cell is decorative.
    """

    m: int
    n: int
    north: tuple[int, ...]  # north glue of seed cell (x, 0), x = 1..m
    east: tuple[int, ...]   # east glue of seed cell (0, y), y = 1..n

    def __post_init__(self) -> None:
        if len(self.north) != self.m or len(self.east) != self.n:
            raise TileSystemError("seed arm lengths do not match the grid")


@dataclass(frozen=True)
class TileSystem:
    """A tile set with its seed; temperature is fixed at 2.

    The glue strength function is implicit: equal labels bind with strength
    1, distinct labels with 0.  An explicit ``strengths`` mapping (label ->
    self-binding strength) may override that for verification tests.
    """

    tiles: tuple[TileType, ...]
    seed: SeedAssembly
    temperature: int = 2
    strengths: tuple[tuple[int, int], ...] | None = None

    def __post_init__(self) -> None:
        quads = [t.glues for t in self.tiles]
        if len(set(quads)) != len(quads):
            raise TileSystemError("duplicate tile type (same four glues)")

    def glue_strength(self, label: int) -> int:
        if self.strengths is None:
            return 1
        return dict(self.strengths).get(label, 1)

    def glue_labels(self) -> set[int]:
        labels = set()
        for t in self.tiles:
            labels.update(t.glues)
        labels.update(self.seed.north)
        labels.update(self.seed.east)
        return labels


@dataclass(frozen=True)
class Assembly:
    m: int
    n: int
    grid: tuple[TileType, ...]  # index (y-1)*m + (x-1)

    def at(self, x: int, y: int) -> TileType:
        return self.grid[(y - 1) * self.m + (x - 1)]


@dataclass(frozen=True)
class Verdict:
    """Outcome of verify_solution: OK, or the violated property plus witness."""

    ok: bool
    violated: str | None = None           # "P1" | "P2" | "P3"
    witness: tuple | None = None          # site, or offending glue label
    detail: str = ""

    def __str__(self) -> str:
        if self.ok:
            return "OK"
        return f"{self.violated} violated at {self.witness}: {self.detail}"


def is_deterministic(tiles) -> bool:
    """True iff all (south, west) glue pairs are distinct across tiles."""
    pairs = [(t.glue_s, t.glue_w) for t in tiles]
    return len(set(pairs)) == len(pairs)


def _input_index(tiles) -> dict[tuple[int, int], TileType]:
    return {(t.glue_s, t.glue_w): t for t in tiles}


def assemble(system: TileSystem, m: int, n: int) -> Assembly:
    """Grow the unique terminal assembly on [1..m] x [1..n].

    Raises NondeterminismError if two tiles share an input pair and
    StuckError at the first site (row-major) no tile fits.
    """
    if not is_deterministic(system.tiles):
        raise NondeterminismError("tile set has duplicate (south, west) glue pairs")
    if system.seed.m != m or system.seed.n != n:
        raise TileSystemError("seed does not span the requested rectangle")
    index = _input_index(system.tiles)
    grid: list[TileType | None] = [None] * (m * n)
    for y in range(1, n + 1):
        for x in range(1, m + 1):
            south = system.seed.north[x - 1] if y == 1 else grid[(y - 2) * m + (x - 1)].glue_n
            west = system.seed.east[y - 1] if x == 1 else grid[(y - 1) * m + (x - 2)].glue_e
            tile = index.get((south, west))
            if tile is None:
                raise StuckError(x, y)
            grid[(y - 1) * m + (x - 1)] = tile
    return Assembly(m, n, tuple(grid))


def assemble_random_order(system: TileSystem, m: int, n: int, rng) -> Assembly:
    """Assemble by repeatedly attaching at a random frontier site.

    For deterministic systems the result matches :func:`assemble`; this
    schedule exists to exercise order independence.
    """
    if not is_deterministic(system.tiles):
        raise NondeterminismError("tile set has duplicate (south, west) glue pairs")
    index = _input_index(system.tiles)
    grid: dict[tuple[int, int], TileType] = {}

    def inputs(x, y):
        south = system.seed.north[x - 1] if y == 1 else (
            grid[(x, y - 1)].glue_n if (x, y - 1) in grid else None)
        west = system.seed.east[y - 1] if x == 1 else (
            grid[(x - 1, y)].glue_e if (x - 1, y) in grid else None)
        return south, west

    frontier = {(1, 1)}
    while frontier:
        x, y = rng.choice(sorted(frontier))
        frontier.discard((x, y))
        south, west = inputs(x, y)
        tile = index.get((south, west))
        if tile is None:
            raise StuckError(x, y)
        grid[(x, y)] = tile
        for nx, ny in ((x + 1, y), (x, y + 1)):
            if nx <= m and ny <= n and (nx, ny) not in grid:
                s2, w2 = inputs(nx, ny)
                if s2 is not None and w2 is not None:
                    frontier.add((nx, ny))
    if len(grid) != m * n:
        missing = min(((y, x) for x in range(1, m + 1) for y in range(1, n + 1)
                       if (x, y) not in grid))
        raise StuckError(missing[1], missing[0])
    cells = tuple(grid[(x, y)] for y in range(1, n + 1) for x in range(1, m + 1))
    return Assembly(m, n, cells)


def verify_solution(system: TileSystem, pattern: Pattern) -> Verdict:
    """Check the three solution properties against a target pattern.

    P1: every rule glue binds with strength 1.  P2: every terminal assembly
    fills the full rectangle.  P3: tile colours reproduce the pattern at
    every site.  For nondeterministic tile sets all attachment alternatives
    are propagated per site (a sound over-approximation of the terminal set),
    so OK verdicts are always trustworthy.
    """
    m, n = pattern.m, pattern.n
    for t in system.tiles:
        for label in t.glues:
            if system.glue_strength(label) != 1:
                return Verdict(False, "P1", (label,),
                               f"glue {label} has strength {system.glue_strength(label)}")
    if system.seed.m != m or system.seed.n != n:
        return Verdict(False, "P2", (0, 0), "seed does not span the rectangle")
    if system.temperature != 2:
        return Verdict(False, "P1", (), "temperature is not 2")

    by_input: dict[tuple[int, int], list[TileType]] = {}
    for t in system.tiles:
        by_input.setdefault((t.glue_s, t.glue_w), []).append(t)

    # poss[x] holds every tile that can occur at the site in some terminal
    # assembly (or a superset thereof when the system is nondeterministic).
    prev_row: list[set[TileType]] = []
    for y in range(1, n + 1):
        row: list[set[TileType]] = []
        for x in range(1, m + 1):
            souths = {system.seed.north[x - 1]} if y == 1 else {t.glue_n for t in prev_row[x - 1]}
            wests = {system.seed.east[y - 1]} if x == 1 else {t.glue_e for t in row[x - 2]}
            here: set[TileType] = set()
            for s in sorted(souths):
                for w in sorted(wests):
                    options = by_input.get((s, w))
                    if not options:
                        return Verdict(False, "P2", (x, y),
                                       f"assembly can stall: no tile with inputs ({s}, {w})")
                    here.update(options)
            want = pattern.colour(x, y)
            for t in sorted(here):
                if t.colour != want:
                    return Verdict(False, "P3", (x, y),
                                   f"tile colour {t.colour} but pattern colour {want}")
            row.append(here)
        prev_row = row
    return Verdict(True)


def derive_seed(m: int, n: int, tile_at) -> SeedAssembly:
    """Seed glues that make a desired placement self-assemble.

    ``tile_at(x, y)`` gives the wanted tile per site.  The seed exposes each
    first-row tile's south glue from below and each first-column tile's west
    glue from the left; the placement must already satisfy glue agreement
    across internal edges.
    """
    for y in range(1, n + 1):
        for x in range(1, m + 1):
            t = tile_at(x, y)
            if x < m and t.glue_e != tile_at(x + 1, y).glue_w:
                raise TileSystemError(f"placement disagrees on edge ({x},{y})-({x+1},{y})")
            if y < n and t.glue_n != tile_at(x, y + 1).glue_s:
                raise TileSystemError(f"placement disagrees on edge ({x},{y})-({x},{y+1})")
    north = tuple(tile_at(x, 1).glue_s for x in range(1, m + 1))
    east = tuple(tile_at(1, y).glue_w for y in range(1, n + 1))
    return SeedAssembly(m, n, north, east)


def system_from_assignment(m: int, n: int, glue_quads, colours) -> TileSystem:
    """Build a TileSystem from per-class glue quadruples placed on the grid.

    ``glue_quads`` maps each site (via ``glue_quads(x, y)``) to its class's
    (N, E, S, W) glue tuple and ``colours(x, y)`` to its colour.
    """
    cache: dict[tuple, TileType] = {}

    def tile_at(x, y):
        quad = glue_quads(x, y)
        key = (quad, colours(x, y))
        t = cache.get(key)
        if t is None:
            t = TileType(*quad, colour=colours(x, y))
            cache[key] = t
        return t

    seed = derive_seed(m, n, tile_at)
    tiles = tuple(sorted(set(cache.values()), key=lambda t: (t.glue_s, t.glue_w)))
    return TileSystem(tiles=tiles, seed=seed)


def save_tile_system(system: TileSystem) -> str:
    """Deterministic text encoding: tiles sorted by (south, west) glue pair,
    then the seed cells of the L, one line each."""
    tiles = sorted(system.tiles, key=lambda t: (t.glue_s, t.glue_w))
    glues = system.glue_labels()
    k = max((t.colour for t in tiles), default=0) + 1
    out = [f"tiles {len(tiles)} glues {len(glues)} colours {k}"]
    for i, t in enumerate(tiles):
        out.append(f"{i} {t.glue_n} {t.glue_e} {t.glue_s} {t.glue_w} {t.colour}")
    out.append("seed")
    m, n = system.seed.m, system.seed.n
    out.append("0 0 - -")
    for x in range(1, m + 1):
        out.append(f"{x} 0 {system.seed.north[x - 1]} -")
    for y in range(1, n + 1):
        out.append(f"0 {y} - {system.seed.east[y - 1]}")
    return "\n".join(out) + "\n"


def load_tile_system(text: str) -> TileSystem:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise TileSystemError("empty tile-system file")
    head = lines[0].split()
    if len(head) != 6 or head[0] != "tiles" or head[2] != "glues" or head[4] != "colours":
        raise TileSystemError(f"malformed header {lines[0]!r}")
    try:
        ntiles = int(head[1])
    except ValueError as exc:
        raise TileSystemError(f"malformed header {lines[0]!r}") from exc
    if len(lines) < 1 + ntiles + 1:
        raise TileSystemError("truncated tile-system file")
    tiles = []
    for ln in lines[1:1 + ntiles]:
        toks = ln.split()
        if len(toks) != 6:
            raise TileSystemError(f"malformed tile line {ln!r}")
        try:
            _, gn, ge, gs, gw, col = (int(t) for t in toks)
        except ValueError as exc:
            raise TileSystemError(f"malformed tile line {ln!r}") from exc
        tiles.append(TileType(gn, ge, gs, gw, col))
    if lines[1 + ntiles] != "seed":
        raise TileSystemError("missing seed section")
    north: dict[int, int] = {}
    east: dict[int, int] = {}
    for ln in lines[2 + ntiles:]:
        toks = ln.split()
        if len(toks) != 4:
            raise TileSystemError(f"malformed seed line {ln!r}")
        try:
            x, y = int(toks[0]), int(toks[1])
        except ValueError as exc:
            raise TileSystemError(f"malformed seed line {ln!r}") from exc
        if x > 0 and y == 0:
            if toks[2] == "-":
                raise TileSystemError(f"seed cell ({x},0) needs a north glue")
            north[x] = int(toks[2])
        elif x == 0 and y > 0:
            if toks[3] == "-":
                raise TileSystemError(f"seed cell (0,{y}) needs an east glue")
            east[y] = int(toks[3])
        elif (x, y) != (0, 0):
            raise TileSystemError(f"seed cell ({x},{y}) outside the L")
    m, n = len(north), len(east)
    if sorted(north) != list(range(1, m + 1)) or sorted(east) != list(range(1, n + 1)):
        raise TileSystemError("seed arms have gaps")
    seed = SeedAssembly(m, n, tuple(north[x] for x in range(1, m + 1)),
                        tuple(east[y] for y in range(1, n + 1)))
    return TileSystem(tiles=tuple(tiles), seed=seed)
