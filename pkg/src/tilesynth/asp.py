"""Answer-set-programming route to provably minimal tile sets.

The instance is emitted as a ground-able logic program: choice rules pick one
tile per grid cell, one glue per tile side and one colour per tile; integrity
constraints force adjacent sides to agree, forbid two tiles sharing their
(south, west) glue pair, and tie each cell's tile colour to the target
pattern.  An external grounder/solver (clingo by default) decides
satisfiability; iterating the tile and glue budgets upward, the first
satisfiable program yields a minimum-size tile set.
"""

from __future__ import annotations

import os
import re
import shlex
import shutil
import subprocess
from dataclasses import dataclass, field

from .atam import TileSystem, TileType, derive_seed
from .patterns import Pattern

SOLVER_ENV_VAR = "TILESYNTH_ASP_CMD"

_PREDICATES = {
    "place": "place(X,Y,T): tile T sits at cell (X,Y)",
    "glue": "glue(T,D,G): tile T carries glue G on side D",
    "tilecol": "tilecol(T,C): tile T has colour C",
}


class AspError(RuntimeError):
    """Malformed solver output or failed solver invocation."""


class SolverUnavailableError(AspError):
    """No external grounder/solver could be found."""


class SolverTimeout(AspError):
    def __init__(self, tiles: int, glues: int):
        super().__init__(f"solver timed out at budget tiles={tiles} glues={glues}")
        self.tiles = tiles
        self.glues = glues


@dataclass(frozen=True)
class AspEncoding:
    text: str
    tile_budget: int
    glue_budget: int
    predicates: dict[str, str] = field(default_factory=lambda: dict(_PREDICATES))


@dataclass
class SolverJob:
    command: list[str]
    timeout: float
    output: str | None = None
    status: int | None = None

    def __post_init__(self) -> None:
        if self.timeout <= 0:
            raise ValueError("timeout must be positive")


def emit_program(pattern: Pattern, tiles: int, glues: int,
                 symmetry_breaking: bool = True) -> AspEncoding:
    """Encode the instance for a budget of ``tiles`` tile types and ``glues``
    glue labels.  Requires tiles >= k (one colour per tile) and glues >= 1."""
    if tiles < pattern.k:
        raise ValueError(f"tile budget {tiles} below colour count {pattern.k}")
    if glues < 1:
        raise ValueError("glue budget must be >= 1")
    m, n = pattern.m, pattern.n
    out = [
        f"% pattern {m}x{n}, {pattern.k} colours; budget: {tiles} tiles, {glues} glues",
        f"cell(1..{m},1..{n}).",
        f"tile(1..{tiles}).",
        f"glueid(0..{glues - 1}).",
        "dir(north;east;south;west).",
        f"colour(0..{pattern.k - 1}).",
    ]
    pats = []
    for (x, y), c in pattern.cells():
        pats.append(f"pat({x},{y},{c}).")
    out.append(" ".join(pats))
    out += [
        "% one tile per cell, one glue per side, one colour per tile",
        "1 { place(X,Y,T) : tile(T) } 1 :- cell(X,Y).",
        "1 { glue(T,D,G) : glueid(G) } 1 :- tile(T), dir(D).",
        "1 { tilecol(T,C) : colour(C) } 1 :- tile(T).",
        "% adjacent sides must carry the same glue",
        "ok_h(X,Y) :- place(X,Y,T1), place(X+1,Y,T2), glue(T1,east,G), glue(T2,west,G).",
        f":- cell(X,Y), X < {m}, not ok_h(X,Y).",
        "ok_v(X,Y) :- place(X,Y,T1), place(X,Y+1,T2), glue(T1,north,G), glue(T2,south,G).",
        f":- cell(X,Y), Y < {n}, not ok_v(X,Y).",
        "% determinism: no two tiles share their (south, west) glue pair",
        ":- tile(T1), tile(T2), T1 < T2, glue(T1,south,G1), glue(T2,south,G1),"
        " glue(T1,west,G2), glue(T2,west,G2).",
        "% cells show their tile's colour",
        ":- place(X,Y,T), pat(X,Y,C), not tilecol(T,C).",
    ]
    if symmetry_breaking:
        out += [
            "% order tiles by their (south, west) key to cut permutation symmetry",
            f"swkey(T,K) :- glue(T,south,G1), glue(T,west,G2), K = G1*{glues}+G2.",
            ":- swkey(T,K1), swkey(T+1,K2), tile(T), tile(T+1), K1 >= K2.",
        ]
    out += ["#show place/3.", "#show glue/3.", "#show tilecol/2."]
    return AspEncoding(text="\n".join(out) + "\n", tile_budget=tiles, glue_budget=glues)


_DIR_FIELD = {"north": "glue_n", "east": "glue_e", "south": "glue_s", "west": "glue_w"}
_ATOM_RE = re.compile(r"(place|glue|tilecol)\(([^)]*)\)")


def parse_answer(output: str) -> TileSystem | None:
    """Extract a tile system from solver output; None when unsatisfiable.

    Understands the usual witness format: an "Answer: N" line followed by a
    line of atoms, and a SATISFIABLE/UNSATISFIABLE verdict.
    """
    if "UNSATISFIABLE" in output:
        return None
    if "SATISFIABLE" not in output:
        raise AspError(f"no verdict in solver output: {output[-200:]!r}")
    lines = output.splitlines()
    atom_line = None
    for i, ln in enumerate(lines):
        if ln.startswith("Answer"):
            atom_line = lines[i + 1] if i + 1 < len(lines) else ""
    if atom_line is None:
        raise AspError("SATISFIABLE but no answer atoms found")

    place: dict[tuple[int, int], int] = {}
    glues: dict[int, dict[str, int]] = {}
    colours: dict[int, int] = {}
    for name, args in _ATOM_RE.findall(atom_line):
        parts = [p.strip() for p in args.split(",")]
        if name == "place":
            x, y, t = int(parts[0]), int(parts[1]), int(parts[2])
            place[(x, y)] = t
        elif name == "glue":
            t, d, g = int(parts[0]), parts[1], int(parts[2])
            if d not in _DIR_FIELD:
                raise AspError(f"unknown direction in atom glue({args})")
            glues.setdefault(t, {})[d] = g
        else:
            colours[int(parts[0])] = int(parts[1])
    if not place:
        raise AspError("answer holds no placement atoms")
    m = max(x for x, _ in place)
    n = max(y for _, y in place)
    if len(place) != m * n:
        raise AspError("placement atoms do not cover the grid")

    tiles: dict[int, TileType] = {}
    for t in sorted(set(place.values())):
        sides = glues.get(t)
        if sides is None or set(sides) != set(_DIR_FIELD) or t not in colours:
            raise AspError(f"tile {t} lacks glue or colour atoms")
        tiles[t] = TileType(glue_n=sides["north"], glue_e=sides["east"],
                            glue_s=sides["south"], glue_w=sides["west"],
                            colour=colours[t])

    def tile_at(x: int, y: int) -> TileType:
        return tiles[place[(x, y)]]

    seed = derive_seed(m, n, tile_at)
    used = tuple(sorted(set(tiles.values()), key=lambda t: (t.glue_s, t.glue_w)))
    return TileSystem(tiles=used, seed=seed)


def default_solver_command() -> list[str] | None:
    """Solver command from the environment, or clingo when installed."""
    env = os.environ.get(SOLVER_ENV_VAR)
    if env:
        return shlex.split(env)
    exe = shutil.which("clingo")
    if exe:
        return [exe, "--models", "1", "--verbose", "0"]
    return None


def run_solver(encoding: AspEncoding, command: list[str], timeout: float) -> SolverJob:
    """Feed the program to the solver on stdin and capture its output.

    Answer-set solvers signal satisfiability through their exit status, so
    any status is accepted as long as output was produced.
    """
    job = SolverJob(command=list(command), timeout=timeout)
    try:
        proc = subprocess.run(command, input=encoding.text, capture_output=True,
                              text=True, timeout=timeout)
    except FileNotFoundError as exc:
        raise SolverUnavailableError(f"solver command not found: {command[0]}") from exc
    job.output = proc.stdout
    job.status = proc.returncode
    if not proc.stdout.strip():
        raise AspError(f"solver produced no output (stderr: {proc.stderr[-200:]!r})")
    return job


def solve_incremental(pattern: Pattern, max_tiles: int | None = None,
                      glue_cap: int | None = None,
                      solver_cmd: list[str] | None = None,
                      timeout: float = 600.0,
                      symmetry_breaking: bool = True) -> TileSystem:
    """Find a minimum tile set by incrementing the tile and glue budgets.

    Budgets are tried lexicographically: tile count t from the colour count
    upward, and for each t the glue count from 1 to min(4t, glue_cap); 4t
    glues always suffice for a t-tile system, so the first satisfiable
    program certifies the minimal tile count under the glue cap.
    """
    command = solver_cmd or default_solver_command()
    if command is None:
        raise SolverUnavailableError(
            f"no ASP solver: install clingo or set {SOLVER_ENV_VAR}")
    top = max_tiles if max_tiles is not None else pattern.m * pattern.n
    for tiles in range(pattern.k, top + 1):
        g_top = 4 * tiles if glue_cap is None else min(4 * tiles, glue_cap)
        for glues in range(1, g_top + 1):
            encoding = emit_program(pattern, tiles, glues,
                                    symmetry_breaking=symmetry_breaking)
            try:
                job = run_solver(encoding, command, timeout)
            except subprocess.TimeoutExpired as exc:
                raise SolverTimeout(tiles, glues) from exc
            system = parse_answer(job.output or "")
            if system is not None:
                return system
    raise AspError(f"no solution within {top} tiles")
