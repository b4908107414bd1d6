import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from tilesynth import Pattern, SeedAssembly, TileSystem, TileType


@pytest.fixture
def checkerboard() -> Pattern:
    return Pattern(2, 2, 2, ((0, 1), (1, 0)))


@pytest.fixture
def corner_pattern() -> Pattern:
    """2x2 with a single black at the north-east corner.

    Its 2-class colour partition forces both classes onto the same south and
    west glues, so no 2-tile solution exists; the minimum is 3.
    """
    return Pattern(2, 2, 2, ((0, 0), (0, 1)))


def xor_tiles() -> tuple[TileType, ...]:
    # each tile outputs the parity of its inputs on both output sides
    return (
        TileType(0, 0, 0, 0, colour=0),
        TileType(1, 1, 0, 1, colour=1),
        TileType(1, 1, 1, 0, colour=1),
        TileType(0, 0, 1, 1, colour=0),
    )


def sierpinski_system(m: int, n: int) -> TileSystem:
    """The classic 4-tile parity system: seed injects a single 1 at the
    corner and 0 elsewhere, growing the Pascal-parity pattern."""
    north = (1,) + (0,) * (m - 1)
    east = (0,) * n
    return TileSystem(tiles=xor_tiles(), seed=SeedAssembly(m, n, north, east))


def counter_tiles() -> tuple[TileType, ...]:
    # sum bit north, carry east
    return (
        TileType(0, 0, 0, 0, colour=0),
        TileType(1, 0, 0, 1, colour=1),
        TileType(1, 0, 1, 0, colour=1),
        TileType(0, 1, 1, 1, colour=0),
    )


def counter_system(m: int, n: int) -> TileSystem:
    """4-tile incrementer: all-1 seed glues stand for the virtual all-ones
    row below the first (which rolls over to zero) and the carry injected
    into every row."""
    return TileSystem(tiles=counter_tiles(),
                      seed=SeedAssembly(m, n, (1,) * m, (1,) * n))
