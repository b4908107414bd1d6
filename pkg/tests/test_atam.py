import random

import pytest

from conftest import counter_system, sierpinski_system, xor_tiles
from oracles import random_onto_pattern
from tilesynth import (SeedAssembly, TileSystem, TileType, assemble,
                       build_mgta, capture_solution, colour_partition,
                       derive_seed, gen_binary_counter, gen_sierpinski,
                       initial_partition, is_deterministic, load_tile_system,
                       psbb_solve, refines, save_tile_system, verify_solution)
from tilesynth.atam import (NondeterminismError, StuckError, TileSystemError,
                            assemble_random_order)
from tilesynth.patterns import Pattern, make_partition


def monochrome_system(m, n):
    tile = TileType(7, 7, 7, 7, colour=0)
    return TileSystem(tiles=(tile,), seed=SeedAssembly(m, n, (7,) * m, (7,) * n))


class TestDeterminism:
    def test_empty_set(self):
        assert is_deterministic(())

    def test_shared_input_pair(self):
        assert not is_deterministic((TileType(0, 0, 1, 1, 0), TileType(2, 2, 1, 1, 1)))

    def test_xor_set(self):
        tiles = xor_tiles()
        assert is_deterministic(tiles)
        assert len({(t.glue_s, t.glue_w) for t in tiles}) == 4


class TestAssemble:
    def test_monochrome(self):
        asm = assemble(monochrome_system(3, 4), 3, 4)
        assert all(asm.at(x, y).colour == 0 for x in (1, 2, 3) for y in (1, 2, 3, 4))

    def test_xor_set_grows_fractal(self):
        pattern = gen_sierpinski(16, 16)
        asm = assemble(sierpinski_system(16, 16), 16, 16)
        for (x, y), c in pattern.cells():
            assert asm.at(x, y).colour == c

    def test_counter_tiles_grow_counter(self):
        pattern = gen_binary_counter(8, 16)
        asm = assemble(counter_system(8, 16), 8, 16)
        for (x, y), c in pattern.cells():
            assert asm.at(x, y).colour == c

    def test_nondeterministic_rejected(self):
        tiles = (TileType(0, 0, 0, 0, 0), TileType(1, 1, 0, 0, 1))
        sys_ = TileSystem(tiles=tiles, seed=SeedAssembly(1, 1, (0,), (0,)))
        with pytest.raises(NondeterminismError):
            assemble(sys_, 1, 1)

    def test_stuck_reports_first_site(self):
        sys_ = monochrome_system(2, 2)
        broken = TileSystem(tiles=sys_.tiles,
                            seed=SeedAssembly(2, 2, (7, 9), (7, 7)))
        with pytest.raises(StuckError) as err:
            assemble(broken, 2, 2)
        assert err.value.site == (2, 1)

    def test_order_independence(self):
        rng = random.Random(0)
        sys_ = sierpinski_system(9, 9)
        reference = assemble(sys_, 9, 9)
        for _ in range(5):
            assert assemble_random_order(sys_, 9, 9, rng) == reference


class TestVerify:
    def test_xor_system_on_sierpinski_32(self):
        assert verify_solution(sierpinski_system(32, 32), gen_sierpinski(32, 32)).ok

    def test_counter_system_on_sierpinski_fails_p3(self):
        verdict = verify_solution(counter_system(8, 8), gen_sierpinski(8, 8))
        assert not verdict.ok
        assert verdict.violated == "P3"
        assert verdict.witness is not None

    def test_missing_frontier_tile_is_p2(self):
        tiles = tuple(t for t in xor_tiles() if (t.glue_s, t.glue_w) != (1, 1))
        sys_ = TileSystem(tiles=tiles, seed=sierpinski_system(4, 4).seed)
        verdict = verify_solution(sys_, gen_sierpinski(4, 4))
        assert (verdict.ok, verdict.violated) == (False, "P2")

    def test_p1_strength_violation(self):
        sys_ = monochrome_system(2, 2)
        weird = TileSystem(tiles=sys_.tiles, seed=sys_.seed, strengths=((7, 2),))
        verdict = verify_solution(weird, Pattern(2, 2, 1, ((0, 0), (0, 0))))
        assert (verdict.ok, verdict.violated) == (False, "P1")

    def test_verified_system_induces_refinement(self):
        rng = random.Random(1)
        for _ in range(6):
            pattern = random_onto_pattern(rng, 3, 3, 2)
            trace = psbb_solve(pattern)
            asm = assemble(trace.best_system, 3, 3)
            groups = {}
            for (x, y), _ in pattern.cells():
                groups.setdefault(asm.at(x, y), []).append((x, y))
            induced = make_partition(3, 3, groups.values())
            assert refines(colour_partition(pattern), induced)

    def test_duplicate_input_pair_solutions_still_verify(self):
        # a nondeterministic solution built from a shadow glue: both branches
        # complete the monochrome pattern
        g, gh = 7, 8
        tiles = (
            TileType(g, g, g, g, colour=0),
            TileType(g, gh, g, g, colour=0),
            TileType(g, g, g, gh, colour=0),
        )
        sys_ = TileSystem(tiles=tiles, seed=SeedAssembly(3, 3, (g,) * 3, (g,) * 3))
        assert not is_deterministic(tiles)
        pattern = Pattern(3, 3, 1, tuple(((0,) * 3,) * 3))
        assert verify_solution(sys_, pattern).ok
        # dropping either member of the sharing pair leaves a solution
        for drop in (0, 1):
            rest = tuple(t for i, t in enumerate(tiles) if i != drop)
            assert verify_solution(TileSystem(tiles=rest, seed=sys_.seed), pattern).ok


class TestDeriveSeed:
    def test_single_cell(self):
        tile = TileType(1, 2, 3, 4, colour=0)
        seed = derive_seed(1, 1, lambda x, y: tile)
        assert seed.north == (3,) and seed.east == (4,)

    def test_initial_partition_assignment_assembles(self):
        pattern = Pattern(3, 3, 1, tuple(((0,) * 3,) * 3))
        st = build_mgta(initial_partition(3, 3))
        sys_ = capture_solution(st, pattern)
        assert len(sys_.tiles) == 9
        asm = assemble(sys_, 3, 3)
        placed = {asm.at(x, y) for x in (1, 2, 3) for y in (1, 2, 3)}
        assert len(placed) == 9  # every singleton fell into its own place

    def test_solver_output_round_trips(self):
        rng = random.Random(2)
        for _ in range(5):
            pattern = random_onto_pattern(rng, 3, 2, 2)
            sys_ = psbb_solve(pattern).best_system
            asm = assemble(sys_, pattern.m, pattern.n)
            seed2 = derive_seed(pattern.m, pattern.n, asm.at)
            assert seed2 == sys_.seed

    def test_inconsistent_assignment_rejected(self):
        a = TileType(0, 1, 2, 3, colour=0)
        b = TileType(0, 1, 2, 9, colour=0)  # west glue disagrees with a's east
        with pytest.raises(TileSystemError):
            derive_seed(2, 1, lambda x, y: a if x == 1 else b)


class TestTileSystemFile:
    def test_round_trip(self):
        for sys_ in (sierpinski_system(5, 7), counter_system(4, 4), monochrome_system(2, 3)):
            text = save_tile_system(sys_)
            loaded = load_tile_system(text)
            assert loaded.seed == sys_.seed
            assert set(loaded.tiles) == set(sys_.tiles)
            assert save_tile_system(loaded) == text

    def test_writer_sorts_by_input_pair(self):
        text = save_tile_system(sierpinski_system(3, 3))
        rows = [ln.split() for ln in text.splitlines()[1:5]]
        pairs = [(int(r[3]), int(r[4])) for r in rows]
        assert pairs == sorted(pairs)

    def test_header_counts(self):
        text = save_tile_system(sierpinski_system(3, 3))
        assert text.splitlines()[0] == "tiles 4 glues 2 colours 2"

    @pytest.mark.parametrize("mangle", [
        lambda t: "nonsense\n" + t,
        lambda t: t.replace("tiles 4", "tiles 9"),
        lambda t: t.replace("seed\n", ""),
        lambda t: t.replace("0 0 - -", "5 5 - -"),
    ])
    def test_malformed_files(self, mangle):
        text = save_tile_system(sierpinski_system(3, 3))
        with pytest.raises(TileSystemError):
            load_tile_system(mangle(text))

    def test_duplicate_tiles_rejected(self):
        t = TileType(0, 0, 0, 0, 0)
        with pytest.raises(TileSystemError):
            TileSystem(tiles=(t, t), seed=SeedAssembly(1, 1, (0,), (0,)))
