"""Tile-set synthesis for patterned self-assembly.

Given a k-coloured rectangular pattern, find small or provably minimal
deterministic tile sets that assemble it from an L-shaped seed, verify them
under the abstract tile assembly model, and score their error-free assembly
probability under the kinetic model.
"""

__version__ = "0.1.0"

from .atam import (Assembly, SeedAssembly, TileSystem, TileType, assemble,
                   derive_seed, is_deterministic, load_tile_system,
                   save_tile_system, system_from_assignment, verify_solution)
from .bb import (PruneGraphs, SearchConfig, bound, capture_solution, children,
                 forced_merge, psbb_solve)
from .heuristic import (CandidateSet, HeuristicConfig, common_glues, next_pair,
                        psh_parallel, psh_run)
from .ktam import (KineticModel, MismatchProfile, PhysicalParams,
                   approx_site_error, forward_rate_constant, mismatch_profile,
                   optimal_params, reliability, site_correct_prob)
from .mgta import (Constructibility, MgtaState, build_mgta, canonical_glues,
                   check_constructible, merge_tiles)
from .patterns import (Partition, Pattern, colour_partition, gen_binary_counter,
                       gen_sierpinski, initial_partition, load_pattern,
                       merge_classes, refines, save_pattern)
from .trace import SearchTrace, TraceRecord, merge_traces

__all__ = [
    "Assembly", "CandidateSet", "Constructibility", "HeuristicConfig",
    "KineticModel", "MgtaState", "MismatchProfile", "Partition", "Pattern",
    "PhysicalParams", "PruneGraphs", "SearchConfig", "SearchTrace",
    "SeedAssembly", "TileSystem", "TileType", "TraceRecord",
    "approx_site_error", "assemble", "bound", "build_mgta", "canonical_glues",
    "capture_solution", "check_constructible", "children", "colour_partition",
    "common_glues", "derive_seed", "forced_merge", "forward_rate_constant",
    "gen_binary_counter", "gen_sierpinski", "initial_partition",
    "is_deterministic", "load_pattern", "load_tile_system", "merge_classes",
    "merge_tiles", "merge_traces", "mismatch_profile", "next_pair",
    "optimal_params", "psbb_solve", "psh_parallel", "psh_run", "refines",
    "reliability", "save_pattern", "save_tile_system", "site_correct_prob",
    "system_from_assignment", "verify_solution",
]
