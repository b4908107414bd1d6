"""Command-line surface for reproducible experiments.

Subcommands: ``gen`` writes benchmark patterns, ``solve`` runs one of the
solvers on a pattern file, ``verify`` checks a tile-system file against a
pattern, ``reliability`` scores a system kinetically, and ``benchmark``
replays a grid of solve runs from a JSON config.  Every command writes a run
manifest capturing the full flag set, seeds and input digests.

Exit codes: 0 success, 2 verification failure, 3 merge budget exhausted
without improving on the trivial solution, 4 external solver unavailable,
5 bad input.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

from . import __version__
from .asp import SolverTimeout, SolverUnavailableError, solve_incremental
from .atam import (TileSystemError, load_tile_system, save_tile_system,
                   verify_solution)
from .bb import SearchConfig, psbb_solve
from .heuristic import HeuristicConfig, psh_parallel
from .ktam import PhysicalParams, reliability
from .patterns import (Pattern, PatternError, gen_binary_counter,
                       gen_sierpinski, load_pattern, save_pattern)

EXIT_OK = 0
EXIT_VERIFY = 2
EXIT_BUDGET = 3
EXIT_NO_SOLVER = 4
EXIT_BAD_INPUT = 5

_GENERATORS = {"sierpinski": gen_sierpinski, "counter": gen_binary_counter}


@dataclass
class RunManifest:
    command: str
    argv: list[str]
    flags: dict
    seeds: list[int] = field(default_factory=list)
    pattern_digest: str | None = None
    version: str = __version__
    started: str = ""
    finished: str = ""


def _now() -> str:
    return time.strftime("%Y-%m-%dT%H:%M:%S", time.gmtime())


def _write_manifest(manifest: RunManifest, out_dir: Path, stem: str) -> None:
    manifest.finished = _now()
    path = out_dir / f"{stem}.manifest.json"
    path.write_text(json.dumps(asdict(manifest), indent=2, sort_keys=True) + "\n")


def _digest(text: str) -> str:
    return hashlib.sha256(text.encode("ascii")).hexdigest()


def _load_pattern_file(path: str) -> Pattern:
    return load_pattern(Path(path).read_text())


def cmd_gen(args) -> int:
    pattern = _GENERATORS[args.kind](args.m, args.n)
    text = save_pattern(pattern)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(text)
    manifest = RunManifest(command="gen", argv=sys.argv[1:],
                           flags={"kind": args.kind, "m": args.m, "n": args.n},
                           pattern_digest=_digest(text), started=args._started)
    _write_manifest(manifest, out.parent, out.stem)
    print(f"wrote {out} sha256={_digest(text)}")
    return EXIT_OK


def cmd_solve(args) -> int:
    pattern = _load_pattern_file(args.pattern)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = f"{Path(args.pattern).stem}.{args.algorithm}"
    seeds: list[int] = []

    if args.algorithm == "bb":
        config = SearchConfig(step_budget=args.step_budget, rng_seed=args.seed,
                              report_every=args.report_every)
        trace = psbb_solve(pattern, config)
        seeds = [args.seed]
    elif args.algorithm == "h":
        config = HeuristicConfig(workers=args.workers, master_seed=args.seed,
                                 step_budget=args.step_budget,
                                 wall_budget_s=args.time_budget)
        trace = psh_parallel(pattern, config)
        seeds = [args.seed]
        for i, wt in enumerate(trace.worker_traces):
            (out_dir / f"{stem}.worker{i}.trace.csv").write_text(wt.to_csv())
    else:  # asp
        try:
            system = solve_incremental(
                pattern, solver_cmd=args.solver_cmd.split() if args.solver_cmd else None,
                timeout=args.timeout, glue_cap=args.glue_cap)
        except SolverUnavailableError as exc:
            print(f"skip: {exc}", file=sys.stderr)
            return EXIT_NO_SOLVER
        except SolverTimeout as exc:
            print(f"timeout: {exc}", file=sys.stderr)
            return EXIT_BUDGET
        (out_dir / f"{stem}.tiles").write_text(save_tile_system(system))
        verdict = verify_solution(system, pattern)
        manifest = RunManifest(command="solve", argv=sys.argv[1:],
                               flags=_solve_flags(args),
                               pattern_digest=pattern.digest(), started=args._started)
        _write_manifest(manifest, out_dir, stem)
        print(f"asp solution: {len(system.tiles)} tiles, verdict {verdict}")
        return EXIT_OK if verdict.ok else EXIT_VERIFY

    (out_dir / f"{stem}.trace.csv").write_text(trace.to_csv())
    system = trace.best_system
    (out_dir / f"{stem}.tiles").write_text(save_tile_system(system))
    manifest = RunManifest(command="solve", argv=sys.argv[1:], flags=_solve_flags(args),
                           seeds=seeds, pattern_digest=pattern.digest(),
                           started=args._started)
    _write_manifest(manifest, out_dir, stem)
    verdict = verify_solution(system, pattern)
    status = "optimal" if trace.optimal else "anytime"
    print(f"{args.algorithm} solution: {trace.best_size} tiles ({status}), "
          f"{trace.steps} merge steps, verdict {verdict}")
    if not verdict.ok:
        return EXIT_VERIFY
    if not trace.optimal and trace.best_size >= pattern.m * pattern.n:
        return EXIT_BUDGET
    return EXIT_OK


def _solve_flags(args) -> dict:
    return {"algorithm": args.algorithm, "seed": args.seed, "workers": args.workers,
            "step_budget": args.step_budget, "time_budget": args.time_budget,
            "solver_cmd": args.solver_cmd, "timeout": args.timeout,
            "glue_cap": args.glue_cap, "report_every": args.report_every}


def cmd_verify(args) -> int:
    pattern = _load_pattern_file(args.pattern)
    system = load_tile_system(Path(args.system).read_text())
    verdict = verify_solution(system, pattern)
    print(str(verdict))
    return EXIT_OK if verdict.ok else EXIT_VERIFY


def cmd_reliability(args) -> int:
    pattern = _load_pattern_file(args.pattern)
    system = load_tile_system(Path(args.system).read_text())
    verdict = verify_solution(system, pattern)
    if not verdict.ok:
        print(str(verdict), file=sys.stderr)
        return EXIT_VERIFY
    params = PhysicalParams(temperature_k=args.temperature, assembly_time_s=args.time)
    try:
        report = reliability(system, pattern, params)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    lines = ["i,j,M1,M2,p_site"]
    for (x, y), m1, m2 in report.profile.sites():
        lines.append(f"{x},{y},{m1},{m2},{report.site_prob(x, y)!r}")
    lines.append(f"G_mc={report.model.g_mc!r}")
    lines.append(f"G_se={report.model.g_se!r}")
    lines.append(f"r_star={report.model.r_star!r}")
    lines.append(f"log_reliability={report.log_reliability!r}")
    lines.append(f"reliability={report.reliability!r}")
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text)
        print(f"wrote {args.out}")
    else:
        print(text, end="")
    return EXIT_OK


def cmd_benchmark(args) -> int:
    """Replay a grid of solve runs from a JSON config.

    Config schema: {"runs": [{"name", "generator", "m", "n", "algorithm",
    "seed", "workers", "step_budget"}, ...]}.  Results land in one CSV.
    """
    config = json.loads(Path(args.config).read_text())
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = ["name,algorithm,m,n,seed,best_size,steps,optimal,elapsed_s"]
    for run in config["runs"]:
        pattern = _GENERATORS[run["generator"]](run["m"], run["n"])
        t0 = time.perf_counter()
        if run["algorithm"] == "bb":
            trace = psbb_solve(pattern, SearchConfig(
                step_budget=run.get("step_budget"), rng_seed=run.get("seed", 0)))
        else:
            trace = psh_parallel(pattern, HeuristicConfig(
                workers=run.get("workers", 1), master_seed=run.get("seed", 0),
                step_budget=run.get("step_budget")))
        elapsed = time.perf_counter() - t0
        rows.append(f"{run['name']},{run['algorithm']},{run['m']},{run['n']},"
                    f"{run.get('seed', 0)},{trace.best_size},{trace.steps},"
                    f"{int(trace.optimal)},{elapsed:.3f}")
    out = out_dir / "benchmark.csv"
    out.write_text("\n".join(rows) + "\n")
    manifest = RunManifest(command="benchmark", argv=sys.argv[1:],
                           flags={"config": args.config}, started=args._started)
    _write_manifest(manifest, out_dir, "benchmark")
    print(f"wrote {out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tilesynth",
                                     description="tile-set synthesis toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="write a benchmark pattern file")
    p.add_argument("kind", choices=sorted(_GENERATORS))
    p.add_argument("m", type=int)
    p.add_argument("n", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("solve", help="search for a small tile set")
    p.add_argument("algorithm", choices=["bb", "h", "asp"])
    p.add_argument("pattern")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--step-budget", type=int, default=None)
    p.add_argument("--time-budget", type=float, default=None)
    p.add_argument("--solver-cmd", default=None)
    p.add_argument("--timeout", type=float, default=600.0)
    p.add_argument("--glue-cap", type=int, default=None)
    p.add_argument("--report-every", type=int, default=None)
    p.add_argument("--out-dir", default=".")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("verify", help="check a tile system against a pattern")
    p.add_argument("system")
    p.add_argument("pattern")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("reliability", help="kinetic reliability report")
    p.add_argument("system")
    p.add_argument("pattern")
    p.add_argument("--time", type=float, required=True, help="assembly time in seconds")
    p.add_argument("--temperature", type=float, default=298.0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_reliability)

    p = sub.add_parser("benchmark", help="replay a JSON grid of solve runs")
    p.add_argument("config")
    p.add_argument("--out-dir", default=".")
    p.set_defaults(func=cmd_benchmark)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    args._started = _now()
    try:
        return args.func(args)
    except (PatternError, TileSystemError, FileNotFoundError, json.JSONDecodeError,
            ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT


if __name__ == "__main__":
    sys.exit(main())
