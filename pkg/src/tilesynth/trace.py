"""Anytime search traces shared by the exact and heuristic solvers."""

from __future__ import annotations

from dataclasses import dataclass, field

from .atam import TileSystem


@dataclass(frozen=True)
class TraceRecord:
    steps: int
    best: int
    elapsed_ms: float = 0.0


@dataclass
class SearchTrace:
    """Best-solution-so-far history of one solver run.

    ``records`` is non-increasing in ``best``; ``optimal`` is set only when
    the search space was exhausted within budget, certifying the minimum.
    """

    records: list[TraceRecord] = field(default_factory=list)
    best_size: int = 0
    best_system: TileSystem | None = None
    optimal: bool = False
    steps: int = 0
    worker_traces: tuple["SearchTrace", ...] = ()

    def record(self, steps: int, best: int, elapsed_ms: float) -> None:
        self.records.append(TraceRecord(steps, best, elapsed_ms))
        self.best_size = best

    def best_at(self, steps: int) -> int:
        """Best tile count known once ``steps`` merge operations were spent."""
        out = None
        for rec in self.records:
            if rec.steps <= steps:
                out = rec.best
            else:
                break
        if out is None:
            raise ValueError("trace has no record at or before the requested step")
        return out

    def to_csv(self, deterministic: bool = False) -> str:
        """Render "steps,best_size,elapsed_ms" lines.

        With ``deterministic`` the wall-clock column is zeroed so repeated
        runs with equal seeds produce byte-identical text.
        """
        lines = ["steps,best_size,elapsed_ms"]
        for rec in self.records:
            ms = 0.0 if deterministic else rec.elapsed_ms
            lines.append(f"{rec.steps},{rec.best},{ms:.3f}")
        return "\n".join(lines) + "\n"


def merge_traces(traces: list[SearchTrace]) -> SearchTrace:
    """Pointwise minimum of several traces over the merge-step axis."""
    if not traces:
        raise ValueError("no traces to merge")
    points = sorted({rec.steps for t in traces for rec in t.records})
    merged = SearchTrace()
    last = None
    for s in points:
        vals = []
        for t in traces:
            try:
                vals.append(t.best_at(s))
            except ValueError:
                continue
        if not vals:
            continue
        best = min(vals)
        if last is None or best < last:
            merged.record(s, best, 0.0)
            last = best
    best_trace = min(enumerate(traces), key=lambda it: (it[1].best_size, it[0]))[1]
    merged.best_size = best_trace.best_size
    merged.best_system = best_trace.best_system
    merged.optimal = any(t.optimal and t.best_size == merged.best_size for t in traces)
    merged.steps = max(t.steps for t in traces)
    merged.worker_traces = tuple(traces)
    return merged
