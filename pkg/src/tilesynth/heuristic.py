"""Greedy heuristic search for small tile sets, with seeded restarts.

Unlike the exhaustive search this keeps no pruning graphs.  At each
constructible partition the same-colour class pairs are ranked by the number
of glues their assignments already share (merging such pairs perturbs the
rest of the assignment least), then by the size of the larger class, then of
the smaller; one of the remaining pairs is picked uniformly at random and
explored depth-first before the next is tried.  Blocked partitions force the
merge of their witness pair.  Running several independently seeded searches
and taking the pointwise-minimum trace gives the portfolio variant.
"""

from __future__ import annotations

import multiprocessing
import os
import random
import time
from dataclasses import dataclass, field

import numpy as np

from .bb import capture_solution
from .mgta import MgtaState, build_mgta
from .patterns import Pattern, initial_partition, make_partition
from .trace import SearchTrace, merge_traces


@dataclass(frozen=True)
class HeuristicConfig:
    workers: int = 1
    master_seed: int = 0
    step_budget: int | None = None
    wall_budget_s: float | None = None
    seeds: tuple[int, ...] | None = None

    def __post_init__(self) -> None:
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        if self.seeds is not None and len(self.seeds) != self.workers:
            raise ValueError("need one seed per worker")


def worker_seeds(master_seed: int, workers: int) -> tuple[int, ...]:
    """Derive independent per-worker seeds from one master seed."""
    ss = np.random.SeedSequence(master_seed)
    return tuple(int(child.generate_state(1)[0]) for child in ss.spawn(workers))


# -- public reference selection (the three-pass filter) ------------------------


def common_glues(state: MgtaState, p: int, q: int) -> int:
    """Number of directions on which classes p and q carry equal glues."""
    roots = state.canonical_roots()
    if not (0 <= p < len(roots) and 0 <= q < len(roots)):
        raise ValueError(f"unknown class ids {p}, {q}")
    return state.common_glue_count(roots[p], roots[q])


@dataclass(frozen=True)
class Candidate:
    pair: tuple[int, int]  # canonical class ids, p < q
    common: int
    larger: int
    smaller: int


@dataclass
class CandidateSet:
    """The shrinking set of same-colour class pairs at one search node."""

    items: list[Candidate] = field(default_factory=list)

    @classmethod
    def from_state(cls, state: MgtaState, pattern: Pattern) -> "CandidateSet":
        roots = state.canonical_roots()
        colours = [pattern.colour(r % state.m + 1, r // state.m + 1) for r in roots]
        items = []
        for p in range(len(roots)):
            for q in range(p + 1, len(roots)):
                if colours[p] != colours[q]:
                    continue
                sp, sq = state.size[roots[p]], state.size[roots[q]]
                items.append(Candidate(
                    pair=(p, q),
                    common=state.common_glue_count(roots[p], roots[q]),
                    larger=max(sp, sq),
                    smaller=min(sp, sq),
                ))
        return cls(items)


def survivors(candidates: CandidateSet) -> list[Candidate]:
    """Apply the three maximising filters in order; ties all survive."""
    k = candidates.items
    if not k:
        return []
    top = max(c.common for c in k)
    k = [c for c in k if c.common == top]
    top = max(c.larger for c in k)
    k = [c for c in k if c.larger == top]
    top = max(c.smaller for c in k)
    return [c for c in k if c.smaller == top]


def next_pair(candidates: CandidateSet, rng: random.Random) -> tuple[int, int]:
    """Pick one surviving pair uniformly at random and remove it from the set."""
    surv = survivors(candidates)
    if not surv:
        raise ValueError("empty candidate set")
    chosen = rng.choice(sorted(surv, key=lambda c: c.pair))
    candidates.items = [c for c in candidates.items if c.pair != chosen.pair]
    return chosen.pair


# -- fast in-place search -------------------------------------------------------

_LEVEL_SUBSETS: tuple[tuple[tuple[int, ...], ...], ...] = (
    ((0, 1, 2, 3),),
    ((1, 2, 3), (0, 2, 3), (0, 1, 3), (0, 1, 2)),
    ((2, 3), (1, 3), (1, 2), (0, 3), (0, 2), (0, 1)),
    ((3,), (2,), (1,), (0,)),
)

_DIRS = np.arange(4, dtype=np.int64)


class _Budget(Exception):
    pass


class _TierCursor:
    """All candidate pairs of one node in descending filter-key order.

    Built once when a node's top tier is exhausted by backtracking; buckets
    of equal key are materialised lazily from the top so untouched tiers
    cost nothing.
    """

    __slots__ = ("score", "lo", "hi", "end", "bucket")

    def __init__(self, score: np.ndarray, lo: np.ndarray, hi: np.ndarray):
        order = np.argsort(score, kind="stable")
        self.score = score[order]
        self.lo = lo[order]
        self.hi = hi[order]
        self.end = len(score)
        self.bucket: list[tuple[int, int]] = []

    def next_pair(self, rng: random.Random, removed: set) -> tuple[int, int] | None:
        while True:
            if self.bucket:
                return self.bucket.pop(rng.randrange(len(self.bucket)))
            if self.end == 0:
                return None
            top = self.score[self.end - 1]
            start = int(np.searchsorted(self.score[:self.end], top, side="left"))
            seg = zip(self.lo[start:self.end].tolist(), self.hi[start:self.end].tolist())
            self.end = start
            self.bucket = [p for p in seg if p not in removed]


class _HeuristicSearch:
    def __init__(self, pattern: Pattern, seed: int, step_budget: int | None,
                 deadline: float | None, shared: dict | None):
        self.pattern = pattern
        self.rng = random.Random(seed)
        self.step_budget = step_budget
        self.deadline = deadline
        self.shared = shared
        self.t0 = time.perf_counter()

        m, n = pattern.m, pattern.n
        self.state = build_mgta(initial_partition(m, n))
        self.colour = [pattern.colour(i % m + 1, i // m + 1) for i in range(m * n)]
        counts = [0] * pattern.k
        for c in self.colour:
            counts[c] += 1
        self.live_arr = [np.empty(counts[c], dtype=np.int64) for c in range(pattern.k)]
        self.liven = [0] * pattern.k
        self.pos = [0] * (m * n)
        for r in range(m * n):
            col = self.colour[r]
            self.pos[r] = self.liven[col]
            self.live_arr[col][self.liven[col]] = r
            self.liven[col] += 1
        self.sjournal: list = []

        self.steps = 0
        self.best = m * n + 1
        self.best_snapshot: list[tuple[int, ...]] | None = None
        self.trace = SearchTrace()

    # solver-side live lists, journaled in step with the glue state

    def _remove_live(self, b: int) -> None:
        col = self.colour[b]
        arr = self.live_arr[col]
        i = self.pos[b]
        self.liven[col] -= 1
        last = int(arr[self.liven[col]])
        if last != b:
            arr[i] = last
            self.pos[last] = i
        self.sjournal.append((col, b, i))

    def _undo_solver(self, mark: int) -> None:
        j = self.sjournal
        while len(j) > mark:
            col, b, i = j.pop()
            arr = self.live_arr[col]
            if i != self.liven[col]:
                moved = int(arr[i])
                arr[self.liven[col]] = moved
                self.pos[moved] = self.liven[col]
            arr[i] = b
            self.pos[b] = i
            self.liven[col] += 1

    def _merge(self, a: int, b: int) -> None:
        if self.step_budget is not None and self.steps >= self.step_budget:
            raise _Budget()
        self.state.push_merge(a, b)
        self._remove_live(b)
        self.steps += 1

    def _elapsed(self) -> float:
        return (time.perf_counter() - self.t0) * 1000.0

    def _enter(self) -> bool:
        """Forced merges down to a constructible partition; False when the
        witness pair spans two colours (no pattern-consistent coarsening can
        ever merge it, so the branch is dead)."""
        st = self.state
        while st.colliding:
            r1, r2 = st.blocked_witness()
            if self.colour[r1] != self.colour[r2]:
                return False
            self._merge(r1, r2)
        return True

    def _note(self) -> None:
        nc = self.state.nclasses
        if nc >= self.best:
            return
        self.best = nc
        sh = self.shared
        if sh is not None and nc < sh["best"]:
            sh["best"] = nc  # advisory live-reporting cell; never steers a worker
        self.trace.record(self.steps, nc, self._elapsed())
        # materialising a tile system is deferred to the end of the run; a
        # snapshot of the partition is enough to rebuild it
        st = self.state
        self.best_snapshot = [tuple(st.members[r]) for r in range(st.mn) if st.live[r]]

    # -- pair selection ----------------------------------------------------

    def _cols_data(self):
        out = []
        cache = self.state.cache_np
        for col in range(self.pattern.k):
            c = self.liven[col]
            if c < 2:
                continue
            roots = self.live_arr[col][:c]
            t = cache[(roots * 4)[:, None] + _DIRS]
            out.append((col, roots, t))
        return out

    @staticmethod
    def _group_runs(t: np.ndarray, subset: tuple[int, ...], roots: np.ndarray,
                    base: int) -> list[np.ndarray]:
        if base ** len(subset) < 2 ** 62:
            key = t[:, subset[0]].copy()
            for d in subset[1:]:
                key *= base
                key += t[:, d]
            order = np.argsort(key, kind="stable")
            sk = key[order]
            change = np.flatnonzero(sk[1:] != sk[:-1]) + 1
        else:
            order = np.lexsort(tuple(t[:, d] for d in reversed(subset)))
            rows = t[order][:, list(subset)]
            change = np.flatnonzero(np.any(rows[1:] != rows[:-1], axis=1)) + 1
        bounds = [0, *change.tolist(), len(roots)]
        runs = []
        for s, e in zip(bounds, bounds[1:]):
            if e - s >= 2:
                runs.append(roots[order[s:e]])
        return runs

    def _select(self, frame: list) -> tuple[int, int] | None:
        removed = frame[2]
        if frame[3] is not None:
            return frame[3].next_pair(self.rng, removed)
        cols_data = self._cols_data()
        if not cols_data:
            return None
        base = self.state._B
        # identical tuples first: the most common hit once structure builds up
        groups: list[tuple[int, np.ndarray]] = []
        for col, roots, t in cols_data:
            for run in self._group_runs(t, (0, 1, 2, 3), roots, base):
                groups.append((col, run))
        if not groups:
            # per direction, does any glue repeat at all? directions without
            # repeats cannot contribute to any match, so subsets touching
            # them are skipped in the level scan
            reps = []
            any_rep = False
            for col, roots, t in cols_data:
                mask = 0
                for d in range(4):
                    vals = t[:, d]
                    if (np.bincount(vals)[vals] >= 2).any():
                        mask |= 1 << d
                        any_rep = True
                reps.append(mask)
            if any_rep:
                for subsets in _LEVEL_SUBSETS[1:]:
                    for ci, (col, roots, t) in enumerate(cols_data):
                        mask = reps[ci]
                        for subset in subsets:
                            if any(not mask & (1 << d) for d in subset):
                                continue
                            for run in self._group_runs(t, subset, roots, base):
                                groups.append((col, run))
                    if groups:
                        break
            if not groups:
                # no two classes share any glue: every pair scores 0 and only
                # the size filters distinguish them
                groups = [(col, roots) for col, roots, _ in cols_data]
        return self._pick_from_groups(groups, removed, frame)

    def _pick_from_groups(self, groups, removed: set, frame: list) -> tuple[int, int] | None:
        size_np = self.state.size_np
        scored = []
        best: tuple[int, int] | None = None
        for col, grp in groups:
            sz = size_np[grp]
            idx = np.argsort(sz, kind="stable")
            s1 = int(sz[idx[-1]])
            s2 = int(sz[idx[-2]])
            scored.append((grp, sz, s1, s2))
            if best is None or (s1, s2) > best:
                best = (s1, s2)
        assert best is not None
        s1, s2 = best
        chosen = []
        weights = []
        for grp, sz, g1, g2 in scored:
            if (g1, g2) != best:
                continue
            if s1 == s2:
                members = grp[sz == s1]
                w = len(members) * (len(members) - 1) // 2
                chosen.append((members, None))
            else:
                big = grp[sz == s1]
                small = grp[sz == s2]
                w = len(big) * len(small)
                chosen.append((big, small))
            weights.append(w)
        total = sum(weights)
        if total == 0:
            return None
        rng = self.rng
        for _ in range(32):
            r = rng.randrange(total)
            gi = 0
            while r >= weights[gi]:
                r -= weights[gi]
                gi += 1
            big, small = chosen[gi]
            if small is None:
                t = len(big)
                i = rng.randrange(t)
                j = rng.randrange(t - 1)
                if j >= i:
                    j += 1
                a, b = int(big[i]), int(big[j])
            else:
                a = int(big[rng.randrange(len(big))])
                b = int(small[rng.randrange(len(small))])
            key = (a, b) if a < b else (b, a)
            if key not in removed:
                return key
        # the random probes kept hitting already-tried pairs: materialise
        pairs = set()
        for big, small in chosen:
            if small is None:
                lst = [int(v) for v in big]
                pairs.update((a, b) if a < b else (b, a)
                             for i, a in enumerate(lst) for b in lst[i + 1:])
            else:
                pairs.update((int(a), int(b)) if a < b else (int(b), int(a))
                             for a in big for b in small)
        left = sorted(pairs - removed)
        if left:
            return left[self.rng.randrange(len(left))]
        # whole top tier already tried at this node: score every pair once
        # and serve the rest of the node's selections from the cached order
        frame[3] = self._build_tiers()
        return frame[3].next_pair(self.rng, removed)

    def _build_tiers(self) -> "_TierCursor":
        mn1 = self.state.mn + 1
        size_np = self.state.size_np
        scores, los, his = [], [], []
        for col, roots, t in self._cols_data():
            c = len(roots)
            g = (t[:, None, 0] == t[None, :, 0]).astype(np.int64)
            for d in range(1, 4):
                g += t[:, None, d] == t[None, :, d]
            sz = size_np[roots]
            larger = np.maximum(sz[:, None], sz[None, :])
            smaller = np.minimum(sz[:, None], sz[None, :])
            score = (g * mn1 + larger) * mn1 + smaller
            iu, ju = np.triu_indices(c, 1)
            scores.append(score[iu, ju])
            ra, rb = roots[iu], roots[ju]
            los.append(np.minimum(ra, rb))
            his.append(np.maximum(ra, rb))
        return _TierCursor(np.concatenate(scores), np.concatenate(los),
                           np.concatenate(his))

    # -- traversal -----------------------------------------------------------

    def run(self) -> SearchTrace:
        st = self.state
        self.trace.record(0, st.nclasses, self._elapsed())
        if self.shared is not None:
            self.shared["best"] = min(self.shared["best"], st.nclasses)
        self.best_snapshot = [tuple(st.members[r]) for r in range(st.mn) if st.live[r]]
        self.best = st.nclasses
        exhausted = True
        try:
            # frame: [state mark, solver mark, removed pairs, tier cache]
            stack: list[list] = [[st.mark(), len(self.sjournal), set(), None]]
            while stack:
                if self.deadline is not None and time.perf_counter() > self.deadline:
                    raise _Budget()
                frame = stack[-1]
                pair = self._select(frame)
                if pair is None:
                    st.undo_to(frame[0])
                    self._undo_solver(frame[1])
                    stack.pop()
                    continue
                frame[2].add(pair)
                a, b = pair
                if st.mincell[b] < st.mincell[a]:
                    a, b = b, a
                cjm, csm = st.mark(), len(self.sjournal)
                self._merge(a, b)
                if self._enter():
                    self._note()
                    stack.append([cjm, csm, set(), None])
                else:
                    st.undo_to(cjm)
                    self._undo_solver(csm)
        except _Budget:
            exhausted = False
        self.trace.optimal = exhausted
        self.trace.steps = self.steps
        self.trace.best_system = self._materialise()
        return self.trace

    def _materialise(self):
        groups = [[(i % self.pattern.m + 1, i // self.pattern.m + 1) for i in cls]
                  for cls in self.best_snapshot]
        part = make_partition(self.pattern.m, self.pattern.n, groups)
        return capture_solution(build_mgta(part), self.pattern)


def psh_run(pattern: Pattern, seed: int, step_budget: int | None = None,
            wall_budget_s: float | None = None, shared: dict | None = None) -> SearchTrace:
    """One seeded heuristic search from the all-singletons partition."""
    deadline = None if wall_budget_s is None else time.perf_counter() + wall_budget_s
    return _HeuristicSearch(pattern, seed, step_budget, deadline, shared).run()


def psh_parallel(pattern: Pattern, config: HeuristicConfig,
                 processes: int | None = None) -> SearchTrace:
    """Portfolio of independently seeded runs; the merged trace is the
    pointwise minimum over workers and the result the smallest solution any
    worker found.

    Worker trajectories never depend on each other (the shared best-size
    cell is advisory, for live reporting only), so the outcome is a
    deterministic function of the seed vector regardless of whether workers
    run sequentially or spread over processes.
    """
    seeds = config.seeds or worker_seeds(config.master_seed, config.workers)
    if processes is None:
        processes = min(os.cpu_count() or 1, config.workers)
    if processes > 1 and config.workers > 1 and config.wall_budget_s is None:
        ctx = multiprocessing.get_context("fork")
        with ctx.Pool(processes) as pool:
            traces = pool.starmap(
                psh_run, [(pattern, seed, config.step_budget) for seed in seeds])
    else:
        deadline = None
        if config.wall_budget_s is not None:
            deadline = time.perf_counter() + config.wall_budget_s
        shared = {"best": pattern.m * pattern.n + 1}
        traces = []
        for seed in seeds:
            budget_s = None if deadline is None else max(0.0, deadline - time.perf_counter())
            traces.append(psh_run(pattern, seed, config.step_budget,
                                  wall_budget_s=budget_s, shared=shared))
    return merge_traces(traces)
