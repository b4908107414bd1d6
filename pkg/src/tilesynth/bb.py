"""Exhaustive branch-and-bound search for minimum tile sets.

The search walks the lattice of grid partitions from the all-singletons
partition, coarsening by class merges.  At a constructible node every
same-colour class pair spawns a child; at a blocked node the offending pair
must merge, giving a single child.  Per-colour restriction graphs record
pairs that earlier siblings already explored, which keeps branches disjoint;
the graphs always stay in special form (one clique plus isolated vertices),
so each graph's chromatic number is just its clique size and their sum lower
bounds every partition reachable in the subtree.
"""

from __future__ import annotations

import heapq
import random
import time
from bisect import insort
from dataclasses import dataclass

from .atam import TileSystem, system_from_assignment
from .mgta import MgtaState, build_mgta, canonical_glues, check_constructible, merge_tiles
from .patterns import Pattern, initial_partition, make_partition
from .trace import SearchTrace


@dataclass(frozen=True)
class SearchConfig:
    step_budget: int | None = None
    rng_seed: int = 0
    traversal: str = "dfs"  # "dfs" or "best-first"
    report_every: int | None = None

    def __post_init__(self) -> None:
        if self.step_budget is not None and self.step_budget < 0:
            raise ValueError("step_budget must be >= 0")
        if self.traversal not in ("dfs", "best-first"):
            raise ValueError(f"unknown traversal {self.traversal!r}")


@dataclass(frozen=True)
class ColourGraph:
    """Restriction graph of one colour: a clique plus isolated vertices.

    Edges are implicit: exactly the pairs inside the clique.
    """

    clique: frozenset[int]
    isolated: frozenset[int]

    def has_edge(self, a: int, b: int) -> bool:
        return a in self.clique and b in self.clique


@dataclass(frozen=True)
class PruneGraphs:
    by_colour: tuple[ColourGraph, ...]


def bound(graphs: PruneGraphs) -> int:
    """Sum of chromatic numbers: clique size per colour, at least 1 when the
    colour has any class left.  No reachable coarsening can go below this."""
    total = 0
    for g in graphs.by_colour:
        if g.clique:
            total += len(g.clique)
        elif g.isolated:
            total += 1
    return total


def initial_graphs(pattern: Pattern, state: MgtaState) -> PruneGraphs:
    """Edgeless graphs over the state's classes, one per pattern colour."""
    roots = state.canonical_roots()
    per_colour: list[set[int]] = [set() for _ in range(pattern.k)]
    for cid, root in enumerate(roots):
        x, y = root % state.m + 1, root // state.m + 1
        per_colour[pattern.colour(x, y)].add(cid)
    return PruneGraphs(tuple(
        ColourGraph(clique=frozenset(), isolated=frozenset(iso)) for iso in per_colour
    ))


def _class_colours(pattern: Pattern, state: MgtaState) -> list[int]:
    out = []
    for root in state.canonical_roots():
        x, y = root % state.m + 1, root // state.m + 1
        out.append(pattern.colour(x, y))
    return out


def _child_id_map(state: MgtaState, keep: int, drop: int) -> dict[int, int]:
    """Map parent canonical class ids to ids in the merged state."""
    roots = state.canonical_roots()
    keys = []
    for cid, root in enumerate(roots):
        if cid == drop:
            continue
        key = min(state.mincell[roots[keep]], state.mincell[roots[drop]]) \
            if cid == keep else state.mincell[root]
        keys.append((key, cid))
    keys.sort()
    remap = {cid: new for new, (_, cid) in enumerate(keys)}
    remap[drop] = remap[keep]
    return remap


def _remap_graphs(graphs: PruneGraphs, remap: dict[int, int],
                  merged_old: tuple[int, int] | None, merged_to_clique: bool,
                  colour: int | None) -> PruneGraphs:
    out = []
    for col, g in enumerate(graphs.by_colour):
        clique = {remap[v] for v in g.clique}
        isolated = {remap[v] for v in g.isolated}
        if merged_old is not None and col == colour:
            mid = remap[merged_old[0]]
            isolated.discard(mid)
            clique.discard(mid)
            (clique if merged_to_clique else isolated).add(mid)
        out.append(ColourGraph(frozenset(clique), frozenset(isolated)))
    return PruneGraphs(tuple(out))


def children(state: MgtaState, pattern: Pattern, graphs: PruneGraphs, rng: random.Random):
    """Ordered child list of a constructible node.

    Children enumerate every same-colour pair not excluded as an edge, in
    batches: repeatedly pick the colour with the most isolated vertices
    (random among ties), take its smallest isolated vertex, pair it against
    the whole clique, then absorb it into the clique.  Each entry carries the
    restriction graphs the child inherits, remapped to its own class ids.
    """
    colours = _class_colours(pattern, state)
    plan = _batch_plan(graphs, rng)
    out = []
    cliques = {col: sorted(g.clique) for col, g in enumerate(graphs.by_colour)}
    folded = graphs
    for col, v in plan:
        for u in cliques[col]:
            remap = _child_id_map(state, keep=min(u, v), drop=max(u, v))
            child_graphs = _remap_graphs(folded, remap, merged_old=(u, v),
                                         merged_to_clique=True, colour=col)
            assert colours[u] == colours[v] == col
            out.append(((min(u, v), max(u, v)), child_graphs))
        # v joins the clique before the next batch starts
        insort(cliques[col], v)
        per = list(folded.by_colour)
        g = per[col]
        per[col] = ColourGraph(g.clique | {v}, g.isolated - {v})
        folded = PruneGraphs(tuple(per))
    return out


def _batch_plan(graphs: PruneGraphs, rng: random.Random) -> list[tuple[int, int]]:
    iso = {col: sorted(g.isolated) for col, g in enumerate(graphs.by_colour)}
    plan = []
    while True:
        most = max((len(v) for v in iso.values()), default=0)
        if most == 0:
            break
        tied = sorted(col for col, v in iso.items() if len(v) == most)
        col = tied[0] if len(tied) == 1 else rng.choice(tied)
        v = iso[col].pop(0)
        plan.append((col, v))
    return plan


def forced_merge(state: MgtaState, witness: tuple[int, int], pattern: Pattern,
                 graphs: PruneGraphs):
    """Resolve a blocked node: merge the witness pair or kill the branch.

    Returns (child_state, child_graphs), or None when the branch is dead:
    the pair is an edge of its restriction graph, or it spans two colours (a
    pattern-consistent coarsening can never merge such a pair).
    """
    p1, p2 = witness
    colours = _class_colours(pattern, state)
    if colours[p1] != colours[p2]:
        return None
    col = colours[p1]
    g = graphs.by_colour[col]
    if g.has_edge(p1, p2):
        return None
    child = merge_tiles(state, p1, p2)
    remap = _child_id_map(state, keep=min(p1, p2), drop=max(p1, p2))
    to_clique = p1 in g.clique or p2 in g.clique
    child_graphs = _remap_graphs(graphs, remap, merged_old=(p1, p2),
                                 merged_to_clique=to_clique, colour=col)
    return child, child_graphs


def capture_solution(state: MgtaState, pattern: Pattern) -> TileSystem:
    """Materialise the state's canonical assignment as a verifiable system."""
    quads = canonical_glues(state)
    cid_of_cell = [0] * state.mn
    for cid, root in enumerate(state.canonical_roots()):
        for cell in state.members[root]:
            cid_of_cell[cell] = cid
    m = state.m
    return system_from_assignment(
        state.m, state.n,
        lambda x, y: quads[cid_of_cell[(y - 1) * m + (x - 1)]],
        pattern.colour)


class _Budget(Exception):
    pass


class _Searcher:
    """Journal-based depth-first traversal sharing one mutable MgtaState."""

    def __init__(self, pattern: Pattern, config: SearchConfig, visit_hook=None):
        self.pattern = pattern
        self.config = config
        self.rng = random.Random(config.rng_seed)
        self.visit_hook = visit_hook
        self.t0 = time.perf_counter()

        m, n = pattern.m, pattern.n
        self.state = build_mgta(initial_partition(m, n))
        self.colour = [pattern.colour(i % m + 1, i // m + 1) for i in range(m * n)]
        self.inclique = bytearray(m * n)
        self.kliq = [0] * pattern.k
        self.live_lists: list[list[int]] = [[] for _ in range(pattern.k)]
        self.pos = [0] * (m * n)
        for r in range(m * n):
            col = self.colour[r]
            self.pos[r] = len(self.live_lists[col])
            self.live_lists[col].append(r)
        self.sjournal: list = []

        self.steps = 0
        self.trace = SearchTrace()
        self.best = m * n + 1  # sentinel; root records m*n immediately
        self.best_snapshot: list[tuple[int, ...]] | None = None
        self.next_report = config.report_every

    # -- solver-side journaled structures --------------------------------

    def _remove_live(self, b: int) -> None:
        col = self.colour[b]
        lst = self.live_lists[col]
        i = self.pos[b]
        last = lst.pop()
        if last != b:
            lst[i] = last
            self.pos[last] = i
        self.sjournal.append(("r", col, b, i))

    def _join_clique(self, v: int) -> None:
        self.inclique[v] = 1
        self.kliq[self.colour[v]] += 1
        self.sjournal.append(("K", v))

    def _undo_solver(self, mark: int) -> None:
        j = self.sjournal
        while len(j) > mark:
            op = j.pop()
            if op[0] == "r":
                _, col, b, i = op
                lst = self.live_lists[col]
                if i == len(lst):
                    lst.append(b)
                else:
                    moved = lst[i]
                    lst.append(moved)
                    self.pos[moved] = len(lst) - 1
                    lst[i] = b
                self.pos[b] = i
            else:  # "K"
                v = op[1]
                self.inclique[v] = 0
                self.kliq[self.colour[v]] -= 1

    def _merge(self, a: int, b: int) -> None:
        budget = self.config.step_budget
        if budget is not None and self.steps >= budget:
            raise _Budget()
        self.state.push_merge(a, b)
        self._remove_live(b)
        self.steps += 1
        if self.next_report is not None and self.steps >= self.next_report:
            self.trace.record(self.steps, self.best, self._elapsed())
            self.next_report += self.config.report_every

    def _elapsed(self) -> float:
        return (time.perf_counter() - self.t0) * 1000.0

    def _bound(self) -> int:
        total = 0
        for col in range(self.pattern.k):
            kq = self.kliq[col]
            total += kq if kq else (1 if self.live_lists[col] else 0)
        return total

    def _note_node(self) -> None:
        if self.visit_hook is not None:
            sig = tuple(sorted(tuple(sorted(self.state.members[r]))
                               for r in self.state.live_roots()))
            self.visit_hook(sig)
        if self.state.nclasses < self.best:
            self.best = self.state.nclasses
            self.trace.record(self.steps, self.best, self._elapsed())
            st = self.state
            self.best_snapshot = [tuple(st.members[r]) for r in range(st.mn)
                                  if st.live[r]]

    # -- depth-first traversal --------------------------------------------

    def run(self) -> SearchTrace:
        try:
            self._dfs()
            exhausted = True
        except _Budget:
            exhausted = False
        self.trace.optimal = exhausted
        self.trace.steps = self.steps
        self.trace.best_size = self.best
        if self.best_snapshot is not None:
            m = self.pattern.m
            groups = [[(i % m + 1, i // m + 1) for i in cls] for cls in self.best_snapshot]
            part = make_partition(m, self.pattern.n, groups)
            self.trace.best_system = capture_solution(build_mgta(part), self.pattern)
        return self.trace

    def _enter(self) -> bool:
        """Apply forced merges until constructible; False if the branch dies."""
        st = self.state
        while st.colliding:
            r1, r2 = st.blocked_witness()
            if self.visit_hook is not None:
                self._note_blocked_visit()
            if self.colour[r1] != self.colour[r2]:
                return False
            if self.inclique[r1] and self.inclique[r2]:
                return False
            if self.inclique[r2]:
                r1, r2 = r2, r1
            elif not self.inclique[r1] and st.mincell[r2] < st.mincell[r1]:
                r1, r2 = r2, r1
            self._merge(r1, r2)
        return True

    def _note_blocked_visit(self) -> None:
        sig = tuple(sorted(tuple(sorted(self.state.members[r]))
                           for r in self.state.live_roots()))
        self.visit_hook(sig)

    def _dfs(self) -> None:
        st = self.state
        # Frame: [jmark, smark, plan, cliques, batch_idx, u_idx, bound_cur].
        # The marks point to just before the node's own merge, so popping a
        # frame restores the parent's state exactly.
        root_marks = (st.mark(), len(self.sjournal))
        stack: list[list] = []
        if self._enter():
            self._note_node()
            if self._bound() < self.best:
                stack.append(self._make_frame(*root_marks))
            else:
                st.undo_to(root_marks[0])
                self._undo_solver(root_marks[1])
                return
        else:
            st.undo_to(root_marks[0])
            self._undo_solver(root_marks[1])
            return

        while stack:
            frame = stack[-1]
            jm, sm, plan, cliques, bound_cur = frame[0], frame[1], frame[2], frame[3], frame[6]
            batch_idx, u_idx = frame[4], frame[5]
            descended = False
            while batch_idx < len(plan):
                col, v = plan[batch_idx]
                us = cliques[col]
                if u_idx < len(us):
                    u = us[u_idx]
                    u_idx += 1
                    if bound_cur >= self.best:
                        batch_idx = len(plan)  # later children only bound higher
                        break
                    frame[4], frame[5] = batch_idx, u_idx
                    cjm, csm = st.mark(), len(self.sjournal)
                    self._merge(u, v)
                    if self._enter():
                        self._note_node()
                        if self._bound() < self.best:
                            stack.append(self._make_frame(cjm, csm))
                            descended = True
                            break
                    st.undo_to(cjm)
                    self._undo_solver(csm)
                else:
                    self._join_clique(v)
                    insort(cliques[col], v, key=lambda r: st.mincell[r])
                    kq = self.kliq[col]
                    if kq > 1:
                        bound_cur += 1
                    frame[6] = bound_cur
                    batch_idx += 1
                    u_idx = 0
            if descended:
                continue
            frame[4], frame[5] = batch_idx, u_idx
            if batch_idx >= len(plan):
                st.undo_to(jm)
                self._undo_solver(sm)
                stack.pop()

    def _make_frame(self, jm: int, sm: int) -> list:
        st = self.state
        iso = {col: sorted((r for r in lst if not self.inclique[r]),
                           key=lambda r: st.mincell[r])
               for col, lst in enumerate(self.live_lists)}
        plan = []
        counts = {col: len(v) for col, v in iso.items()}
        cursors = {col: 0 for col in iso}
        while True:
            most = max(counts.values(), default=0)
            if most == 0:
                break
            tied = sorted(col for col, c in counts.items() if c == most)
            col = tied[0] if len(tied) == 1 else self.rng.choice(tied)
            plan.append((col, iso[col][cursors[col]]))
            cursors[col] += 1
            counts[col] -= 1
        cliques = {col: sorted((r for r in lst if self.inclique[r]),
                               key=lambda r: st.mincell[r])
                   for col, lst in enumerate(self.live_lists)}
        return [jm, sm, plan, cliques, 0, 0, self._bound()]


def _psbb_best_first(pattern: Pattern, config: SearchConfig) -> SearchTrace:
    """Clone-based best-first variant; open list ordered by (bound, depth).

    Kept simple and allocation-heavy; suitable for small instances and as a
    cross-check of the depth-first implementation.
    """
    rng = random.Random(config.rng_seed)
    t0 = time.perf_counter()
    trace = SearchTrace()
    state = build_mgta(initial_partition(pattern.m, pattern.n))
    graphs = initial_graphs(pattern, state)
    steps = 0
    best = pattern.m * pattern.n + 1
    best_system: TileSystem | None = None
    seq = 0
    heap = [(bound(graphs), 0, seq, state, graphs)]
    budget = config.step_budget
    exhausted = True

    while heap:
        node_bound, depth, _, state, graphs = heapq.heappop(heap)
        if node_bound >= best:
            continue
        dead = False
        while True:
            ver = check_constructible(state)
            if ver.constructible:
                break
            if budget is not None and steps >= budget:
                exhausted = False
                dead = True
                break
            nxt = forced_merge(state, ver.blocked, pattern, graphs)
            if nxt is None:
                dead = True
                break
            steps += 1
            state, graphs = nxt
        if dead:
            if not exhausted:
                break
            continue
        if state.nclasses < best:
            best = state.nclasses
            best_system = capture_solution(state, pattern)
            trace.record(steps, best, (time.perf_counter() - t0) * 1000.0)
        for (p1, p2), child_graphs in children(state, pattern, graphs, rng):
            if bound(child_graphs) >= best:
                continue
            if budget is not None and steps >= budget:
                exhausted = False
                break
            child = merge_tiles(state, p1, p2)
            steps += 1
            seq += 1
            heapq.heappush(heap, (bound(child_graphs), depth + 1, seq, child, child_graphs))
        if not exhausted:
            break

    trace.optimal = exhausted
    trace.steps = steps
    trace.best_size = best
    trace.best_system = best_system
    return trace


def psbb_solve(pattern: Pattern, config: SearchConfig | None = None,
               visit_hook=None) -> SearchTrace:
    """Find a minimum tile set, or the best within the merge budget.

    The root is the all-singletons partition, which is itself a solution of
    size m*n, so the trace starts there and only improves.  With an
    unexhausted budget the result carries ``optimal=True`` and the returned
    size is the certified minimum.
    """
    config = config or SearchConfig()
    if config.traversal == "best-first":
        return _psbb_best_first(pattern, config)
    return _Searcher(pattern, config, visit_hook).run()
