"""Most-general tile assignments over grid partitions.

An assignment gives every partition class four glue ids, one per side, such
that adjacent grid cells agree on the glue of their shared edge, and no glues
beyond those forced by adjacency are identified.  Such an assignment is
unique up to glue relabelling, so constructibility of a partition reduces to
a determinism check on it: the partition is realisable by a tile system
exactly when no two classes share their (south, west) glue pair.

:class:`MgtaState` maintains the assignment incrementally under class merges
and supports O(1)-amortised undo, which is what makes the branch-and-bound
and heuristic searches affordable.  States are value-like from the outside:
:func:`merge_tiles` clones, and the in-place ``push_merge``/``undo_to`` pair
used by the solvers never mutates a state observable elsewhere.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .patterns import Partition, make_partition

# Direction slot order used throughout: N, E, S, W.
_N, _E, _S, _W = 0, 1, 2, 3


@dataclass(frozen=True)
class Constructibility:
    """Outcome of the constructibility test.

    Either ``tiles`` holds the canonical glue quadruples of a realisable tile
    set, or ``blocked`` names two classes (canonical ids) that share both
    their south and west glues and therefore must be merged in any
    realisable coarsening.
    """

    tiles: tuple[tuple[int, int, int, int], ...] | None
    blocked: tuple[int, int] | None

    @property
    def constructible(self) -> bool:
        return self.blocked is None


class MgtaState:
    """Incrementally maintained most-general glue assignment.

    Classes are identified internally by a root cell index (the class's
    minimum cell at construction time; merges keep the survivor's root).
    Glue ids are opaque integers drawn from the slot space ``[0, 4*m*n)``.
    Mutations journal their effects; ``undo_to(mark)`` restores any earlier
    state exactly.
    """

    __slots__ = (
        "m", "n", "mn", "live", "size", "mincell", "cache",
        "cache_np", "size_np", "mincell_np",
        "users", "ucount", "members", "paircount", "pairmembers", "colliding",
        "journal", "nclasses", "_B",
    )

    def __init__(self, partition: Partition):
        m, n = partition.m, partition.n
        mn = m * n
        self.m, self.n, self.mn = m, n, mn
        self._B = 4 * mn
        self.live = bytearray(mn)
        self.size = [0] * mn
        self.mincell = [0] * mn
        self.cache = [0] * (4 * mn)
        # numpy mirrors of cache/size/mincell, kept in sync on every write so
        # vectorised readers (the heuristic pair selection) can gather without
        # touching Python-level loops
        self.cache_np = np.zeros(4 * mn, dtype=np.int64)
        self.size_np = np.zeros(mn, dtype=np.int64)
        self.mincell_np = np.zeros(mn, dtype=np.int64)
        self.users: list[list[int]] = [[] for _ in range(4 * mn)]
        # exact count of live, current entries per glue id: drives the
        # weighted union and the lazy compaction of junk-heavy user lists
        self.ucount = [0] * (4 * mn)
        self.members: list[list[int]] = [[] for _ in range(mn)]
        self.paircount: dict[int, int] = {}
        self.pairmembers: dict[int, list[int]] = {}
        self.colliding: set[int] = set()
        self.journal: list = []
        self.nclasses = partition.size

        class_of = [0] * mn
        for cls in partition.classes:
            idxs = sorted((y - 1) * m + (x - 1) for (x, y) in cls)
            root = idxs[0]
            self.live[root] = 1
            self.size[root] = len(idxs)
            self.size_np[root] = len(idxs)
            self.mincell[root] = root
            self.mincell_np[root] = root
            self.members[root] = idxs
            for i in idxs:
                class_of[i] = root
        for root in range(mn):
            if self.live[root]:
                for d in range(4):
                    slot = 4 * root + d
                    self.cache[slot] = slot
                    self.cache_np[slot] = slot
                    self.users[slot].append(4 * root + d)
                    self.ucount[slot] = 1
        # Identify glues across every internal adjacency: the east side of a
        # cell is the west side of its east neighbour, north likewise.
        for i in range(mn):
            x, y = i % m, i // m
            if x + 1 < m:
                a, b = class_of[i], class_of[i + 1]
                self._glue_union(self.cache[4 * a + _E], self.cache[4 * b + _W])
            if y + 1 < n:
                a, b = class_of[i], class_of[i + m]
                self._glue_union(self.cache[4 * a + _N], self.cache[4 * b + _S])
        # Journal entries from construction are not undoable history.
        self.journal.clear()
        self.paircount.clear()
        self.pairmembers.clear()
        self.colliding.clear()
        for root in range(mn):
            if self.live[root]:
                self._pair_delta(root, 1)
        self.journal.clear()

    # -- internal bookkeeping -------------------------------------------------

    def _pair_delta(self, root: int, delta: int) -> None:
        # Track how many live classes expose each (south, west) glue pair.
        key = self.cache[4 * root + _S] * self._B + self.cache[4 * root + _W]
        c = self.paircount.get(key, 0) + delta
        if c:
            self.paircount[key] = c
        else:
            del self.paircount[key]
        if delta > 0:
            if c == 2:
                self.colliding.add(key)
            lst = self.pairmembers.get(key)
            if lst is None:
                self.pairmembers[key] = [root]
            else:
                lst.append(root)
            self.journal.append(("pm", key))
        else:
            if c == 1:
                self.colliding.discard(key)
        self.journal.append(("P", key, -delta))

    def _undo_pair_delta(self, key: int, delta: int) -> None:
        c = self.paircount.get(key, 0) + delta
        if c:
            self.paircount[key] = c
        else:
            del self.paircount[key]
        if delta > 0:
            if c == 2:
                self.colliding.add(key)
        else:
            if c == 1:
                self.colliding.discard(key)

    def _glue_union(self, g1: int, g2: int) -> tuple[int, int] | None:
        """Identify two glues; returns (winner, loser) or None when equal.

        Only live classes' caches are rewritten: a dead class's cache keeps
        the roots it had at death, which is exactly the state undo restores
        when it revives, and skipping the dead keeps unions proportional to
        the live population.
        """
        if g1 == g2:
            return None
        ucount = self.ucount
        if ucount[g1] < ucount[g2]:
            g1, g2 = g2, g1
        self._maybe_compact(g2)
        keep = self.users[g1]
        journal = self.journal
        cache = self.cache
        live = self.live
        for packed in self.users[g2]:
            cls = packed >> 2
            if not live[cls]:
                continue
            slot = packed  # packed == 4*cls + d == slot id
            if cache[slot] != g2:
                continue  # stale entry left behind by an earlier union
            tracked = packed & 3 >= _S
            if tracked:
                self._pair_delta(cls, -1)
            journal.append(("g", slot, g2))
            cache[slot] = g1
            self.cache_np[slot] = g1
            journal.append(("u", g1))
            keep.append(packed)
            ucount[g1] += 1
            if tracked:
                self._pair_delta(cls, 1)
        return g1, g2

    def _maybe_compact(self, g: int) -> None:
        lst = self.users[g]
        if len(lst) > 64 and len(lst) > 4 * self.ucount[g]:
            cache, live = self.cache, self.live
            self.journal.append(("U", g, lst))
            self.users[g] = [p for p in lst if live[p >> 2] and cache[p] == g]

    # -- mutation and undo ----------------------------------------------------

    def mark(self) -> int:
        return len(self.journal)

    def push_merge(self, a: int, b: int) -> None:
        """Merge class root b into class root a, unifying glues side by side."""
        if a == b or not (self.live[a] and self.live[b]):
            raise ValueError(f"cannot merge class roots {a} and {b}")
        journal = self.journal
        self._pair_delta(b, -1)
        journal.append(("l", b))
        self.live[b] = 0
        self.nclasses -= 1
        cache = self.cache
        ucount = self.ucount
        for d in range(4):
            ucount[cache[4 * b + d]] -= 1
        # b's roots are read out while still current; unions may retire one
        # of the remaining roots, so patch the local copies as they land
        gb = [cache[4 * b + d] for d in range(4)]
        for d in range(4):
            res = self._glue_union(cache[4 * a + d], gb[d])
            if res is not None:
                winner, loser = res
                for d2 in range(d + 1, 4):
                    if gb[d2] == loser:
                        gb[d2] = winner
        journal.append(("s", a, self.size[a]))
        self.size[a] += self.size[b]
        self.size_np[a] = self.size[a]
        if self.mincell[b] < self.mincell[a]:
            journal.append(("m", a, self.mincell[a]))
            self.mincell[a] = self.mincell[b]
            self.mincell_np[a] = self.mincell[b]
        journal.append(("M", a, len(self.members[a])))
        self.members[a].extend(self.members[b])

    def undo_to(self, mark: int) -> None:
        journal = self.journal
        while len(journal) > mark:
            op = journal.pop()
            tag = op[0]
            if tag == "g":
                self.cache[op[1]] = op[2]
                self.cache_np[op[1]] = op[2]
            elif tag == "u":
                self.users[op[1]].pop()
                self.ucount[op[1]] -= 1
            elif tag == "P":
                self._undo_pair_delta(op[1], op[2])
            elif tag == "pm":
                self.pairmembers[op[1]].pop()
            elif tag == "l":
                b = op[1]
                self.live[b] = 1
                self.nclasses += 1
                for d in range(4):
                    self.ucount[self.cache[4 * b + d]] += 1
            elif tag == "s":
                self.size[op[1]] = op[2]
                self.size_np[op[1]] = op[2]
            elif tag == "m":
                self.mincell[op[1]] = op[2]
                self.mincell_np[op[1]] = op[2]
            elif tag == "U":
                self.users[op[1]] = op[2]
            else:  # "M"
                del self.members[op[1]][op[2]:]

    def clone(self) -> "MgtaState":
        new = object.__new__(MgtaState)
        new.m, new.n, new.mn, new._B = self.m, self.n, self.mn, self._B
        new.live = bytearray(self.live)
        new.size = list(self.size)
        new.mincell = list(self.mincell)
        new.cache = list(self.cache)
        new.cache_np = self.cache_np.copy()
        new.size_np = self.size_np.copy()
        new.mincell_np = self.mincell_np.copy()
        new.users = [list(u) for u in self.users]
        new.ucount = list(self.ucount)
        new.members = [list(mm) for mm in self.members]
        new.paircount = dict(self.paircount)
        new.pairmembers = {k: list(v) for k, v in self.pairmembers.items()}
        new.colliding = set(self.colliding)
        new.journal = []
        new.nclasses = self.nclasses
        return new

    # -- readout ---------------------------------------------------------------

    @property
    def is_constructible(self) -> bool:
        return not self.colliding

    def live_roots(self) -> list[int]:
        return [r for r in range(self.mn) if self.live[r]]

    def canonical_roots(self) -> list[int]:
        """Class roots in canonical order (by each class's minimum cell)."""
        return sorted(self.live_roots(), key=lambda r: self.mincell[r])

    def glue_tuple(self, root: int) -> tuple[int, int, int, int]:
        c = self.cache
        return (c[4 * root], c[4 * root + 1], c[4 * root + 2], c[4 * root + 3])

    def common_glue_count(self, r1: int, r2: int) -> int:
        c = self.cache
        return sum(c[4 * r1 + d] == c[4 * r2 + d] for d in range(4))

    def blocked_pairs_raw(self) -> list[tuple[int, int]]:
        """All root pairs sharing a (south, west) glue pair, unordered."""
        out = []
        for key in self.colliding:
            roots = self._colliding_roots(key)
            for i in range(len(roots)):
                for j in range(i + 1, len(roots)):
                    out.append((roots[i], roots[j]))
        return out

    def _colliding_roots(self, key: int) -> list[int]:
        cache, B = self.cache, self._B
        seen = []
        for root in self.pairmembers.get(key, ()):
            if not self.live[root]:
                continue
            if cache[4 * root + _S] * B + cache[4 * root + _W] != key:
                continue
            if root not in seen:
                seen.append(root)
        return seen

    def blocked_witness(self) -> tuple[int, int] | None:
        """A deterministic colliding root pair: minimal raw (S, W) glue key,
        then the two smallest classes by minimum cell."""
        if not self.colliding:
            return None
        key = min(self.colliding)
        roots = sorted(self._colliding_roots(key), key=lambda r: self.mincell[r])
        return roots[0], roots[1]

    def partition(self) -> Partition:
        groups = []
        for root in self.canonical_roots():
            groups.append([(i % self.m + 1, i // self.m + 1) for i in self.members[root]])
        return make_partition(self.m, self.n, groups)


def build_mgta(partition: Partition) -> MgtaState:
    """Construct the most-general assignment for an arbitrary partition."""
    return MgtaState(partition)


def merge_tiles(state: MgtaState, p1: int, p2: int) -> MgtaState:
    """Merge classes with canonical ids p1, p2, returning a new state.

    The input state is left untouched; the result equals
    ``build_mgta`` of the coarsened partition up to glue relabelling.
    """
    roots = state.canonical_roots()
    if p1 == p2 or not (0 <= p1 < len(roots) and 0 <= p2 < len(roots)):
        raise ValueError(f"unknown or identical class ids {p1}, {p2}")
    new = state.clone()
    new.push_merge(roots[min(p1, p2)], roots[max(p1, p2)])
    return new


def canonical_glues(state: MgtaState) -> tuple[tuple[int, int, int, int], ...]:
    """Glue quadruples per class, classes in canonical order, glue ids
    renumbered by first appearance (directions scanned N, E, S, W).

    Two states over the same partition produce identical output regardless of
    the merge history that built them.
    """
    relabel: dict[int, int] = {}
    out = []
    for root in state.canonical_roots():
        quad = []
        for g in state.glue_tuple(root):
            if g not in relabel:
                relabel[g] = len(relabel)
            quad.append(relabel[g])
        out.append(tuple(quad))
    return tuple(out)


def check_constructible(state: MgtaState) -> Constructibility:
    """Decide constructibility of the state's partition.

    Constructible means the assignment is injective and no two classes share
    their (south, west) glue pair; a shared pair always exists otherwise, so
    a single witness form suffices.  The blocked witness is deterministic:
    smallest canonical (south, west) glue pair first, then smallest class ids.
    """
    if state.is_constructible:
        return Constructibility(tiles=canonical_glues(state), blocked=None)
    roots = state.canonical_roots()
    canon = canonical_glues(state)
    best: tuple | None = None
    by_pair: dict[tuple[int, int], int] = {}
    for cid in range(len(roots)):
        sw = (canon[cid][_S], canon[cid][_W])
        if sw in by_pair:
            cand = (sw, by_pair[sw], cid)
            if best is None or cand < best:
                best = cand
        else:
            by_pair[sw] = cid
    assert best is not None
    return Constructibility(tiles=None, blocked=(best[1], best[2]))
