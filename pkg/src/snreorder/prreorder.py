"""Within-supernode column reordering by partition refinement.

Each target supernode is processed independently: its columns start as one
set, and every updating descendant splits the sets it straddles. Splits
along a run of consecutive splittable sets alternate orientation --
(outside, inside), (inside, outside), ... -- so that inside-parts of
neighboring sets land next to each other, roughly halving the number of
blocks compared to a fixed orientation.
"""

from __future__ import annotations

import heapq

import numpy as np

from .matrixio import Permutation
from .symbolic import SupernodalETree, SupernodePartition
from .workspace import AllocationMeter

__all__ = ["OrderedPartition", "updater_schedule", "refine", "pr_reorder"]

STRATEGIES = ("natural", "ndesc", "work")


def updater_schedule(
    t: int,
    part: SupernodePartition,
    tree: SupernodalETree,
    hadj: list[np.ndarray],
    strategy: str = "work",
    meter: AllocationMeter | None = None,
) -> list[tuple[int, np.ndarray]]:
    """Updaters of supernode t in a reverse topological order.

    Returns (s, rows) pairs where rows = hadj(s) restricted to t's columns,
    covering exactly the descendants of t with a nonempty restriction.
    Parents always precede children; among simultaneously eligible
    supernodes the strategy key picks next (natural: largest index,
    ndesc: most descendants, work: most subtree work), ties toward the
    larger index.
    """
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy '{strategy}'")
    lo, hi = int(part.first[t]), int(part.first[t + 1])

    if strategy == "natural":
        def key(s: int):
            return (-s,)
    elif strategy == "ndesc":
        def key(s: int):
            return (-int(tree.n_descendants[s]), -s)
    else:
        def key(s: int):
            return (-int(tree.subtree_work[s]), -s)

    heap = [key(c) + (c,) for c in tree.children[t]]
    heapq.heapify(heap)
    if meter is not None:
        meter.alloc(3 * tree.count)
    schedule: list[tuple[int, np.ndarray]] = []
    while heap:
        s = heapq.heappop(heap)[-1]
        rows = hadj[s]
        a, b = np.searchsorted(rows, (lo, hi))
        if b > a:
            sect = rows[a:b].copy()
            if meter is not None:
                meter.track(sect)
            schedule.append((s, sect))
        for c in tree.children[s]:
            heapq.heappush(heap, key(c) + (c,))
    if meter is not None:
        meter.release(3 * tree.count)
    return schedule


class OrderedPartition:
    """Ordered partition of one supernode's columns, as local indices 0..m-1.

    Sets are contiguous segments of the `elems` order array; splits only ever
    replace one segment by two adjacent ones, stably (both halves keep their
    elements in the pre-split relative order).
    """

    def __init__(self, m: int, meter: AllocationMeter | None = None):
        if m < 1:
            raise ValueError("empty supernode")
        self.m = m
        self._meter = meter
        self.elems = np.arange(m, dtype=np.int64)
        self._pos = np.arange(m, dtype=np.int64)
        self._seg_of = np.zeros(m, dtype=np.int64)
        self._in_set = np.zeros(m, dtype=bool)
        self._bounds: dict[int, tuple[int, int]] = {0: (0, m)}
        self._order: list[int] = [0]
        self._next_id = 1
        if meter is not None:
            meter.alloc(4 * m + 2 * m)  # four m-vectors plus segment tables

    def close(self) -> None:
        if self._meter is not None:
            self._meter.release(4 * self.m + 2 * self.m)
            self._meter = None

    def sets(self) -> list[list[int]]:
        """Current sets in partition order (element order as stored)."""
        return [
            [int(x) for x in self.elems[s:e]]
            for s, e in (self._bounds[i] for i in self._order)
        ]

    def order(self) -> np.ndarray:
        """Flat column order consistent with the partition."""
        return self.elems

    def refine(self, members) -> "OrderedPartition":
        """Split every set that `members` straddles.

        Along each maximal run of consecutive splittable sets the first set
        splits as (outside, inside) and subsequent sets alternate.
        """
        members = np.asarray(members, dtype=np.int64)
        if members.size == 0:
            raise ValueError("refinement set is empty")
        if members.min() < 0 or members.max() >= self.m:
            raise ValueError("refinement set is not a subset of the supernode")
        self._in_set[members] = True
        hits: dict[int, int] = {}
        for h in members:
            sid = int(self._seg_of[h])
            hits[sid] = hits.get(sid, 0) + 1

        plan: list[tuple[int, int, bool]] = []  # (order position, sid, inside_right)
        run = 0
        for pos, sid in enumerate(self._order):
            count = hits.get(sid, 0)
            start, end = self._bounds[sid]
            if 0 < count < end - start:
                plan.append((pos, sid, run % 2 == 0))
                run += 1
            else:
                run = 0
        for pos, sid, inside_right in reversed(plan):
            self._split(pos, sid, inside_right)
        self._in_set[members] = False
        return self

    def _split(self, pos: int, sid: int, inside_right: bool) -> None:
        start, end = self._bounds[sid]
        block = self.elems[start:end]
        mask = self._in_set[block]
        inside = block[mask]
        outside = block[~mask]
        left, right = (outside, inside) if inside_right else (inside, outside)
        self.elems[start:start + len(left)] = left
        self.elems[start + len(left):end] = right
        self._pos[self.elems[start:end]] = np.arange(start, end)
        self._bounds[sid] = (start, start + len(left))
        new_id = self._next_id
        self._next_id += 1
        self._bounds[new_id] = (start + len(left), end)
        self._seg_of[self.elems[start + len(left):end]] = new_id
        self._order.insert(pos + 1, new_id)


def refine(partition: OrderedPartition, members) -> OrderedPartition:
    """Functional form of OrderedPartition.refine."""
    return partition.refine(members)


def pr_reorder(
    part: SupernodePartition,
    tree: SupernodalETree,
    hadj: list[np.ndarray],
    strategy: str = "work",
    meter: AllocationMeter | None = None,
) -> Permutation:
    """Global permutation reordering columns within every supernode.

    Supernode boundaries are fixed; columns only move inside their own
    supernode, and untouched sets keep their original relative order.
    """
    forward = np.arange(part.n, dtype=np.int64)
    for t in range(part.count):
        lo = int(part.first[t])
        width = part.width(t)
        if width == 1:
            continue
        schedule = updater_schedule(t, part, tree, hadj, strategy, meter)
        if not schedule:
            continue
        partition = OrderedPartition(width, meter)
        for _, rows in schedule:
            partition.refine(rows - lo)
        forward[lo + partition.order()] = lo + np.arange(width, dtype=np.int64)
        partition.close()
        if meter is not None:
            for _, rows in schedule:
                meter.release(rows.size)
    return Permutation.from_forward(forward)
