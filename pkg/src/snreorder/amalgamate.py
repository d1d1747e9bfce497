"""Supernode merging: coarsen the fundamental partition by child-parent merges.

Merging a child into its parent pads the child's columns with explicit zeros
so that both share the parent's row structure below the merged diagonal
block. Candidates are child-parent pairs that are column-adjacent (the
child's last column immediately precedes the parent's first), which is
exactly the set of merges that keeps every supernode a contiguous column
range; after each merge the newly adjacent child becomes a candidate. A heap
always merges the cheapest live pair next, until the next merge would push
the cumulative storage growth past the cap.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np

from .symbolic import EliminationStructure, SupernodalETree, SupernodePartition

__all__ = ["MergeRecord", "merge_cost", "amalgamate", "relaxed_storage", "relaxed_work"]


@dataclass(frozen=True)
class MergeRecord:
    step: int
    child: int        # supernode index in the pre-merge (fundamental) partition
    parent: int
    cost: int         # explicit zeros added by this merge
    cumulative: int
    ratio: float      # cumulative / nnz of the unmerged factor


def merge_cost(child, parent, widths, hadj_sizes, tree_parent=None) -> int:
    """Zeros added by merging `child` into `parent`.

    The child's rows below its block are a subset of the parent's columns and
    rows, so each child column grows to exactly the parent's height:
    width(child) * ((width(parent) + |hadj(parent)|) - |hadj(child)|).
    """
    if tree_parent is not None and tree_parent[child] != parent:
        raise ValueError(f"supernode {parent} is not the parent of {child}")
    cost = int(widths[child]) * (
        int(widths[parent]) + int(hadj_sizes[parent]) - int(hadj_sizes[child])
    )
    if cost < 0:
        raise ValueError("negative merge cost: inconsistent structures")
    return cost


def amalgamate(
    part: SupernodePartition,
    tree: SupernodalETree,
    es: EliminationStructure,
    cap: float,
) -> tuple[SupernodePartition, list[MergeRecord]]:
    """Merge cheapest live child-parent pairs while cumulative growth stays
    within cap * nnz(L). A cap of 0 disables merging entirely.

    Returns the coarsened partition plus the merge log. Ties on cost break
    toward the smaller child supernode.
    """
    nsup = part.count
    if cap < 0:
        raise ValueError("cap must be nonnegative")
    if cap == 0 or nsup <= 1:
        return part, []

    base_nnz = es.nnz
    budget = cap * base_nnz
    first = part.first[:-1].astype(np.int64).copy()
    width = part.widths.astype(np.int64).copy()
    hsize = np.zeros(nsup, dtype=np.int64)
    for t in range(nsup):
        hsize[t] = es.col_counts[part.first[t + 1] - 1] - 1
    parent = tree.parent.copy()
    alive = np.ones(nsup, dtype=bool)
    col2grp = part.snode_of.copy()
    version = np.zeros(nsup, dtype=np.int64)

    def live_child(p: int) -> int:
        """Child merge candidate of group p, or -1 when none is adjacent."""
        if first[p] == 0:
            return -1
        c = int(col2grp[first[p] - 1])
        return c if parent[c] == p else -1

    heap: list[tuple[int, int, int, int, int, int]] = []

    def push(p: int) -> None:
        c = live_child(p)
        if c >= 0:
            cost = merge_cost(c, p, width, hsize)
            heapq.heappush(
                heap, (cost, int(first[c]), c, p, int(version[c]), int(version[p]))
            )

    for p in range(nsup):
        push(p)

    log: list[MergeRecord] = []
    cumulative = 0
    while heap:
        cost, _, c, p, vc, vp = heapq.heappop(heap)
        stale = (
            not alive[c]
            or parent[c] != p
            or vc != version[c]
            or vp != version[p]
        )
        if stale:
            continue
        if cumulative + cost > budget:
            break
        cumulative += cost
        log.append(
            MergeRecord(len(log) + 1, c, p, cost, cumulative, cumulative / base_nnz)
        )
        # group p absorbs c; p keeps its id, row structure, and tree parent
        alive[c] = False
        col2grp[first[c]:first[c] + width[c]] = p
        first[p] = first[c]
        width[p] += width[c]
        version[c] += 1
        version[p] += 1
        for g in np.flatnonzero(parent == c):
            parent[g] = p
        push(p)           # c's adjacent child, if any, is now adjacent to p
        gp = int(parent[p])
        if gp < nsup and alive[gp]:
            push(gp)      # p's own candidacy changed width

    merged = SupernodePartition.from_first(sorted(int(f) for f in first[alive]), part.n)
    return merged, log


def relaxed_storage(part: SupernodePartition, hadj: list[np.ndarray]) -> int:
    """Factor storage of a partition: dense trapezoidal panel per supernode."""
    total = 0
    for t in range(part.count):
        w = part.width(t)
        total += w * (w + 1) // 2 + w * len(hadj[t])
    return total


def relaxed_work(part: SupernodePartition, hadj: list[np.ndarray]) -> int:
    """Column flop model applied to the padded (merged) column structure."""
    total = 0
    for t in range(part.count):
        w = part.width(t)
        r = len(hadj[t])
        lengths = np.arange(r + 1, r + w + 1, dtype=np.int64)
        total += int(np.dot(lengths, lengths))
    return total
