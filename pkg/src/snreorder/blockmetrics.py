"""Dense-block bookkeeping: runs of contiguous rows joining supernode pairs.

A source supernode's rows below its diagonal block decompose into maximal
runs of consecutive row indices. Splitting those runs at target-supernode
boundaries gives the per-pair blocks whose count the reordering methods
minimize; the unsplit runs ("maximal" blocks, possibly spanning consecutive
targets) drive the rectangular updates of the blocked factorization.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .matrixio import Permutation
from .symbolic import SupernodePartition

__all__ = [
    "Block",
    "BlockList",
    "BlockStats",
    "block_list",
    "block_stats",
    "objective",
    "brute_force_min_blocks",
]

BRUTE_FORCE_LIMIT = 8


@dataclass(frozen=True)
class Block:
    """Contiguous row range [first, last] of one source supernode's structure.

    target is the supernode containing the rows, or None for a maximal block
    that may span consecutive targets.
    """

    source: int
    target: int | None
    first: int
    last: int

    @property
    def size(self) -> int:
        return self.last - self.first + 1


@dataclass
class BlockList:
    per_source: list[list[Block]]
    maximal_per_source: list[list[Block]]

    def pair_counts(self) -> dict[tuple[int, int], int]:
        """(target, source) -> number of blocks joining the pair."""
        counts: dict[tuple[int, int], int] = {}
        for blocks in self.per_source:
            for b in blocks:
                key = (b.target, b.source)
                counts[key] = counts.get(key, 0) + 1
        return counts


def _runs(rows: np.ndarray) -> list[tuple[int, int]]:
    """Maximal runs of consecutive integers in a sorted array."""
    if rows.size == 0:
        return []
    breaks = np.flatnonzero(np.diff(rows) > 1)
    starts = np.concatenate(([0], breaks + 1))
    ends = np.concatenate((breaks, [rows.size - 1]))
    return [(int(rows[a]), int(rows[b])) for a, b in zip(starts, ends)]


def block_list(
    part: SupernodePartition,
    hadj: list[np.ndarray],
    order: Permutation | None = None,
) -> BlockList:
    """Blocks of every source supernode under the given global column order.

    The order must keep every column inside its own supernode. Maximal runs
    are reported twice: split at target boundaries (per-target blocks) and
    unsplit (maximal blocks).
    """
    if order is not None:
        if order.n != part.n:
            raise ValueError("order size does not match the partition")
        moved = part.snode_of[order.forward] != part.snode_of
        if np.any(moved):
            col = int(np.flatnonzero(moved)[0])
            raise ValueError(f"order moves column {col} across a supernode boundary")
    per_source: list[list[Block]] = []
    maximal: list[list[Block]] = []
    for s in range(part.count):
        rows = hadj[s]
        if order is not None:
            rows = np.sort(order.forward[rows])
        blocks: list[Block] = []
        maxblocks: list[Block] = []
        for first, last in _runs(rows):
            maxblocks.append(Block(s, None, first, last))
            t0 = int(part.snode_of[first])
            t1 = int(part.snode_of[last])
            for t in range(t0, t1 + 1):
                a = max(first, int(part.first[t]))
                b = min(last, int(part.first[t + 1]) - 1)
                blocks.append(Block(s, t, a, b))
        per_source.append(blocks)
        maximal.append(maxblocks)
    return BlockList(per_source, maximal)


@dataclass
class BlockStats:
    """Per-target block totals under the current order."""

    part: SupernodePartition
    pair_bc: dict[tuple[int, int], int]
    per_target_bc: np.ndarray          # sum of bc over sources, per target
    per_target_weighted: np.ndarray    # sum of |source| * bc, per target
    updater_count: np.ndarray
    max_block: np.ndarray
    block_rows: np.ndarray             # total block rows landing in each target
    histogram: dict[int, int] = field(default_factory=dict)

    @property
    def total(self) -> int:
        return int(self.per_target_bc.sum())

    @property
    def weighted_total(self) -> int:
        return int(self.per_target_weighted.sum())

    def mean_block(self, t: int) -> float:
        bc = int(self.per_target_bc[t])
        return float(self.block_rows[t]) / bc if bc else 0.0


def block_stats(blocks: BlockList, part: SupernodePartition) -> BlockStats:
    nsup = part.count
    widths = part.widths
    bc = np.zeros(nsup, dtype=np.int64)
    weighted = np.zeros(nsup, dtype=np.int64)
    nrows = np.zeros(nsup, dtype=np.int64)
    max_block = np.zeros(nsup, dtype=np.int64)
    sources: list[set[int]] = [set() for _ in range(nsup)]
    histogram: dict[int, int] = {}
    for blist in blocks.per_source:
        for b in blist:
            bc[b.target] += 1
            weighted[b.target] += widths[b.source]
            nrows[b.target] += b.size
            max_block[b.target] = max(max_block[b.target], b.size)
            sources[b.target].add(b.source)
            bucket = b.size.bit_length() - 1  # power-of-two size buckets
            histogram[bucket] = histogram.get(bucket, 0) + 1
    updaters = np.asarray([len(s) for s in sources], dtype=np.int64)
    return BlockStats(
        part, blocks.pair_counts(), bc, weighted, updaters, max_block, nrows, histogram
    )


def objective(stats: BlockStats, weighted: bool = False) -> tuple[np.ndarray, int]:
    """Per-target objective values and their total."""
    values = stats.per_target_weighted if weighted else stats.per_target_bc
    return values, int(values.sum())


def brute_force_min_blocks(width: int, intersections, weights=None) -> int:
    """Exhaustive minimum of the (weighted) block-count objective.

    intersections: per updater, the local column indices it touches within
    the supernode. Refuses widths above 8 (factorial search).
    """
    if width > BRUTE_FORCE_LIMIT:
        raise ValueError(f"supernode too wide for exhaustive search ({width} > 8)")
    if width < 1:
        raise ValueError("empty supernode")
    if weights is None:
        weights = [1] * len(intersections)
    indicators = []
    for rows in intersections:
        ind = np.zeros(width, dtype=bool)
        ind[np.asarray(rows, dtype=np.int64)] = True
        indicators.append(ind)
    perms = np.asarray(list(itertools.permutations(range(width))), dtype=np.int64)
    total = np.zeros(len(perms), dtype=np.int64)
    for ind, w in zip(indicators, weights):
        occ = ind[perms]
        runs = occ[:, 0].astype(np.int64)
        for i in range(1, width):
            runs += occ[:, i] & ~occ[:, i - 1]
        total += w * runs
    return int(total.min())
