import numpy as np
import pytest
import util

from snreorder import (
    Permutation,
    SupernodePartition,
    block_list,
    block_stats,
    brute_force_min_blocks,
    exact_solve,
    objective,
)
from snreorder.blockmetrics import _runs
from snreorder.tspreorder import TspInstance


def demo_partition():
    return SupernodePartition.from_first([0, 2, 4], 9)


def demo_hadj():
    return [np.array([4, 5, 8]), np.array([4, 6, 7]), np.array([], dtype=np.int64)]


def test_blocks_demo9_identity_order():
    blocks = block_list(demo_partition(), demo_hadj())
    first = [(b.first, b.last) for b in blocks.per_source[0]]
    assert first == [(4, 5), (8, 8)]
    second = [(b.first, b.last) for b in blocks.per_source[1]]
    assert second == [(4, 4), (6, 7)]
    assert blocks.pair_counts() == {(2, 0): 2, (2, 1): 2}


def test_blocks_demo9_after_reorder():
    order = Permutation.from_forward(util.DEMO9_WITHIN)
    blocks = block_list(demo_partition(), demo_hadj(), order)
    assert [(b.first, b.last) for b in blocks.per_source[0]] == [(4, 6)]
    assert [(b.first, b.last) for b in blocks.per_source[1]] == [(6, 8)]
    assert blocks.pair_counts() == {(2, 0): 1, (2, 1): 1}


def test_objective_values_demo9():
    part = demo_partition()
    identity = block_stats(block_list(part, demo_hadj()), part)
    per_target, total = objective(identity)
    assert total == 4
    assert per_target[2] == 4
    reordered = block_stats(
        block_list(part, demo_hadj(), Permutation.from_forward(util.DEMO9_WITHIN)), part
    )
    assert objective(reordered)[1] == 2
    assert objective(reordered, weighted=True)[1] == 4  # both updaters have width 2


def test_blocks_match_direct_scan_on_random_orders():
    rng = np.random.default_rng(51)
    for _ in range(30):
        nsup = int(rng.integers(2, 6))
        widths = rng.integers(1, 5, size=nsup)
        first = np.concatenate(([0], np.cumsum(widths)))
        part = SupernodePartition.from_first(first[:-1], int(first[-1]))
        n = part.n
        hadj = []
        for t in range(nsup):
            hi = part.first[t + 1]
            pool = np.arange(hi, n)
            take = rng.integers(0, len(pool) + 1)
            hadj.append(np.sort(rng.choice(pool, size=take, replace=False)))
        blocks = block_list(part, hadj)
        for t in range(nsup):
            runs = _runs(hadj[t])
            got = [(b.first, b.last) for b in blocks.maximal_per_source[t]]
            assert got == runs
            # per-target blocks cover the rows exactly, disjointly, in order
            rows = np.concatenate(
                [np.arange(b.first, b.last + 1) for b in blocks.per_source[t]]
            ) if blocks.per_source[t] else np.array([], dtype=np.int64)
            assert np.array_equal(rows, hadj[t])
            for b in blocks.per_source[t]:
                assert part.snode_of[b.first] == b.target == part.snode_of[b.last]


def test_maximal_blocks_merge_across_consecutive_targets():
    part = SupernodePartition.from_first([0, 2, 4], 6)
    hadj = [np.array([2, 3, 4]), np.array([], dtype=np.int64), np.array([], dtype=np.int64)]
    blocks = block_list(part, hadj)
    assert [(b.first, b.last) for b in blocks.maximal_per_source[0]] == [(2, 4)]
    assert [(b.first, b.last, b.target) for b in blocks.per_source[0]] == [
        (2, 3, 1),
        (4, 4, 2),
    ]


def test_block_list_rejects_boundary_crossing():
    part = demo_partition()
    bad = np.arange(9)
    bad[[0, 4]] = [4, 0]
    with pytest.raises(ValueError, match="boundary"):
        block_list(part, demo_hadj(), Permutation.from_forward(bad))


def test_stats_totals_and_histogram():
    part = demo_partition()
    stats = block_stats(block_list(part, demo_hadj()), part)
    assert int(stats.block_rows[2]) == 6  # every structure row in exactly one block
    assert stats.updater_count[2] == 2
    assert stats.max_block[2] == 2
    assert stats.mean_block(2) == pytest.approx(1.5)
    assert sum(stats.histogram.values()) == 4


def test_brute_force_minimum_demo9():
    intersections = [np.array([0, 1, 4]), np.array([0, 2, 3])]
    assert brute_force_min_blocks(5, intersections) == 2
    assert brute_force_min_blocks(5, intersections, weights=[2, 2]) == 4


def test_brute_force_single_updater_proper_subset():
    assert brute_force_min_blocks(4, [np.array([1, 3])]) == 1


def test_brute_force_refuses_wide_supernodes():
    with pytest.raises(ValueError):
        brute_force_min_blocks(9, [np.array([0])])


def test_brute_force_agrees_with_exhaustive_tour_search():
    rng = np.random.default_rng(52)
    for _ in range(40):
        m = int(rng.integers(1, 7))
        u = int(rng.integers(1, 5))
        dsets = [
            np.sort(rng.choice(u, size=rng.integers(0, u + 1), replace=False)).astype(
                np.int64
            )
            for _ in range(m)
        ]
        weights = rng.integers(1, 5, size=u).astype(np.int64)
        inst = TspInstance(0, np.arange(m), dsets, weights, np.arange(u))
        intersections = [
            [r for r in range(m) if s in dsets[r]] for s in range(u)
        ]
        intersections = [np.asarray(x, dtype=np.int64) for x in intersections if x]
        kept_weights = [int(weights[s]) for s in range(u) if len(
            [r for r in range(m) if s in dsets[r]]
        )]
        expected = brute_force_min_blocks(m, intersections, kept_weights)
        assert exact_solve(inst).length == 2 * expected


def test_objective_invariant_inside_blocks():
    # a swap inside one source's {6,7} block that touches no other source's
    # rows leaves every count unchanged
    part = demo_partition()
    order = np.arange(9)
    order[[6, 7]] = [7, 6]
    stats = block_stats(
        block_list(part, demo_hadj(), Permutation.from_forward(order)), part
    )
    assert objective(stats)[1] == 4
    assert stats.pair_bc == {(2, 0): 2, (2, 1): 2}
