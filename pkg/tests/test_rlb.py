import numpy as np
import pytest
import util

from snreorder import (
    AllocationMeter,
    Permutation,
    SpdError,
    StructureError,
    SupernodePartition,
    analyze,
    apply_symmetric_permutation,
    assemble,
    block_list,
    dense_cholesky_oracle,
    factorize,
    from_entries,
    parse_method,
    reconstruct_dense,
    reorder,
    rlb_factor,
    solve,
    stats_for,
    synthesize_spd_values,
)
from snreorder.gen import random_pattern, random_spd_values

METHODS = ["none", "PR-work", "PR-ndesc", "FARwts", "ARBnone", "NEAnone"]


def test_oracle_scalar_cases():
    assert dense_cholesky_oracle(np.array([[4.0]]))[0, 0] == 2.0
    lower = dense_cholesky_oracle(np.array([[4.0, 2.0], [2.0, 5.0]]))
    assert np.allclose(lower, [[2.0, 0.0], [1.0, 2.0]])


def test_oracle_reconstructs_random_spd():
    rng = np.random.default_rng(61)
    for _ in range(10):
        n = int(rng.integers(1, 40))
        b = rng.standard_normal((n, n))
        a = b @ b.T + n * np.eye(n)
        lower = dense_cholesky_oracle(a)
        assert np.allclose(lower @ lower.T, a, rtol=1e-12, atol=1e-12 * n)


def test_oracle_rejects_indefinite_and_large():
    with pytest.raises(SpdError):
        dense_cholesky_oracle(np.array([[1.0, 2.0], [2.0, 1.0]]))
    with pytest.raises(ValueError):
        dense_cholesky_oracle(np.zeros((600, 600)))


def test_factor_one_by_one():
    m = from_entries(1, [(0, 0)], values=[4.0])
    a = analyze(m, cap=0.0)
    storage, trace, _ = factorize(a)
    assert storage.panels[0].panel[0, 0] == 2.0
    assert trace.count("potrf") == 1
    assert trace.count("syrk") == 0 and trace.count("gemm") == 0


def test_assemble_demo9_panel_shapes(demo9_analysis):
    a = demo9_analysis
    storage = assemble(a.matrix, a.partition, a.hadj)
    assert [p.panel.shape for p in storage.panels] == [(5, 2), (5, 2), (5, 5)]
    # trapezoid slots equal the factor nonzero count
    trapezoid = sum(
        p.width * (p.width + 1) // 2 + p.width * (len(p.rows) - p.width)
        for p in storage.panels
    )
    assert trapezoid == 33


def test_assemble_rejects_entry_outside_structure():
    m = synthesize_spd_values(from_entries(2, [(1, 0)]))
    part = SupernodePartition.from_first([0, 1], 2)
    with pytest.raises(StructureError):
        assemble(m, part, [np.array([], dtype=np.int64), np.array([], dtype=np.int64)])


def test_demo9_kernel_counts_identity_vs_reordered(demo9_analysis):
    a = demo9_analysis
    _, trace, _ = factorize(a)
    assert trace.syrk_pair_counts() == {(2, 0): 2, (2, 1): 2}
    assert trace.gemm_count(0) == 1 and trace.gemm_count(1) == 1
    within = Permutation.from_forward(util.DEMO9_WITHIN)
    _, trace2, _ = factorize(a, within)
    assert trace2.syrk_pair_counts() == {(2, 0): 1, (2, 1): 1}
    assert trace2.gemm_count() == 0


def test_syrk_counts_match_block_counts_randomly():
    rng = np.random.default_rng(62)
    for _ in range(10):
        m = random_pattern(rng, int(rng.integers(4, 50)))
        a = analyze(m, cap=0.125)
        for label in ("none", "PR-work", "FARwts"):
            within = reorder(a, parse_method(label), seed=3)
            _, trace, _ = factorize(a, within)
            stats = stats_for(a, within)
            assert trace.syrk_pair_counts() == stats.pair_bc


def test_gemm_covers_tail_of_spanning_maximal_block():
    # supernodes {0,1},{2},{3,4},{5,6}: the first supernode's rows {3,4,5}
    # form one maximal run across two targets, so the rectangular update for
    # row 5 is the tail of the run containing the {3,4} block
    entries = [(1, 0), (3, 0), (4, 0), (5, 0), (3, 2), (6, 5)]
    m = from_entries(7, entries)
    a = analyze(m, cap=0.0)
    assert list(a.partition.first) == [0, 2, 3, 5, 7]
    assert list(a.hadj[0]) == [3, 4, 5]
    storage, trace, blocks = factorize(a)
    spans = [(b.first, b.last) for b in blocks.maximal_per_source[0]]
    assert spans == [(3, 5)]
    gemms = [c for c in trace.calls if c.kind == "gemm" and c.source == 0]
    assert [(c.m, c.n) for c in gemms] == [(1, 2)]  # one-row tail, two columns
    dense = util.dense_of(synthesize_spd_values(a.matrix))
    assert np.allclose(
        reconstruct_dense(storage), dense_cholesky_oracle(dense), atol=1e-12
    )


@pytest.mark.parametrize("label", METHODS)
def test_factor_matches_dense_oracle(label):
    rng = np.random.default_rng(63)
    for _ in range(6):
        pattern = random_pattern(rng, int(rng.integers(5, 60)))
        matrix = random_spd_values(rng, pattern)
        a = analyze(matrix, cap=0.125)
        within = reorder(a, parse_method(label), seed=1)
        storage, _, _ = factorize(a, within)
        permuted = apply_symmetric_permutation(a.matrix, within)
        dense = util.dense_of(permuted)
        expected = dense_cholesky_oracle(dense)
        got = reconstruct_dense(storage)
        scale = np.abs(expected).max()
        assert np.abs(got - expected).max() <= 1e-10 * scale
        # the factor reproduces the permuted matrix
        assert np.allclose(got @ got.T, dense, rtol=1e-10, atol=1e-10 * scale)


def test_spd_failure_names_column():
    m = from_entries(2, [(0, 0), (1, 0), (1, 1)], values=[1.0, 2.0, 1.0])
    a = analyze(m, cap=0.0)
    with pytest.raises(SpdError) as err:
        factorize(a)
    assert err.value.column == 1


def test_solve_identity_and_scalar():
    ident = from_entries(3, [(j, j) for j in range(3)], values=[1.0, 1.0, 1.0])
    a = analyze(ident, cap=0.0)
    storage, _, _ = factorize(a)
    b = np.array([3.0, -1.0, 2.0])
    assert np.allclose(solve(storage, b), b)
    one = from_entries(1, [(0, 0)], values=[4.0])
    sa = analyze(one, cap=0.0)
    fs, _, _ = factorize(sa)
    assert np.allclose(solve(fs, np.array([8.0])), [2.0])


def test_solve_residual_random():
    rng = np.random.default_rng(64)
    for _ in range(8):
        pattern = random_pattern(rng, int(rng.integers(5, 80)))
        matrix = random_spd_values(rng, pattern)
        a = analyze(matrix, cap=0.125)
        storage, _, _ = factorize(a)
        b = rng.standard_normal(matrix.n)
        x = solve(storage, b)
        dense = util.dense_of(a.matrix)
        assert np.linalg.norm(dense @ x - b) <= 1e-8 * np.linalg.norm(b)


def test_solve_requires_factorized_storage(demo9_analysis):
    a = demo9_analysis
    storage = assemble(a.matrix, a.partition, a.hadj)
    with pytest.raises(ValueError):
        solve(storage, np.zeros(9))


def test_float_allocation_equals_panel_storage(demo9_analysis):
    a = demo9_analysis
    meter = AllocationMeter()
    storage = assemble(a.matrix, a.partition, a.hadj, meter)
    blocks = block_list(a.partition, a.hadj)
    rlb_factor(storage, blocks)
    assert meter.float_peak == storage.entries()
    assert meter.float_peak == sum(p.panel.size for p in storage.panels)


def test_factor_is_bitwise_deterministic(demo9_analysis):
    a = demo9_analysis
    s1, _, _ = factorize(a)
    s2, _, _ = factorize(a)
    for p1, p2 in zip(s1.panels, s2.panels):
        assert np.array_equal(p1.panel, p2.panel)


def test_refactorize_guard(demo9_analysis):
    a = demo9_analysis
    storage, _, _ = factorize(a)
    with pytest.raises(ValueError):
        rlb_factor(storage, block_list(a.partition, a.hadj))
