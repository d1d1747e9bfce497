"""Deterministic random test matrices.

Two families: small unstructured patterns for correctness work, and larger
"bordered band" instances whose trailing columns form a wide supernode, the
regime where the time/storage comparison between reordering methods is
meaningful.
"""

from __future__ import annotations

import numpy as np

from .matrixio import SymmetricSparseMatrix, from_entries

__all__ = ["random_pattern", "random_spd_values", "bordered_band_pattern"]


def random_pattern(rng: np.random.Generator, n: int, avg_degree: float = 3.0) -> SymmetricSparseMatrix:
    """Random symmetric pattern with roughly avg_degree off-diagonals per column."""
    m = int(n * avg_degree / 2)
    i = rng.integers(0, n, size=m)
    j = rng.integers(0, n, size=m)
    keep = i != j
    entries = list(zip(i[keep].tolist(), j[keep].tolist()))
    return from_entries(n, entries)


def random_spd_values(
    rng: np.random.Generator, pattern: SymmetricSparseMatrix
) -> SymmetricSparseMatrix:
    """Random values on a fixed pattern, made SPD by diagonal dominance."""
    values = -rng.uniform(0.1, 1.0, size=pattern.nnz_lower)
    rowsum = np.zeros(pattern.n)
    for j in range(pattern.n):
        col = pattern.column(j)[1:]
        vals = values[pattern.col_ptr[j] + 1:pattern.col_ptr[j + 1]]
        rowsum[j] += np.abs(vals).sum()
        np.add.at(rowsum, col, np.abs(vals))
    for j in range(pattern.n):
        values[pattern.col_ptr[j]] = rowsum[j] + 1.0
    return SymmetricSparseMatrix(pattern.n, pattern.col_ptr, pattern.rows, values)


def bordered_band_pattern(
    rng: np.random.Generator,
    n: int,
    border: int,
    band: int = 2,
    coupling: float = 0.5,
) -> SymmetricSparseMatrix:
    """Band of width `band` followed by a dense trailing block of `border`
    columns; band columns attach to random border columns with probability
    `coupling`. The trailing block becomes one wide supernode."""
    if border >= n:
        raise ValueError("border must be smaller than n")
    head = n - border
    entries: list[tuple[int, int]] = []
    for j in range(head - 1):
        for d in range(1, band + 1):
            if j + d < head:
                entries.append((j + d, j))
    entries.append((head, head - 1))  # tie the band to the border block
    bi, bj = np.triu_indices(border, k=1)
    entries.extend(zip((bi + head).tolist(), (bj + head).tolist()))
    hooks = rng.random(head) < coupling
    targets = rng.integers(head, n, size=head)
    for j in np.flatnonzero(hooks):
        entries.append((int(targets[j]), int(j)))
    return from_entries(n, entries)
