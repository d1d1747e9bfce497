"""Shared golden data and independent oracles for the test suite.

demo9 is the 9x9 worked example used throughout: three supernodes {0,1},
{2,3}, {4..8}, where reordering the last supernode's columns merges its
scattered update blocks.
"""

from __future__ import annotations

import numpy as np

from snreorder import SymmetricSparseMatrix, from_entries

# lower-triangle pattern of the demo matrix, diagonal included
DEMO9_A_COLUMNS = [
    [0, 1, 4, 5, 8],
    [1, 4, 8],
    [2, 3, 4, 6, 7],
    [3, 4, 7],
    [4, 5, 7],
    [5, 6, 8],
    [6, 7],
    [7, 8],
    [8],
]

# factor pattern: the above plus fill at (5,1) (6,3) (6,4) (7,5) (8,4) (8,6)
DEMO9_L_COLUMNS = [
    [0, 1, 4, 5, 8],
    [1, 4, 5, 8],
    [2, 3, 4, 6, 7],
    [3, 4, 6, 7],
    [4, 5, 6, 7, 8],
    [5, 6, 7, 8],
    [6, 7, 8],
    [7, 8],
    [8],
]

DEMO9_PARENTS = [1, 4, 3, 4, 5, 6, 7, 8, 9]

# the block-merging reorder of the last supernode: 4->6, 5->4, 6->7, 7->8, 8->5
DEMO9_WITHIN = np.array([0, 1, 2, 3, 6, 4, 7, 8, 5], dtype=np.int64)

# lower-triangle pattern after symmetrically permuting by DEMO9_WITHIN
DEMO9_REORDERED_A_COLUMNS = [
    [0, 1, 4, 5, 6],
    [1, 5, 6],
    [2, 3, 6, 7, 8],
    [3, 6, 8],
    [4, 5, 6, 7],
    [5, 8],
    [6, 8],
    [7, 8],
    [8],
]


def columns_to_matrix(columns) -> SymmetricSparseMatrix:
    entries = [(i, j) for j, col in enumerate(columns) for i in col]
    return from_entries(len(columns), entries)


def demo9() -> SymmetricSparseMatrix:
    return columns_to_matrix(DEMO9_A_COLUMNS)


def fill_oracle(matrix: SymmetricSparseMatrix) -> list[np.ndarray]:
    """Factor column structures by dense boolean elimination."""
    n = matrix.n
    dense = np.zeros((n, n), dtype=bool)
    for j in range(n):
        col = matrix.column(j)
        dense[col, j] = True
        dense[j, col] = True
    cols = []
    for j in range(n):
        rows = np.flatnonzero(dense[:, j])
        rows = rows[rows >= j]
        cols.append(rows)
        below = rows[rows > j]
        dense[np.ix_(below, below)] = True
    return cols


def etree_oracle(matrix: SymmetricSparseMatrix) -> np.ndarray:
    cols = fill_oracle(matrix)
    n = matrix.n
    parent = np.full(n, n, dtype=np.int64)
    for j, rows in enumerate(cols):
        below = rows[rows > j]
        if below.size:
            parent[j] = below[0]
    return parent


def dense_of(matrix: SymmetricSparseMatrix) -> np.ndarray:
    """Dense symmetric matrix from the stored lower triangle."""
    out = np.zeros((matrix.n, matrix.n))
    for j in range(matrix.n):
        rows = matrix.column(j)
        vals = matrix.column_values(j)
        out[rows, j] = vals
        out[j, rows] = vals
    return out


def count_runs(positions: np.ndarray) -> int:
    """Number of maximal runs of consecutive integers in a sorted array."""
    positions = np.sort(np.asarray(positions))
    if positions.size == 0:
        return 0
    return 1 + int(np.count_nonzero(np.diff(positions) > 1))


def block_objective_oracle(order, intersections, weights=None) -> int:
    """Weighted run count of each updater's rows under a column order.

    order[k] = column placed at position k (local indices).
    """
    order = np.asarray(order)
    position = np.empty_like(order)
    position[order] = np.arange(len(order))
    if weights is None:
        weights = [1] * len(intersections)
    total = 0
    for rows, w in zip(intersections, weights):
        total += w * count_runs(position[np.asarray(rows)])
    return total
