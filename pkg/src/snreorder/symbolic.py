"""Symbolic analysis: elimination tree, factor structure, supernodes.

Roots of the column tree carry the sentinel value n; roots of the supernodal
tree carry the sentinel N. Forests are supported throughout, no virtual root
is ever added.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field

import numpy as np

from .matrixio import Permutation, SymmetricSparseMatrix

__all__ = [
    "EliminationStructure",
    "SupernodePartition",
    "SupernodalETree",
    "elimination_tree",
    "postorder",
    "factor_structure",
    "fundamental_supernodes",
    "supernodal_etree",
    "higher_adjacency",
    "minimum_degree",
]


@dataclass
class EliminationStructure:
    """Per-column factor row structures plus the tree that produced them."""

    parent: np.ndarray                 # size n, parent(j) > j, root sentinel n
    post: np.ndarray                   # post[k] = k-th column in postorder
    col_counts: np.ndarray             # |factor_columns(j)|, diagonal included
    factor_columns: list[np.ndarray]   # sorted row pattern of L column j

    @property
    def n(self) -> int:
        return len(self.parent)

    @property
    def nnz(self) -> int:
        return int(self.col_counts.sum())

    @property
    def flops(self) -> int:
        """Column flop model: sum over columns of col_count squared."""
        counts = self.col_counts.astype(np.int64)
        return int(np.dot(counts, counts))


@dataclass
class SupernodePartition:
    """Contiguous column ranges J_0..J_{N-1} covering [0, n)."""

    first: np.ndarray      # size N+1, first[N] == n
    snode_of: np.ndarray   # column -> supernode index

    @property
    def count(self) -> int:
        return len(self.first) - 1

    @property
    def n(self) -> int:
        return int(self.first[-1])

    def width(self, t: int) -> int:
        return int(self.first[t + 1] - self.first[t])

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.first)

    def columns(self, t: int) -> np.ndarray:
        return np.arange(self.first[t], self.first[t + 1], dtype=np.int64)

    @staticmethod
    def from_first(first, n: int) -> "SupernodePartition":
        first = np.asarray(list(first) + [n], dtype=np.int64)
        snode_of = np.zeros(n, dtype=np.int64)
        for t in range(len(first) - 1):
            snode_of[first[t]:first[t + 1]] = t
        return SupernodePartition(first, snode_of)


@dataclass
class SupernodalETree:
    """Parent function over supernodes with subtree summaries."""

    parent: np.ndarray          # size N, root sentinel N
    n_descendants: np.ndarray   # proper descendants per supernode
    subtree_work: np.ndarray    # column flop model summed over the subtree
    children: list[list[int]] = field(default_factory=list)

    @property
    def count(self) -> int:
        return len(self.parent)


def _upper_adjacency(matrix: SymmetricSparseMatrix) -> list[list[int]]:
    """For each column k, the strictly smaller neighbors (rows of the upper part)."""
    upper: list[list[int]] = [[] for _ in range(matrix.n)]
    for j in range(matrix.n):
        for i in matrix.column(j)[1:]:
            upper[i].append(j)
    return upper


def elimination_tree(matrix: SymmetricSparseMatrix) -> np.ndarray:
    """Parent array of the elimination tree, by ancestor path compression."""
    n = matrix.n
    parent = np.full(n, n, dtype=np.int64)
    ancestor = np.full(n, -1, dtype=np.int64)
    upper = _upper_adjacency(matrix)
    for k in range(n):
        for i in upper[k]:
            while i != -1 and i < k:
                nxt = ancestor[i]
                ancestor[i] = k
                if nxt == -1:
                    parent[i] = k
                i = nxt
    return parent


def _children_lists(parent: np.ndarray, root: int) -> list[list[int]]:
    children: list[list[int]] = [[] for _ in range(len(parent))]
    for j, p in enumerate(parent):
        if p != root:
            children[p].append(j)
    return children


def postorder(parent: np.ndarray) -> np.ndarray:
    """Postorder of the tree/forest: children before parents, roots ascending."""
    n = len(parent)
    children = _children_lists(parent, n)
    post = np.empty(n, dtype=np.int64)
    k = 0
    for root in range(n):
        if parent[root] != n:
            continue
        # iterative DFS, children visited in ascending order
        stack = [(root, 0)]
        while stack:
            node, ci = stack[-1]
            if ci < len(children[node]):
                stack[-1] = (node, ci + 1)
                stack.append((children[node][ci], 0))
            else:
                stack.pop()
                post[k] = node
                k += 1
    if k != n:
        raise ValueError("parent array is not a forest")
    return post


def factor_structure(
    matrix: SymmetricSparseMatrix, parent: np.ndarray
) -> EliminationStructure:
    """Row pattern of every factor column: own entries plus children's fill."""
    n = matrix.n
    children = _children_lists(parent, n)
    cols: list[np.ndarray] = [None] * n  # type: ignore[list-item]
    for j in range(n):
        pieces = [matrix.column(j)]
        # child structure minus the child itself lands in the parent
        pieces.extend(cols[c][1:] for c in children[j])
        cols[j] = np.unique(np.concatenate(pieces))
    counts = np.fromiter((len(c) for c in cols), dtype=np.int64, count=n)
    return EliminationStructure(parent.copy(), postorder(parent), counts, cols)


def fundamental_supernodes(es: EliminationStructure) -> SupernodePartition:
    """Maximal chains of consecutive columns with nested identical structure.

    Column j+1 extends the current supernode only when it is j's parent, has
    no other child, and its count drops by exactly one. Assumes columns are
    already in postorder (the pipeline relabels before calling this).
    """
    n = es.n
    n_children = np.zeros(n + 1, dtype=np.int64)
    for p in es.parent:
        n_children[p] += 1
    first = [0]
    for j in range(n - 1):
        chained = (
            es.parent[j] == j + 1
            and n_children[j + 1] == 1
            and es.col_counts[j] == es.col_counts[j + 1] + 1
        )
        if not chained:
            first.append(j + 1)
    return SupernodePartition.from_first(first, n)


def supernodal_etree(
    part: SupernodePartition, es: EliminationStructure
) -> SupernodalETree:
    """Supernode parents with descendant counts and subtree work."""
    nsup = part.count
    parent = np.full(nsup, nsup, dtype=np.int64)
    for t in range(nsup):
        last = part.first[t + 1] - 1
        p = es.parent[last]
        parent[t] = part.snode_of[p] if p < es.n else nsup
    ndesc = np.zeros(nsup, dtype=np.int64)
    work = np.zeros(nsup, dtype=np.int64)
    counts = es.col_counts.astype(np.int64)
    for t in range(nsup):
        cj = counts[part.first[t]:part.first[t + 1]]
        work[t] = int(np.dot(cj, cj))
    for t in range(nsup):  # ascending order sums child into parent once
        if parent[t] != nsup:
            ndesc[parent[t]] += ndesc[t] + 1
            work[parent[t]] += work[t]
    children = _children_lists(parent, nsup)
    return SupernodalETree(parent, ndesc, work, children)


def higher_adjacency(
    part: SupernodePartition, es: EliminationStructure
) -> list[np.ndarray]:
    """Rows below each supernode that carry factor entries in its columns.

    Computed as the union of the member columns' structures minus the
    supernode itself, which also covers coarsened (merged) partitions where
    the first column alone does not see every row.
    """
    hadj: list[np.ndarray] = []
    for t in range(part.count):
        lo, hi = int(part.first[t]), int(part.first[t + 1])
        merged = np.unique(
            np.concatenate([es.factor_columns[j] for j in range(lo, hi)])
        )
        hadj.append(merged[merged >= hi])
    return hadj


def minimum_degree(matrix: SymmetricSparseMatrix) -> Permutation:
    """Plain minimum-degree ordering on the adjacency graph.

    Eliminates a minimum-degree vertex at each step and turns its
    neighborhood into a clique; ties break to the smaller original degree,
    then the smaller index. Quality is not contractual; determinism is.
    """
    n = matrix.n
    adj: list[set[int]] = [set() for _ in range(n)]
    for j in range(n):
        for i in matrix.column(j)[1:]:
            adj[i].add(j)
            adj[j].add(int(i))
    original = [len(adj[v]) for v in range(n)]
    heap = [(len(adj[v]), original[v], v) for v in range(n)]
    heapq.heapify(heap)
    eliminated = np.zeros(n, dtype=bool)
    forward = np.empty(n, dtype=np.int64)
    step = 0
    while heap:
        deg, _, v = heapq.heappop(heap)
        if eliminated[v] or deg != len(adj[v]):
            continue  # stale entry
        eliminated[v] = True
        forward[v] = step
        step += 1
        neighbors = adj[v]
        for u in neighbors:
            adj[u].discard(v)
        neighbors = sorted(neighbors)
        for a_idx, u in enumerate(neighbors):
            for w in neighbors[a_idx + 1:]:
                if w not in adj[u]:
                    adj[u].add(w)
                    adj[w].add(u)
            heapq.heappush(heap, (len(adj[u]), original[u], u))
        adj[v] = set()
    return Permutation.from_forward(forward)
