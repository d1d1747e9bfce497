"""End-to-end orchestration: order, analyze, merge, reorder, factor.

The analysis pipeline always relabels columns by elimination-tree postorder
before supernode detection; postordering is what makes every supernode (and
every merged supernode) a contiguous column range.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .amalgamate import MergeRecord, amalgamate, relaxed_storage, relaxed_work
from .blockmetrics import BlockList, BlockStats, block_list, block_stats
from .matrixio import (
    Permutation,
    SymmetricSparseMatrix,
    apply_symmetric_permutation,
)
from .prreorder import pr_reorder
from .rlb import FactorStorage, KernelTrace, assemble, rlb_factor
from .symbolic import (
    EliminationStructure,
    SupernodalETree,
    SupernodePartition,
    elimination_tree,
    factor_structure,
    fundamental_supernodes,
    higher_adjacency,
    minimum_degree,
    postorder,
    supernodal_etree,
)
from .tspreorder import tsp_reorder
from .workspace import AllocationMeter

__all__ = [
    "ReorderMethod",
    "METHOD_LABELS",
    "parse_method",
    "Analysis",
    "analyze",
    "reorder",
    "reordered_hadj",
    "stats_for",
    "factorize",
    "full_ordering",
]

log = logging.getLogger("snreorder")


@dataclass(frozen=True)
class ReorderMethod:
    kind: str                  # none | pr | tsp
    strategy: str = "work"     # pr: natural | ndesc | work
    rule: str = "farthest"     # tsp: arbitrary | nearest | farthest
    weighted: bool = False     # tsp objective weighting by updater width

    @property
    def label(self) -> str:
        if self.kind == "none":
            return "none"
        if self.kind == "pr":
            return f"PR-{self.strategy}"
        stem = {"arbitrary": "ARB", "nearest": "NEA", "farthest": "FAR"}[self.rule]
        return stem + ("wts" if self.weighted else "none")


METHOD_LABELS = {
    "none": ReorderMethod("none"),
    "PR-natural": ReorderMethod("pr", strategy="natural"),
    "PR-ndesc": ReorderMethod("pr", strategy="ndesc"),
    "PR-work": ReorderMethod("pr", strategy="work"),
    "ARBnone": ReorderMethod("tsp", rule="arbitrary", weighted=False),
    "ARBwts": ReorderMethod("tsp", rule="arbitrary", weighted=True),
    "NEAnone": ReorderMethod("tsp", rule="nearest", weighted=False),
    "NEAwts": ReorderMethod("tsp", rule="nearest", weighted=True),
    "FARnone": ReorderMethod("tsp", rule="farthest", weighted=False),
    "FARwts": ReorderMethod("tsp", rule="farthest", weighted=True),
}
_LOWER_LABELS = {k.lower(): v for k, v in METHOD_LABELS.items()}


def parse_method(label: str) -> ReorderMethod:
    try:
        return _LOWER_LABELS[label.strip().lower()]
    except KeyError:
        known = ", ".join(METHOD_LABELS)
        raise ValueError(f"unknown method '{label}' (known: {known})") from None


@dataclass
class Analysis:
    """Symbolic state of one matrix after ordering, postordering, and merging."""

    matrix: SymmetricSparseMatrix      # in analyzed (pre_perm-applied) labels
    pre_perm: Permutation              # original labels -> analyzed labels
    es: EliminationStructure
    fundamental: SupernodePartition
    partition: SupernodePartition      # after merging (== fundamental at cap 0)
    tree: SupernodalETree
    hadj: list[np.ndarray]
    merges: list[MergeRecord]

    @property
    def base_nnz(self) -> int:
        return self.es.nnz

    @property
    def storage_nnz(self) -> int:
        return relaxed_storage(self.partition, self.hadj)

    @property
    def storage_work(self) -> int:
        return relaxed_work(self.partition, self.hadj)


def analyze(
    matrix: SymmetricSparseMatrix,
    perm: Permutation | None = None,
    use_mdo: bool = False,
    cap: float = 0.125,
) -> Analysis:
    """Fill-reducing permutation, postorder relabeling, symbolic
    factorization, fundamental supernodes, and heap-driven merging."""
    if perm is None:
        perm = minimum_degree(matrix) if use_mdo else Permutation.identity(matrix.n)
    ordered = apply_symmetric_permutation(matrix, perm)
    post = postorder(elimination_tree(ordered))
    relabel = Permutation.from_forward(np.argsort(post))
    relabeled = apply_symmetric_permutation(ordered, relabel)
    es = factor_structure(relabeled, elimination_tree(relabeled))
    fundamental = fundamental_supernodes(es)
    tree = supernodal_etree(fundamental, es)
    partition, merges = amalgamate(fundamental, tree, es, cap)
    if merges:
        tree = supernodal_etree(partition, es)
    hadj = higher_adjacency(partition, es)
    log.info(
        "analyze: n=%d nnz(A)=%d nnz(L)=%d supernodes %d -> %d (%d merges)",
        matrix.n, matrix.nnz_lower, es.nnz, fundamental.count, partition.count, len(merges),
    )
    return Analysis(
        relabeled, perm.compose(relabel), es, fundamental, partition, tree, hadj, merges
    )


def reorder(
    analysis: Analysis,
    method: ReorderMethod,
    seed: int = 0,
    meter: AllocationMeter | None = None,
) -> Permutation:
    """Within-supernode permutation for the chosen method (identity for none)."""
    if method.kind == "none":
        return Permutation.identity(analysis.partition.n)
    if method.kind == "pr":
        return pr_reorder(
            analysis.partition, analysis.tree, analysis.hadj, method.strategy, meter
        )
    if method.kind == "tsp":
        return tsp_reorder(
            analysis.partition,
            analysis.tree,
            analysis.hadj,
            method.rule,
            method.weighted,
            seed,
            meter,
        )
    raise ValueError(f"unknown method kind '{method.kind}'")


def reordered_hadj(analysis: Analysis, within: Permutation) -> list[np.ndarray]:
    """Higher adjacency sets relabeled by the within-supernode permutation."""
    return [np.sort(within.forward[h]) for h in analysis.hadj]


def stats_for(analysis: Analysis, within: Permutation | None = None) -> BlockStats:
    blocks = block_list(analysis.partition, analysis.hadj, within)
    return block_stats(blocks, analysis.partition)


def factorize(
    analysis: Analysis,
    within: Permutation | None = None,
    meter: AllocationMeter | None = None,
) -> tuple[FactorStorage, KernelTrace, BlockList]:
    """Assemble and factor the (reordered) matrix with the blocked kernels."""
    if within is None:
        within = Permutation.identity(analysis.partition.n)
    matrix = apply_symmetric_permutation(analysis.matrix, within)
    hadj = reordered_hadj(analysis, within)
    blocks = block_list(analysis.partition, hadj)
    storage = assemble(matrix, analysis.partition, hadj, meter)
    trace = rlb_factor(storage, blocks)
    return storage, trace, blocks


def full_ordering(analysis: Analysis, within: Permutation) -> Permutation:
    """Composed permutation from original labels to the final column order."""
    return analysis.pre_perm.compose(within)
