"""Supernodal sparse Cholesky analysis and within-supernode column reordering.

The package builds the supernodal structure of a sparse symmetric factor,
reorders columns inside each supernode (partition refinement or TSP
insertion heuristics) to reduce the number of dense blocks joining
supernodes, scores orders by block metrics, and validates them with a
blocked in-place numeric factorization.
"""

from .amalgamate import MergeRecord, amalgamate, merge_cost, relaxed_storage
from .blockmetrics import (
    Block,
    BlockList,
    BlockStats,
    block_list,
    block_stats,
    brute_force_min_blocks,
    objective,
)
from .matrixio import (
    MatrixFormatError,
    Permutation,
    PermutationError,
    SymmetricSparseMatrix,
    apply_symmetric_permutation,
    emit_matrix_market,
    emit_permutation,
    from_entries,
    parse_matrix_market,
    parse_permutation,
    symmetric_matvec,
    synthesize_spd_values,
)
from .pipeline import (
    Analysis,
    METHOD_LABELS,
    ReorderMethod,
    analyze,
    factorize,
    full_ordering,
    parse_method,
    reorder,
    stats_for,
)
from .prreorder import OrderedPartition, pr_reorder, refine, updater_schedule
from .rlb import (
    FactorStorage,
    KernelTrace,
    SpdError,
    StructureError,
    assemble,
    dense_cholesky_oracle,
    reconstruct_dense,
    rlb_factor,
    solve,
)
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
from .tspreorder import (
    Tour,
    TspInstance,
    build_instance,
    exact_solve,
    insertion_solve,
    tour_length,
    tsp_reorder,
)
from .workspace import AllocationMeter

__version__ = "0.1.0"
