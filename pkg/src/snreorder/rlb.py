"""Desk-scale right-looking blocked Cholesky over supernodal panels.

Each supernode owns one dense column-major panel: its dense lower-triangular
diagonal block stacked above the rows of its higher adjacency. After a
supernode is completed (dense factorization of the diagonal block plus a
triangular solve for the rows below), its updates are pushed immediately
into ancestor panels, one dense block at a time, in place: no floating-point
working storage and no assembly buffers, only scalar temporaries and integer
index maps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .blockmetrics import Block, BlockList
from .matrixio import SymmetricSparseMatrix, synthesize_spd_values
from .symbolic import SupernodePartition
from .workspace import AllocationMeter

__all__ = [
    "SpdError",
    "StructureError",
    "SupernodePanel",
    "FactorStorage",
    "KernelCall",
    "KernelTrace",
    "assemble",
    "rlb_factor",
    "solve",
    "dense_cholesky_oracle",
    "reconstruct_dense",
]

DENSE_ORACLE_LIMIT = 512


class SpdError(ValueError):
    """Non-positive pivot encountered; carries the offending column."""

    def __init__(self, column: int):
        super().__init__(f"matrix is not positive definite at column {column}")
        self.column = column


class StructureError(ValueError):
    """An entry or block fell outside the symbolic structure."""


@dataclass
class SupernodePanel:
    first: int
    width: int
    rows: np.ndarray     # global row indices: own columns, then higher adjacency
    panel: np.ndarray    # (len(rows), width) column-major

    def row_span(self, first: int, last: int) -> tuple[int, int]:
        """Positions of the full integer range [first, last] in `rows`."""
        a = int(np.searchsorted(self.rows, first))
        b = a + (last - first + 1)
        if b > len(self.rows) or self.rows[a] != first or self.rows[b - 1] != last:
            raise StructureError(
                f"rows {first}..{last} are not contiguous in supernode at column {self.first}"
            )
        return a, b


@dataclass
class FactorStorage:
    part: SupernodePartition
    panels: list[SupernodePanel]
    factorized: bool = False

    @property
    def n(self) -> int:
        return self.part.n

    def entries(self) -> int:
        return sum(p.panel.size for p in self.panels)


@dataclass(frozen=True)
class KernelCall:
    kind: str       # potrf | trsm | syrk | gemm
    source: int
    target: int
    m: int
    n: int
    k: int


@dataclass
class KernelTrace:
    calls: list[KernelCall] = field(default_factory=list)

    def add(self, kind, source, target, m, n, k) -> None:
        self.calls.append(KernelCall(kind, source, target, m, n, k))

    def count(self, kind: str) -> int:
        return sum(1 for c in self.calls if c.kind == kind)

    def syrk_pair_counts(self) -> dict[tuple[int, int], int]:
        """(target, source) -> number of symmetric block updates."""
        out: dict[tuple[int, int], int] = {}
        for c in self.calls:
            if c.kind == "syrk":
                key = (c.target, c.source)
                out[key] = out.get(key, 0) + 1
        return out

    def gemm_count(self, source: int | None = None) -> int:
        return sum(
            1
            for c in self.calls
            if c.kind == "gemm" and (source is None or c.source == source)
        )


def assemble(
    matrix: SymmetricSparseMatrix,
    part: SupernodePartition,
    hadj: list[np.ndarray],
    meter: AllocationMeter | None = None,
) -> FactorStorage:
    """Panels initialized with the entries of A; fill positions hold zero.

    Values are synthesized (diagonally dominant) when the matrix carries
    none. Any entry of A outside the symbolic structure means the pipeline
    handed over inconsistent inputs and raises StructureError.
    """
    matrix = synthesize_spd_values(matrix)
    panels: list[SupernodePanel] = []
    for t in range(part.count):
        lo, hi = int(part.first[t]), int(part.first[t + 1])
        width = hi - lo
        rows = np.concatenate(
            (np.arange(lo, hi, dtype=np.int64), hadj[t].astype(np.int64))
        )
        panel = np.zeros((len(rows), width), dtype=np.float64, order="F")
        if meter is not None:
            meter.track(panel, floating=True)
        panels.append(SupernodePanel(lo, width, rows, panel))
    for j in range(matrix.n):
        t = int(part.snode_of[j])
        pan = panels[t]
        c = j - pan.first
        col = matrix.column(j)
        vals = matrix.column_values(j)
        pos = np.searchsorted(pan.rows, col)
        if np.any(pos >= len(pan.rows)) or np.any(pan.rows[pos] != col):
            bad = int(col[np.flatnonzero(pan.rows[np.minimum(pos, len(pan.rows) - 1)] != col)[0]])
            raise StructureError(f"entry ({bad},{j}) lies outside the symbolic structure")
        pan.panel[pos, c] = vals
    return FactorStorage(part, panels)


def _cdiv(pan: SupernodePanel, trace: KernelTrace, t: int) -> None:
    w = pan.width
    diag = pan.panel[:w, :]
    for k in range(w):
        d = diag[k, k]
        if not d > 0:
            raise SpdError(pan.first + k)
        d = math.sqrt(d)
        diag[k, k] = d
        diag[k + 1:, k] /= d
        if k + 1 < w:
            v = diag[k + 1:, k]
            diag[k + 1:, k + 1:] -= np.outer(v, v)
    for k in range(w):  # discard the outer-product spill above the diagonal
        diag[k, k + 1:] = 0.0
    trace.add("potrf", t, t, w, w, 0)
    below = pan.panel[w:, :]
    if below.shape[0]:
        for k in range(w):
            if k:
                below[:, k] -= below[:, :k] @ diag[k, :k]
            below[:, k] /= diag[k, k]
        trace.add("trsm", t, t, below.shape[0], w, 0)


def _update_runs(block: Block, maximal: list[Block]) -> list[tuple[int, int]]:
    """Contiguous row ranges strictly below `block` needing a rectangular
    update: the tail of its own maximal run, then every later maximal run."""
    runs: list[tuple[int, int]] = []
    for mb in maximal:
        if mb.first <= block.first <= mb.last:
            if block.last < mb.last:
                runs.append((block.last + 1, mb.last))
        elif mb.first > block.last:
            runs.append((mb.first, mb.last))
    return runs


def rlb_factor(fs: FactorStorage, blocks: BlockList) -> KernelTrace:
    """Factor in place, pushing each completed supernode into its ancestors.

    Per source block: one symmetric update of the target's diagonal region,
    then one rectangular update per contiguous run of structure rows below
    the block. Processing order is fixed (sources ascending, blocks by row),
    so results are bitwise reproducible.
    """
    if fs.factorized:
        raise ValueError("storage is already factorized")
    part = fs.part
    trace = KernelTrace()
    for t in range(part.count):
        pan = fs.panels[t]
        _cdiv(pan, trace, t)
        maximal = blocks.maximal_per_source[t]
        for b in blocks.per_source[t]:
            tgt = fs.panels[b.target]
            sa, sb = pan.row_span(b.first, b.last)
            x = pan.panel[sa:sb, :]
            r0 = b.first - tgt.first
            r1 = r0 + b.size
            tgt.panel[r0:r1, r0:r1] -= x @ x.T
            trace.add("syrk", t, b.target, b.size, b.size, pan.width)
            for rf, rl in _update_runs(b, maximal):
                ra, rb = pan.row_span(rf, rl)
                ta, tb = tgt.row_span(rf, rl)
                tgt.panel[ta:tb, r0:r1] -= pan.panel[ra:rb, :] @ x.T
                trace.add("gemm", t, b.target, rl - rf + 1, b.size, pan.width)
    fs.factorized = True
    return trace


def solve(fs: FactorStorage, b: np.ndarray) -> np.ndarray:
    """Forward and backward substitution with the factored panels."""
    if not fs.factorized:
        raise ValueError("storage is not factorized")
    x = np.asarray(b, dtype=np.float64).copy()
    if x.shape != (fs.n,):
        raise ValueError("right-hand side has the wrong shape")
    for t in range(fs.part.count):
        pan = fs.panels[t]
        w = pan.width
        seg = x[pan.first:pan.first + w]
        diag = pan.panel[:w, :]
        for k in range(w):
            seg[k] /= diag[k, k]
            if k + 1 < w:
                seg[k + 1:] -= diag[k + 1:, k] * seg[k]
        if len(pan.rows) > w:
            x[pan.rows[w:]] -= pan.panel[w:, :] @ seg
    for t in range(fs.part.count - 1, -1, -1):
        pan = fs.panels[t]
        w = pan.width
        seg = x[pan.first:pan.first + w]
        diag = pan.panel[:w, :]
        if len(pan.rows) > w:
            seg -= pan.panel[w:, :].T @ x[pan.rows[w:]]
        for k in range(w - 1, -1, -1):
            if k + 1 < w:
                seg[k] -= diag[k + 1:, k] @ seg[k + 1:]
            seg[k] /= diag[k, k]
    return x


def dense_cholesky_oracle(a: np.ndarray) -> np.ndarray:
    """Textbook dense lower Cholesky, used as an independent reference."""
    a = np.asarray(a, dtype=np.float64)
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValueError("matrix is not square")
    if n > DENSE_ORACLE_LIMIT:
        raise ValueError(f"oracle refuses n > {DENSE_ORACLE_LIMIT}")
    lower = np.zeros_like(a)
    for k in range(n):
        d = a[k, k] - lower[k, :k] @ lower[k, :k]
        if not d > 0:
            raise SpdError(k)
        lower[k, k] = math.sqrt(d)
        lower[k + 1:, k] = (a[k + 1:, k] - lower[k + 1:, :k] @ lower[k, :k]) / lower[k, k]
    return lower


def reconstruct_dense(fs: FactorStorage) -> np.ndarray:
    """Scatter the panels into a dense lower-triangular factor."""
    out = np.zeros((fs.n, fs.n))
    for pan in fs.panels:
        cols = np.arange(pan.first, pan.first + pan.width)
        out[np.ix_(pan.rows, cols)] = pan.panel
    return np.tril(out)
