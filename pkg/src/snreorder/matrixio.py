"""Symmetric sparse patterns/matrices, Matrix Market I/O, and permutations.

Storage is compressed column-oriented over the lower triangle only: for each
column j the sorted row indices i >= j, with the diagonal always present.
All file formats are 1-based at the boundary; everything in memory is 0-based.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

__all__ = [
    "SymmetricSparseMatrix",
    "Permutation",
    "MatrixFormatError",
    "PermutationError",
    "from_entries",
    "parse_matrix_market",
    "emit_matrix_market",
    "parse_permutation",
    "emit_permutation",
    "apply_symmetric_permutation",
    "symmetric_matvec",
    "synthesize_spd_values",
]


class MatrixFormatError(ValueError):
    """Raised for malformed Matrix Market input; carries the offending line."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class PermutationError(ValueError):
    pass


@dataclass(frozen=True)
class SymmetricSparseMatrix:
    """Lower-triangle pattern of a symmetric matrix, optionally with values.

    col_ptr has length n+1; rows[col_ptr[j]:col_ptr[j+1]] are the strictly
    increasing row indices of column j, all in [j, n), diagonal included.
    values, when present, is aligned with rows.
    """

    n: int
    col_ptr: np.ndarray
    rows: np.ndarray
    values: np.ndarray | None = None

    def column(self, j: int) -> np.ndarray:
        return self.rows[self.col_ptr[j]:self.col_ptr[j + 1]]

    def column_values(self, j: int) -> np.ndarray:
        if self.values is None:
            raise ValueError("matrix has no values")
        return self.values[self.col_ptr[j]:self.col_ptr[j + 1]]

    @property
    def nnz_lower(self) -> int:
        return int(self.col_ptr[-1])

    @property
    def has_values(self) -> bool:
        return self.values is not None

    def columns(self) -> list[np.ndarray]:
        return [self.column(j) for j in range(self.n)]

    def validate(self) -> None:
        if self.n < 1:
            raise ValueError("empty matrix")
        if len(self.col_ptr) != self.n + 1 or self.col_ptr[0] != 0:
            raise ValueError("bad column pointer array")
        for j in range(self.n):
            col = self.column(j)
            if col.size == 0 or col[0] != j:
                raise ValueError(f"column {j}: diagonal entry missing")
            if np.any(np.diff(col) <= 0):
                raise ValueError(f"column {j}: rows not strictly increasing")
            if col[-1] >= self.n:
                raise ValueError(f"column {j}: row index out of range")

    def structurally_equal(self, other: "SymmetricSparseMatrix") -> bool:
        return (
            self.n == other.n
            and np.array_equal(self.col_ptr, other.col_ptr)
            and np.array_equal(self.rows, other.rows)
        )


@dataclass(frozen=True)
class Permutation:
    """Bijection on [0, n): forward maps old index to new, inverse maps back."""

    forward: np.ndarray
    inverse: np.ndarray

    @property
    def n(self) -> int:
        return len(self.forward)

    @staticmethod
    def identity(n: int) -> "Permutation":
        ident = np.arange(n, dtype=np.int64)
        return Permutation(ident, ident.copy())

    @staticmethod
    def from_forward(forward) -> "Permutation":
        forward = np.asarray(forward, dtype=np.int64)
        n = len(forward)
        inverse = np.full(n, -1, dtype=np.int64)
        in_range = (forward >= 0) & (forward < n)
        if not np.all(in_range):
            bad = int(forward[~in_range][0])
            raise PermutationError(f"index {bad} out of range for size {n}")
        inverse[forward] = np.arange(n, dtype=np.int64)
        if np.any(inverse < 0):
            raise PermutationError("not a bijection: repeated index")
        return Permutation(forward, inverse)

    def compose(self, then: "Permutation") -> "Permutation":
        """Permutation applying self first, `then` second."""
        if then.n != self.n:
            raise PermutationError("size mismatch in composition")
        return Permutation.from_forward(then.forward[self.forward])

    def inverted(self) -> "Permutation":
        return Permutation(self.inverse.copy(), self.forward.copy())


def from_entries(n: int, entries, values=None) -> SymmetricSparseMatrix:
    """Build a canonical lower-triangle matrix from (i, j) coordinate entries.

    Entries may lie in either triangle and may repeat (values are summed).
    Missing diagonal entries are added (value 0 when values are kept).
    """
    if n < 1:
        raise ValueError("matrix must have at least one column")
    ii = np.empty(len(entries) + n, dtype=np.int64)
    jj = np.empty_like(ii)
    vv = np.zeros_like(ii, dtype=np.float64)
    for k, (i, j) in enumerate(entries):
        if i < j:
            i, j = j, i
        ii[k], jj[k] = i, j
        if values is not None:
            vv[k] = values[k]
    m = len(entries)
    ii[m:] = np.arange(n)
    jj[m:] = np.arange(n)
    # stable canonical order: by column, then row; duplicates collapse
    order = np.lexsort((ii[: m + n], jj[: m + n]))
    ii, jj, vv = ii[order], jj[order], vv[order]
    keep = np.ones(len(ii), dtype=bool)
    keep[1:] = (ii[1:] != ii[:-1]) | (jj[1:] != jj[:-1])
    group = np.cumsum(keep) - 1
    ri = ii[keep]
    rj = jj[keep]
    col_ptr = np.zeros(n + 1, dtype=np.int64)
    np.add.at(col_ptr, rj + 1, 1)
    col_ptr = np.cumsum(col_ptr)
    vals = None
    if values is not None:
        vals = np.zeros(len(ri), dtype=np.float64)
        np.add.at(vals, group, vv)
    return SymmetricSparseMatrix(n, col_ptr, ri, vals)


def parse_matrix_market(source) -> SymmetricSparseMatrix:
    """Parse a symmetric Matrix Market coordinate file.

    Accepts real, integer, and pattern fields; the symmetry declaration must
    be `symmetric`. Upper-triangle entries are mirrored into the lower
    triangle, duplicates are summed, and explicit zeros stay structural.
    """
    if isinstance(source, bytes):
        source = source.decode("ascii", errors="replace")
    if isinstance(source, str):
        source = io.StringIO(source)
    lines = enumerate(source, start=1)
    try:
        lineno, header = next(lines)
    except StopIteration:
        raise MatrixFormatError("empty input") from None
    parts = header.strip().split()
    if len(parts) != 5 or parts[0] != "%%MatrixMarket":
        raise MatrixFormatError("missing %%MatrixMarket header", lineno)
    obj, fmt, field, symmetry = (p.lower() for p in parts[1:])
    if obj != "matrix" or fmt != "coordinate":
        raise MatrixFormatError(f"unsupported header '{obj} {fmt}'", lineno)
    if field not in ("real", "integer", "pattern"):
        raise MatrixFormatError(f"unsupported field '{field}'", lineno)
    if symmetry != "symmetric":
        raise MatrixFormatError(f"symmetry is '{symmetry}', not symmetric", lineno)
    has_values = field != "pattern"

    size_line = None
    for lineno, raw in lines:
        text = raw.strip()
        if not text or text.startswith("%"):
            continue
        size_line = (lineno, text)
        break
    if size_line is None:
        raise MatrixFormatError("missing size line")
    lineno, text = size_line
    dims = text.split()
    if len(dims) != 3:
        raise MatrixFormatError("size line must hold 'rows cols nnz'", lineno)
    try:
        nrows, ncols, nnz = (int(t) for t in dims)
    except ValueError:
        raise MatrixFormatError("non-integer size line", lineno) from None
    if nrows != ncols:
        raise MatrixFormatError(f"matrix is {nrows}x{ncols}, not square", lineno)
    if nrows < 1:
        raise MatrixFormatError("matrix is empty", lineno)

    entries = []
    values = [] if has_values else None
    count = 0
    for lineno, raw in lines:
        text = raw.strip()
        if not text or text.startswith("%"):
            continue
        parts = text.split()
        want = 3 if has_values else 2
        if len(parts) < want:
            raise MatrixFormatError("too few fields in entry", lineno)
        try:
            i = int(parts[0]) - 1
            j = int(parts[1]) - 1
        except ValueError:
            raise MatrixFormatError("non-integer coordinates", lineno) from None
        if not (0 <= i < nrows and 0 <= j < ncols):
            raise MatrixFormatError(f"entry ({i + 1},{j + 1}) out of range", lineno)
        entries.append((i, j))
        if has_values:
            try:
                values.append(float(parts[2]))
            except ValueError:
                raise MatrixFormatError("non-numeric value", lineno) from None
        count += 1
    if count != nnz:
        raise MatrixFormatError(f"declared {nnz} entries, found {count}")
    return from_entries(nrows, entries, values)


def emit_matrix_market(matrix: SymmetricSparseMatrix) -> str:
    field = "real" if matrix.has_values else "pattern"
    out = [f"%%MatrixMarket matrix coordinate {field} symmetric"]
    out.append(f"{matrix.n} {matrix.n} {matrix.nnz_lower}")
    for j in range(matrix.n):
        col = matrix.column(j)
        if matrix.has_values:
            for i, v in zip(col, matrix.column_values(j)):
                out.append(f"{i + 1} {j + 1} {v!r}")
        else:
            for i in col:
                out.append(f"{i + 1} {j + 1}")
    return "\n".join(out) + "\n"


def parse_permutation(source) -> Permutation:
    """Parse a permutation file: optional `# base 0|1` header, one index per line."""
    if isinstance(source, bytes):
        source = source.decode("ascii")
    base = 0
    forward = []
    for lineno, raw in enumerate(str(source).splitlines(), start=1):
        text = raw.strip()
        if not text:
            continue
        if text.startswith("#"):
            parts = text[1:].split()
            if len(parts) == 2 and parts[0] == "base":
                if parts[1] not in ("0", "1"):
                    raise PermutationError(f"line {lineno}: base must be 0 or 1")
                base = int(parts[1])
            continue
        try:
            forward.append(int(text))
        except ValueError:
            raise PermutationError(f"line {lineno}: not an integer") from None
    if not forward:
        raise PermutationError("empty permutation")
    return Permutation.from_forward(np.asarray(forward, dtype=np.int64) - base)


def emit_permutation(perm: Permutation) -> str:
    body = "\n".join(str(int(v)) for v in perm.forward)
    return f"# base 0\n{body}\n"


def apply_symmetric_permutation(
    matrix: SymmetricSparseMatrix, perm: Permutation
) -> SymmetricSparseMatrix:
    """Symmetrically permute rows and columns: output (i,j) mirrors input pairs."""
    if perm.n != matrix.n:
        raise PermutationError(
            f"permutation size {perm.n} does not match matrix size {matrix.n}"
        )
    fwd = perm.forward
    entries = []
    values = [] if matrix.has_values else None
    for j in range(matrix.n):
        nj = fwd[j]
        for k in range(matrix.col_ptr[j], matrix.col_ptr[j + 1]):
            entries.append((int(fwd[matrix.rows[k]]), int(nj)))
            if values is not None:
                values.append(float(matrix.values[k]))
    return from_entries(matrix.n, entries, values)


def symmetric_matvec(matrix: SymmetricSparseMatrix, x: np.ndarray) -> np.ndarray:
    """y = A x using only the stored lower triangle."""
    if not matrix.has_values:
        raise ValueError("matrix has no values")
    y = np.zeros(matrix.n)
    for j in range(matrix.n):
        rows = matrix.column(j)
        vals = matrix.column_values(j)
        y[rows] += vals * x[j]
        off = rows[1:]
        y[j] += vals[1:] @ x[off]
    return y


def synthesize_spd_values(matrix: SymmetricSparseMatrix) -> SymmetricSparseMatrix:
    """Attach diagonally dominant values: n on the diagonal, -1 off it.

    Each row holds at most n-1 off-diagonal entries, so the result is strictly
    diagonally dominant and therefore positive definite. Existing values are
    kept as-is.
    """
    if matrix.has_values:
        return matrix
    values = np.full(matrix.nnz_lower, -1.0)
    for j in range(matrix.n):
        values[matrix.col_ptr[j]] = float(matrix.n)
    return SymmetricSparseMatrix(matrix.n, matrix.col_ptr, matrix.rows, values)
