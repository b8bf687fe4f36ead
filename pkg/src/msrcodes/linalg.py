"""Dense exact linear algebra over GF(2^w).

Matrices are :class:`Matrix` objects holding a 2-D int64 array plus the
field they live in. Elimination is plain Gauss(-Jordan) with first-nonzero
pivoting; every row operation is vectorized with numpy.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from .errors import CapacityError, ShapeError, SingularMatrixError
from .gf import FieldContext

# Dense elimination is refused above this many rows.
MAX_DENSE_ROWS = 4096


def _check_capacity(rows: int) -> None:
    if rows > MAX_DENSE_ROWS:
        raise CapacityError(f"dense matrix with {rows} rows exceeds the limit of {MAX_DENSE_ROWS}")


class Matrix:
    """A rows x cols matrix over a field, stored row-major."""

    __slots__ = ("field", "data")

    def __init__(self, field: FieldContext, data) -> None:
        arr = np.array(data, dtype=np.int64)
        if arr.ndim != 2:
            raise ShapeError(f"matrix data must be 2-D, got shape {arr.shape}")
        if arr.size and (arr.min() < 0 or arr.max() >= field.order):
            raise ValueError("matrix entry outside the field")
        self.field = field
        self.data = arr

    @classmethod
    def _wrap(cls, field: FieldContext, arr: np.ndarray) -> "Matrix":
        m = cls.__new__(cls)
        m.field = field
        m.data = arr
        return m

    @classmethod
    def zeros(cls, field: FieldContext, rows: int, cols: int) -> "Matrix":
        return cls._wrap(field, np.zeros((rows, cols), dtype=np.int64))

    @classmethod
    def identity(cls, field: FieldContext, n: int) -> "Matrix":
        return cls._wrap(field, np.eye(n, dtype=np.int64))

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def cols(self) -> int:
        return self.data.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape

    def __repr__(self) -> str:
        return f"Matrix({self.rows}x{self.cols} over GF(2^{self.field.width}))"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Matrix):
            return NotImplemented
        return self.field == other.field and self.shape == other.shape and bool(np.array_equal(self.data, other.data))

    def __getitem__(self, key):
        sub = self.data[key]
        if isinstance(sub, np.ndarray) and sub.ndim == 2:
            return Matrix._wrap(self.field, sub.copy())
        if isinstance(sub, np.ndarray):
            return sub.copy()
        return int(sub)

    def __matmul__(self, other: "Matrix") -> "Matrix":
        if self.cols != other.rows:
            raise ShapeError(f"cannot multiply {self.shape} by {other.shape}")
        return Matrix._wrap(self.field, self.field.matmul(self.data, other.data))

    def __add__(self, other: "Matrix") -> "Matrix":
        if self.shape != other.shape:
            raise ShapeError(f"cannot add {self.shape} and {other.shape}")
        return Matrix._wrap(self.field, self.data ^ other.data)

    def __neg__(self) -> "Matrix":
        return Matrix._wrap(self.field, self.data.copy())

    def scale(self, c: int) -> "Matrix":
        return Matrix._wrap(self.field, self.field.mul_array(self.data, c))

    @property
    def T(self) -> "Matrix":
        return Matrix._wrap(self.field, self.data.T.copy())

    def is_zero(self) -> bool:
        return not self.data.any()

    def tolist(self) -> list[list[int]]:
        return self.data.tolist()


def hstack(blocks: Sequence[Matrix]) -> Matrix:
    return Matrix._wrap(blocks[0].field, np.hstack([b.data for b in blocks]))


def vstack(blocks: Sequence[Matrix]) -> Matrix:
    return Matrix._wrap(blocks[0].field, np.vstack([b.data for b in blocks]))


def block_diag(blocks: Sequence[Matrix]) -> Matrix:
    rows = sum(b.rows for b in blocks)
    cols = sum(b.cols for b in blocks)
    out = np.zeros((rows, cols), dtype=np.int64)
    r = c = 0
    for b in blocks:
        out[r : r + b.rows, c : c + b.cols] = b.data
        r += b.rows
        c += b.cols
    return Matrix._wrap(blocks[0].field, out)


# -- elimination -------------------------------------------------------------


def _forward(field: FieldContext, A: np.ndarray) -> tuple[np.ndarray, list[int], int]:
    """Row-echelon form. Returns (echelon, pivot columns, row swaps)."""
    A = A.copy()
    rows, cols = A.shape
    pivots: list[int] = []
    swaps = 0
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.flatnonzero(A[r:, c])
        if nz.size == 0:
            continue
        p = r + int(nz[0])
        if p != r:
            A[[r, p]] = A[[p, r]]
            swaps += 1
        below = r + 1 + np.flatnonzero(A[r + 1 :, c])
        if below.size:
            f = field.mul_array(A[below, c], field.inv(int(A[r, c])))
            A[below] ^= field.mul_array(f[:, None], A[r][None, :])
        pivots.append(c)
        r += 1
    return A, pivots, swaps


def det(M: Matrix) -> int:
    """Determinant by Gaussian elimination; nonzero iff ``M`` is invertible."""
    if M.rows != M.cols:
        raise ShapeError(f"determinant of non-square {M.shape} matrix")
    _check_capacity(M.rows)
    field = M.field
    if M.rows == 0:
        return 1
    E, pivots, swaps = _forward(field, M.data)
    if len(pivots) < M.rows:
        return 0
    out = 1
    for i in range(M.rows):
        out = field.mul(out, int(E[i, i]))
    return field.neg(out) if swaps % 2 else out


def rank(M: Matrix) -> int:
    _check_capacity(M.rows)
    return len(_forward(M.field, M.data)[1])


def _gauss_jordan(field: FieldContext, A: np.ndarray, B: np.ndarray) -> tuple[np.ndarray, np.ndarray, list[int]]:
    """Reduce ``[A | B]`` so that the pivot columns of A become unit vectors
    stacked at the top. Returns (reduced A, reduced B, pivot columns)."""
    A = A.copy()
    B = B.copy()
    rows, cols = A.shape
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.flatnonzero(A[r:, c])
        if nz.size == 0:
            continue
        p = r + int(nz[0])
        if p != r:
            A[[r, p]] = A[[p, r]]
            B[[r, p]] = B[[p, r]]
        inv = field.inv(int(A[r, c]))
        A[r] = field.mul_array(A[r], inv)
        B[r] = field.mul_array(B[r], inv)
        col = A[:, c].copy()
        col[r] = 0
        others = np.flatnonzero(col)
        if others.size:
            f = col[others][:, None]
            A[others] ^= field.mul_array(f, A[r][None, :])
            B[others] ^= field.mul_array(f, B[r][None, :])
        pivots.append(c)
        r += 1
    return A, B, pivots


def solve(M: Matrix, rhs: Matrix) -> Matrix:
    """Return X with M @ X == rhs for square invertible ``M``."""
    if M.rows != M.cols:
        raise ShapeError(f"solve needs a square matrix, got {M.shape}")
    if rhs.rows != M.rows:
        raise ShapeError(f"right-hand side has {rhs.rows} rows, matrix has {M.rows}")
    _check_capacity(M.rows)
    _, X, pivots = _gauss_jordan(M.field, M.data, rhs.data)
    if len(pivots) < M.rows:
        raise SingularMatrixError(f"singular {M.rows}x{M.cols} matrix (rank {len(pivots)})")
    return Matrix._wrap(M.field, X)


def inverse(M: Matrix) -> Matrix:
    return solve(M, Matrix.identity(M.field, M.rows))


def left_inverse(M: Matrix) -> tuple[Matrix, Matrix]:
    """For ``M`` (m x n, m >= n) of full column rank return ``(D, K)`` with
    ``D @ M == I_n`` and ``K @ M == 0``; ``K`` has m - n rows and spans the
    left null space, so ``K @ y != 0`` flags an inconsistent ``y``."""
    m, n = M.shape
    if m < n:
        raise ShapeError(f"left inverse needs rows >= cols, got {M.shape}")
    _check_capacity(m)
    _, T, pivots = _gauss_jordan(M.field, M.data, np.eye(m, dtype=np.int64))
    if len(pivots) < n:
        raise SingularMatrixError(f"{m}x{n} matrix has column rank {len(pivots)}")
    return Matrix._wrap(M.field, T[:n].copy()), Matrix._wrap(M.field, T[n:].copy())


def kron(A: Matrix, B: Matrix) -> Matrix:
    """Kronecker product A (x) B."""
    field = A.field
    out = field.mul_array(A.data[:, None, :, None], B.data[None, :, None, :])
    return Matrix._wrap(field, out.reshape(A.rows * B.rows, A.cols * B.cols))


# -- permutations ------------------------------------------------------------


class Permutation:
    """Bijection on range(size). As a matrix, row i is row ``image[i]`` of I."""

    __slots__ = ("image",)

    def __init__(self, image: Iterable[int]) -> None:
        image = tuple(int(i) for i in image)
        if sorted(image) != list(range(len(image))):
            raise ValueError("permutation image is not a bijection")
        self.image = image

    @classmethod
    def identity(cls, size: int) -> "Permutation":
        return cls(range(size))

    @property
    def size(self) -> int:
        return len(self.image)

    def __len__(self) -> int:
        return len(self.image)

    def __call__(self, i: int) -> int:
        return self.image[i]

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Permutation) and self.image == other.image

    def __hash__(self) -> int:
        return hash(self.image)

    def __repr__(self) -> str:
        return f"Permutation({list(self.image)})"

    def compose(self, other: "Permutation") -> "Permutation":
        """Matrix product self @ other."""
        return Permutation(other.image[i] for i in self.image)

    def inverse(self) -> "Permutation":
        inv = [0] * self.size
        for i, j in enumerate(self.image):
            inv[j] = i
        return Permutation(inv)

    def is_identity(self) -> bool:
        return all(i == j for i, j in enumerate(self.image))

    def kron_identity(self, t: int) -> "Permutation":
        """P (x) I_t."""
        return Permutation(self.image[i // t] * t + i % t for i in range(self.size * t))

    def identity_kron(self, t: int) -> "Permutation":
        """I_t (x) P."""
        m = self.size
        return Permutation((i // m) * m + self.image[i % m] for i in range(m * t))

    def matrix(self, field: FieldContext) -> Matrix:
        out = np.zeros((self.size, self.size), dtype=np.int64)
        out[np.arange(self.size), list(self.image)] = 1
        return Matrix._wrap(field, out)


def apply_permutation(P: Permutation, M: Matrix, side: str = "rows") -> Matrix:
    """``P @ M`` for side="rows", ``M @ P`` for side="cols"."""
    if side == "rows":
        if P.size != M.rows:
            raise ShapeError(f"permutation of size {P.size} cannot reorder {M.rows} rows")
        return Matrix._wrap(M.field, M.data[list(P.image)].copy())
    if side == "cols":
        if P.size != M.cols:
            raise ShapeError(f"permutation of size {P.size} cannot reorder {M.cols} columns")
        return Matrix._wrap(M.field, M.data[:, list(P.inverse().image)].copy())
    raise ValueError(f"side must be 'rows' or 'cols', not {side!r}")
