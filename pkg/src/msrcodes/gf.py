"""Arithmetic in binary extension fields GF(2^w), 4 <= w <= 16.

Elements are plain ints whose bits are polynomial coefficients over GF(2).
A :class:`FieldContext` owns the reduction polynomial and the log/antilog
tables; it is immutable after construction.

Besides scalar ops the context offers numpy versions (``mul_array``,
``matmul``) that the codec uses to process many stripes at once.
"""

from __future__ import annotations

import numpy as np

# One fixed primitive polynomial per width (bitmask includes the x^w term).
DEFAULT_POLYS = {
    4: 0x13,      # x^4 + x + 1
    5: 0x25,      # x^5 + x^2 + 1
    6: 0x43,      # x^6 + x + 1
    7: 0x89,      # x^7 + x^3 + 1
    8: 0x11D,     # x^8 + x^4 + x^3 + x^2 + 1
    9: 0x211,     # x^9 + x^4 + 1
    10: 0x409,    # x^10 + x^3 + 1
    11: 0x805,    # x^11 + x^2 + 1
    12: 0x1053,   # x^12 + x^6 + x^4 + x + 1
    13: 0x201B,   # x^13 + x^4 + x^3 + x + 1
    14: 0x4443,   # x^14 + x^10 + x^6 + x + 1
    15: 0x8003,   # x^15 + x + 1
    16: 0x1100B,  # x^16 + x^12 + x^3 + x + 1
}

# columns per block in the byte-table matrix product
_CHUNK = 4096

MIN_WIDTH = 4
MAX_WIDTH = 16


def clmul_mod(a: int, b: int, poly: int, width: int) -> int:
    """Carry-less product of ``a`` and ``b`` reduced modulo ``poly``.

    Shift-and-add; used to build the tables and as a table-free reference.
    """
    top = 1 << width
    out = 0
    while b:
        if b & 1:
            out ^= a
        b >>= 1
        a <<= 1
        if a & top:
            a ^= poly
    return out


class FieldContext:
    """GF(2^w) defined by a primitive reduction polynomial.

    The polynomial is checked to have degree exactly ``width`` and to make
    ``x`` (the element ``0b10``) a generator of the multiplicative group.
    """

    characteristic = 2

    def __init__(self, width: int, poly: int | None = None) -> None:
        if not MIN_WIDTH <= width <= MAX_WIDTH:
            raise ValueError(f"field width must be in [{MIN_WIDTH}, {MAX_WIDTH}], got {width}")
        if poly is None:
            poly = DEFAULT_POLYS[width]
        if poly.bit_length() != width + 1:
            raise ValueError(f"polynomial {poly:#x} does not have degree {width}")
        self.width = width
        self.poly = poly
        self.order = 1 << width
        self.group_order = self.order - 1

        exp = np.zeros(2 * self.group_order, dtype=np.int64)
        log = np.zeros(self.order, dtype=np.int64)
        x = 1
        for i in range(self.group_order):
            if i and x == 1:
                raise ValueError(f"polynomial {poly:#x} is not primitive (x has order {i})")
            exp[i] = x
            log[x] = i
            x = clmul_mod(x, 2, poly, width)
        if x != 1:
            raise ValueError(f"polynomial {poly:#x} is not primitive")
        exp[self.group_order:] = exp[: self.group_order]
        exp.setflags(write=False)
        log.setflags(write=False)
        self.exp_table = exp
        self.log_table = log
        self._exp = exp.tolist()
        self._log = log.tolist()
        # a full product table is cheap up to GF(256) and fastest for numpy
        self._mul_table = None
        self._mul_table_u8 = None
        if width <= 8:
            t = exp[(log[:, None] + log[None, :])]
            t[0, :] = 0
            t[:, 0] = 0
            t.setflags(write=False)
            self._mul_table = t
            self._mul_table_u8 = t.astype(np.uint8)
        self.byte_width = 1 if width <= 8 else 2

    def __repr__(self) -> str:
        return f"FieldContext(width={self.width}, poly={self.poly:#x})"

    def __eq__(self, other: object) -> bool:
        return isinstance(other, FieldContext) and (self.width, self.poly) == (other.width, other.poly)

    def __hash__(self) -> int:
        return hash((self.width, self.poly))

    # -- scalar arithmetic -------------------------------------------------

    def check(self, a: int) -> int:
        if not 0 <= a < self.order:
            raise ValueError(f"{a} is not an element of GF(2^{self.width})")
        return a

    def add(self, a: int, b: int) -> int:
        return a ^ b

    sub = add

    def neg(self, a: int) -> int:
        # -a == a in characteristic 2
        return a

    def mul(self, a: int, b: int) -> int:
        if a == 0 or b == 0:
            return 0
        return self._exp[self._log[a] + self._log[b]]

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("inverse of zero in GF(2^%d)" % self.width)
        return self._exp[self.group_order - self._log[a]]

    def div(self, a: int, b: int) -> int:
        return self.mul(a, self.inv(b))

    def pow(self, a: int, e: int) -> int:
        if e < 0:
            raise ValueError("negative exponent")
        if e == 0:
            return 1
        if a == 0:
            return 0
        return self._exp[(self._log[a] * e) % self.group_order]

    def log(self, a: int) -> int:
        if a == 0:
            raise ValueError("log of zero")
        return self._log[a]

    def theta_power(self, i: int) -> int:
        """theta^i where theta is the class of x."""
        return self._exp[i % self.group_order]

    def powers(self, a: int, t: int) -> list[int]:
        """(1, a, a^2, ..., a^(t-1))."""
        out = [1] * t
        for i in range(1, t):
            out[i] = self.mul(out[i - 1], a)
        return out

    # -- numpy arithmetic --------------------------------------------------

    def mul_array(self, a, b) -> np.ndarray:
        """Elementwise product of broadcastable integer arrays."""
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        if self._mul_table is not None:
            return self._mul_table[a, b]
        out = self.exp_table[self.log_table[a] + self.log_table[b]]
        return np.where((a == 0) | (b == 0), 0, out)

    def inv_array(self, a) -> np.ndarray:
        a = np.asarray(a, dtype=np.int64)
        if np.any(a == 0):
            raise ZeroDivisionError("inverse of zero")
        return self.exp_table[self.group_order - self.log_table[a]]

    def matmul(self, A, X) -> np.ndarray:
        """Matrix product over the field; ``X`` may hold many columns."""
        A = np.asarray(A, dtype=np.int64)
        X = np.asarray(X, dtype=np.int64)
        if A.ndim != 2 or X.ndim not in (1, 2) or A.shape[1] != X.shape[0]:
            raise ValueError(f"cannot multiply {A.shape} by {X.shape}")
        vec = X.ndim == 1
        if vec:
            X = X[:, None]
        if self._mul_table_u8 is not None:
            out = self._matmul_bytes(A, X.astype(np.uint8)).astype(np.int64)
        else:
            out = np.zeros((A.shape[0], X.shape[1]), dtype=np.int64)
            for k in range(A.shape[1]):
                col = A[:, k]
                if not col.any():
                    continue
                out ^= self.mul_array(col[:, None], X[k][None, :])
        return out[:, 0] if vec else out

    def _matmul_bytes(self, A: np.ndarray, X: np.ndarray) -> np.ndarray:
        """uint8 product for w <= 8, in column chunks that stay in cache."""
        table = self._mul_table_u8
        rows = A.shape[0]
        out = np.zeros((rows, X.shape[1]), dtype=np.uint8)
        # with many output rows it pays to tabulate all products of a row of X once
        full = 2 * rows >= self.order
        cols = [k for k in range(A.shape[1]) if A[:, k].any()]
        for c0 in range(0, X.shape[1], _CHUNK):
            o = out[:, c0 : c0 + _CHUNK]
            for k in cols:
                xk = X[k, c0 : c0 + _CHUNK]
                if full:
                    o ^= table[:, xk][A[:, k]]
                else:
                    o ^= table[A[:, k][:, None], xk[None, :]]
        return out

    # -- serialization -----------------------------------------------------

    def to_bytes(self, values) -> bytes:
        """Fixed-width little-endian encoding: 1 byte for w <= 8, else 2."""
        arr = np.asarray(values, dtype=np.int64)
        if arr.size and (arr.min() < 0 or arr.max() >= self.order):
            raise ValueError("value outside the field")
        dtype = "<u1" if self.byte_width == 1 else "<u2"
        return arr.astype(dtype).tobytes()

    def from_bytes(self, data: bytes) -> np.ndarray:
        dtype = "<u1" if self.byte_width == 1 else "<u2"
        if len(data) % self.byte_width:
            raise ValueError("byte length is not a whole number of field elements")
        arr = np.frombuffer(data, dtype=dtype).astype(np.int64)
        if arr.size and arr.max() >= self.order:
            raise ValueError("serialized value outside the field")
        return arr


def smallest_width(min_order: int) -> int:
    """Smallest supported w with 2^w >= min_order."""
    for w in range(MIN_WIDTH, MAX_WIDTH + 1):
        if (1 << w) >= min_order:
            return w
    raise ValueError(f"no supported field has at least {min_order} elements")
