"""Parity-check matrices of the two MSR constructions and their profiles.

Nodes are split into groups of size ``g`` (``g = s`` for variant A,
``g = s + 1`` for variant B). Node ``z = a*g + b`` owns the lambda values
``a*g*s + b*s + j`` for ``j`` in ``range(s)``. Indices ``i`` in
``range(ell)`` are read as base-``s`` numbers with one digit per group;
digit ``u`` is ``i_u``.

The parity matrix of node ``(a, b)`` is an ``ell x ell`` grid of length-``r``
column vectors with block entry

* ``+L[base + b*s + j_a]`` on the diagonal ``i == j``,
* ``-L[base + b*s + j_a]`` where ``i_a == b != j_a`` and all other digits agree,
* zero elsewhere,

where ``L[x] = (1, lam_x, lam_x^2, ...)``. The same law at size
``s^(a+1)`` gives the kernel matrix, and ``A = I (x) K``.
"""

from __future__ import annotations

import hashlib
import itertools
import math
import struct
from dataclasses import dataclass, field as dc_field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .errors import CapacityError, FormatError, SearchFailureError
from .gf import FieldContext
from . import linalg
from .linalg import Matrix, Permutation, det, hstack

VARIANTS = ("A", "B")


@dataclass(frozen=True)
class CodeParams:
    n: int
    k: int
    d: int
    variant: str = "A"

    def __post_init__(self) -> None:
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be 'A' or 'B', got {self.variant!r}")
        if self.k < 1:
            raise ValueError("k must be at least 1")
        if not self.k + 1 <= self.d <= self.n - 1:
            raise ValueError(f"need k+1 <= d <= n-1, got n={self.n}, k={self.k}, d={self.d}")
        if self.r * self.ell > linalg.MAX_DENSE_ROWS:
            raise CapacityError(
                f"r*ell = {self.r}*{self.ell} = {self.r * self.ell} parity rows exceeds the dense limit {linalg.MAX_DENSE_ROWS}"
            )

    @property
    def r(self) -> int:
        return self.n - self.k

    @property
    def s(self) -> int:
        return self.d - self.k + 1

    @property
    def group_size(self) -> int:
        return self.s if self.variant == "A" else self.s + 1

    @property
    def groups(self) -> int:
        return -(-self.n // self.group_size)

    @property
    def n_ext(self) -> int:
        """Length of the unshortened code the profile is built from."""
        return self.groups * self.group_size

    @property
    def dropped(self) -> int:
        return self.n_ext - self.n

    @property
    def ell(self) -> int:
        return self.s**self.groups

    @property
    def lambda_count(self) -> int:
        return self.n_ext * self.s

    @property
    def alpha(self) -> int:
        g, s = self.group_size, self.s
        return sum(math.comb(g, t) * s * t * (t - 1) // 2 for t in range(1, g + 1))

    @property
    def field_bound(self) -> int:
        """Field size that guarantees the lambda search succeeds."""
        return self.lambda_count + self.alpha

    def position(self, node: int) -> tuple[int, int]:
        """(group, in-group index) of a node of the unshortened code."""
        if not 0 <= node < self.n_ext:
            raise IndexError(f"node {node} out of range")
        return divmod(node, self.group_size)

    def lambda_base(self, a: int) -> int:
        return a * self.group_size * self.s

    def lambda_index(self, a: int, b: int, j: int) -> int:
        return self.lambda_base(a) + b * self.s + j


# -- base-s digits ------------------------------------------------------------


def index_digits(i: int, s: int, m: int) -> tuple[int, ...]:
    """Digits (i_0, i_1, ..., i_{m-1}) of ``i`` in base ``s``."""
    if not 0 <= i < s**m:
        raise ValueError(f"{i} does not fit in {m} base-{s} digits")
    out = []
    for _ in range(m):
        i, rem = divmod(i, s)
        out.append(rem)
    return tuple(out)


def from_digits(digits: Sequence[int], s: int) -> int:
    return sum(dg * s**u for u, dg in enumerate(digits))


def digit(i: int, u: int, s: int) -> int:
    return (i // s**u) % s


# -- block matrices -----------------------------------------------------------


@dataclass
class BlockMatrix:
    """Grid of signed lambda-vector entries.

    ``entries[(i, j)] = (sign, lambda_index)``; missing entries are zero.
    Realized at length ``t`` each entry becomes ``sign * L[lambda_index]``
    of length ``t`` occupying rows ``i*t .. i*t+t-1`` of column ``j``.
    """

    block_rows: int
    block_cols: int
    entries: dict[tuple[int, int], tuple[int, int]] = dc_field(default_factory=dict)

    def entry(self, i: int, j: int) -> tuple[int, int | None]:
        if not (0 <= i < self.block_rows and 0 <= j < self.block_cols):
            raise IndexError(f"block entry ({i}, {j}) out of range")
        return self.entries.get((i, j), (0, None))

    def realize(self, profile: "CodeProfile", t: int) -> Matrix:
        return self.realize_with(profile.field, profile.powers(t))

    def realize_with(self, field: FieldContext, powers: np.ndarray) -> Matrix:
        """Realize from a table whose row x is L[x] at the wanted length."""
        t = powers.shape[1]
        out = np.zeros((self.block_rows * t, self.block_cols), dtype=np.int64)
        for (i, j), (sign, idx) in self.entries.items():
            vec = powers[idx]
            if sign < 0:
                vec = np.array([field.neg(int(x)) for x in vec], dtype=np.int64)
            out[i * t : (i + 1) * t, j] = vec
        return Matrix._wrap(field, out)


def law_entries(s: int, size: int, a: int, b: int, base: int) -> dict[tuple[int, int], tuple[int, int]]:
    """Block-entry law of node ``(a, b)`` over indices ``range(size)``."""
    step = s**a
    entries = {}
    for j in range(size):
        ja = (j // step) % s
        lam = base + b * s + ja
        entries[(j, j)] = (1, lam)
        if b < s and ja != b:
            entries[(j + (b - ja) * step, j)] = (-1, lam)
    return entries


def powers_table(field: FieldContext, lams: np.ndarray, t: int) -> np.ndarray:
    pw = np.ones((len(lams), t), dtype=np.int64)
    for z in range(1, t):
        pw[:, z] = field.mul_array(pw[:, z - 1], lams)
    return pw


# -- profiles -----------------------------------------------------------------


MAGIC_PROFILE = b"MSRP"
PROFILE_VERSION = 1
_PROFILE_HEADER = struct.Struct("<4sBcHHHBII")


class CodeProfile:
    """Parameters, field and lambda sequence: everything needed to rebuild
    the code. Immutable; realized matrices are cached on first use."""

    def __init__(self, params: CodeParams, field: FieldContext, lambdas: Iterable[int], *, check: bool = True) -> None:
        lambdas = tuple(int(x) for x in lambdas)
        if len(lambdas) != params.lambda_count:
            raise ValueError(f"need {params.lambda_count} lambda values, got {len(lambdas)}")
        for x in lambdas:
            field.check(x)
        self.params = params
        self.field = field
        self.lambdas = lambdas
        self.certified = False
        self._powers: dict[int, np.ndarray] = {}
        self._realized: dict[tuple[int, int], Matrix] = {}
        if check:
            if len(set(lambdas)) != len(lambdas):
                raise ValueError("lambda values are not pairwise distinct")
            for a in range(params.groups):
                report = check_local_constraints(self, a)
                if not report.passed:
                    raise ValueError(f"local constraints fail for group {a}: subsets {report.failures}")

    @classmethod
    def build(cls, params: CodeParams, field: FieldContext) -> "CodeProfile":
        return cls(params, field, select_lambdas(params, field))

    def __repr__(self) -> str:
        p = self.params
        return f"CodeProfile({p.variant}, n={p.n}, k={p.k}, d={p.d}, ell={p.ell}, {self.field!r})"

    # shorthands
    @property
    def n(self) -> int:
        return self.params.n

    @property
    def k(self) -> int:
        return self.params.k

    @property
    def r(self) -> int:
        return self.params.r

    @property
    def s(self) -> int:
        return self.params.s

    @property
    def ell(self) -> int:
        return self.params.ell

    def powers(self, t: int) -> np.ndarray:
        """Row x holds (1, lam_x, ..., lam_x^(t-1))."""
        if t not in self._powers:
            pw = powers_table(self.field, np.array(self.lambdas, dtype=np.int64), t)
            pw.setflags(write=False)
            self._powers[t] = pw
        return self._powers[t]

    def node_matrix(self, node: int, t: int) -> Matrix:
        """Realized A_{a,b}^{(t)} of a node (t = r gives its parity matrix)."""
        key = (node, t)
        if key not in self._realized:
            self._realized[key] = build_parity_matrix(self, node).realize(self, t)
        return self._realized[key]

    def parity_matrix(self, node: int) -> Matrix:
        return self.node_matrix(node, self.r)

    def subset_matrix(self, a: int, subset: Sequence[int], t: int) -> Matrix:
        """A_{a,B}^{(t)}: node matrices of group ``a`` side by side."""
        g = self.params.group_size
        return hstack([self.node_matrix(a * g + b, t) for b in subset])

    def with_lambdas(self, lambdas: Iterable[int], *, check: bool = False) -> "CodeProfile":
        return CodeProfile(self.params, self.field, lambdas, check=check)

    def swap_groups(self, g1: int, g2: int) -> "CodeProfile":
        """Same code with the lambda blocks of two groups exchanged."""
        p = self.params
        width = p.group_size * p.s
        lams = list(self.lambdas)
        b1, b2 = p.lambda_base(g1), p.lambda_base(g2)
        lams[b1 : b1 + width], lams[b2 : b2 + width] = lams[b2 : b2 + width], lams[b1 : b1 + width]
        return self.with_lambdas(lams)

    # -- serialization

    def to_bytes(self) -> bytes:
        p = self.params
        head = _PROFILE_HEADER.pack(
            MAGIC_PROFILE, PROFILE_VERSION, p.variant.encode(), p.n, p.k, p.d,
            self.field.width, self.field.poly, len(self.lambdas),
        )
        body = head + self.field.to_bytes(self.lambdas)
        return body + hashlib.sha256(body).digest()

    @classmethod
    def from_bytes(cls, data: bytes, *, check: bool = True) -> "CodeProfile":
        if len(data) < _PROFILE_HEADER.size + 32:
            raise FormatError("profile file too short")
        magic, version, variant, n, k, d, width, poly, count = _PROFILE_HEADER.unpack_from(data)
        if magic != MAGIC_PROFILE:
            raise FormatError("not a profile file (bad magic)")
        if version != PROFILE_VERSION:
            raise FormatError(f"unsupported profile version {version}")
        body, digest = data[:-32], data[-32:]
        if hashlib.sha256(body).digest() != digest:
            raise FormatError("profile digest mismatch")
        try:
            field = FieldContext(width, poly)
            params = CodeParams(n, k, d, variant.decode())
            lams = field.from_bytes(body[_PROFILE_HEADER.size :])
        except (ValueError, UnicodeDecodeError) as exc:
            raise FormatError(f"invalid profile: {exc}") from exc
        if len(lams) != count:
            raise FormatError("profile lambda count does not match payload")
        return cls(params, field, lams.tolist(), check=check)

    @cached_property
    def digest(self) -> bytes:
        return self.to_bytes()[-32:]


def build_L(profile: CodeProfile, lambda_index: int, t: int) -> list[int]:
    """(1, lam, lam^2, ..., lam^(t-1)) for one lambda of the profile."""
    if not 0 <= lambda_index < len(profile.lambdas):
        raise IndexError(f"lambda index {lambda_index} out of range")
    if t < 1:
        raise ValueError("t must be positive")
    return profile.field.powers(profile.lambdas[lambda_index], t)


def build_kernel(profile: CodeProfile, a: int, b: int) -> BlockMatrix:
    """K_{a,b}: an s x s grid of blocks I_{s^a} (x) L at vector granularity,
    i.e. a ``s^(a+1) x s^(a+1)`` :class:`BlockMatrix`."""
    p = profile.params
    if not 0 <= a < p.groups or not 0 <= b < p.group_size:
        raise IndexError(f"kernel ({a}, {b}) out of range")
    size = p.s ** (a + 1)
    return BlockMatrix(size, size, law_entries(p.s, size, a, b, p.lambda_base(a)))


def build_parity_matrix(profile: CodeProfile, node: int) -> BlockMatrix:
    p = profile.params
    a, b = p.position(node)
    return BlockMatrix(p.ell, p.ell, law_entries(p.s, p.ell, a, b, p.lambda_base(a)))


# -- local constraints --------------------------------------------------------


@dataclass
class ConstraintReport:
    passed: bool
    checked: int
    failures: list = dc_field(default_factory=list)


def nonempty_subsets(g: int) -> list[tuple[int, ...]]:
    return [c for t in range(1, g + 1) for c in itertools.combinations(range(g), t)]


def kernel_subset_matrix(profile: CodeProfile, a: int, subset: Sequence[int], t: int) -> Matrix:
    """Realized K_{a,B}^{(t)}."""
    return hstack([build_kernel(profile, a, b).realize(profile, t) for b in subset])


def check_local_constraints(profile: CodeProfile, a: int) -> ConstraintReport:
    """det K_{a,B} != 0 for every nonempty B of group ``a``."""
    subsets = nonempty_subsets(profile.params.group_size)
    failures = [B for B in subsets if det(kernel_subset_matrix(profile, a, B, len(B))) == 0]
    return ConstraintReport(not failures, len(subsets), failures)


def _window_ok(field: FieldContext, window: Sequence[int], s: int, g: int) -> bool:
    """Local constraints for one group, evaluated in group-0 form (size s*|B|)."""
    lams = np.array(window, dtype=np.int64)
    for B in nonempty_subsets(g):
        t = len(B)
        pw = powers_table(field, lams, t)
        blocks = [BlockMatrix(s, s, law_entries(s, s, 0, b, 0)).realize_with(field, pw) for b in B]
        if det(hstack(blocks)) == 0:
            return False
    return True


def select_lambdas(params: CodeParams, field: FieldContext) -> tuple[int, ...]:
    """Greedy search: each group takes the first window of ``g*s`` unused
    powers of theta (in increasing exponent order) that passes all of its
    subset determinants. Deterministic in (params, field)."""
    need = params.lambda_count
    if field.order - 1 < need:
        raise CapacityError(
            f"GF({field.order}) has {field.order - 1} nonzero elements but {need} distinct lambdas are needed"
            f" (guaranteed search needs q >= {params.field_bound})"
        )
    g, s = params.group_size, params.s
    width = g * s
    pool = [field.theta_power(i) for i in range(field.group_order)]
    chosen: list[int] = []
    for a in range(params.groups):
        off = 0
        while True:
            if off + width > len(pool):
                raise SearchFailureError(
                    f"no lambda window for group {a} in GF({field.order});"
                    f" q >= {params.field_bound} guarantees success"
                )
            window = pool[off : off + width]
            if _window_ok(field, window, s, g):
                break
            off += 1
        chosen.extend(window)
        del pool[off : off + width]
    return tuple(chosen)


# -- global constraints -------------------------------------------------------

Selection = tuple[tuple[int, tuple[int, ...]], ...]


def enumerate_selections(params: CodeParams, t_max: int, *, min_groups: int = 1) -> Iterable[Selection]:
    """All ((a_0, B_0), ...) with distinct increasing groups, nonempty B_i
    and total size <= t_max."""
    subsets = nonempty_subsets(params.group_size)

    def rec(start: int, budget: int, acc: list):
        if acc and len(acc) >= min_groups:
            yield tuple(acc)
        for a in range(start, params.groups):
            for B in subsets:
                if len(B) <= budget:
                    acc.append((a, B))
                    yield from rec(a + 1, budget - len(B), acc)
                    acc.pop()

    yield from rec(0, t_max, [])


def count_selections(params: CodeParams, t_max: int) -> int:
    # polynomial in the subset-size generating function
    g, m = params.group_size, params.groups
    per_group = [math.comb(g, v) for v in range(g + 1)]
    per_group[0] = 1
    poly = [1]
    for _ in range(m):
        newp = [0] * (len(poly) + g)
        for i, c in enumerate(poly):
            for v, w in enumerate(per_group):
                newp[i + v] += c * w
        poly = newp
    return sum(poly[1 : t_max + 1])


def selection_matrix(profile: CodeProfile, selection: Selection) -> Matrix:
    t = sum(len(B) for _, B in selection)
    return hstack([profile.subset_matrix(a, B, t) for a, B in selection])


def check_global_constraints(profile: CodeProfile, t_max: int | None = None, *, budget: int = 200_000) -> ConstraintReport:
    """Brute-force: every cross-group selection of total size t <= t_max
    has a nonzero determinant. With t_max = r this certifies MDS."""
    p = profile.params
    t_max = p.r if t_max is None else t_max
    if not 1 <= t_max <= p.r:
        raise ValueError(f"t_max must be in [1, r={p.r}]")
    total = count_selections(p, t_max)
    if total > budget:
        raise CapacityError(f"{total} selections exceed the enumeration budget {budget}")
    failures = []
    checked = 0
    for sel in enumerate_selections(p, t_max):
        checked += 1
        if det(selection_matrix(profile, sel)) == 0:
            failures.append(sel)
    report = ConstraintReport(not failures, checked, failures)
    if report.passed and t_max == p.r:
        profile.certified = True
    return report


# -- permutation equivalence --------------------------------------------------


def build_group_swap(params: CodeParams, g1: int, g2: int) -> Permutation:
    """Permutation of range(ell) exchanging base-s digits g1 and g2."""
    m, s = params.groups, params.s
    if not (0 <= g1 < m and 0 <= g2 < m):
        raise IndexError(f"groups ({g1}, {g2}) out of range")
    image = []
    for i in range(params.ell):
        dg = list(index_digits(i, s, m))
        dg[g1], dg[g2] = dg[g2], dg[g1]
        image.append(from_digits(dg, s))
    return Permutation(image)
