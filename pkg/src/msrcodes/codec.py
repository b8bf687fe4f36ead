"""Systematic encoding and erasure decoding.

A node is an int64 array of shape ``(ell,)`` (one stripe) or ``(ell, S)``
(``S`` stripes side by side, one per column); every function here accepts
both. Nodes ``0 .. k-1`` carry data; the parity nodes solve

    H_k C_k + ... + H_{n-1} C_{n-1} = -(H_0 C_0 + ... + H_{k-1} C_{k-1}).

For a shortened profile the dropped nodes of the longer code are fixed to
zero and never stored.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .construction import CodeProfile
from .errors import CorruptionError, ShapeError, SingularMatrixError, TooManyErasuresError
from .linalg import Matrix, hstack, inverse, left_inverse


@dataclass
class Codeword:
    """``nodes[i]`` is the content of node i, or ``None`` when erased."""

    nodes: list
    uncertified: bool = False

    @property
    def erased(self) -> list[int]:
        return [i for i, c in enumerate(self.nodes) if c is None]

    @property
    def present(self) -> list[int]:
        return [i for i, c in enumerate(self.nodes) if c is not None]

    def erase(self, indices: Iterable[int]) -> "Codeword":
        drop = set(indices)
        return Codeword([None if i in drop else c for i, c in enumerate(self.nodes)], self.uncertified)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Codeword) or len(self.nodes) != len(other.nodes):
            return NotImplemented
        for x, y in zip(self.nodes, other.nodes):
            if (x is None) != (y is None):
                return False
            if x is not None and not np.array_equal(x, y):
                return False
        return True


def profile_cache(profile: CodeProfile) -> dict:
    cache = profile.__dict__.get("_codec_cache")
    if cache is None:
        cache = profile.__dict__["_codec_cache"] = {}
    return cache


def apply_matrix(profile: CodeProfile, M: Matrix | np.ndarray, X: np.ndarray, threads: int = 1) -> np.ndarray:
    """``M @ X`` over the profile field, splitting stripe columns across threads."""
    A = M.data if isinstance(M, Matrix) else M
    field = profile.field
    if threads <= 1 or X.ndim == 1 or X.shape[1] < 2 * threads:
        return field.matmul(A, X)
    chunks = np.array_split(np.arange(X.shape[1]), threads)
    with ThreadPoolExecutor(threads) as pool:
        parts = list(pool.map(lambda idx: field.matmul(A, X[:, idx]), chunks))
    return np.concatenate(parts, axis=1)


def encode_inverse(profile: CodeProfile) -> Matrix:
    """Inverse of [H_k | ... | H_{n-1}] (r*ell square)."""
    cache = profile_cache(profile)
    if "parity_inverse" not in cache:
        block = hstack([profile.parity_matrix(i) for i in range(profile.k, profile.n)])
        try:
            cache["parity_inverse"] = inverse(block)
        except SingularMatrixError as exc:
            raise SingularMatrixError(f"parity block of {profile!r} is singular: not an MDS profile") from exc
    return cache["parity_inverse"]


def encode_matrix(profile: CodeProfile) -> Matrix:
    """Maps stacked data nodes (k*ell) to stacked parity nodes (r*ell)."""
    cache = profile_cache(profile)
    if "generator" not in cache:
        data_block = hstack([profile.parity_matrix(i) for i in range(profile.k)])
        cache["generator"] = encode_inverse(profile) @ (-data_block)
    return cache["generator"]


def _check_node(profile: CodeProfile, x, name: str) -> np.ndarray:
    arr = np.asarray(x, dtype=np.int64)
    if arr.ndim not in (1, 2) or arr.shape[0] != profile.ell:
        raise ShapeError(f"{name} must have {profile.ell} symbols per stripe, got shape {arr.shape}")
    if arr.size and (arr.min() < 0 or arr.max() >= profile.field.order):
        raise ValueError(f"{name} holds values outside GF(2^{profile.field.width})")
    return arr


def encode(profile: CodeProfile, data: Sequence, threads: int = 1) -> Codeword:
    """Systematic encode of ``k`` data nodes into an ``n``-node codeword."""
    if len(data) != profile.k:
        raise ShapeError(f"expected {profile.k} data nodes, got {len(data)}")
    nodes = [_check_node(profile, x, f"data node {i}") for i, x in enumerate(data)]
    if len({x.shape for x in nodes}) != 1:
        raise ShapeError("data nodes differ in shape")
    X = np.concatenate(nodes, axis=0)
    parity = apply_matrix(profile, encode_matrix(profile), X, threads)
    ell = profile.ell
    out = [x.copy() for x in nodes] + [parity[q * ell : (q + 1) * ell] for q in range(profile.r)]
    return Codeword(out, uncertified=not profile.certified)


def syndrome(profile: CodeProfile, nodes: Sequence, skip: Iterable[int] = ()) -> np.ndarray:
    """Sum of H_i C_i over the nodes not in ``skip`` (erased entries must be skipped)."""
    skip = set(skip)
    idx = [i for i in range(profile.n) if i not in skip]
    if not idx:
        raise ValueError("nothing to sum")
    H = hstack([profile.parity_matrix(i) for i in idx])
    X = np.concatenate([np.asarray(nodes[i], dtype=np.int64) for i in idx], axis=0)
    return profile.field.matmul(H.data, X)


def is_codeword(profile: CodeProfile, nodes: Sequence) -> bool:
    return not syndrome(profile, nodes).any()


def _decoder(profile: CodeProfile, erased: tuple[int, ...]) -> tuple[Matrix, Matrix]:
    """(R, Z) for an erasure pattern: the erased nodes are R @ survivors, and
    Z @ survivors must vanish (Z is empty when |erased| = r)."""
    cache = profile_cache(profile).setdefault("decoders", {})
    if erased not in cache:
        D, K = left_inverse(hstack([profile.parity_matrix(i) for i in erased]))
        keep = [i for i in range(profile.n) if i not in erased]
        H = -hstack([profile.parity_matrix(i) for i in keep])
        cache[erased] = (D @ H, K @ H)
    return cache[erased]


def decode_erasures(profile: CodeProfile, word: Codeword, threads: int = 1) -> Codeword:
    """Recompute the erased nodes from the surviving ones.

    Solves sum_{i in F} H_i C_i = -sum_{i not in F} H_i C_i for the erased
    set F via a left inverse; surplus equations double as a parity check."""
    if len(word.nodes) != profile.n:
        raise ShapeError(f"codeword has {len(word.nodes)} nodes, profile has {profile.n}")
    erased = tuple(word.erased)
    if len(erased) > profile.r:
        raise TooManyErasuresError(f"{len(erased)} erasures exceed the {profile.r} this code corrects")
    if not erased:
        return Codeword(list(word.nodes), word.uncertified)
    present = [_check_node(profile, word.nodes[i], f"node {i}") for i in word.present]
    if len({x.shape for x in present}) != 1:
        raise ShapeError("surviving nodes differ in shape")
    R, Z = _decoder(profile, erased)
    Y = np.concatenate(present, axis=0)
    if Z.rows and apply_matrix(profile, Z, Y, threads).any():
        raise CorruptionError("surviving nodes are inconsistent with the parity checks")
    X = apply_matrix(profile, R, Y, threads)
    ell = profile.ell
    out = list(word.nodes)
    for q, i in enumerate(erased):
        out[i] = X[q * ell : (q + 1) * ell]
    return Codeword(out, word.uncertified or not profile.certified)


# -- byte streams -------------------------------------------------------------


def bytes_to_symbols(data: bytes, width: int) -> np.ndarray:
    """Pack a byte string into ``width``-bit symbols (little-endian bit
    order, final symbol zero-padded)."""
    bits = np.unpackbits(np.frombuffer(data, dtype=np.uint8), bitorder="little")
    pad = (-len(bits)) % width
    if pad:
        bits = np.concatenate([bits, np.zeros(pad, dtype=np.uint8)])
    weights = (1 << np.arange(width, dtype=np.int64))
    return bits.reshape(-1, width).astype(np.int64) @ weights


def symbols_to_bytes(symbols: np.ndarray, width: int, length: int) -> bytes:
    """Inverse of :func:`bytes_to_symbols`, truncated to ``length`` bytes."""
    symbols = np.asarray(symbols, dtype=np.int64).ravel()
    need = -(-length * 8 // width)
    if symbols.size < need:
        raise ShapeError(f"{symbols.size} symbols cannot hold {length} bytes")
    bits = ((symbols[:need, None] >> np.arange(width)) & 1).astype(np.uint8).ravel()
    return np.packbits(bits[: length * 8], bitorder="little").tobytes()


def stripe_count(profile: CodeProfile, length: int) -> int:
    per_stripe = profile.k * profile.ell
    nsym = -(-length * 8 // profile.field.width)
    return max(1, -(-nsym // per_stripe))


def split_stripes(profile: CodeProfile, data: bytes) -> list[np.ndarray]:
    """Lay the byte stream out as ``k`` data nodes of shape ``(ell, S)``.

    Stripe ``c`` holds symbols ``c*k*ell .. (c+1)*k*ell - 1``; node ``i``
    gets the ``i``-th run of ``ell`` symbols of every stripe."""
    k, ell = profile.k, profile.ell
    S = stripe_count(profile, len(data))
    sym = bytes_to_symbols(data, profile.field.width)
    padded = np.zeros(S * k * ell, dtype=np.int64)
    padded[: sym.size] = sym
    grid = padded.reshape(S, k, ell)
    return [np.ascontiguousarray(grid[:, i, :].T) for i in range(k)]


def join_stripes(profile: CodeProfile, data_nodes: Sequence[np.ndarray], length: int) -> bytes:
    grid = np.stack([np.asarray(x).T for x in data_nodes], axis=1)
    return symbols_to_bytes(grid.reshape(-1), profile.field.width, length)


def encode_bytes(profile: CodeProfile, data: bytes, threads: int = 1) -> Codeword:
    return encode(profile, split_stripes(profile, data), threads)
