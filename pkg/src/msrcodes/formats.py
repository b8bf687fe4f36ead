"""On-disk shard and helper-payload files.

All integers little-endian. Field elements take 1 byte for w <= 8 and 2
bytes otherwise (see :meth:`FieldContext.to_bytes`).

Shard (``MSRS``)::

    0   4   magic b"MSRS"
    4   1   version (1)
    5   32  SHA-256 digest of the profile file
    37  2   node index
    39  8   stripe count S
    47  8   original byte length of the encoded file
    55  ..  S stripes, each the node's ell elements in index order

Helper payload (``MSRH``)::

    0   4   magic b"MSRH"
    4   1   version (1)
    5   2   helper node index
    7   32  plan digest: SHA-256(profile digest | failed u16 | helpers u16...)
    39  8   stripe count S
    47  8   original byte length of the encoded file
    55  ..  S stripes of ell/s elements each
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .construction import CodeProfile
from .errors import FormatError

SHARD_MAGIC = b"MSRS"
PAYLOAD_MAGIC = b"MSRH"
VERSION = 1

_SHARD = struct.Struct("<4sB32sHQQ")
_PAYLOAD = struct.Struct("<4sBH32sQQ")


@dataclass
class Shard:
    profile_digest: bytes
    node: int
    length: int
    symbols: np.ndarray  # (ell, S)

    @property
    def stripes(self) -> int:
        return self.symbols.shape[1]


@dataclass
class Payload:
    node: int
    plan_digest: bytes
    length: int
    symbols: np.ndarray  # (ell/s, S)

    @property
    def stripes(self) -> int:
        return self.symbols.shape[1]


def _elements(profile: CodeProfile, raw: bytes, rows: int, stripes: int, what: str) -> np.ndarray:
    want = rows * stripes * profile.field.byte_width
    if len(raw) != want:
        raise FormatError(f"{what} body has {len(raw)} bytes, header implies {want}")
    try:
        flat = profile.field.from_bytes(raw)
    except ValueError as exc:
        raise FormatError(f"{what}: {exc}") from exc
    return flat.reshape(stripes, rows).T.copy()


def shard_to_bytes(profile: CodeProfile, shard: Shard) -> bytes:
    head = _SHARD.pack(SHARD_MAGIC, VERSION, shard.profile_digest, shard.node, shard.stripes, shard.length)
    return head + profile.field.to_bytes(np.asarray(shard.symbols).T)


def shard_from_bytes(profile: CodeProfile, data: bytes) -> Shard:
    if len(data) < _SHARD.size:
        raise FormatError("shard file too short")
    magic, version, digest, node, stripes, length = _SHARD.unpack_from(data)
    if magic != SHARD_MAGIC:
        raise FormatError("not a shard file (bad magic)")
    if version != VERSION:
        raise FormatError(f"unsupported shard version {version}")
    if digest != profile.digest:
        raise FormatError(f"shard of node {node} was written under a different profile")
    if node >= profile.n:
        raise FormatError(f"shard node index {node} out of range for n={profile.n}")
    return Shard(digest, node, length, _elements(profile, data[_SHARD.size :], profile.ell, stripes, "shard"))


def payload_to_bytes(profile: CodeProfile, payload: Payload) -> bytes:
    head = _PAYLOAD.pack(PAYLOAD_MAGIC, VERSION, payload.node, payload.plan_digest, payload.stripes, payload.length)
    return head + profile.field.to_bytes(np.asarray(payload.symbols).T)


def payload_from_bytes(profile: CodeProfile, data: bytes) -> Payload:
    if len(data) < _PAYLOAD.size:
        raise FormatError("payload file too short")
    magic, version, node, digest, stripes, length = _PAYLOAD.unpack_from(data)
    if magic != PAYLOAD_MAGIC:
        raise FormatError("not a helper payload file (bad magic)")
    if version != VERSION:
        raise FormatError(f"unsupported payload version {version}")
    rows = profile.ell // profile.s
    return Payload(node, digest, length, _elements(profile, data[_PAYLOAD.size :], rows, stripes, "payload"))


def read_profile(path: str | Path, *, check: bool = True) -> CodeProfile:
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise FormatError(f"cannot read profile {path}: {exc.strerror}") from exc
    try:
        return CodeProfile.from_bytes(data, check=check)
    except FormatError:
        raise
    except ValueError as exc:
        raise FormatError(f"invalid profile {path}: {exc}") from exc


def read_file(path: str | Path) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc.strerror}") from exc


def write_file(path: str | Path, data: bytes) -> None:
    try:
        Path(path).write_bytes(data)
    except OSError as exc:
        raise FormatError(f"cannot write {path}: {exc.strerror}") from exc


def shard_name(node: int) -> str:
    return f"shard_{node:03d}.msrs"
