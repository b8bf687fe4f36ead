"""Single-node repair from ``d`` helpers with ``d*ell/s`` downloaded symbols.

Failed node ``(a, b)``. Every helper sends ``ell/s`` symbols:

* variant A, or variant B with ``b < s``: the raw symbols ``C_j(i)`` with
  ``i_a = b`` (optimal access);
* variant B with ``b = s`` (last node of a group): helpers in group ``a``
  with in-group index ``b'`` send ``C_j(i)`` for ``i_a = b'``; every other
  helper sends the sums ``C_j(i) + C_j(i + s^a) + ... + C_j(i + (s-1)s^a)``
  for ``i_a = 0``, reading all ``ell`` of its symbols.

The repair combines parity block rows accordingly (a selection of block
rows, or sums of ``s`` block rows) to obtain a reduced parity system of
``r*ell/s`` rows. Its unknowns are the ``ell`` symbols of the failed node
plus the ``ell/s`` reduced symbols of each non-helper; the system is square
and solved once per plan into an ``ell x d*ell/s`` repair matrix.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .codec import Codeword, apply_matrix, decode_erasures, profile_cache
from .construction import CodeProfile, digit
from .errors import RepairError, ShapeError, SingularMatrixError
from .linalg import Matrix, hstack, solve


@dataclass(frozen=True)
class SendRule:
    """What one node contributes. ``mode="raw"``: the symbols at ``indices``.
    ``mode="sum"``: for each ``i`` in ``indices`` the sum of the ``s``
    symbols ``i + e*stride``."""

    node: int
    mode: str
    indices: tuple[int, ...]
    stride: int = 0
    terms: int = 1

    @property
    def sent(self) -> int:
        return len(self.indices)

    @property
    def read_set(self) -> tuple[int, ...]:
        if self.mode == "raw":
            return self.indices
        return tuple(sorted(i + e * self.stride for i in self.indices for e in range(self.terms)))

    def matrix(self, ell: int) -> np.ndarray:
        """0/1 matrix S with S @ C_j equal to the sent symbols."""
        S = np.zeros((len(self.indices), ell), dtype=np.int64)
        for q, i in enumerate(self.indices):
            if self.mode == "raw":
                S[q, i] = 1
            else:
                S[q, [i + e * self.stride for e in range(self.terms)]] = 1
        return S

    def apply(self, node: np.ndarray) -> np.ndarray:
        node = np.asarray(node, dtype=np.int64)
        if self.mode == "raw":
            return node[list(self.indices)]
        idx = np.array(self.indices)
        out = node[idx].copy()
        for e in range(1, self.terms):
            out ^= node[idx + e * self.stride]
        return out


@dataclass(frozen=True)
class RepairPlan:
    failed: int
    helpers: tuple[int, ...]
    sends: tuple[SendRule, ...]  # one per helper, same order
    summed: bool  # variant-B last-node scheme

    def send_for(self, node: int) -> SendRule:
        for rule in self.sends:
            if rule.node == node:
                return rule
        raise KeyError(f"node {node} is not a helper of this plan")

    @property
    def key(self) -> tuple[int, tuple[int, ...]]:
        return (self.failed, self.helpers)

    def digest(self, profile: CodeProfile) -> bytes:
        body = profile.digest + self.failed.to_bytes(2, "little")
        body += b"".join(h.to_bytes(2, "little") for h in self.helpers)
        return hashlib.sha256(body).digest()


@dataclass(frozen=True)
class TransferLedger:
    read: dict
    sent: dict

    @property
    def total_read(self) -> int:
        return sum(self.read.values())

    @property
    def total_sent(self) -> int:
        return sum(self.sent.values())

    def as_dict(self) -> dict:
        return {
            "read": {str(k): v for k, v in self.read.items()},
            "sent": {str(k): v for k, v in self.sent.items()},
            "total_read": self.total_read,
            "total_sent": self.total_sent,
        }


def _send_rule(profile: CodeProfile, failed: int, node: int) -> SendRule:
    p = profile.params
    s, ell = p.s, p.ell
    a, b = p.position(failed)
    step = s**a
    if p.variant == "B" and b == s:
        na, nb = p.position(node)
        if na == a:
            return SendRule(node, "raw", tuple(i for i in range(ell) if digit(i, a, s) == nb))
        base = tuple(i for i in range(ell) if digit(i, a, s) == 0)
        return SendRule(node, "sum", base, stride=step, terms=s)
    return SendRule(node, "raw", tuple(i for i in range(ell) if digit(i, a, s) == b))


def plan_repair(profile: CodeProfile, failed: int, helpers: Sequence[int]) -> RepairPlan:
    p = profile.params
    if not 0 <= failed < p.n:
        raise ValueError(f"failed node {failed} out of range [0, {p.n})")
    hs = sorted(set(int(h) for h in helpers))
    if len(hs) != len(helpers):
        raise ValueError("duplicate helper indices")
    if failed in hs:
        raise ValueError(f"failed node {failed} cannot be its own helper")
    for h in hs:
        if not 0 <= h < p.n:
            raise ValueError(f"helper {h} out of range [0, {p.n})")
    if len(hs) < p.d:
        raise RepairError(f"repair needs exactly d={p.d} helpers, got {len(hs)}; use decode_erasures instead")
    if len(hs) > p.d:
        raise ValueError(f"repair needs exactly d={p.d} helpers, got {len(hs)}")
    summed = p.variant == "B" and p.position(failed)[1] == p.s
    return RepairPlan(failed, tuple(hs), tuple(_send_rule(profile, failed, h) for h in hs), summed)


def account(plan: RepairPlan) -> TransferLedger:
    return TransferLedger(
        read={r.node: len(r.read_set) for r in plan.sends},
        sent={r.node: r.sent for r in plan.sends},
    )


def naive_download(profile: CodeProfile) -> int:
    """Symbols moved when repair falls back to a full decode."""
    return profile.k * profile.ell


def _row_combiner(profile: CodeProfile, failed: int) -> np.ndarray:
    """W (r*ell/s x r*ell): picks or sums parity block rows."""
    p = profile.params
    s, ell, r = p.s, p.ell, p.r
    a, b = p.position(failed)
    step = s**a
    if p.variant == "B" and b == s:
        groups = [[i + e * step for e in range(s)] for i in range(ell) if digit(i, a, s) == 0]
    else:
        groups = [[i] for i in range(ell) if digit(i, a, s) == b]
    W = np.zeros((len(groups) * r, ell * r), dtype=np.int64)
    for q, rows in enumerate(groups):
        for i in rows:
            for z in range(r):
                W[q * r + z, i * r + z] = 1
    return W


def _reduced(profile: CodeProfile, W: np.ndarray, rule: SendRule) -> Matrix:
    """H-bar with W @ H_j == H-bar @ S_j, or RepairError if none exists."""
    field = profile.field
    WH = field.matmul(W, profile.parity_matrix(rule.node).data)
    S = rule.matrix(profile.ell)
    # each row of S has its first 1 in a distinct column: read H-bar off there
    reps = [int(np.flatnonzero(row)[0]) for row in S]
    Hbar = WH[:, reps]
    if not np.array_equal(field.matmul(Hbar, S), WH):
        raise RepairError(f"node {rule.node} does not reduce under the repair combination of this plan")
    return Matrix._wrap(field, Hbar)


def repair_matrix(profile: CodeProfile, plan: RepairPlan) -> Matrix:
    """``ell x d*ell/s`` matrix mapping stacked helper payloads to the failed node."""
    cache = profile_cache(profile).setdefault("repair", {})
    if plan.key in cache:
        return cache[plan.key]
    p = profile.params
    field = profile.field
    W = _row_combiner(profile, plan.failed)
    failed_block = Matrix._wrap(field, field.matmul(W, profile.parity_matrix(plan.failed).data))
    others = [j for j in range(p.n) if j != plan.failed and j not in plan.helpers]
    unknown = [failed_block] + [_reduced(profile, W, _send_rule(profile, plan.failed, j)) for j in others]
    known = hstack([_reduced(profile, W, rule) for rule in plan.sends])
    try:
        X = solve(hstack(unknown), -known)
    except SingularMatrixError as exc:
        raise RepairError(
            f"reduced parity system for node {plan.failed} with helpers {list(plan.helpers)} is singular"
        ) from exc
    R = X[: p.ell]
    cache[plan.key] = R
    return R


def helper_payload(profile: CodeProfile, plan: RepairPlan, node: int, content: np.ndarray) -> np.ndarray:
    """What helper ``node`` sends, given its stored content (ell,) or (ell, S)."""
    content = np.asarray(content, dtype=np.int64)
    if content.ndim not in (1, 2) or content.shape[0] != profile.ell:
        raise ShapeError(f"helper content must have {profile.ell} rows, got shape {content.shape}")
    return plan.send_for(node).apply(content)


def execute_repair(profile: CodeProfile, plan: RepairPlan, payloads: Mapping[int, np.ndarray], threads: int = 1) -> np.ndarray:
    """Rebuild the failed node from the helpers' payloads."""
    if set(payloads) != set(plan.helpers):
        raise ShapeError(f"payloads given for {sorted(payloads)}, plan expects {list(plan.helpers)}")
    block = profile.ell // profile.s
    arrays = [np.asarray(payloads[h], dtype=np.int64) for h in plan.helpers]
    shapes = {a.shape for a in arrays}
    if len(shapes) != 1:
        raise ShapeError("helper payloads differ in shape")
    shape = shapes.pop()
    if len(shape) not in (1, 2) or shape[0] != block:
        raise ShapeError(f"each payload must have {block} symbols per stripe, got shape {shape}")
    Y = np.concatenate(arrays, axis=0)
    return apply_matrix(profile, repair_matrix(profile, plan), Y, threads)


def repair_node(profile: CodeProfile, word: Codeword, failed: int, helpers: Sequence[int]) -> np.ndarray:
    """Plan, collect payloads from ``word`` and repair in one call."""
    plan = plan_repair(profile, failed, helpers)
    payloads = {h: helper_payload(profile, plan, h, word.nodes[h]) for h in plan.helpers}
    return execute_repair(profile, plan, payloads)


def repair_by_decode(profile: CodeProfile, word: Codeword, failed: int, helpers: Sequence[int]) -> np.ndarray:
    """Reference path: erase the failed node and all non-helpers, then decode."""
    keep = set(helpers)
    erased = [j for j in range(profile.n) if j not in keep]
    return decode_erasures(profile, word.erase(erased)).nodes[failed]
