"""Elimination matrices that reduce cross-group determinants to in-group ones.

For group ``a``, subset ``B`` (``v = |B|``) and a target length ``t > v``
the kernel stack ``K^(t)`` (``st x sv``, group-0 form) is row-reduced by an
``st x st`` matrix ``E`` into ``[K^(v); 0]``. The same ``E`` sends each
``I_s (x) L_x^(t)`` to ``[I_s (x) L_x^(v); F(lam_x) (x) L_x^(t-v)]`` for an
``s x s`` matrix ``F(lam_x)`` that is singular exactly when ``lam_x`` belongs
to one of the nodes in ``B``. Lifting ``E`` to ``M = Perm (I_{ell/s} (x) E)``
(conjugated by a digit swap when ``a > 0``) triangularizes a whole cross-group
selection, so its determinant factors into a local determinant times the
determinant of a smaller selection.

Everything here is a verifier: each identity is checked exactly and a
failure raises :class:`CertificateError` naming it.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Sequence

import numpy as np

from .construction import (
    BlockMatrix,
    CodeProfile,
    Selection,
    build_group_swap,
    digit,
    law_entries,
    selection_matrix,
)
from .errors import MSRError, SingularMatrixError
from .linalg import Matrix, Permutation, block_diag, det, hstack, inverse, kron, solve, vstack


class CertificateError(MSRError):
    kind = "certificate"


@dataclass
class EliminationCertificate:
    group: int
    subset: tuple[int, ...]
    v: int
    t: int
    E: Matrix  # st x st, group-0 form, rows already permuted
    E_star: Matrix  # s x st, the coefficient rows e_p
    M: Matrix  # ell*t x ell*t
    F: dict[int, Matrix] = dc_field(default_factory=dict)  # lambda index -> s x s
    singular: frozenset = frozenset()  # lambda indices with det F == 0


def permutation_sign(P: Permutation) -> int:
    """+1 or -1 by cycle parity."""
    seen = [False] * P.size
    parity = 0
    for i in range(P.size):
        if seen[i]:
            continue
        j, length = i, 0
        while not seen[j]:
            seen[j] = True
            j = P.image[j]
            length += 1
        parity += length - 1
    return -1 if parity % 2 else 1


def _kernel_stack(profile: CodeProfile, a: int, B: Sequence[int], t: int) -> Matrix:
    """K_{0,B}^(t) in group-0 form (s*t x s*v), built with group a's lambdas."""
    p = profile.params
    s = p.s
    base = p.lambda_base(a)
    return hstack([BlockMatrix(s, s, law_entries(s, s, 0, b, base)).realize(profile, t) for b in B])


def _eye_kron_L(profile: CodeProfile, x: int, t: int) -> Matrix:
    """I_s (x) L_x^(t)  (s*t x s)."""
    L = Matrix._wrap(profile.field, profile.powers(t)[x].reshape(-1, 1).copy())
    return kron(Matrix.identity(profile.field, profile.s), L)


def in_group_lambdas(profile: CodeProfile, a: int, B: Sequence[int]) -> frozenset:
    p = profile.params
    return frozenset(p.lambda_index(a, b, j) for b in B for j in range(p.s))


def _row_order(s: int, t: int, v: int) -> Permutation:
    """Rows {p*t + j : j < v} first (p-major), then {p*t + v + c}."""
    top = [q * t + j for q in range(s) for j in range(v)]
    bottom = [q * t + v + c for q in range(s) for c in range(t - v)]
    return Permutation(top + bottom)


def _lift_order(blocks: int, st: int, sv: int) -> Permutation:
    """Within I_blocks (x) E, first the top sv rows of every block, then the rest."""
    top = [w * st + q for w in range(blocks) for q in range(sv)]
    bottom = [w * st + q for w in range(blocks) for q in range(sv, st)]
    return Permutation(top + bottom)


def build_elimination(profile: CodeProfile, a: int, B: Sequence[int], t: int) -> EliminationCertificate:
    p = profile.params
    field = profile.field
    s, ell = p.s, p.ell
    B = tuple(sorted(B))
    v = len(B)
    if not B or len(set(B)) != v or not all(0 <= b < p.group_size for b in B):
        raise ValueError(f"bad subset {B} for group size {p.group_size}")
    if not 0 <= a < p.groups:
        raise IndexError(f"group {a} out of range")
    if t <= v:
        raise ValueError(f"target length t={t} must exceed |B|={v}: nothing to eliminate")
    st, sv = s * t, s * v

    Kt = _kernel_stack(profile, a, B, t)
    Kv = _kernel_stack(profile, a, B, v)
    top_rows = [q * t + j for q in range(s) for j in range(v)]
    if Kt[top_rows, :] != Kv:
        raise CertificateError("kernel rows {p*t + j : j < v} do not reproduce K^(v)")

    # e_p: write row p*t + v of K^(t) in terms of the top rows, i.e. solve c K^(v) = row
    try:
        coeff = solve(Kv.T, Matrix._wrap(field, Kt.data[[q * t + v for q in range(s)]].T.copy())).T
    except SingularMatrixError as exc:
        raise CertificateError(f"K^(v) of group {a}, subset {B} is singular (local constraint fails)") from exc
    E_star = np.zeros((s, st), dtype=np.int64)
    for q in range(s):
        E_star[q, q * t + v] = 1
        E_star[q, top_rows] = (-coeff[q : q + 1, :]).data[0]
    E_star = Matrix._wrap(field, E_star)
    if not (E_star @ Kt).is_zero():
        raise CertificateError("E* K^(t) != 0")

    # shifted copies of e_p replace rows p*t + v + c of the identity
    E = np.eye(st, dtype=np.int64)
    for q in range(s):
        segs = E_star.data[q].reshape(s, t)
        for c in range(t - v):
            E[q * t + v + c] = np.roll(segs, c, axis=1).reshape(-1)
    E = Matrix._wrap(field, E)
    order = _row_order(s, t, v)
    E0 = Matrix._wrap(field, E.data[list(order.image)])

    zero = Matrix.zeros(field, st - sv, sv)
    if E0 @ Kt != vstack([Kv, zero]):
        raise CertificateError("kernel identity E K^(t) = [K^(v); 0] fails")

    inside = in_group_lambdas(profile, a, B)
    F: dict[int, Matrix] = {}
    singular = set()
    for x in range(p.lambda_count):
        IL = _eye_kron_L(profile, x, t)
        Fx = E_star @ IL
        want = vstack([_eye_kron_L(profile, x, v), kron(Fx, Matrix._wrap(field, profile.powers(t - v)[x].reshape(-1, 1).copy()))])
        if E0 @ IL != want:
            raise CertificateError(f"lambda identity E (I (x) L^(t)) = [I (x) L^(v); F (x) L^(t-v)] fails for lambda index {x}")
        F[x] = Fx
        if det(Fx) == 0:
            singular.add(x)
    if singular != inside:
        raise CertificateError(
            f"singularity dichotomy: F singular on {sorted(singular)}, expected exactly {sorted(inside)}"
        )

    blocks = ell // s
    lifted = np.kron(np.eye(blocks, dtype=np.int64), E0.data)
    Mbar = lifted[list(_lift_order(blocks, st, sv).image)]
    if a > 0:
        P = build_group_swap(p, a, 0)
        left = block_diag([P.kron_identity(v).matrix(field), Matrix.identity(field, ell * (t - v))])
        M = left @ Matrix._wrap(field, Mbar) @ P.kron_identity(t).matrix(field)
    else:
        M = Matrix._wrap(field, Mbar)

    cert = EliminationCertificate(a, B, v, t, E0, E_star, M, F, frozenset(singular))
    top = profile.subset_matrix(a, B, v)
    if M @ profile.subset_matrix(a, B, t) != vstack([top, Matrix.zeros(field, ell * (t - v), top.cols)]):
        raise CertificateError("lifted identity M A^(t) = [A^(v); 0] fails")
    return cert


def _det_M(profile: CodeProfile, cert: EliminationCertificate) -> int:
    """det M from its factors: permutation signs and det(E)^(ell/s)."""
    p = profile.params
    field = profile.field
    s, ell, t, v = p.s, p.ell, cert.t, cert.v
    sign = permutation_sign(_lift_order(ell // s, s * t, s * v))
    d = field.pow(det(cert.E), ell // s)
    if cert.group > 0:
        P = build_group_swap(p, cert.group, 0)
        sign *= permutation_sign(P.kron_identity(v)) * permutation_sign(P.kron_identity(t))
    return field.neg(d) if sign < 0 else d


def column_witness(profile: CodeProfile, cert: EliminationCertificate, node: int) -> Matrix:
    """Q with (bottom rows of M A_node^(t)) Q == A_node^(t-v).

    Block-diagonal in s-column blocks, the block for column block y being
    F(lam)^-1 for the lambda that block uses; composed with the digit swap
    of the certificate's group when it is not group 0."""
    p = profile.params
    field = profile.field
    s, ell = p.s, p.ell
    na, nb = p.position(node)
    if na <= cert.group:
        raise ValueError(f"node {node} does not lie in a group after {cert.group}")
    blocks = [inverse(cert.F[p.lambda_index(na, nb, digit(y * s, na, s))]) for y in range(ell // s)]
    Q = block_diag(blocks)
    if cert.group > 0:
        Q = build_group_swap(p, cert.group, 0).matrix(field) @ Q
    return Q


@dataclass
class ReductionReport:
    selection: Selection
    passed: bool
    direct: int
    factorized: int
    steps: int
    detail: str = ""


def _factorized_det(profile: CodeProfile, selection: Selection, t: int) -> tuple[int, int]:
    """Determinant of the selection at length t via the triangular reduction.

    Returns (det, steps)."""
    p = profile.params
    field = profile.field
    ell = p.ell
    (a0, B0), rest = selection[0], selection[1:]
    v = len(B0)
    if not rest:
        return det(profile.subset_matrix(a0, B0, t)), 0
    cert = build_elimination(profile, a0, B0, t)
    G = selection_matrix_at(profile, selection, t)
    X = cert.M @ G
    lv = ell * v
    if not X[lv:, :lv].is_zero():
        raise CertificateError(f"lower-left block of M G is not zero for {selection}")
    if X[:lv, :lv] != profile.subset_matrix(a0, B0, v):
        raise CertificateError(f"top-left block of M G is not A^(v) for {selection}")
    want_top = hstack([profile.subset_matrix(a, B, v) for a, B in rest])
    if X[:lv, lv:] != want_top:
        raise CertificateError(f"top-right block of M G is not the truncated rest for {selection}")
    hat = X[lv:, lv:]
    det_q = 1
    col = 0
    for a, B in rest:
        for b in B:
            node = a * p.group_size + b
            Q = column_witness(profile, cert, node)
            block = hat[:, col : col + ell]
            if block @ Q != profile.node_matrix(node, t - v):
                raise CertificateError(f"column witness fails for node {node} in {selection}")
            det_q = field.mul(det_q, det(Q))
            col += ell
    rest_det, steps = _factorized_det(profile, rest, t - v)
    # det(hat) * det(Q) = det(rest at t - v)
    det_hat = field.div(rest_det, det_q)
    total = field.div(field.mul(det(profile.subset_matrix(a0, B0, v)), det_hat), _det_M(profile, cert))
    return total, steps + 1


def selection_matrix_at(profile: CodeProfile, selection: Selection, t: int) -> Matrix:
    return hstack([profile.subset_matrix(a, B, t) for a, B in selection])


def verify_triangular_reduction(profile: CodeProfile, selection: Selection) -> ReductionReport:
    selection = tuple((int(a), tuple(sorted(B))) for a, B in selection)
    groups = [a for a, _ in selection]
    if groups != sorted(set(groups)):
        raise ValueError("selection groups must be distinct and increasing")
    t = sum(len(B) for _, B in selection)
    if not 1 <= t <= profile.r:
        raise ValueError(f"total subset size {t} must be in [1, r={profile.r}]")
    direct = det(selection_matrix(profile, selection))
    try:
        fact, steps = _factorized_det(profile, selection, t)
    except (CertificateError, SingularMatrixError, ZeroDivisionError) as exc:
        return ReductionReport(selection, False, direct, 0, 0, str(exc))
    ok = fact != 0 and fact == direct
    detail = "" if ok else f"factorized {fact:#x} vs direct {direct:#x}"
    return ReductionReport(selection, ok, direct, fact, steps, detail)
