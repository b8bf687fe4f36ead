import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from msrcodes import construction
from msrcodes.construction import (
    CodeParams,
    CodeProfile,
    build_group_swap,
    build_kernel,
    build_L,
    build_parity_matrix,
    check_global_constraints,
    check_local_constraints,
    count_selections,
    enumerate_selections,
    index_digits,
    kernel_subset_matrix,
    select_lambdas,
)
from msrcodes.errors import CapacityError, FormatError, SearchFailureError
from msrcodes.gf import FieldContext
from msrcodes.linalg import det

import golden
from oracles import RefField, ref_parity_matrix


# -- parameters -------------------------------------------------------------


def test_params_derived_values():
    p = CodeParams(6, 2, 4, "A")
    assert (p.r, p.s, p.group_size, p.groups, p.ell) == (4, 3, 3, 2, 9)
    assert p.field_bound == 36
    b = CodeParams(8, 4, 6, "B")
    assert (b.s, b.group_size, b.groups, b.ell, b.lambda_count) == (3, 4, 2, 9, 24)
    assert b.field_bound == 96


def test_params_validation():
    with pytest.raises(ValueError):
        CodeParams(6, 2, 2)  # d < k+1
    with pytest.raises(ValueError):
        CodeParams(6, 2, 6)  # d > n-1
    with pytest.raises(ValueError):
        CodeParams(6, 2, 4, "C")
    with pytest.raises(CapacityError):
        CodeParams(40, 20, 21)  # ell = 2^20


def test_shortened_params():
    p = CodeParams(5, 2, 4, "A")
    assert (p.n_ext, p.dropped, p.ell) == (6, 1, 9)
    assert CodeParams(7, 3, 5, "B").n_ext == 8


# -- golden parity matrices -------------------------------------------------


@pytest.mark.parametrize("node", range(6))
def test_parity_matrix_matches_transcription(profile_a, node):
    bm = build_parity_matrix(profile_a, node)
    assert bm.entries == golden.ENTRIES[node]


def test_golden_spot_checks(profile_a):
    H = [build_parity_matrix(profile_a, i) for i in range(6)]
    assert H[0].entry(0, 1) == (-1, 1)
    assert H[3].entry(0, 3) == (-1, 10)
    assert H[3].entry(1, 0) == (0, None)
    assert H[0].entry(0, 3) == (0, None)


def test_realized_matrices_match_oracle(profile_a, ref32):
    lams = profile_a.lambdas
    for node in range(6):
        want = ref_parity_matrix(ref32, lams, 3, 2, 3, node, 4)
        assert profile_a.parity_matrix(node).tolist() == want


def test_variant_b_matches_oracle(profile_b):
    ref = RefField(profile_b.field.poly)
    for node in range(8):
        want = ref_parity_matrix(ref, profile_b.lambdas, 3, 2, 4, node, 4)
        assert profile_b.parity_matrix(node).tolist() == want


def test_entries_vanish_off_single_digit(profile_a, profile_b):
    for prof in (profile_a, profile_b):
        p = prof.params
        for node in range(p.n):
            for (i, j) in build_parity_matrix(prof, node).entries:
                di = index_digits(i, p.s, p.groups)
                dj = index_digits(j, p.s, p.groups)
                assert sum(x != y for x, y in zip(di, dj)) <= 1


# -- lambda vectors and kernels ---------------------------------------------


def test_build_L(profile_a):
    assert build_L(profile_a, 2, 4) == [0x01, 0x04, 0x10, 0x0A]
    assert build_L(profile_a, 0, 4) == [1, 1, 1, 1]
    for i in range(18):
        assert build_L(profile_a, i, 1) == [1]
    with pytest.raises(IndexError):
        build_L(profile_a, 18, 4)


def test_kernel_top_pattern(profile_a):
    K = build_kernel(profile_a, 0, 1)
    assert K.block_rows == 3
    assert K.entries == {(0, 0): (1, 3), (1, 0): (-1, 3), (1, 1): (1, 4), (1, 2): (-1, 5), (2, 2): (1, 5)}


def test_kernel_last_node_of_b_group_is_diagonal(profile_b):
    for a in range(2):
        K = build_kernel(profile_b, a, 3)
        assert all(i == j for (i, j) in K.entries)
        assert len(K.entries) == K.block_rows


def test_kernel_degree_zero_det_is_one(profile_a, profile_b):
    for prof in (profile_a, profile_b):
        for a in range(prof.params.groups):
            for b in range(prof.params.group_size):
                assert det(build_kernel(prof, a, b).realize(prof, 1)) == 1
    with pytest.raises(IndexError):
        build_kernel(profile_a, 2, 0)


# -- lambda search ----------------------------------------------------------


def test_search_reproduces_theta_powers(gf32):
    lams = select_lambdas(CodeParams(6, 2, 4), gf32)
    assert lams == tuple(gf32.theta_power(i) for i in range(18))


def test_search_variant_b(profile_b):
    assert len(set(profile_b.lambdas)) == 24
    for a in range(2):
        rep = check_local_constraints(profile_b, a)
        assert rep.passed and rep.checked == 15


def test_search_capacity_error():
    with pytest.raises(CapacityError, match="36"):
        select_lambdas(CodeParams(6, 2, 4), FieldContext(4))


def test_search_failure(gf32, monkeypatch):
    monkeypatch.setattr(construction, "_window_ok", lambda *a: False)
    with pytest.raises(SearchFailureError, match="36"):
        select_lambdas(CodeParams(6, 2, 4), gf32)


def test_search_is_deterministic():
    f = FieldContext(7)
    assert select_lambdas(CodeParams(8, 4, 6, "B"), f) == select_lambdas(CodeParams(8, 4, 6, "B"), FieldContext(7))


# -- constraints ------------------------------------------------------------


def test_local_constraints(profile_a):
    for a in range(2):
        rep = check_local_constraints(profile_a, a)
        assert rep.passed and rep.checked == 7


def test_singleton_subsets_always_pass(gf32, rng):
    for _ in range(5):
        lams = rng.choice(np.arange(1, 32), 18, replace=False).tolist()
        prof = CodeProfile(CodeParams(6, 2, 4), gf32, lams, check=False)
        for a in range(2):
            rep = check_local_constraints(prof, a)
            assert not any(len(B) == 1 for B in rep.failures)


def test_duplicate_lambda_in_group_fails_locally(profile_a):
    lams = list(profile_a.lambdas)
    lams[3] = lams[1]  # column 0 of node 1 now equals column 1 of node 0
    prof = profile_a.with_lambdas(lams)
    rep = check_local_constraints(prof, 0)
    assert not rep.passed
    assert any(len(B) == 2 for B in rep.failures)
    with pytest.raises(ValueError):
        profile_a.with_lambdas(lams, check=True)


def test_global_constraints(profile_a):
    rep = check_global_constraints(profile_a)
    assert rep.passed and rep.checked == 56
    sels = list(enumerate_selections(profile_a.params, 4))
    full = {tuple(a * 3 + b for a, B in s for b in B) for s in sels if sum(len(B) for _, B in s) == 4}
    assert full == set(itertools.combinations(range(6), 4))


def test_global_single_group_is_local(profile_a):
    lams = list(profile_a.lambdas)
    lams[3] = lams[1]
    broken = profile_a.with_lambdas(lams)
    for prof in (profile_a, broken):
        for sel in enumerate_selections(prof.params, 3):
            if len(sel) != 1:
                continue
            a, B = sel[0]
            glob = det(prof.subset_matrix(a, B, len(B))) != 0
            loc = det(kernel_subset_matrix(prof, a, B, len(B))) != 0
            assert glob == loc
    assert not check_global_constraints(broken, t_max=2).passed


def test_duplicate_lambda_across_groups_detected(profile_a):
    lams = list(profile_a.lambdas)
    lams[9] = lams[0]
    prof = profile_a.with_lambdas(lams)
    rep = check_global_constraints(prof)
    assert not rep.passed and rep.failures
    assert not prof.certified


def test_global_budget(profile_a):
    with pytest.raises(CapacityError):
        check_global_constraints(profile_a, budget=10)
    with pytest.raises(ValueError):
        check_global_constraints(profile_a, t_max=5)


@pytest.mark.parametrize("params", [CodeParams(6, 2, 4), CodeParams(8, 4, 6, "B"), CodeParams(9, 3, 5)])
def test_count_selections(params):
    for t in range(1, params.r + 1):
        assert count_selections(params, t) == len(list(enumerate_selections(params, t)))


# -- permutations -----------------------------------------------------------


def test_group_swap():
    p = CodeParams(6, 2, 4)
    P = build_group_swap(p, 1, 0)
    assert (P(3), P(1)) == (1, 3)
    assert all(P(i) == i for i in (0, 4, 8))
    assert P.compose(P).is_identity()
    assert build_group_swap(p, 1, 1).is_identity()
    with pytest.raises(IndexError):
        build_group_swap(p, 0, 2)


def test_swap_groups_profile(profile_a):
    sw = profile_a.swap_groups(0, 1)
    assert sw.lambdas[:9] == profile_a.lambdas[9:]
    assert sw.swap_groups(0, 1).lambdas == profile_a.lambdas


# -- serialization ----------------------------------------------------------


def test_profile_round_trip(profile_a, profile_b):
    for prof in (profile_a, profile_b):
        raw = prof.to_bytes()
        back = CodeProfile.from_bytes(raw)
        assert back.lambdas == prof.lambdas and back.params == prof.params
        assert back.field == prof.field and back.digest == prof.digest
        assert raw[:4] == b"MSRP" and len(raw) == 21 + len(prof.lambdas) + 32


def test_profile_layout_is_canonical(profile_a):
    raw = profile_a.to_bytes()
    assert raw[4] == 1 and raw[5:6] == b"A"
    assert int.from_bytes(raw[6:8], "little") == 6
    assert raw[12] == 5 and int.from_bytes(raw[13:17], "little") == 0x25
    assert list(raw[21:39]) == [profile_a.field.theta_power(i) for i in range(18)]


def test_profile_rejects_damage(profile_a):
    raw = bytearray(profile_a.to_bytes())
    with pytest.raises(FormatError):
        CodeProfile.from_bytes(b"XXXX" + bytes(raw[4:]))
    bad = bytearray(raw)
    bad[25] ^= 1
    with pytest.raises(FormatError, match="digest"):
        CodeProfile.from_bytes(bytes(bad))
    with pytest.raises(FormatError):
        CodeProfile.from_bytes(bytes(raw[:10]))


def test_profile_rejects_wrong_lambda_count(gf32):
    with pytest.raises(ValueError):
        CodeProfile(CodeParams(6, 2, 4), gf32, [1, 2, 3])


# -- properties -------------------------------------------------------------

_SMALL = [CodeParams(4, 2, 3), CodeParams(6, 2, 4), CodeParams(6, 3, 5, "B"), CodeParams(6, 3, 4), CodeParams(5, 2, 3, "B")]


@settings(max_examples=25, deadline=None)
@given(st.sampled_from(_SMALL), st.integers(0, 2**32 - 1))
def test_block_law_matches_oracle_on_random_lambdas(params, seed):
    field = FieldContext(6)
    rng = np.random.default_rng(seed)
    lams = rng.choice(np.arange(1, 64), params.lambda_count, replace=False).tolist()
    prof = CodeProfile(params, field, lams, check=False)
    ref = RefField(field.poly)
    g = params.group_size
    for node in range(params.n):
        want = ref_parity_matrix(ref, lams, params.s, params.groups, g, node, params.r)
        assert prof.parity_matrix(node).tolist() == want
