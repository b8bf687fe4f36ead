import itertools

import numpy as np
import pytest

from msrcodes import repair
from msrcodes.codec import encode
from msrcodes.construction import CodeParams, CodeProfile
from msrcodes.errors import RepairError, ShapeError
from msrcodes.gf import FieldContext
from msrcodes.repair import account, execute_repair, helper_payload, plan_repair, repair_by_decode, repair_node


def random_word(prof, rng, stripes=None):
    shape = (prof.ell,) if stripes is None else (prof.ell, stripes)
    return encode(prof, [rng.integers(0, prof.field.order, shape) for _ in range(prof.k)])


def helper_sets(prof, failed):
    return list(itertools.combinations([j for j in range(prof.n) if j != failed], prof.params.d))


# -- planning ----------------------------------------------------------------


def test_plan_first_node(profile_a):
    plan = plan_repair(profile_a, 0, [1, 2, 3, 4])
    assert plan.helpers == (1, 2, 3, 4)
    for rule in plan.sends:
        assert rule.mode == "raw" and rule.indices == (0, 3, 6)


def test_plan_second_group_digit():
    prof = CodeProfile.build(CodeParams(6, 2, 4), FieldContext(5))
    plan = plan_repair(prof, 4, [0, 1, 2, 3])  # node 4 = (a=1, b=1)
    assert all(rule.indices == (3, 4, 5) for rule in plan.sends)


def test_plan_variant_b_last_node(profile_b):
    plan = plan_repair(profile_b, 3, [0, 1, 2, 4, 5, 6])
    assert plan.summed
    out = plan.send_for(4)
    assert (out.mode, out.indices, out.stride, out.terms) == ("sum", (0, 3, 6), 1, 3)
    assert out.read_set == tuple(range(9))
    c = np.arange(9) * 3 % 128
    want = [c[3 * i] ^ c[3 * i + 1] ^ c[3 * i + 2] for i in range(3)]
    assert out.apply(c).tolist() == want
    for h, b in [(0, 0), (1, 1), (2, 2)]:
        rule = plan.send_for(h)
        assert rule.mode == "raw"
        assert rule.indices == tuple(i for i in range(9) if i % 3 == b)


def test_plan_validation(profile_a):
    with pytest.raises(ValueError):
        plan_repair(profile_a, 0, [0, 1, 2, 3])
    with pytest.raises(RepairError, match="decode"):
        plan_repair(profile_a, 0, [1, 2, 3])
    with pytest.raises(ValueError):
        plan_repair(profile_a, 0, [1, 2, 3, 4, 5])
    with pytest.raises(ValueError):
        plan_repair(profile_a, 6, [1, 2, 3, 4])
    with pytest.raises(ValueError):
        plan_repair(profile_a, 0, [1, 2, 3, 9])
    with pytest.raises(ValueError):
        plan_repair(profile_a, 0, [1, 1, 2, 3])


# -- accounting --------------------------------------------------------------


def test_ledger_first_node(profile_a):
    ledger = account(plan_repair(profile_a, 0, [1, 2, 3, 4]))
    assert ledger.total_sent == 12 and ledger.total_read == 12
    assert all(v == 3 for v in ledger.sent.values())
    assert repair.naive_download(profile_a) == 18 > ledger.total_sent


def test_ledger_variant_b_last_node(profile_b):
    ledger = account(plan_repair(profile_b, 3, [0, 1, 2, 4, 5, 6]))
    assert ledger.total_sent == 18
    for h in (4, 5, 6):
        assert (ledger.read[h], ledger.sent[h]) == (9, 3)
    for h in (0, 1, 2):
        assert (ledger.read[h], ledger.sent[h]) == (3, 3)


@pytest.mark.parametrize("which", ["a", "b"])
def test_ledger_invariants(which, profile_a, profile_b):
    prof = profile_a if which == "a" else profile_b
    p = prof.params
    for f in range(p.n):
        for H in helper_sets(prof, f):
            plan = plan_repair(prof, f, H)
            ledger = account(plan)
            assert ledger.total_sent == p.d * p.ell // p.s
            assert all(v == p.ell // p.s for v in ledger.sent.values())
            for h in H:
                same_group = p.position(h)[0] == p.position(f)[0]
                if not plan.summed or same_group:
                    assert ledger.read[h] == ledger.sent[h]
                else:
                    assert ledger.read[h] == p.ell


# -- execution ---------------------------------------------------------------


def test_repair_first_node(profile_a, rng):
    word = random_word(profile_a, rng)
    plan = plan_repair(profile_a, 0, [1, 2, 3, 4])
    payloads = {h: helper_payload(profile_a, plan, h, word.nodes[h]) for h in plan.helpers}
    assert sum(len(v) for v in payloads.values()) == 12
    assert np.array_equal(execute_repair(profile_a, plan, payloads), word.nodes[0])


@pytest.mark.parametrize("which", ["a", "b"])
def test_repair_exhaustive(which, profile_a, profile_b, rng):
    prof = profile_a if which == "a" else profile_b
    word = random_word(prof, rng, stripes=3)
    cases = 0
    for f in range(prof.n):
        for H in helper_sets(prof, f):
            got = repair_node(prof, word, f, H)
            assert np.array_equal(got, word.nodes[f])
            assert np.array_equal(got, repair_by_decode(prof, word, f, H))
            cases += 1
    assert cases == (30 if which == "a" else 56)


def test_repair_zero_word(profile_a):
    word = encode(profile_a, [np.zeros(9, dtype=np.int64)] * 2)
    assert not repair_node(profile_a, word, 2, [0, 1, 3, 4]).any()


def test_repair_shortened_codes(rng):
    for params, w in [(CodeParams(5, 2, 4), 5), (CodeParams(7, 3, 5, "B"), 7)]:
        prof = CodeProfile.build(params, FieldContext(w))
        word = random_word(prof, rng, stripes=2)
        for f in range(prof.n):
            for H in helper_sets(prof, f):
                assert np.array_equal(repair_node(prof, word, f, H), word.nodes[f])


def test_repair_threads(profile_b, rng):
    word = random_word(profile_b, rng, stripes=40)
    plan = plan_repair(profile_b, 7, [0, 1, 2, 3, 4, 5])
    payloads = {h: helper_payload(profile_b, plan, h, word.nodes[h]) for h in plan.helpers}
    assert np.array_equal(execute_repair(profile_b, plan, payloads, threads=4), word.nodes[7])


def test_payload_shape_errors(profile_a, rng):
    word = random_word(profile_a, rng)
    plan = plan_repair(profile_a, 0, [1, 2, 3, 4])
    payloads = {h: helper_payload(profile_a, plan, h, word.nodes[h]) for h in plan.helpers}
    with pytest.raises(ShapeError):
        execute_repair(profile_a, plan, {h: payloads[h] for h in (1, 2, 3)})
    with pytest.raises(ShapeError):
        execute_repair(profile_a, plan, {**payloads, 1: np.zeros(4, dtype=np.int64)})
    with pytest.raises(ShapeError):
        helper_payload(profile_a, plan, 1, np.zeros(8, dtype=np.int64))
    with pytest.raises(KeyError):
        helper_payload(profile_a, plan, 5, word.nodes[5])


def test_singular_reduced_system_is_reported(profile_a):
    lams = list(profile_a.lambdas)
    lams[9] = lams[0]
    broken = profile_a.with_lambdas(lams)
    with pytest.raises(RepairError, match="singular"):
        repair.repair_matrix(broken, plan_repair(broken, 3, [1, 2, 4, 5]))


def test_plan_digest(profile_a, profile_b):
    d1 = plan_repair(profile_a, 0, [1, 2, 3, 4]).digest(profile_a)
    assert d1 == plan_repair(profile_a, 0, [4, 3, 2, 1]).digest(profile_a)
    assert d1 != plan_repair(profile_a, 0, [1, 2, 3, 5]).digest(profile_a)
    assert len(d1) == 32
