import random

import pytest

from dvbp import (
    Request,
    ValidationError,
    compute_stats,
    group_types,
    validate_instance,
)

from conftest import random_instance


def test_wellformed_input():
    inst = validate_instance((10,), [((2,), 1, 3), ((9,), 2, 4)])
    assert inst.n == 2
    assert inst.d == 1
    assert [r.id for r in inst.requests] == [0, 1]


def test_demand_exceeding_capacity_rejected():
    with pytest.raises(ValidationError, match="exceeds capacity in component 1"):
        validate_instance((10,), [((11,), 1, 2)])


def test_empty_interval_rejected_unless_dropped():
    with pytest.raises(ValidationError, match="empty interval"):
        validate_instance((10,), [((1,), 5, 5)])
    inst = validate_instance((10,), [((1,), 5, 5)], drop_empty=True)
    assert inst.n == 0


def test_reversed_interval_always_rejected():
    with pytest.raises(ValidationError, match="start 6 after end 5"):
        validate_instance((10,), [((1,), 6, 5)], drop_empty=True)


def test_negative_values_rejected():
    with pytest.raises(ValidationError):
        validate_instance((10,), [((-1,), 1, 2)])
    with pytest.raises(ValidationError, match="negative time"):
        validate_instance((10,), [((1,), -1, 2)])
    with pytest.raises(ValidationError, match="positive"):
        validate_instance((0,), [])


def test_dimension_mismatch_rejected():
    with pytest.raises(ValidationError, match="demand has 2 components"):
        validate_instance((10,), [((1, 2), 1, 2)])


def test_duplicate_ids_rejected():
    reqs = [Request(7, (1,), 1, 2), Request(7, (2,), 1, 2)]
    with pytest.raises(ValidationError, match="duplicate id"):
        validate_instance((10,), reqs)


def test_validation_collects_all_errors():
    try:
        validate_instance((10,), [((11,), 1, 2), ((1,), 3, 3)])
    except ValidationError as exc:
        assert len(exc.errors) == 2
    else:
        pytest.fail("expected ValidationError")


def test_validate_is_idempotent():
    rng = random.Random(1)
    for _ in range(50):
        inst = random_instance(rng)
        again = validate_instance(inst.capacity, inst.requests)
        assert again == inst


def test_stats_empty():
    inst = validate_instance((10,), [])
    s = compute_stats(inst)
    assert (s.n, s.T, s.h, s.phi, s.tau) == (0, 0, 0, 0, 0)


def test_stats_three_requests(three_request_instance):
    s = compute_stats(three_request_instance)
    assert (s.T, s.h, s.phi, s.tau) == (4, 2, 3, 3)
    # active counts per segment: t=1 -> {0,2}, t=2 -> {0,1}, t=3 -> {1}
    assert s.active_profile.count_at(1) == 2
    assert s.active_profile.count_at(2) == 2
    assert s.active_profile.count_at(3) == 1
    assert s.active_profile.count_at(4) == 0


def test_height_matches_bruteforce():
    rng = random.Random(42)
    for _ in range(100):
        inst = random_instance(rng, n_max=50, t_max=25)
        s = compute_stats(inst)
        brute = 0
        for t in {r.start for r in inst.requests}:
            brute = max(brute, sum(1 for r in inst.requests if r.start <= t < r.end))
        assert s.h == brute


def test_phi_tau_ordering():
    rng = random.Random(7)
    for _ in range(100):
        inst = random_instance(rng, n_max=30)
        s = compute_stats(inst)
        assert s.phi <= s.tau <= s.n


def test_group_types_identical_requests():
    inst = validate_instance((10,), [((3,), 1, 2), ((3,), 1, 2)])
    table = group_types(inst)
    assert len(table) == 1
    entry = table.entry(0)
    assert entry.multiplicity == 2
    assert sorted(entry.members) == [0, 1]


def test_group_types_same_flavor_different_type():
    inst = validate_instance((10,), [((3,), 1, 2), ((3,), 1, 3)])
    table = group_types(inst)
    assert len(table) == 2


def test_group_types_roundtrip_multiset():
    rng = random.Random(3)
    for _ in range(50):
        inst = random_instance(rng, n_max=25, b_max=3, t_max=6)
        table = group_types(inst)
        assert sum(e.multiplicity for e in table) == inst.n
        seen = []
        for e in table:
            assert len(e.members) == e.multiplicity
            for rid in e.members:
                r = inst.request(rid)
                assert (r.demand, r.start, r.end) == e.key
                seen.append(rid)
        assert sorted(seen) == sorted(r.id for r in inst.requests)
        keys = [e.key for e in table]
        assert keys == sorted(keys)
