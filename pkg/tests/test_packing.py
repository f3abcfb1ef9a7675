import math
import random
from fractions import Fraction

import numpy as np
import pytest

import dvbp.packing as packing_mod
from dvbp import (
    Packing,
    greedy_pack_bin,
    heuristic_solve,
    lower_bound,
    priority,
    validate_instance,
    verify_packing,
)

from conftest import random_instance


def reference_greedy(inst, candidate_ids, mode):
    """Literal one-request-at-a-time greedy, exact rational priorities."""
    T = inst.horizon()
    S = {t: list(inst.capacity) for t in range(T + 1)}
    reqs = [inst.request(c) for c in candidate_ids]
    reqs.sort(key=lambda r: (0, 0, r.id) if not any(r.demand) else
              (1, -priority(r, inst.capacity, T, mode), r.id))
    packed = []
    for r in reqs:
        if all(
            all(a <= S[t][j] for j, a in enumerate(r.demand))
            for t in range(r.start, r.end)
        ):
            for t in range(r.start, r.end):
                for j, a in enumerate(r.demand):
                    S[t][j] -= a
            packed.append(r.id)
    return sorted(packed), S


def duplicate_heavy_instance(rng):
    """Random instance with many repeated types to exercise run batching."""
    d = rng.randint(1, 2)
    cap = tuple(rng.randint(2, 6) for _ in range(d))
    pool = []
    for _ in range(rng.randint(1, 4)):
        demand = tuple(rng.randint(0, cap[j]) for j in range(d))
        start = rng.randint(0, 6)
        end = rng.randint(start + 1, 8)
        pool.append((demand, start, end))
    reqs = [rng.choice(pool) for _ in range(rng.randint(1, 25))]
    return validate_instance(cap, reqs)


def test_priority_values():
    inst = validate_instance((10,), [((2,), 1, 3), ((9,), 2, 4), ((5,), 1, 2)])
    r0, r1, r2 = inst.requests
    assert priority(r0, (10,), 4, "alpha") == 5
    assert priority(r0, (10,), 4, "f1") == Fraction(21, 4)
    assert priority(r0, (10,), 4, "f2") == 10
    assert priority(r1, (10,), 4, "alpha") == 1
    assert priority(r1, (10,), 4, "f2") == 2
    assert priority(r2, (10,), 4, "alpha") == 2
    assert priority(r2, (10,), 4, "f1") == Fraction(5, 2)
    assert priority(r2, (10,), 4, "f2") == 8


def test_priority_zero_demand_is_infinite():
    inst = validate_instance((10, 5), [((0, 0), 1, 4)])
    assert priority(inst.requests[0], (10, 5), 4, "f2") == math.inf


def test_priority_rejects_bad_mode():
    inst = validate_instance((10,), [((2,), 1, 3)])
    with pytest.raises(ValueError):
        priority(inst.requests[0], (10,), 4, "best-fit")


def test_greedy_example_order_and_result(three_request_instance):
    packed = greedy_pack_bin(three_request_instance, [0, 1, 2], "f2")
    assert packed == [0, 2]


def test_greedy_single_request():
    inst = validate_instance((10,), [((7,), 2, 9)])
    assert greedy_pack_bin(inst, [0]) == [0]


def test_greedy_empty_candidates(three_request_instance):
    assert greedy_pack_bin(three_request_instance, []) == []


@pytest.mark.parametrize("mode", ["alpha", "f1", "f2"])
def test_greedy_matches_reference(mode):
    rng = random.Random({"alpha": 101, "f1": 202, "f2": 303}[mode])
    for _ in range(150):
        inst = duplicate_heavy_instance(rng)
        ids = [r.id for r in inst.requests]
        got = greedy_pack_bin(inst, ids, mode)
        want, _ = reference_greedy(inst, ids, mode)
        assert got == want


def test_greedy_python_kernel_matches_jitted(monkeypatch):
    rng = random.Random(505)
    instances = [duplicate_heavy_instance(rng) for _ in range(30)]
    results = [greedy_pack_bin(i, [r.id for r in i.requests]) for i in instances]
    monkeypatch.setattr(packing_mod, "_pack_kernel", packing_mod._pack_kernel_py)
    redo = [greedy_pack_bin(i, [r.id for r in i.requests]) for i in instances]
    assert redo == results


def test_greedy_feasible_and_maximal():
    rng = random.Random(61)
    for _ in range(200):
        inst = random_instance(rng, n_max=20, t_max=15)
        if inst.n == 0:
            continue
        ids = [r.id for r in inst.requests]
        mode = rng.choice(["alpha", "f1", "f2"])
        packed, residual = reference_greedy(inst, ids, mode)
        assert greedy_pack_bin(inst, ids, mode) == packed
        if packed:
            one_bin = Packing({rid: 1 for rid in packed}, 1)
            assert verify_packing(inst, one_bin).feasible
        for rid in set(ids) - set(packed):
            r = inst.request(rid)
            assert any(
                a > residual[t][j]
                for t in range(r.start, r.end)
                for j, a in enumerate(r.demand)
            ), f"unpacked request {rid} still fits the final residual"


def test_f1_prefers_shorter_spans_within_equal_alpha():
    # equal alpha=2, spans 5 and 1; only one fits at the shared instant
    inst = validate_instance((4,), [((2,), 0, 5), ((2,), 4, 5), ((2,), 4, 5), ((2,), 0, 5)])
    packed = greedy_pack_bin(inst, [0, 1, 2, 3], "f1")
    assert packed == [1, 2]


def test_all_zero_demand_requests_always_pack():
    inst = validate_instance((3,), [((0,), 0, 9), ((3,), 0, 9), ((3,), 0, 9), ((0,), 2, 5)])
    packed = greedy_pack_bin(inst, [0, 1, 2, 3], "f2")
    assert 0 in packed and 3 in packed
    assert len(packed) == 3


def test_verify_packing_examples(three_request_instance):
    good = Packing({0: 1, 2: 1, 1: 2}, 2)
    rep = verify_packing(three_request_instance, good)
    assert rep.feasible and rep.complete and not rep.violations

    bad = Packing({0: 1, 1: 1, 2: 1}, 1)
    rep = verify_packing(three_request_instance, bad)
    assert not rep.feasible
    v = rep.violations[0]
    assert (v.bin, v.t, v.dim, v.overload) == (1, 2, 1, 1)

    empty = Packing({}, 0)
    rep = verify_packing(validate_instance((1,), []), empty)
    assert rep.feasible and rep.complete


def test_verify_packing_unknown_id(three_request_instance):
    with pytest.raises(ValueError, match="unknown request ids"):
        verify_packing(three_request_instance, Packing({9: 1}, 1))


def test_verify_packing_partial(three_request_instance):
    rep = verify_packing(three_request_instance, Packing({0: 1}, 1))
    assert rep.feasible and not rep.complete
    assert rep.missing == (1, 2)


def test_packing_bin_contiguity_enforced():
    with pytest.raises(ValueError, match="bin indices"):
        Packing({0: 2}, 2)
    assert Packing.from_bins([[0, 1], [], [2]]).k == 2


def test_heuristic_solve_examples(three_request_instance):
    assert heuristic_solve(validate_instance((1,), [])).k == 0
    p = heuristic_solve(three_request_instance, "f2")
    assert p.k == 2
    n_overlap = validate_instance((1,), [((1,), 0, 5)] * 4)
    assert heuristic_solve(n_overlap).k == 4


def test_heuristic_solve_contracts():
    rng = random.Random(71)
    for _ in range(100):
        inst = random_instance(rng, n_max=25)
        p = heuristic_solve(inst, rng.choice(["alpha", "f1", "f2"]))
        rep = verify_packing(inst, p)
        assert rep.feasible and rep.complete
        assert p.k >= math.ceil(lower_bound(inst))
        assert p.k <= max(inst.n, 0) or inst.n == 0


def test_packing_serialization_roundtrip():
    from dvbp.packing import (
        packing_from_csv,
        packing_from_json,
        packing_to_csv,
        packing_to_json,
    )

    p = Packing({3: 1, 1: 2, 7: 1}, 2)
    assert packing_from_csv(packing_to_csv(p)) == p
    assert packing_from_json(packing_to_json(p)) == p
    with pytest.raises(ValueError, match="header"):
        packing_from_csv("id,bin\n1,1\n")
