import random
from fractions import Fraction

import pytest

from dvbp import (
    bin_budget,
    compress_time,
    lower_bound,
    upper_bound_removable,
    utilization,
    validate_instance,
)

from conftest import random_common_instant_instance, random_instance


def test_lower_bound_empty():
    assert lower_bound(validate_instance((4, 6), [])) == 0


def test_lower_bound_single_request():
    inst = validate_instance((4, 6), [((2, 3), 1, 2)])
    assert lower_bound(inst) == Fraction(1, 2)


def test_lower_bound_three_requests(three_request_instance):
    assert lower_bound(three_request_instance) == Fraction(11, 10)


def test_lower_bound_compression_invariant():
    rng = random.Random(21)
    for _ in range(200):
        inst = random_instance(rng, n_max=25, t_max=100)
        comp, _ = compress_time(inst)
        assert lower_bound(comp) == lower_bound(inst)


def test_lower_bound_half_open_boundary():
    # back-to-back requests never stack: [1,2) and [2,3)
    inst = validate_instance((1,), [((1,), 1, 2), ((1,), 2, 3)])
    assert lower_bound(inst) == 1


def test_bin_budget_exact():
    assert bin_budget(Fraction("0.05"), Fraction(814)) == 40
    assert bin_budget(Fraction(1, 4), Fraction(4)) == 1
    assert bin_budget(Fraction(0), Fraction(100)) == 0
    with pytest.raises(ValueError):
        bin_budget(Fraction(-1, 2), Fraction(1))


def _u_example_instance():
    return validate_instance((10,), [((3,), 1, 2)] * 5 + [((4,), 1, 2)])


def test_upper_bound_as_written_example():
    assert upper_bound_removable(_u_example_instance(), 1) == 3


def test_upper_bound_k0():
    assert upper_bound_removable(_u_example_instance(), 0) == 0
    assert upper_bound_removable(validate_instance((1,), []), 5) == 0


def test_upper_bound_scaled_example():
    assert upper_bound_removable(_u_example_instance(), 2, "scaled") == 6


def test_upper_bound_bad_args():
    inst = _u_example_instance()
    with pytest.raises(ValueError):
        upper_bound_removable(inst, -1)
    with pytest.raises(ValueError):
        upper_bound_removable(inst, 1, "other")


def test_upper_bound_monotone_and_capped():
    rng = random.Random(31)
    for _ in range(100):
        inst = random_instance(rng, n_max=15)
        prev = 0
        for k in range(0, 6):
            for variant in ("as-written", "scaled"):
                u = upper_bound_removable(inst, k, variant)
                assert u <= inst.n
            u_def = upper_bound_removable(inst, k)
            assert u_def >= prev
            prev = u_def


def max_packable_one_bin(inst) -> int:
    """Exhaustive: largest subset feasible as a single bin."""
    n = inst.n
    best = 0
    coords = sorted({r.start for r in inst.requests})
    for mask in range(1 << n):
        size = mask.bit_count()
        if size <= best:
            continue
        ok = True
        for t in coords:
            load = [0] * inst.d
            for i, r in enumerate(inst.requests):
                if mask >> i & 1 and r.start <= t < r.end:
                    for j, a in enumerate(r.demand):
                        load[j] += a
            if any(load[j] > inst.capacity[j] for j in range(inst.d)):
                ok = False
                break
        if ok:
            best = size
    return best


def test_upper_bound_sound_on_common_instant_domain():
    rng = random.Random(41)
    for _ in range(60):
        inst = random_common_instant_instance(rng)
        u = upper_bound_removable(inst, 1)
        assert u >= max_packable_one_bin(inst)


def test_utilization_examples():
    R, K = utilization(10, 4, 8)
    assert (R, K) == (Fraction(3, 4), Fraction(2))
    R, K = utilization(10, 10, 0)
    assert R is None
    assert K == 1
    R, K = utilization(5, 0, 5)
    assert R == 1
    assert K is None
    with pytest.raises(ValueError):
        utilization(3, 4, 1)
