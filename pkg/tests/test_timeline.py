import random
from itertools import combinations

import numpy as np
import pytest

from dvbp import (
    compress_time,
    compute_stats,
    intersection_matrix,
    lower_bound,
    validate_instance,
)

from conftest import random_instance


def intervals(inst):
    return [(r.start, r.end) for r in inst.requests]


def min_horizon_oracle(inst) -> int:
    """Exhaustive minimum over monotone event-coordinate remaps that keep the
    intersection matrix and every interval nonempty."""
    if inst.n == 0:
        return 0
    coords = sorted({r.start for r in inst.requests} | {r.end for r in inst.requests})
    p = len(coords)
    base = intersection_matrix(inst)
    for m in range(1, p + 1):
        for breaks in combinations(range(p - 1), m - 1):
            bset = set(breaks)
            val, g = {}, 1
            for i, c in enumerate(coords):
                val[c] = g
                if i in bset:
                    g += 1
            if not all(val[r.start] < val[r.end] for r in inst.requests):
                continue
            mapped = validate_instance(
                inst.capacity, [(r.demand, val[r.start], val[r.end]) for r in inst.requests]
            )
            if np.array_equal(intersection_matrix(mapped), base):
                return m
    raise AssertionError("no valid remap found")


def test_overlapping_pair_collapses():
    inst = validate_instance((5,), [((1,), 5, 100), ((1,), 50, 200)])
    comp, tmap = compress_time(inst)
    assert intervals(comp) == [(1, 2), (1, 2)]
    assert tmap.horizon == 2


def test_disjoint_pair_shares_boundary():
    inst = validate_instance((5,), [((1,), 1, 2), ((1,), 5, 6)])
    comp, tmap = compress_time(inst)
    assert intervals(comp) == [(1, 2), (2, 3)]
    assert tmap.horizon == 3


def test_empty_instance():
    inst = validate_instance((5,), [])
    comp, tmap = compress_time(inst)
    assert comp == inst
    assert tmap.horizon == 0
    assert len(tmap) == 0


def test_time_map_is_monotone_and_contiguous():
    rng = random.Random(5)
    for _ in range(100):
        inst = random_instance(rng, n_max=20, t_max=200)
        comp, tmap = compress_time(inst)
        if inst.n == 0:
            continue
        assert np.all(np.diff(tmap.originals) > 0)
        assert np.all(np.diff(tmap.compressed) >= 0)
        assert set(int(c) for c in tmap.compressed) == set(range(1, tmap.horizon + 1))
        for r_old, r_new in zip(inst.requests, comp.requests):
            assert tmap.apply(r_old.start) == r_new.start
            assert tmap.apply(r_old.end) == r_new.end
    with pytest.raises(KeyError):
        tmap.apply(10**9)


def test_intersections_preserved_500():
    rng = random.Random(99)
    for _ in range(500):
        inst = random_instance(rng, n_max=40, t_max=60)
        comp, _ = compress_time(inst)
        assert np.array_equal(intersection_matrix(comp), intersection_matrix(inst))


def test_minimality_200():
    rng = random.Random(2024)
    for _ in range(200):
        inst = random_instance(rng, n_max=6, t_max=30)
        _, tmap = compress_time(inst)
        assert tmap.horizon == min_horizon_oracle(inst)


def test_idempotent():
    rng = random.Random(11)
    for _ in range(100):
        inst = random_instance(rng, n_max=30, t_max=50)
        comp, tmap = compress_time(inst)
        comp2, tmap2 = compress_time(comp)
        assert comp2 == comp
        assert tmap2.horizon == tmap.horizon


def test_stats_invariance_under_compression():
    rng = random.Random(13)
    for _ in range(100):
        inst = random_instance(rng, n_max=30, t_max=50)
        comp, _ = compress_time(inst)
        before, after = compute_stats(inst), compute_stats(comp)
        assert after.h == before.h
        assert after.phi == before.phi
        assert after.n == before.n
        assert after.tau <= before.tau
        assert lower_bound(comp) == lower_bound(inst)


def test_intersection_matrix_examples():
    inst = validate_instance(
        (5,), [((1,), 1, 3), ((1,), 2, 5), ((1,), 3, 5), ((1,), 2, 3)]
    )
    m = intersection_matrix(inst)
    assert m[0, 1] and m[1, 0]  # [1,3) vs [2,5)
    assert not m[0, 2]  # [1,3) vs [3,5): half-open touching
    assert m[1, 3]  # [2,5) contains [2,3)
    assert m.diagonal().all()


def test_intersection_matrix_refuses_large():
    inst = validate_instance((1,), [((0,), 0, 1)] * 20)
    with pytest.raises(ValueError, match="refusing"):
        intersection_matrix(inst, max_n=10)
