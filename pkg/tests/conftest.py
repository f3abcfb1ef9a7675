import random

import pytest

from dvbp import Instance, validate_instance


def random_instance(
    rng: random.Random,
    n_max: int = 12,
    d_max: int = 3,
    b_max: int = 8,
    t_max: int = 20,
    n_min: int = 0,
    zero_demand: bool = True,
) -> Instance:
    """Small random instance; demands never exceed capacity."""
    n = rng.randint(n_min, n_max)
    d = rng.randint(1, d_max)
    cap = tuple(rng.randint(1, b_max) for _ in range(d))
    low = 0 if zero_demand else 1
    reqs = []
    for _ in range(n):
        demand = tuple(rng.randint(low, cap[j]) for j in range(d))
        start = rng.randint(0, t_max - 1)
        end = rng.randint(start + 1, t_max)
        reqs.append((demand, start, end))
    return validate_instance(cap, reqs)


def random_common_instant_instance(
    rng: random.Random, n_max: int = 12, d_max: int = 2, b_max: int = 8
) -> Instance:
    """Every request active at instant t*, so height equals n."""
    n = rng.randint(1, n_max)
    d = rng.randint(1, d_max)
    cap = tuple(rng.randint(1, b_max) for _ in range(d))
    t_star = rng.randint(1, 10)
    reqs = []
    for _ in range(n):
        start = rng.randint(0, t_star)
        end = rng.randint(t_star + 1, t_star + 8)
        demand = tuple(rng.randint(0, cap[j]) for j in range(d))
        reqs.append((demand, start, end))
    return validate_instance(cap, reqs)


@pytest.fixture
def three_request_instance() -> Instance:
    """b=(10) with requests (2,[1,3)), (9,[2,4)), (5,[1,2)) and ids 0,1,2."""
    return validate_instance((10,), [((2,), 1, 3), ((9,), 2, 4), ((5,), 1, 2)])
