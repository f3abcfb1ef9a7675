"""Bin-count lower bound, removable-request upper bound, and utilization.

All rational quantities are exact ``fractions.Fraction`` values; nothing here
touches floating point, so results are identical across platforms.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import floor

import numpy as np

from .model import Instance, group_rows

VARIANTS = ("as-written", "scaled")


@dataclass(frozen=True)
class Metrics:
    """Diagnostics of one reduction run.

    ``R = (n - n') / U`` measures how much of the removable mass was actually
    removed; ``K = n' / (n - U)`` compares the surviving size against the
    ideal.  Either is None when its denominator vanishes (rendered as ``nan``
    in reports).
    """

    L: Fraction
    k_del: int
    U: int
    n: int
    n_prime: int
    R: Fraction | None
    K: Fraction | None


def peak_loads(starts: np.ndarray, ends: np.ndarray, demands: np.ndarray) -> np.ndarray:
    """Per-dimension peak of the total active demand over all instants."""
    n = len(starts)
    d = demands.shape[1]
    if n == 0:
        return np.zeros(d, dtype=np.int64)
    # ends before starts at equal coordinates: a request ending at t is no
    # longer active at t, one starting at t is
    coords = np.concatenate([ends, starts])
    kinds = np.concatenate([np.zeros(n, dtype=np.int64), np.ones(n, dtype=np.int64)])
    order = np.lexsort((kinds, coords))
    peaks = np.empty(d, dtype=np.int64)
    for j in range(d):
        deltas = np.concatenate([-demands[:, j], demands[:, j]])
        running = np.cumsum(deltas[order])
        peaks[j] = running.max()
    return peaks


def lower_bound(instance: Instance) -> Fraction:
    """Peak fractional load: max over instants t and dimensions i of
    (total demand of requests active at t in dimension i) / b_i.

    Every feasible packing needs at least ceil(L) bins.  The value is
    invariant under time compression.  Event sweep, O(n log n + n d).
    """
    if instance.n == 0:
        return Fraction(0)
    peaks = peak_loads(instance.starts, instance.ends, instance.demands)
    return max(Fraction(int(peaks[j]), instance.capacity[j]) for j in range(instance.d))


def bin_budget(epsilon: Fraction, L: Fraction) -> int:
    """Deletion-bin budget floor(epsilon * L), in exact rational arithmetic."""
    if epsilon < 0:
        raise ValueError("epsilon must be non-negative")
    return floor(epsilon * L)


def removable_upper_bound_rows(
    capacity: tuple[int, ...],
    ids: np.ndarray,
    starts: np.ndarray,
    ends: np.ndarray,
    demands: np.ndarray,
    k: int,
    variant: str = "as-written",
) -> int:
    """Array core of :func:`upper_bound_removable`."""
    if variant not in VARIANTS:
        raise ValueError(f"variant must be one of {VARIANTS}")
    if k < 0:
        raise ValueError("k must be non-negative")
    n = len(ids)
    if k == 0 or n == 0:
        return 0
    table = group_rows(ids, starts, ends, demands)
    d = demands.shape[1]
    cap = np.asarray(capacity, dtype=np.int64)
    dem = table.demands
    m = table.multiplicities

    fit = np.full(len(table), np.iinfo(np.int64).max, dtype=np.int64)
    for j in range(d):
        pos = dem[:, j] > 0
        per_bin = np.floor_divide(cap[j], dem[pos, j])
        per_bin = np.minimum(per_bin, np.iinfo(np.int64).max // max(k, 1))
        fit[pos] = np.minimum(fit[pos], per_bin * k)
    p = np.minimum(m, fit)

    best = n
    for j in range(d):
        items = np.repeat(dem[:, j], p)
        items.sort()
        budget = capacity[j] * (k if variant == "scaled" else 1)
        prefix = np.cumsum(items)
        u_j = int(np.searchsorted(prefix, budget, side="right"))
        best = min(best, min(u_j, n))
    return best


def upper_bound_removable(instance: Instance, k: int, variant: str = "as-written") -> int:
    """Upper bound U on how many requests could be removed into k bins.

    Per type with multiplicity m, at most ``p = min(m, k * min_j floor(b_j / a_j))``
    of its requests fit into k bins (minimum over dimensions with a_j > 0; a
    type with all-zero demand contributes all m).  For each dimension j, the
    p-fold repeated j-components of all types are packed smallest-first
    against the budget b_j ("as-written") or k*b_j ("scaled"), ignoring other
    dimensions and time; U is the smallest per-dimension count, capped at n.

    The as-written budget can make U smaller than intuition suggests for
    k > 1; it is nevertheless the default because the utilization figures are
    defined against it.  k = 0 yields U = 0.
    """
    return removable_upper_bound_rows(
        instance.capacity,
        instance.ids,
        instance.starts,
        instance.ends,
        instance.demands,
        k,
        variant,
    )


def utilization(n: int, n_prime: int, U: int) -> tuple[Fraction | None, Fraction | None]:
    """Utilization pair (R, K); each is None where its formula is undefined
    (R when U = 0, K when U >= n)."""
    if not 0 <= n_prime <= n:
        raise ValueError("need 0 <= n_prime <= n")
    R = Fraction(n - n_prime, U) if U > 0 else None
    K = Fraction(n_prime, n - U) if U < n else None
    return R, K
