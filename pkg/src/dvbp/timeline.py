"""Time compression: remap event coordinates onto a minimal horizon.

The remap keeps every pairwise intersection of request intervals (and every
non-intersection), which is all that matters for packing feasibility, while
shrinking the number of distinct time instants.  Interval lengths and gaps are
deliberately not preserved.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import Instance, Request

_END = 0
_START = 1


@dataclass(frozen=True)
class TimeMap:
    """Monotone map from original event coordinates to compressed ones.

    ``originals`` is sorted ascending; ``compressed[i]`` is the image of
    ``originals[i]``.  Images fill the contiguous range 1..horizon.
    """

    originals: np.ndarray
    compressed: np.ndarray
    horizon: int

    def apply(self, coord: int) -> int:
        i = int(np.searchsorted(self.originals, coord))
        if i >= len(self.originals) or self.originals[i] != coord:
            raise KeyError(f"coordinate {coord} is not an event coordinate")
        return int(self.compressed[i])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TimeMap):
            return NotImplemented
        return (
            self.horizon == other.horizon
            and np.array_equal(self.originals, other.originals)
            and np.array_equal(self.compressed, other.compressed)
        )

    def __len__(self) -> int:
        return len(self.originals)


def compress_events(
    starts: np.ndarray, ends: np.ndarray, with_map: bool = True
) -> tuple[np.ndarray, np.ndarray, int, TimeMap | None]:
    """Array core of :func:`compress_time`; see there for semantics."""
    n = len(starts)
    if n == 0:
        empty = np.empty(0, dtype=np.int64)
        return starts, ends, 0, TimeMap(empty, empty, 0) if with_map else None

    coords = np.concatenate([ends, starts])
    kinds = np.concatenate(
        [np.full(n, _END, dtype=np.int64), np.full(n, _START, dtype=np.int64)]
    )
    order = np.lexsort((kinds, coords))
    kinds_s = kinds[order]

    # the clock advances exactly at end events directly preceded by a start
    bumps = np.zeros(2 * n, dtype=np.int64)
    bumps[1:] = (kinds_s[1:] == _END) & (kinds_s[:-1] == _START)
    values = 1 + np.cumsum(bumps)

    per_event = np.empty(2 * n, dtype=np.int64)
    per_event[order] = values
    new_ends = per_event[:n]
    new_starts = per_event[n:]
    horizon = int(values[-1])

    tmap = None
    if with_map:
        coords_s = coords[order]
        uniq, first = np.unique(coords_s, return_index=True)
        tmap = TimeMap(uniq, values[first], horizon)
    return new_starts, new_ends, horizon, tmap


def compress_time(instance: Instance) -> tuple[Instance, TimeMap]:
    """Remap all start/end coordinates onto {1..T'} with T' minimal.

    Works on the 2n events sorted by (coordinate, kind) with end events before
    start events at equal coordinates (half-open semantics: an interval ending
    where another starts stays disjoint from it).  A single sweep assigns a
    clock value to every event; the clock advances exactly at each end event
    that directly follows a start event, and each advance is forced by a
    strict inequality every valid remap must satisfy, which gives minimality.

    Ids, demands, and multiplicities are unchanged.  O(n log n).
    """
    new_starts, new_ends, _, tmap = compress_events(instance.starts, instance.ends)
    assert tmap is not None
    requests = tuple(
        Request(r.id, r.demand, int(new_starts[i]), int(new_ends[i]))
        for i, r in enumerate(instance.requests)
    )
    return Instance(instance.capacity, requests), tmap


def intersection_matrix(instance: Instance, *, max_n: int = 10_000) -> np.ndarray:
    """Symmetric boolean matrix: entry (i, j) is True iff requests i and j
    (in instance order) share a time instant, i.e. r_i < d_j and r_j < d_i.

    Quadratic; intended as a small-instance oracle, so instances beyond
    ``max_n`` requests are refused.
    """
    if instance.n > max_n:
        raise ValueError(
            f"intersection_matrix is O(n^2); refusing n={instance.n} > max_n={max_n}"
        )
    r = instance.starts
    d = instance.ends
    return (r[:, None] < d[None, :]) & (r[None, :] < d[:, None])
