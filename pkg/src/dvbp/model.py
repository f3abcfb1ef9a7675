"""Instance model for dynamic vector bin packing (DVBP).

An instance is a bin capacity vector ``b`` in N^d plus ``n`` requests, each
with a demand vector in N^d and a half-open activity interval ``[start, end)``
(a request is active at every integer instant ``t`` with ``start <= t < end``).
The goal downstream is a partition of the requests into a minimum number of
bins so that the component-wise load of every bin stays within ``b`` at every
time instant.

Instances are immutable after validation; every function here is pure, so
shared instances are safe to use from multiple threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Sequence

import numpy as np

ResourceVector = tuple[int, ...]
FlavorKey = tuple[int, ...]
TypeKey = tuple[tuple[int, ...], int, int]


class ValidationError(ValueError):
    """Raised when raw input cannot form a valid instance.

    Carries the full list of collected problems in ``errors``.
    """

    def __init__(self, errors: Sequence[str]):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


@dataclass(frozen=True)
class Request:
    """One request: stable id, demand vector, half-open interval [start, end)."""

    id: int
    demand: ResourceVector
    start: int
    end: int

    @property
    def span(self) -> int:
        return self.end - self.start

    @property
    def flavor(self) -> FlavorKey:
        return self.demand

    @property
    def type_key(self) -> TypeKey:
        return (self.demand, self.start, self.end)


@dataclass(frozen=True)
class Instance:
    """A validated DVBP instance: capacity vector plus an ordered request list.

    Request ids are unique and survive every transformation (compression,
    reduction), so downstream certificates and packings always refer to the
    original requests.
    """

    capacity: ResourceVector
    requests: tuple[Request, ...]

    @property
    def d(self) -> int:
        return len(self.capacity)

    @property
    def n(self) -> int:
        return len(self.requests)

    @cached_property
    def ids(self) -> np.ndarray:
        return np.fromiter((r.id for r in self.requests), dtype=np.int64, count=self.n)

    @cached_property
    def starts(self) -> np.ndarray:
        return np.fromiter((r.start for r in self.requests), dtype=np.int64, count=self.n)

    @cached_property
    def ends(self) -> np.ndarray:
        return np.fromiter((r.end for r in self.requests), dtype=np.int64, count=self.n)

    @cached_property
    def demands(self) -> np.ndarray:
        out = np.empty((self.n, self.d), dtype=np.int64)
        for i, r in enumerate(self.requests):
            out[i] = r.demand
        return out

    @cached_property
    def index_of(self) -> dict[int, int]:
        """Map request id -> position in ``requests``."""
        return {r.id: i for i, r in enumerate(self.requests)}

    def request(self, request_id: int) -> Request:
        return self.requests[self.index_of[request_id]]

    def horizon(self) -> int:
        """Largest end coordinate (0 for an empty instance)."""
        return int(self.ends.max()) if self.n else 0

    def subset(self, keep_ids: Iterable[int]) -> "Instance":
        """Sub-instance with the given ids, preserving request order."""
        keep = set(keep_ids)
        return Instance(self.capacity, tuple(r for r in self.requests if r.id in keep))


@dataclass(frozen=True)
class ActiveProfile:
    """Piecewise-constant count of active requests.

    ``times`` holds every distinct event coordinate in ascending order and
    ``counts[i]`` is the number of active requests on ``[times[i], times[i+1])``
    (the last segment always has count 0).
    """

    times: np.ndarray
    counts: np.ndarray

    def count_at(self, t: int) -> int:
        i = int(np.searchsorted(self.times, t, side="right")) - 1
        return int(self.counts[i]) if i >= 0 else 0

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ActiveProfile):
            return NotImplemented
        return np.array_equal(self.times, other.times) and np.array_equal(
            self.counts, other.counts
        )


@dataclass(frozen=True)
class InstanceStats:
    """Derived instance quantities.

    ``T`` is the largest end coordinate, ``h`` the height (maximum number of
    simultaneously active requests), ``phi`` the number of flavors (distinct
    demand vectors) and ``tau`` the number of types (distinct
    (demand, start, end) triples).
    """

    n: int
    d: int
    T: int
    h: int
    phi: int
    tau: int
    active_profile: ActiveProfile = field(compare=False)


@dataclass(frozen=True)
class TypeEntry:
    key: TypeKey
    multiplicity: int
    members: tuple[int, ...]


class TypeTable:
    """Requests grouped by type, ordered by (demand, start, end).

    Stored columnar (numpy) so multi-million-request tables stay compact;
    iterate to get :class:`TypeEntry` views.
    """

    def __init__(
        self,
        demands: np.ndarray,
        starts: np.ndarray,
        ends: np.ndarray,
        multiplicities: np.ndarray,
        member_ids: np.ndarray,
        indptr: np.ndarray,
    ):
        self.demands = demands
        self.starts = starts
        self.ends = ends
        self.multiplicities = multiplicities
        self.member_ids = member_ids
        self.indptr = indptr

    def __len__(self) -> int:
        return len(self.multiplicities)

    @property
    def tau(self) -> int:
        return len(self)

    def entry(self, i: int) -> TypeEntry:
        key = (tuple(int(x) for x in self.demands[i]), int(self.starts[i]), int(self.ends[i]))
        members = tuple(int(x) for x in self.member_ids[self.indptr[i] : self.indptr[i + 1]])
        return TypeEntry(key, int(self.multiplicities[i]), members)

    def __iter__(self) -> Iterator[TypeEntry]:
        for i in range(len(self)):
            yield self.entry(i)


def _as_request(item: object, position: int, errors: list[str]) -> Request | None:
    if isinstance(item, Request):
        return item
    if isinstance(item, dict):
        try:
            demand = tuple(item["demand"])
            rid = item.get("id", position)
            return Request(int(rid), tuple(int(x) for x in demand), int(item["start"]), int(item["end"]))
        except (KeyError, TypeError, ValueError):
            errors.append(f"request {position}: malformed mapping {item!r}")
            return None
    try:
        demand, start, end = item  # type: ignore[misc]
        return Request(position, tuple(int(x) for x in demand), int(start), int(end))
    except (TypeError, ValueError):
        errors.append(f"request {position}: expected (demand, start, end), got {item!r}")
        return None


def validate_instance(
    capacity: Sequence[int],
    requests: Iterable[object],
    *,
    drop_empty: bool = False,
) -> Instance:
    """Validate raw input and build an :class:`Instance`.

    Accepts :class:`Request` objects, ``(demand, start, end)`` triples, or
    mappings with ``demand``/``start``/``end`` (and optional ``id``); items
    without an id get their position as id.

    Raises :class:`ValidationError` listing every problem found: dimension
    mismatches, negative values, demands exceeding the capacity in some
    component (no feasible solution could exist), ``start >= end``, duplicate
    ids.  Zero-duration requests (``start == end``) are dropped silently when
    ``drop_empty`` is set, otherwise rejected.

    Validating a validated instance reproduces it exactly.
    """
    errors: list[str] = []
    cap = tuple(int(x) for x in capacity)
    if len(cap) == 0:
        errors.append("capacity must have at least one component")
    for j, c in enumerate(cap):
        if c < 1:
            errors.append(f"capacity component {j + 1} must be positive, got {c}")
    d = len(cap)

    out: list[Request] = []
    seen: set[int] = set()
    for pos, item in enumerate(requests):
        req = _as_request(item, pos, errors)
        if req is None:
            continue
        rid = req.id
        if rid in seen:
            errors.append(f"request {rid}: duplicate id")
            continue
        seen.add(rid)
        if len(req.demand) != d:
            errors.append(
                f"request {rid}: demand has {len(req.demand)} components, instance has {d}"
            )
            continue
        bad = False
        for j, a in enumerate(req.demand):
            if a < 0:
                errors.append(f"request {rid}: negative demand in component {j + 1}")
                bad = True
            elif j < d and a > cap[j]:
                errors.append(f"request {rid}: demand exceeds capacity in component {j + 1}")
                bad = True
        if req.start < 0 or req.end < 0:
            errors.append(f"request {rid}: negative time coordinate")
            bad = True
        if req.start == req.end:
            if drop_empty:
                continue
            errors.append(f"request {rid}: empty interval [{req.start}, {req.end})")
            bad = True
        elif req.start > req.end:
            errors.append(f"request {rid}: start {req.start} after end {req.end}")
            bad = True
        if not bad:
            out.append(req)

    if errors:
        raise ValidationError(errors)
    return Instance(cap, tuple(out))


def _event_counts(instance: Instance) -> tuple[np.ndarray, np.ndarray]:
    """Distinct event coordinates and the active count on each segment."""
    if instance.n == 0:
        empty = np.empty(0, dtype=np.int64)
        return empty, empty
    coords = np.concatenate([instance.starts, instance.ends])
    deltas = np.concatenate(
        [np.ones(instance.n, dtype=np.int64), -np.ones(instance.n, dtype=np.int64)]
    )
    order = np.argsort(coords, kind="stable")
    coords = coords[order]
    deltas = deltas[order]
    running = np.cumsum(deltas)
    # last position of each distinct coordinate carries the segment count
    uniq, first = np.unique(coords, return_index=True)
    last = np.append(first[1:], len(coords)) - 1
    return uniq, running[last]


def compute_stats(instance: Instance) -> InstanceStats:
    """Compute n, d, T, height, flavor and type counts by event sweeps."""
    n, d = instance.n, instance.d
    times, counts = _event_counts(instance)
    profile = ActiveProfile(times, counts)
    if n == 0:
        return InstanceStats(0, d, 0, 0, 0, 0, profile)
    T = int(instance.ends.max())
    h = int(counts.max())
    rows = np.hstack([instance.demands, instance.starts[:, None], instance.ends[:, None]])
    phi = len(np.unique(instance.demands, axis=0))
    tau = len(np.unique(rows, axis=0))
    return InstanceStats(n, d, T, h, phi, tau, profile)


def group_rows(
    ids: np.ndarray, starts: np.ndarray, ends: np.ndarray, demands: np.ndarray
) -> TypeTable:
    """Array core of :func:`group_types`."""
    n = len(ids)
    d = demands.shape[1]
    if n == 0:
        e = np.empty(0, dtype=np.int64)
        return TypeTable(e.reshape(0, d), e, e, e, e, np.zeros(1, dtype=np.int64))
    cols = [ends, starts] + [demands[:, j] for j in range(d - 1, -1, -1)]
    order = np.lexsort(cols)
    rows = np.hstack([demands, starts[:, None], ends[:, None]])[order]
    new_group = np.empty(n, dtype=bool)
    new_group[0] = True
    new_group[1:] = (rows[1:] != rows[:-1]).any(axis=1)
    group_starts = np.flatnonzero(new_group)
    indptr = np.append(group_starts, n).astype(np.int64)
    mult = np.diff(indptr)
    keys = rows[group_starts]
    return TypeTable(
        demands=keys[:, :d],
        starts=keys[:, d],
        ends=keys[:, d + 1],
        multiplicities=mult,
        member_ids=ids[order],
        indptr=indptr,
    )


def group_types(instance: Instance) -> TypeTable:
    """Group requests into types (same demand vector, start, and end).

    Entries are ordered by type key; multiplicities sum to n.
    """
    return group_rows(instance.ids, instance.starts, instance.ends, instance.demands)
