"""Greedy single-bin packing, priorities, verification, and a baseline solver.

The greedy packer fills one bin: candidates are visited in non-increasing
priority (ties by ascending id) and a request is packed iff its demand fits
the remaining capacity at every instant of its interval.  Priorities:

* ``alpha``: min over dimensions with a_j > 0 of floor(b_j / a_j), i.e. how
  many copies of this flavor fit one bin (all-zero demand: +inf, packed first).
* ``f1``: alpha + 1/(2*span), using the time span to break alpha ties so that
  shorter requests go earlier.
* ``f2``: alpha * T / span, an upper bound on how many requests of this flavor
  and lifetime fit one bin across all instants.

All comparisons are exact (integer keys or rationals); results never depend
on floating point or thread count.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .model import Instance, Request, ResourceVector
from .timeline import compress_time

PRIORITY_MODES = ("alpha", "f1", "f2")

_ALPHA_INF = np.iinfo(np.int64).max  # sentinel for all-zero demand


def priority(
    request: Request, capacity: ResourceVector, T: int, mode: str
) -> Fraction | float:
    """Exact priority of one request (math.inf for all-zero demands)."""
    if mode not in PRIORITY_MODES:
        raise ValueError(f"mode must be one of {PRIORITY_MODES}")
    positive = [(a, b) for a, b in zip(request.demand, capacity) if a > 0]
    if not positive:
        return math.inf
    alpha = min(b // a for a, b in positive)
    if mode == "alpha":
        return Fraction(alpha)
    span = request.span
    if mode == "f1":
        return alpha + Fraction(1, 2 * span)
    return Fraction(alpha * T, span)


def _alphas(capacity: tuple[int, ...], demands: np.ndarray) -> np.ndarray:
    cap = np.asarray(capacity, dtype=np.int64)
    alpha = np.full(len(demands), _ALPHA_INF, dtype=np.int64)
    for j in range(demands.shape[1]):
        pos = demands[:, j] > 0
        alpha[pos] = np.minimum(alpha[pos], cap[j] // demands[pos, j])
    return alpha


def priority_order(
    capacity: tuple[int, ...],
    ids: np.ndarray,
    starts: np.ndarray,
    ends: np.ndarray,
    demands: np.ndarray,
    mode: str,
) -> np.ndarray:
    """Positions 0..n-1 reordered by non-increasing priority, ties by
    ascending id.  The order under f2 does not depend on the horizon T
    (a common positive factor), so only alpha/span matters."""
    if mode not in PRIORITY_MODES:
        raise ValueError(f"mode must be one of {PRIORITY_MODES}")
    if len(ids) == 0:
        return np.empty(0, dtype=np.int64)
    alpha = _alphas(capacity, demands)
    spans = ends - starts
    if mode == "alpha":
        return np.lexsort((ids, -alpha))
    if mode == "f1":
        return np.lexsort((ids, spans, -alpha))
    finite = alpha != _ALPHA_INF
    if not finite.any():
        return np.lexsort((ids,))
    max_span = int(spans[finite].max())
    K = max_span * max_span + 1
    max_alpha = int(alpha[finite].max())
    if max_alpha * K < 2**62:
        alpha_safe = np.where(finite, alpha, 0)
        key = np.where(finite, alpha_safe * K // np.maximum(spans, 1), _ALPHA_INF)
        return np.lexsort((ids, -key))
    # rare huge-capacity case: exact rational sort in Python
    def sort_key(i: int):
        if not finite[i]:
            return (0, Fraction(0), int(ids[i]))
        return (1, Fraction(-int(alpha[i]), int(spans[i])), int(ids[i]))

    return np.asarray(sorted(range(len(ids)), key=sort_key), dtype=np.int64)


def _pack_kernel_py(starts, ends, demands, run_ptr, residual, out_counts):
    """Pack runs of same-type candidates into one residual timeline.

    For each run the packed count equals min(run length, floor-division fit
    over the whole interval), which matches packing the copies one by one.
    """
    nruns = run_ptr.shape[0] - 1
    d = demands.shape[1]
    for run in range(nruns):
        i = run_ptr[run]
        q = run_ptr[run + 1] - i
        r = starts[i]
        e = ends[i]
        allzero = True
        for j in range(d):
            if demands[i, j] > 0:
                allzero = False
                break
        if not allzero:
            for t in range(r, e):
                for j in range(d):
                    a = demands[i, j]
                    if a > 0:
                        c = residual[t, j] // a
                        if c < q:
                            q = c
                if q == 0:
                    break
            if q > 0:
                for t in range(r, e):
                    for j in range(d):
                        residual[t, j] -= q * demands[i, j]
        out_counts[run] = q


if os.environ.get("DVBP_NO_JIT"):
    _pack_kernel = _pack_kernel_py
else:
    try:
        import numba

        _pack_kernel = numba.njit(cache=True)(_pack_kernel_py)
    except ImportError:  # pragma: no cover - numba is optional
        _pack_kernel = _pack_kernel_py


def _run_boundaries(starts, ends, demands) -> np.ndarray:
    """Pointers delimiting maximal runs of consecutive equal-type entries."""
    m = len(starts)
    if m == 0:
        return np.zeros(1, dtype=np.int64)
    diff = np.empty(m, dtype=bool)
    diff[0] = True
    diff[1:] = (
        (starts[1:] != starts[:-1])
        | (ends[1:] != ends[:-1])
        | (demands[1:] != demands[:-1]).any(axis=1)
    )
    return np.append(np.flatnonzero(diff), m).astype(np.int64)


def pack_one_bin(
    starts: np.ndarray,
    ends: np.ndarray,
    demands: np.ndarray,
    residual: np.ndarray,
) -> np.ndarray:
    """Greedy-pack candidates (already in visit order) against ``residual``.

    Returns a boolean mask over the candidates: True where packed.  The
    residual array is mutated in place.
    """
    m = len(starts)
    mask = np.zeros(m, dtype=bool)
    if m == 0:
        return mask
    run_ptr = _run_boundaries(starts, ends, demands)
    counts = np.zeros(len(run_ptr) - 1, dtype=np.int64)
    _pack_kernel(
        np.ascontiguousarray(starts),
        np.ascontiguousarray(ends),
        np.ascontiguousarray(demands),
        run_ptr,
        residual,
        counts,
    )
    for run in range(len(counts)):
        i = run_ptr[run]
        mask[i : i + counts[run]] = True
    return mask


def fresh_residual(capacity: tuple[int, ...], horizon: int) -> np.ndarray:
    return np.tile(np.asarray(capacity, dtype=np.int64), (max(horizon, 1), 1))


def greedy_pack_bin(
    instance: Instance, candidates: Iterable[int], mode: str = "f2"
) -> list[int]:
    """Pack one bin greedily from the candidate ids; returns packed ids.

    Candidates are visited by non-increasing priority (ties by ascending id);
    a candidate is packed iff its demand fits the remaining capacity at every
    instant of its interval, and the remaining capacity is then reduced.  The
    result is maximal: no unpacked candidate fits the final residual.

    The residual timeline is allocated per instance horizon, so call this on
    time-compressed instances when coordinates are large.
    """
    idx = instance.index_of
    rows = np.asarray([idx[c] for c in candidates], dtype=np.int64)
    if len(rows) == 0:
        return []
    ids = instance.ids[rows]
    starts = instance.starts[rows]
    ends = instance.ends[rows]
    demands = instance.demands[rows]
    order = priority_order(instance.capacity, ids, starts, ends, demands, mode)
    residual = fresh_residual(instance.capacity, instance.horizon())
    mask = pack_one_bin(starts[order], ends[order], demands[order], residual)
    return sorted(int(i) for i in ids[order[mask]])


@dataclass
class Packing:
    """Assignment of request ids to bins 1..k (every bin nonempty)."""

    assignment: dict[int, int]
    k: int

    def __post_init__(self):
        used = set(self.assignment.values())
        if used != set(range(1, self.k + 1)):
            raise ValueError(f"bin indices must be exactly 1..{self.k}, got {sorted(used)}")

    @classmethod
    def from_bins(cls, bins: Sequence[Iterable[int]]) -> "Packing":
        assignment: dict[int, int] = {}
        b = 0
        for members in bins:
            members = list(members)
            if not members:
                continue
            b += 1
            for rid in members:
                if rid in assignment:
                    raise ValueError(f"request {rid} assigned twice")
                assignment[rid] = b
        return cls(assignment, b)

    def bins(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in range(self.k)]
        for rid in sorted(self.assignment):
            out[self.assignment[rid] - 1].append(rid)
        return out


@dataclass(frozen=True)
class Violation:
    bin: int
    t: int
    dim: int  # 1-based dimension index
    overload: int


@dataclass(frozen=True)
class FeasibilityReport:
    feasible: bool
    complete: bool
    missing: tuple[int, ...]
    violations: tuple[Violation, ...] = field(default_factory=tuple)


def verify_packing(instance: Instance, packing: Packing) -> FeasibilityReport:
    """Check a packing against the instance capacity at every instant.

    Uses per-bin difference arrays over each bin's own event coordinates, so
    cost is linear in the number of endpoints, independent of the horizon.
    Violations carry (bin, instant, 1-based dimension, overload).  Unknown
    request ids are a structural error (ValueError).
    """
    idx = instance.index_of
    unknown = [rid for rid in packing.assignment if rid not in idx]
    if unknown:
        raise ValueError(f"packing references unknown request ids: {sorted(unknown)[:5]}")
    missing = tuple(sorted(set(idx) - set(packing.assignment)))
    cap = np.asarray(instance.capacity, dtype=np.int64)

    by_bin: dict[int, list[int]] = {}
    for rid, b in packing.assignment.items():
        by_bin.setdefault(b, []).append(idx[rid])

    violations: list[Violation] = []
    for b in sorted(by_bin):
        rows = np.asarray(by_bin[b], dtype=np.int64)
        starts = instance.starts[rows]
        ends = instance.ends[rows]
        coords = np.unique(np.concatenate([starts, ends]))
        diff = np.zeros((len(coords) + 1, instance.d), dtype=np.int64)
        si = np.searchsorted(coords, starts)
        ei = np.searchsorted(coords, ends)
        dem = instance.demands[rows]
        np.add.at(diff, si, dem)
        np.subtract.at(diff, ei, dem)
        loads = np.cumsum(diff[:-1], axis=0)
        over = loads - cap[None, :]
        for seg, j in zip(*np.nonzero(over > 0)):
            violations.append(
                Violation(b, int(coords[seg]), int(j) + 1, int(over[seg, j]))
            )
    return FeasibilityReport(
        feasible=not violations,
        complete=not missing,
        missing=missing,
        violations=tuple(violations),
    )


def heuristic_solve(instance: Instance, mode: str = "f2") -> Packing:
    """Complete packing by repeated greedy one-bin rounds.

    The instance is time-compressed internally (bin assignments do not depend
    on coordinates) and priorities are computed once on the compressed
    instance; each round opens one bin and packs greedily from the remaining
    requests.  Every validated request fits an empty bin, so each round packs
    at least one request and the loop terminates.
    """
    if instance.n == 0:
        return Packing({}, 0)
    inst, _ = compress_time(instance)
    horizon = inst.horizon()
    order = priority_order(
        inst.capacity, inst.ids, inst.starts, inst.ends, inst.demands, mode
    )
    starts = inst.starts[order]
    ends = inst.ends[order]
    demands = inst.demands[order]
    ids = inst.ids[order]
    alive = np.ones(inst.n, dtype=bool)
    assignment: dict[int, int] = {}
    k = 0
    while alive.any():
        k += 1
        residual = fresh_residual(inst.capacity, horizon)
        sub = np.flatnonzero(alive)
        mask = pack_one_bin(starts[sub], ends[sub], demands[sub], residual)
        packed = sub[mask]
        for rid in ids[packed]:
            assignment[int(rid)] = k
        alive[packed] = False
    return Packing(assignment, k)


def packing_to_csv(packing: Packing) -> str:
    lines = ["request_id,bin"]
    for rid in sorted(packing.assignment):
        lines.append(f"{rid},{packing.assignment[rid]}")
    return "\n".join(lines) + "\n"


def packing_from_csv(text: str) -> Packing:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0].strip() != "request_id,bin":
        raise ValueError("packing CSV must start with header 'request_id,bin'")
    assignment: dict[int, int] = {}
    for no, ln in enumerate(lines[1:], start=2):
        parts = ln.split(",")
        if len(parts) != 2:
            raise ValueError(f"line {no}: expected 'request_id,bin'")
        rid, b = int(parts[0]), int(parts[1])
        if rid in assignment:
            raise ValueError(f"line {no}: duplicate request id {rid}")
        assignment[rid] = b
    k = max(assignment.values(), default=0)
    return Packing(assignment, k)


def packing_to_json(packing: Packing) -> str:
    import json

    rows = [[rid, packing.assignment[rid]] for rid in sorted(packing.assignment)]
    return json.dumps({"assignment": rows}, separators=(",", ":")) + "\n"


def packing_from_json(text: str) -> Packing:
    import json

    obj = json.loads(text)
    assignment = {int(rid): int(b) for rid, b in obj["assignment"]}
    k = max(assignment.values(), default=0)
    return Packing(assignment, k)
