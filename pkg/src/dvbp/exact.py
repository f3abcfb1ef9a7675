"""Exact small-instance solvers and ILP model export.

``brute_force_opt`` enumerates assignments with bin-symmetry pruning and is
the reference oracle for everything else.  ``dp_feasible`` answers the k-bin
decision by dynamic programming over the active sets of the compressed
timeline; its table has O(k^h) states per instant, so guard rails refuse
instances where that explodes.  ``export_ilp`` writes an LP-format model over
request types for external MIP solvers (none is embedded).
"""

from __future__ import annotations

import json
import math
from io import StringIO

import numpy as np

from .bounds import lower_bound
from .model import Instance, compute_stats, group_types
from .packing import Packing, heuristic_solve, verify_packing
from .timeline import compress_time


class GuardRailError(RuntimeError):
    """Raised when an exact solver refuses an instance as too large."""


def brute_force_opt(instance: Instance, limit: int = 12) -> tuple[int, Packing]:
    """Minimum bin count by exhaustive search, with a witness packing.

    Requests are assigned in ascending-id order; request i may only open bin
    1 + (max bin used so far), which prunes bin-relabeling symmetry.  The
    incumbent starts from the greedy baseline solver and the search stops
    early once it matches max(ceil(L), 1); both bounds are sound, so the
    result stays exact.  Refuses n > limit.
    """
    if instance.n > limit:
        raise GuardRailError(
            f"brute_force_opt is exponential; refusing n={instance.n} > limit={limit}"
        )
    if instance.n == 0:
        return 0, Packing({}, 0)

    inst, _ = compress_time(instance)
    order = np.argsort(inst.ids, kind="stable")
    starts = inst.starts[order]
    ends = inst.ends[order]
    demands = inst.demands[order]
    ids = inst.ids[order]
    n = inst.n
    T = inst.horizon()
    cap = np.asarray(inst.capacity, dtype=np.int64)

    incumbent = heuristic_solve(inst)
    best_k = incumbent.k
    best_assign = [incumbent.assignment[int(ids[i])] for i in range(n)]
    lb = max(math.ceil(lower_bound(inst)), 1)

    if best_k > lb:
        residuals = np.tile(cap, (n, T, 1))  # one timeline per potential bin
        assign = [0] * n

        def rec(i: int, used: int) -> None:
            nonlocal best_k, best_assign
            if best_k == lb or used >= best_k:
                return
            if i == n:
                best_k = used
                best_assign = assign.copy()
                return
            r, e = starts[i], ends[i]
            dem = demands[i]
            for b in range(1, min(used + 1, n) + 1):
                if b > used and b >= best_k:
                    break
                seg = residuals[b - 1, r:e]
                if (seg >= dem).all():
                    seg -= dem
                    assign[i] = b
                    rec(i + 1, max(used, b))
                    seg += dem
                    if best_k == lb:
                        return

        rec(0, 0)

    packing = Packing({int(ids[i]): best_assign[i] for i in range(n)}, max(best_assign))
    report = verify_packing(instance, packing)
    if not report.feasible or not report.complete:
        raise AssertionError("exhaustive search produced an invalid packing")
    return packing.k, packing


def dp_feasible(
    instance: Instance, k: int, *, max_h: int = 10, max_k: int = 4
) -> tuple[bool, Packing | None]:
    """Decide whether the requests fit into k bins; witness when they do.

    Dynamic program over the compressed timeline: for each instant t, the
    table holds every capacity-feasible assignment of the active set S_t to k
    labeled bins that extends to a full packing of all requests starting at or
    after t; consecutive instants must agree on S_t intersected with S_{t+1}.
    Cost is O(k^{2h} n), so instances beyond the guard rails (height > max_h
    or k > max_k) are refused.
    """
    if k < 0:
        raise ValueError("k must be non-negative")
    if instance.n == 0:
        return True, Packing({}, 0)
    if k == 0:
        return False, None

    inst, _ = compress_time(instance)
    stats = compute_stats(inst)
    if stats.h > max_h or k > max_k:
        raise GuardRailError(
            f"dp table would hold about k^(2h) = {k}^{2 * stats.h} states per instant; "
            f"refusing h={stats.h} > {max_h} or k={k} > {max_k}"
        )
    T = stats.T
    cap = np.asarray(inst.capacity, dtype=np.int64)
    order = np.argsort(inst.ids, kind="stable")
    ids = inst.ids[order]
    starts = inst.starts[order]
    ends = inst.ends[order]
    demands = inst.demands[order]
    n = inst.n

    active: list[list[int]] = [[] for _ in range(T + 2)]
    for i in range(n):
        for t in range(int(starts[i]), int(ends[i])):
            active[t].append(i)

    def feasible_partitions(members: list[int], fixed: dict[int, int]):
        """Yield capacity-feasible bin assignments of ``members`` (tuples
        aligned to the member order) honoring the ``fixed`` positions."""
        loads = np.zeros((k, len(cap)), dtype=np.int64)
        choice = [0] * len(members)

        def rec(pos: int):
            if pos == len(members):
                yield tuple(choice)
                return
            i = members[pos]
            options = (fixed[i],) if i in fixed else range(k)
            for b in options:
                new = loads[b] + demands[i]
                if (new <= cap).all():
                    loads[b] = new
                    choice[pos] = b
                    yield from rec(pos + 1)
                    loads[b] -= demands[i]

        yield from rec(0)

    # tables[t]: maps partition (tuple over sorted active[t]) -> successor partition at t+1
    tables: list[dict[tuple[int, ...], tuple[int, ...] | None]] = [dict() for _ in range(T + 2)]
    tables[T + 1][()] = None
    for t in range(T, 0, -1):
        cur = active[t]
        nxt = active[t + 1]
        nxt_pos = {i: p for p, i in enumerate(nxt)}
        common = [i for i in cur if i in nxt_pos]
        # group true successor partitions by their assignment on the overlap
        by_sig: dict[tuple[int, ...], tuple[int, ...]] = {}
        for part in tables[t + 1]:
            sig = tuple(part[nxt_pos[i]] for i in common)
            by_sig.setdefault(sig, part)
        for sig, successor in sorted(by_sig.items()):
            fixed = {i: b for i, b in zip(common, sig)}
            for part in feasible_partitions(cur, fixed):
                if part not in tables[t]:
                    tables[t][part] = successor
        if not tables[t]:
            return False, None

    if not tables[1]:
        return False, None

    # walk forward along stored successors to collect one witness
    assign: dict[int, int] = {}
    part = sorted(tables[1])[0]
    for t in range(1, T + 1):
        for pos, i in enumerate(active[t]):
            assign[i] = part[pos]
        nxt = tables[t][part]
        if nxt is None:
            break
        part = nxt

    # relabel bins contiguously in order of first use by ascending id
    relabel: dict[int, int] = {}
    assignment: dict[int, int] = {}
    for i in sorted(assign):
        b = assign[i]
        if b not in relabel:
            relabel[b] = len(relabel) + 1
        assignment[int(ids[i])] = relabel[b]
    packing = Packing(assignment, len(relabel))
    report = verify_packing(instance, packing)
    if not report.feasible or not report.complete:
        raise AssertionError("dp produced an invalid packing")
    return True, packing


def export_ilp(instance: Instance, k: int) -> tuple[str, str]:
    """LP-format model deciding/optimizing DVBP with k available bins.

    Integer variable x_i_j counts requests of type i packed into bin j;
    binary y_j marks bin j used.  Objective: minimize the number of used
    bins.  Rows: each type fully assigned; x_i_j <= m_i y_j; for every
    instant with active types, per bin and dimension, total demand minus
    b_m y_j stays <= 0.  Returns (model text, sidecar JSON mapping variable
    names to type keys and bin indices); output is byte-stable.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    table = group_types(instance)
    tau = len(table)
    d = instance.d
    T = instance.horizon()

    buf = StringIO()
    buf.write("Minimize\n obj: ")
    buf.write(" + ".join(f"y_{j}" for j in range(1, k + 1)))
    buf.write("\nSubject To\n")

    mult = table.multiplicities
    for i in range(tau):
        terms = " + ".join(f"x_{i + 1}_{j}" for j in range(1, k + 1))
        buf.write(f" assign_{i + 1}: {terms} = {int(mult[i])}\n")
    for i in range(tau):
        for j in range(1, k + 1):
            buf.write(f" act_{i + 1}_{j}: x_{i + 1}_{j} - {int(mult[i])} y_{j} <= 0\n")
    if tau:
        t_starts = table.starts
        t_ends = table.ends
        for t in range(1, T + 1):
            live = np.flatnonzero((t_starts <= t) & (t < t_ends))
            if len(live) == 0:
                continue
            for j in range(1, k + 1):
                for m in range(d):
                    terms = []
                    for i in live:
                        a = int(table.demands[i, m])
                        if a == 0:
                            continue
                        coef = "" if a == 1 else f"{a} "
                        terms.append(f"{coef}x_{i + 1}_{j}")
                    if not terms:
                        continue
                    lhs = " + ".join(terms)
                    buf.write(
                        f" cap_{t}_{j}_{m + 1}: {lhs} - {instance.capacity[m]} y_{j} <= 0\n"
                    )
    buf.write("Bounds\n")
    for i in range(tau):
        for j in range(1, k + 1):
            buf.write(f" 0 <= x_{i + 1}_{j} <= {int(mult[i])}\n")
    if tau:
        buf.write("Generals\n")
        for i in range(tau):
            for j in range(1, k + 1):
                buf.write(f" x_{i + 1}_{j}\n")
    buf.write("Binaries\n")
    for j in range(1, k + 1):
        buf.write(f" y_{j}\n")
    buf.write("End\n")

    variables: dict[str, dict] = {}
    for i in range(tau):
        entry = table.entry(i)
        for j in range(1, k + 1):
            variables[f"x_{i + 1}_{j}"] = {
                "demand": list(entry.key[0]),
                "start": entry.key[1],
                "end": entry.key[2],
                "bin": j,
            }
    for j in range(1, k + 1):
        variables[f"y_{j}"] = {"bin": j}
    sidecar = json.dumps(variables, separators=(",", ":")) + "\n"
    return buf.getvalue(), sidecar
