"""(1+eps)-approximate data reduction and solution lifting.

The rule: delete any set of requests that fits into floor(eps * L) bins,
where L is the peak-load lower bound on the optimal bin count.  Any packing
of the reduced instance extends to a packing of the original by adding the
recorded deletion bins, so a beta-approximate solution of the reduced
instance lifts to a beta*(1+eps)-approximate solution of the original.

Bins for deletion are packed greedily one at a time; the instance is
re-compressed after every packed-and-deleted bin (priorities are recomputed
on the fresh coordinates).  The budget floor(eps * L) is frozen from the
initial instance and never re-estimated.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .bounds import (
    Metrics,
    bin_budget,
    peak_loads,
    removable_upper_bound_rows,
    utilization,
)
from .model import Instance, Request
from .packing import (
    PRIORITY_MODES,
    Packing,
    fresh_residual,
    pack_one_bin,
    priority_order,
    verify_packing,
)
from .timeline import compress_events


class LiftError(ValueError):
    """Raised when a reduced-instance packing cannot be lifted."""


@dataclass(frozen=True)
class ReductionCertificate:
    """Everything needed to lift solutions back to the original instance.

    ``deletion_bins`` hold original request ids (never compressed
    coordinates), one tuple per packed-and-deleted bin; they are pairwise
    disjoint and disjoint from the surviving ids, and each fits a single bin.
    """

    epsilon: Fraction
    L: Fraction
    k_del: int
    deletion_bins: tuple[tuple[int, ...], ...]
    original_n: int
    reduced_instance_ref: str
    priority_mode: str
    metrics: Metrics

    def deleted_ids(self) -> set[int]:
        return {rid for bin_ids in self.deletion_bins for rid in bin_ids}


def _instance_ref(instance: Instance) -> str:
    from .ingest import save_canonical_json

    digest = hashlib.sha256(save_canonical_json(instance).encode()).hexdigest()
    return f"sha256:{digest}"


def reduce_instance(
    instance: Instance,
    epsilon: Fraction | int | str,
    mode: str = "f2",
    recompress: bool = True,
) -> tuple[Instance, ReductionCertificate]:
    """Apply the deletion rule; returns (reduced instance, certificate).

    Compresses the instance, computes L and the frozen budget
    k_del = floor(eps*L), then packs and deletes up to k_del greedy bins,
    re-compressing between bins when ``recompress`` is set.  Also evaluates
    the removable upper bound U (with k = k_del, on the instance right after
    the initial compression) and the utilization pair (R, K).

    eps = 0 or an empty instance yields the compressed instance unchanged
    with an empty certificate.
    """
    eps = epsilon if isinstance(epsilon, Fraction) else Fraction(str(epsilon))
    if eps < 0:
        raise ValueError("epsilon must be non-negative")
    if mode not in PRIORITY_MODES:
        raise ValueError(f"mode must be one of {PRIORITY_MODES}")

    cap = instance.capacity
    n = instance.n
    ids = instance.ids
    demands = instance.demands
    starts, ends, horizon, _ = compress_events(instance.starts, instance.ends, with_map=False)

    peaks = peak_loads(starts, ends, demands)
    L = max(
        (Fraction(int(peaks[j]), cap[j]) for j in range(instance.d)), default=Fraction(0)
    )
    k_del = bin_budget(eps, L)
    U = removable_upper_bound_rows(cap, ids, starts, ends, demands, k_del)

    deletion_bins: list[tuple[int, ...]] = []
    for _ in range(k_del):
        if len(ids) == 0:
            break
        order = priority_order(cap, ids, starts, ends, demands, mode)
        residual = fresh_residual(cap, horizon)
        mask = pack_one_bin(starts[order], ends[order], demands[order], residual)
        if not mask.any():
            break
        packed = order[mask]
        deletion_bins.append(tuple(sorted(int(i) for i in ids[packed])))
        keep = np.ones(len(ids), dtype=bool)
        keep[packed] = False
        ids, starts, ends, demands = ids[keep], starts[keep], ends[keep], demands[keep]
        if recompress:
            starts, ends, horizon, _ = compress_events(starts, ends, with_map=False)

    reduced = Instance(
        cap,
        tuple(
            Request(
                int(ids[i]),
                instance.request(int(ids[i])).demand,
                int(starts[i]),
                int(ends[i]),
            )
            for i in range(len(ids))
        ),
    )
    n_prime = reduced.n
    R, K = utilization(n, n_prime, U)
    cert = ReductionCertificate(
        epsilon=eps,
        L=L,
        k_del=k_del,
        deletion_bins=tuple(deletion_bins),
        original_n=n,
        reduced_instance_ref=_instance_ref(reduced),
        priority_mode=mode,
        metrics=Metrics(L=L, k_del=k_del, U=U, n=n, n_prime=n_prime, R=R, K=K),
    )
    return reduced, cert


def lift_solution(
    certificate: ReductionCertificate, reduced_packing: Packing, original: Instance
) -> Packing:
    """Turn a packing of the reduced instance into one of the original.

    Reduced assignments keep their bins; each recorded deletion bin becomes
    one fresh bin, so the lifted packing uses k + (number of deletion bins)
    bins.  The input packing must be complete and feasible for the reduced
    instance (checked against the surviving sub-instance of the original;
    feasibility is invariant under coordinate remapping), and the output is
    verified before being returned.
    """
    deleted = certificate.deleted_ids()
    all_ids = set(original.index_of)
    if not deleted <= all_ids:
        raise LiftError("certificate references ids not present in the original instance")
    survivors = all_ids - deleted
    if set(reduced_packing.assignment) != survivors:
        raise LiftError(
            "reduced packing must cover exactly the surviving requests "
            f"({len(reduced_packing.assignment)} assigned, {len(survivors)} surviving)"
        )
    sub = original.subset(survivors)
    report = verify_packing(sub, reduced_packing)
    if not report.feasible:
        raise LiftError(f"reduced packing is infeasible: {report.violations[:3]}")

    assignment = dict(reduced_packing.assignment)
    k = reduced_packing.k
    for bin_ids in certificate.deletion_bins:
        if not bin_ids:
            continue
        k += 1
        for rid in bin_ids:
            assignment[rid] = k
    lifted = Packing(assignment, k)
    final = verify_packing(original, lifted)
    if not final.feasible or not final.complete:
        raise LiftError("lifted packing failed verification")
    return lifted


def _fraction_obj(x: Fraction) -> dict:
    return {"num": x.numerator, "den": x.denominator}


def _fraction_from(obj: dict) -> Fraction:
    return Fraction(obj["num"], obj["den"])


def certificate_to_json(cert: ReductionCertificate) -> str:
    m = cert.metrics
    obj = {
        "epsilon": _fraction_obj(cert.epsilon),
        "L": _fraction_obj(cert.L),
        "k_del": cert.k_del,
        "original_n": cert.original_n,
        "priority_mode": cert.priority_mode,
        "reduced_instance_ref": cert.reduced_instance_ref,
        "deletion_bins": [list(b) for b in cert.deletion_bins],
        "metrics": {
            "U": m.U,
            "n": m.n,
            "n_prime": m.n_prime,
            "R": _fraction_obj(m.R) if m.R is not None else None,
            "K": _fraction_obj(m.K) if m.K is not None else None,
        },
    }
    return json.dumps(obj, separators=(",", ":")) + "\n"


def certificate_from_json(text: str) -> ReductionCertificate:
    obj = json.loads(text)
    m = obj["metrics"]
    L = _fraction_from(obj["L"])
    k_del = int(obj["k_del"])
    metrics = Metrics(
        L=L,
        k_del=k_del,
        U=int(m["U"]),
        n=int(m["n"]),
        n_prime=int(m["n_prime"]),
        R=_fraction_from(m["R"]) if m["R"] is not None else None,
        K=_fraction_from(m["K"]) if m["K"] is not None else None,
    )
    return ReductionCertificate(
        epsilon=_fraction_from(obj["epsilon"]),
        L=L,
        k_del=k_del,
        deletion_bins=tuple(tuple(int(r) for r in b) for b in obj["deletion_bins"]),
        original_n=int(obj["original_n"]),
        reduced_instance_ref=obj["reduced_instance_ref"],
        priority_mode=obj["priority_mode"],
        metrics=metrics,
    )
