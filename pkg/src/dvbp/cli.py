"""Command-line front end.

Subcommands: stats, compress, reduce, sweep, bounds, check, solve,
export-ilp, ingest.  Exit codes: 0 success, 1 validation or verification
failure, 2 usage errors (bad flags, missing files, solver guard refusals).

All reports use exact arithmetic and fixed tie-breaking, so re-running a
subcommand on identical inputs reproduces its output byte for byte (the
sweep's wall-time column is the one exception).
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from pathlib import Path

from .bounds import bin_budget, lower_bound, upper_bound_removable, utilization
from .exact import GuardRailError, brute_force_opt, dp_feasible, export_ilp
from .ingest import (
    IngestError,
    ParseError,
    ingest_trace,
    load_canonical,
    load_schema,
    save_canonical,
)
from .model import ValidationError, compute_stats
from .packing import (
    heuristic_solve,
    packing_from_csv,
    packing_from_json,
    packing_to_csv,
    packing_to_json,
    verify_packing,
)
from .reduction import LiftError, certificate_to_json, reduce_instance
from .timeline import compress_time

SWEEP_HEADER = "eps,L,k_del,T,h,n,tau,U,R,K,seconds"


def format_fraction(x: Fraction) -> str:
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


def format_decimal(x: Fraction) -> str:
    """Exact decimal rendering when the denominator is 2^a 5^b, else num/den."""
    den = x.denominator
    two = five = 0
    while den % 2 == 0:
        den //= 2
        two += 1
    while den % 5 == 0:
        den //= 5
        five += 1
    if den != 1:
        return format_fraction(x)
    p = max(two, five)
    if p == 0:
        return str(x.numerator)
    scaled = x.numerator * 10**p // x.denominator
    sign = "-" if scaled < 0 else ""
    digits = str(abs(scaled)).rjust(p + 1, "0")
    whole, frac = digits[:-p], digits[-p:]
    frac = frac.rstrip("0")
    return f"{sign}{whole}.{frac}" if frac else f"{sign}{whole}"


def format_ratio(x: Fraction | None) -> str:
    return "nan" if x is None else repr(float(x))


def _parse_eps(text: str) -> Fraction:
    try:
        eps = Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise ValueError(f"cannot parse epsilon {text!r} as an exact rational") from None
    if eps < 0:
        raise ValueError("epsilon must be non-negative")
    return eps


def _load_packing_file(path: Path):
    text = path.read_text()
    if text.lstrip()[:1] == "{":
        return packing_from_json(text)
    return packing_from_csv(text)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dvbp", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def instance_arg(sp):
        sp.add_argument("instance", type=Path, help="instance file (canonical text or JSON)")

    sp = sub.add_parser("stats", help="print n, d, T, h, phi, tau, L")
    instance_arg(sp)

    sp = sub.add_parser("compress", help="time-compress an instance")
    instance_arg(sp)
    sp.add_argument("--out", type=Path, required=True)
    sp.add_argument("--map", type=Path, help="write the coordinate map CSV here")
    sp.add_argument("--format", choices=("text", "json"), default=None)

    sp = sub.add_parser("bounds", help="print L and the removable upper bound U")
    instance_arg(sp)
    g = sp.add_mutually_exclusive_group(required=True)
    g.add_argument("--epsilon", type=str, help="use k = floor(eps*L)")
    g.add_argument("--k", type=int, help="bin count for U")
    sp.add_argument("--variant", choices=("as-written", "scaled"), default="as-written")

    sp = sub.add_parser("reduce", help="apply the deletion rule; write outputs to a directory")
    instance_arg(sp)
    sp.add_argument("--epsilon", type=str, required=True)
    sp.add_argument("--mode", choices=("alpha", "f1", "f2"), default="f2")
    sp.add_argument("--no-recompress", action="store_true")
    sp.add_argument("--out", type=Path, required=True, help="output directory")

    sp = sub.add_parser("sweep", help="reduce once per epsilon; write a CSV report")
    instance_arg(sp)
    sp.add_argument("--eps-from", type=str, default="0")
    sp.add_argument("--eps-to", type=str, default="0.2")
    sp.add_argument("--eps-step", type=str, default="0.01")
    sp.add_argument("--mode", choices=("alpha", "f1", "f2"), default="f2")
    sp.add_argument("--out", type=Path, help="CSV path (default stdout)")
    sp.add_argument(
        "--jobs",
        type=int,
        default=int(os.environ.get("DVBP_JOBS", "1")),
        help="worker processes (default $DVBP_JOBS or 1)",
    )

    sp = sub.add_parser("check", help="verify a packing against an instance")
    instance_arg(sp)
    sp.add_argument("packing", type=Path)

    sp = sub.add_parser("solve", help="pack all requests")
    instance_arg(sp)
    sp.add_argument("--method", choices=("heuristic", "brute", "dp"), default="heuristic")
    sp.add_argument("--mode", choices=("alpha", "f1", "f2"), default="f2")
    sp.add_argument("--k", type=int, help="bin budget (dp only)")
    sp.add_argument("--limit", type=int, default=12, help="max n for brute force")
    sp.add_argument("--out", type=Path, help="packing file (.json or .csv)")

    sp = sub.add_parser("export-ilp", help="write an LP-format model over request types")
    instance_arg(sp)
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--out", type=Path, required=True)
    sp.add_argument("--vars", type=Path, help="sidecar JSON mapping variables to types/bins")

    sp = sub.add_parser("ingest", help="convert a CSV trace to a canonical instance")
    sp.add_argument("trace", type=Path)
    sp.add_argument("--schema", required=True, help="preset name (huawei, azure) or JSON path")
    sp.add_argument("--out", type=Path, required=True)
    sp.add_argument("--format", choices=("text", "json"), default=None)

    return p


def _fmt_from_path(path: Path, explicit: str | None) -> str:
    if explicit:
        return explicit
    return "json" if path.suffix == ".json" else "text"


def _cmd_stats(args) -> int:
    inst = load_canonical(args.instance)
    s = compute_stats(inst)
    L = lower_bound(inst)
    for key, val in (
        ("n", s.n),
        ("d", s.d),
        ("T", s.T),
        ("h", s.h),
        ("phi", s.phi),
        ("tau", s.tau),
        ("L", format_fraction(L)),
    ):
        print(f"{key}={val}")
    return 0


def _cmd_compress(args) -> int:
    inst = load_canonical(args.instance)
    out, tmap = compress_time(inst)
    args.out.write_text(save_canonical(out, _fmt_from_path(args.out, args.format)))
    if args.map:
        lines = ["original,compressed"]
        lines += [f"{int(o)},{int(c)}" for o, c in zip(tmap.originals, tmap.compressed)]
        args.map.write_text("\n".join(lines) + "\n")
    print(f"T={tmap.horizon}")
    return 0


def _cmd_bounds(args) -> int:
    inst = load_canonical(args.instance)
    L = lower_bound(inst)
    if args.epsilon is not None:
        eps = _parse_eps(args.epsilon)
        k = bin_budget(eps, L)
    else:
        k = args.k
        if k < 0:
            raise ValueError("--k must be non-negative")
    U = upper_bound_removable(inst, k, args.variant)
    print(f"L={format_fraction(L)}")
    print(f"k={k}")
    print(f"U={U}")
    return 0


def _reduced_row(eps: Fraction, mode: str, instance) -> tuple[str, ...]:
    t0 = time.perf_counter()
    reduced, cert = reduce_instance(instance, eps, mode=mode)
    dt = time.perf_counter() - t0
    s = compute_stats(reduced)
    m = cert.metrics
    return (
        format_decimal(eps),
        format_fraction(m.L),
        str(m.k_del),
        str(s.T),
        str(s.h),
        str(s.n),
        str(s.tau),
        str(m.U),
        format_ratio(m.R),
        format_ratio(m.K),
        f"{dt:.3f}",
    )


def _cmd_reduce(args) -> int:
    inst = load_canonical(args.instance)
    eps = _parse_eps(args.epsilon)
    reduced, cert = reduce_instance(
        inst, eps, mode=args.mode, recompress=not args.no_recompress
    )
    args.out.mkdir(parents=True, exist_ok=True)
    (args.out / "reduced.json").write_text(save_canonical(reduced, "json"))
    (args.out / "certificate.json").write_text(certificate_to_json(cert))
    s = compute_stats(reduced)
    m = cert.metrics
    row = (
        format_decimal(eps),
        format_fraction(m.L),
        str(m.k_del),
        str(s.T),
        str(s.h),
        str(s.n),
        str(s.tau),
        str(m.U),
        format_ratio(m.R),
        format_ratio(m.K),
    )
    header = SWEEP_HEADER.rsplit(",", 1)[0]
    (args.out / "metrics.csv").write_text(header + "\n" + ",".join(row) + "\n")
    print(f"n_prime={s.n}")
    print(f"tau_prime={s.tau}")
    print(f"k_del={m.k_del}")
    print(f"bins_used={len(cert.deletion_bins)}")
    return 0


_WORKER_INSTANCE = None
_WORKER_MODE = "f2"


def _init_sweep_worker(instance, mode):
    global _WORKER_INSTANCE, _WORKER_MODE
    _WORKER_INSTANCE = instance
    _WORKER_MODE = mode


def _sweep_task(eps: Fraction) -> tuple[str, ...]:
    return _reduced_row(eps, _WORKER_MODE, _WORKER_INSTANCE)


def _cmd_sweep(args) -> int:
    inst = load_canonical(args.instance)
    lo = _parse_eps(args.eps_from)
    hi = _parse_eps(args.eps_to)
    step = _parse_eps(args.eps_step)
    if hi < lo:
        raise ValueError("--eps-to must be >= --eps-from")
    if step <= 0 and hi != lo:
        raise ValueError("--eps-step must be positive")
    values = []
    eps = lo
    while eps <= hi:
        values.append(eps)
        if step <= 0:
            break
        eps += step

    if args.jobs > 1 and len(values) > 1:
        with ProcessPoolExecutor(
            max_workers=args.jobs,
            initializer=_init_sweep_worker,
            initargs=(inst, args.mode),
        ) as pool:
            rows = list(pool.map(_sweep_task, values))
    else:
        rows = [_reduced_row(eps, args.mode, inst) for eps in values]

    out_lines = [SWEEP_HEADER] + [",".join(r) for r in rows]
    text = "\n".join(out_lines) + "\n"
    if args.out:
        args.out.write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_check(args) -> int:
    inst = load_canonical(args.instance)
    packing = _load_packing_file(args.packing)
    report = verify_packing(inst, packing)
    print(f"feasible={'yes' if report.feasible else 'no'}")
    print(f"complete={'yes' if report.complete else 'no'}")
    print(f"bins={packing.k}")
    for v in report.violations[:10]:
        print(f"violation: bin={v.bin} t={v.t} dim={v.dim} overload={v.overload}")
    if len(report.violations) > 10:
        print(f"... and {len(report.violations) - 10} more violations")
    return 0 if (report.feasible and report.complete) else 1


def _cmd_solve(args) -> int:
    inst = load_canonical(args.instance)
    if args.method == "heuristic":
        packing = heuristic_solve(inst, mode=args.mode)
    elif args.method == "brute":
        _, packing = brute_force_opt(inst, limit=args.limit)
    else:
        if args.k is None:
            raise ValueError("--k is required for --method dp")
        feasible, maybe = dp_feasible(inst, args.k)
        print(f"feasible={'yes' if feasible else 'no'}")
        if not feasible:
            return 0
        packing = maybe
    print(f"k={packing.k}")
    if args.out:
        if args.out.suffix == ".json":
            args.out.write_text(packing_to_json(packing))
        else:
            args.out.write_text(packing_to_csv(packing))
    return 0


def _cmd_export_ilp(args) -> int:
    inst = load_canonical(args.instance)
    model, sidecar = export_ilp(inst, args.k)
    args.out.write_text(model)
    if args.vars:
        args.vars.write_text(sidecar)
    return 0


def _cmd_ingest(args) -> int:
    schema = load_schema(args.schema)
    instance, report = ingest_trace(args.trace, schema)
    args.out.write_text(save_canonical(instance, _fmt_from_path(args.out, args.format)))
    print(f"rows={report.rows}")
    print(f"n={instance.n}")
    print(f"dropped_nonpositive={report.dropped_nonpositive}")
    print(f"dropped_missing_end={report.dropped_missing_end}")
    print(f"errors={len(report.errors)}")
    for line_no, msg in report.errors[:10]:
        print(f"error line {line_no}: {msg}", file=sys.stderr)
    return 0


_COMMANDS = {
    "stats": _cmd_stats,
    "compress": _cmd_compress,
    "bounds": _cmd_bounds,
    "reduce": _cmd_reduce,
    "sweep": _cmd_sweep,
    "check": _cmd_check,
    "solve": _cmd_solve,
    "export-ilp": _cmd_export_ilp,
    "ingest": _cmd_ingest,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0
    try:
        return _COMMANDS[args.command](args)
    except (ValidationError, ParseError, IngestError, LiftError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (FileNotFoundError, IsADirectoryError, GuardRailError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def entrypoint() -> None:
    sys.exit(main())
