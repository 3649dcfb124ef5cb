"""Command-line front end.

Three subcommands:

* gen-grid writes a grid network document.
* estimate loads one or more network documents and runs one method
  (exhaustive, all-terminal, mcs, bounds, exact), emitting one row per
  estimated quantity as CSV or JSON.
* report merges row files produced by estimate into a wide comparison
  table, joining estimates against bounds rows to compute observed error
  factors.

Exit codes: 0 success, 2 malformed input, 3 invalid plan (the repair-rate
margin fails or estimation is degenerate), 4 an enumeration cap or budget
was exceeded.

Rows are deterministic for a fixed seed and flag set; pass --no-runtime to
blank the wall-clock column when byte-identical output matters. With
several systems, row i runs with seed + i so sweeps stay reproducible but
rows are independent; --jobs fans systems out across processes without
changing any row.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys as _sys
import time
from concurrent.futures import ProcessPoolExecutor

from .approx import (
    DEFAULT_THRESHOLD_EXPONENT,
    plan_all_terminal,
    plan_exhaustive,
    planned_samples,
    run_all_terminal,
    run_exhaustive,
)
from .cutsets import DEFAULT_RUN_BUDGET, enumerate_minimal_cutsets, min_cut
from .dnf import Estimate
from .errors import CapExceededError, EstimationError, InputError, PlanInvalidError
from .exact import exact_by_states, first_order_bounds
from .mcs import mcs_multiplicative_params, mcs_run
from .system import grid_system, load_system, system_stats, to_document

METHODS = ("exhaustive", "all-terminal", "mcs", "bounds", "exact")

COLUMNS = (
    "system",
    "method",
    "quantity",
    "value",
    "lower",
    "upper",
    "matched_decimals",
    "epsilon",
    "delta",
    "seed",
    "samples",
    "runtime_seconds",
    "min_cut_prob",
    "ratio",
    "near_min_count",
    "no_failure",
)

REPORT_METHOD_ORDER = ("exact", "exhaustive", "all-terminal", "mcs")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="relfreq",
        description="Failure probability and frequency of repairable networks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen-grid", help="write a grid network document")
    gen.add_argument("rows", type=int)
    gen.add_argument("cols", type=int)
    gen.add_argument("p", type=float, help="per-component unavailability")
    gen.add_argument("mu", type=float, help="per-component repair rate")
    gen.add_argument("out", help="output document path")
    gen.add_argument("--name", help="system id (default embeds the parameters)")

    est = sub.add_parser("estimate", help="run one method on network documents")
    est.add_argument("systems", nargs="+", help="network document paths")
    est.add_argument("--method", required=True, choices=METHODS)
    eps = est.add_mutually_exclusive_group()
    eps.add_argument("--epsilon", type=float, help="multiplicative error target")
    eps.add_argument(
        "--epsilon-auto",
        action="store_true",
        help="smallest epsilon whose worst-case plan fits --trial-budget",
    )
    est.add_argument("--delta", type=float, default=1e-2)
    est.add_argument("--seed", type=int)
    est.add_argument(
        "--threshold-exponent", type=float, default=DEFAULT_THRESHOLD_EXPONENT,
        help="all-terminal route hands off to MCS when the min cut "
        "probability exceeds n to the minus this",
    )
    est.add_argument(
        "--contraction-confidence", type=float, default=2.0,
        help="near-min enumeration misses with probability at most n to the minus this",
    )
    est.add_argument("--contraction-budget", type=int, default=DEFAULT_RUN_BUDGET)
    est.add_argument("--trial-budget", type=float, default=1e8)
    est.add_argument("--trials", type=int, help="override MCS trials per batch")
    est.add_argument("--batches", type=int, help="override MCS batch count")
    est.add_argument("--format", choices=("csv", "json"), default="csv")
    est.add_argument("--digits", type=int, default=17, help="CSV significant digits")
    est.add_argument("--no-runtime", action="store_true", help="blank the runtime column")
    est.add_argument("--jobs", type=int, default=1)
    est.add_argument("--out", help="output path (default stdout)")

    rep = sub.add_parser("report", help="merge estimate rows into a comparison table")
    rep.add_argument("rows", nargs="+", help="row files from estimate (csv or json)")
    rep.add_argument("--digits", type=int, default=17)
    rep.add_argument("--out", help="output path (default stdout)")
    return parser


def cmd_gen_grid(args) -> int:
    system = grid_system(args.rows, args.cols, args.p, args.mu)
    doc = to_document(system)
    doc["name"] = args.name or f"grid-{args.rows}x{args.cols}-p{args.p:g}-mu{args.mu:g}"
    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")
    return 0


def _row(system_name, method, quantity, **fields) -> dict:
    row = {k: None for k in COLUMNS}
    row.update(system=system_name, method=method, quantity=quantity)
    row.update(fields)
    return row


def _estimate_rows(name, method, outcome_pf: Estimate, outcome_ff: Estimate, seed,
                   no_failure=None, **aux) -> list[dict]:
    common = dict(seed=seed, no_failure=no_failure, **aux)
    return [
        _row(name, method, "pf", value=outcome_pf.value, epsilon=outcome_pf.epsilon,
             delta=outcome_pf.delta, samples=outcome_pf.samples,
             runtime_seconds=outcome_pf.elapsed, **common),
        _row(name, method, "ff", value=outcome_ff.value, epsilon=outcome_ff.epsilon,
             delta=outcome_ff.delta, samples=outcome_ff.samples,
             runtime_seconds=outcome_ff.elapsed, **common),
    ]


def _auto_epsilon(samples_for, budget: float) -> float:
    """Smallest epsilon whose worst-case plan stays within budget, by
    geometric bisection (planned samples shrink as epsilon grows)."""
    lo, hi = 1e-6, 1e6
    if samples_for(hi) > budget:
        return hi
    if samples_for(lo) <= budget:
        return lo
    for _ in range(120):
        mid = math.sqrt(lo * hi)
        if samples_for(mid) <= budget:
            hi = mid
        else:
            lo = mid
    return hi


def _mcs_sizing_inputs(system):
    """(min cut probability, flux floor) for MCS sizing: Stoer-Wagner plus
    the size surrogate when all-terminal, full enumeration otherwise."""
    if system.all_terminal:
        base = min_cut(system)
        surrogate = min(max(base.weight / float(system.ws.max()), 1.0), float(system.m))
        return base.prob, system_stats(system, surrogate).rho
    col = enumerate_minimal_cutsets(system)
    return col.max_prob, system_stats(system, col.min_size).rho


def run_single(task: dict) -> list[dict]:
    """All estimate work for one system document. Pure function of the task
    dict so it can run in a worker process."""
    system = load_system(task["path"])
    name = system.name or task["path"]
    method = task["method"]
    seed = task["seed"]
    delta = task["delta"]

    if method == "exact":
        t0 = time.perf_counter()
        pf, ff = exact_by_states(system)
        elapsed = time.perf_counter() - t0
        return [
            _row(name, method, "pf", value=pf, runtime_seconds=elapsed),
            _row(name, method, "ff", value=ff, runtime_seconds=elapsed),
        ]

    if method == "bounds":
        t0 = time.perf_counter()
        col = enumerate_minimal_cutsets(system)
        pf_b, ff_b = first_order_bounds(col, system)
        elapsed = time.perf_counter() - t0
        rows = []
        for quantity, b in (("pf", pf_b), ("ff", ff_b)):
            rows.append(_row(
                name, method, quantity,
                value=b.truncated, lower=b.lower, upper=b.upper,
                matched_decimals=b.matched_decimals, runtime_seconds=elapsed,
            ))
        return rows

    if method == "exhaustive":
        cutsets = enumerate_minimal_cutsets(system)
        if task["epsilon"] is not None:
            epsilon = task["epsilon"]
        else:
            epsilon = _auto_epsilon(
                lambda e: planned_samples(
                    system, plan_exhaustive(system, e, delta, cutsets=cutsets)
                ),
                task["trial_budget"],
            )
        plan = plan_exhaustive(system, epsilon, delta, cutsets=cutsets)
        out = run_exhaustive(system, plan, rng=seed)
        return _estimate_rows(
            name, method, out.pf, out.ff, seed, min_cut_prob=cutsets.max_prob,
        )

    if method == "all-terminal":
        texp = task["threshold_exponent"]
        if task["epsilon"] is not None:
            epsilon = task["epsilon"]
        else:
            epsilon = _auto_epsilon(
                lambda e: planned_samples(
                    system, plan_all_terminal(system, e, delta, threshold_exponent=texp)
                ),
                task["trial_budget"],
            )
        plan = plan_all_terminal(system, epsilon, delta, threshold_exponent=texp)
        out = run_all_terminal(
            system, plan, rng=seed,
            confidence=task["confidence"], run_budget=task["contraction_budget"],
        )
        return _estimate_rows(
            name, method, out.pf, out.ff, seed,
            no_failure=out.no_failure if plan.branch == "mcs" else None,
            min_cut_prob=plan.min_cut_prob,
            ratio=plan.ratio,
            near_min_count=out.near_min.count if out.near_min is not None else None,
        )

    if method == "mcs":
        if task["trials"] is not None and task["batches"] is not None:
            S, T = task["trials"], task["batches"]
            epsilon = task["epsilon"]
        else:
            p_star, floor = _mcs_sizing_inputs(system)
            if task["epsilon"] is not None:
                epsilon = task["epsilon"]
            else:
                epsilon = _auto_epsilon(
                    lambda e: math.prod(
                        mcs_multiplicative_params(system, e, delta, p_star, floor)
                    ),
                    task["trial_budget"],
                )
            S, T = mcs_multiplicative_params(system, epsilon, delta, p_star, floor)
        result = mcs_run(
            system, S, T, rng=seed,
            error_mode="multiplicative",
            epsilon=math.nan if epsilon is None else epsilon,
            delta=delta,
        )
        return _estimate_rows(
            name, method, result.pf, result.ff, seed, no_failure=result.no_failure,
        )

    raise InputError(f"unknown method: {method}")


def _format_cell(value, digits: int):
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if math.isnan(value):
            return ""
        return format(value, f".{digits}g")
    return str(value)


def _write_rows(rows: list[dict], fmt: str, digits: int, out_path) -> None:
    if fmt == "json":
        cleaned = [
            {k: (None if isinstance(v, float) and math.isnan(v) else v)
             for k, v in row.items()}
            for row in rows
        ]
        text = json.dumps(cleaned, indent=2) + "\n"
    else:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(COLUMNS)
        for row in rows:
            writer.writerow([_format_cell(row[c], digits) for c in COLUMNS])
        text = buf.getvalue()
    if out_path:
        with open(out_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        _sys.stdout.write(text)


def cmd_estimate(args) -> int:
    if args.method in ("exhaustive", "all-terminal", "mcs"):
        explicit_trials = args.trials is not None and args.batches is not None
        if args.epsilon is None and not args.epsilon_auto and not explicit_trials:
            raise InputError(f"--method {args.method} needs --epsilon or --epsilon-auto")
    tasks = []
    for i, path in enumerate(args.systems):
        tasks.append({
            "path": path,
            "method": args.method,
            "epsilon": args.epsilon,
            "delta": args.delta,
            "seed": None if args.seed is None else args.seed + i,
            "threshold_exponent": args.threshold_exponent,
            "confidence": args.contraction_confidence,
            "contraction_budget": args.contraction_budget,
            "trial_budget": args.trial_budget,
            "trials": args.trials,
            "batches": args.batches,
        })
    if args.jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(run_single, tasks))
    else:
        results = [run_single(t) for t in tasks]
    rows = [row for batch in results for row in batch]
    if args.no_runtime:
        for row in rows:
            row["runtime_seconds"] = None
    _write_rows(rows, args.format, args.digits, args.out)
    return 0


def _load_row_file(path: str) -> list[dict]:
    text = open(path, encoding="utf-8").read()
    if path.endswith(".json") or text.lstrip().startswith("["):
        return json.loads(text)
    rows = []
    for rec in csv.DictReader(io.StringIO(text)):
        row = {}
        for key, raw in rec.items():
            if raw is None or raw == "":
                row[key] = None
            elif key in ("system", "method", "quantity"):
                row[key] = raw
            elif key == "no_failure":
                row[key] = raw == "true"
            elif key in ("matched_decimals", "seed", "samples", "near_min_count"):
                row[key] = int(raw)
            else:
                row[key] = float(raw)
        rows.append(row)
    return rows


def cmd_report(args) -> int:
    """Merge row files into one wide table per (system, quantity).

    Bounds rows supply lower/upper; every method row contributes value,
    runtime, epsilon, and an observed error factor
    max(|value - lower|, |value - upper|) / lower. A later file wins when
    two rows describe the same (system, quantity, method). MCS rows that
    saw no failure render their error factor as '--'."""
    merged: dict[tuple, dict] = {}
    order = []
    methods_seen = []
    for path in args.rows:
        for row in _load_row_file(path):
            key = (row["system"], row["quantity"])
            if key not in merged:
                merged[key] = {}
                order.append(key)
            if row["method"] == "bounds":
                merged[key]["bounds"] = row
            else:
                merged[key][row["method"]] = row
                if row["method"] not in methods_seen:
                    methods_seen.append(row["method"])
    methods = [m for m in REPORT_METHOD_ORDER if m in methods_seen]
    methods += [m for m in methods_seen if m not in REPORT_METHOD_ORDER]

    header = ["system", "quantity", "lower", "upper", "truncated", "matched_decimals"]
    for m in methods:
        header += [f"{m}_value", f"{m}_runtime_seconds", f"{m}_epsilon", f"{m}_actual_error"]

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for key in order:
        group = merged[key]
        bounds = group.get("bounds")
        lower = bounds["lower"] if bounds else None
        upper = bounds["upper"] if bounds else None
        cells = [
            key[0],
            key[1],
            _format_cell(lower, args.digits),
            _format_cell(upper, args.digits),
            _format_cell(bounds["value"] if bounds else None, args.digits),
            _format_cell(bounds["matched_decimals"] if bounds else None, args.digits),
        ]
        for m in methods:
            row = group.get(m)
            if row is None:
                cells += ["", "", "", ""]
                continue
            if row.get("no_failure"):
                err = "--"
            elif lower and lower > 0.0 and row["value"] is not None:
                err = _format_cell(
                    max(abs(row["value"] - lower), abs(row["value"] - upper)) / lower,
                    args.digits,
                )
            else:
                err = ""
            cells += [
                _format_cell(row["value"], args.digits),
                _format_cell(row.get("runtime_seconds"), args.digits),
                _format_cell(row.get("epsilon"), args.digits),
                err,
            ]
        writer.writerow(cells)
    text = buf.getvalue()
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        _sys.stdout.write(text)
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "gen-grid":
            return cmd_gen_grid(args)
        if args.command == "estimate":
            return cmd_estimate(args)
        return cmd_report(args)
    except InputError as e:
        print(f"error: {e}", file=_sys.stderr)
        return 2
    except (PlanInvalidError, EstimationError) as e:
        print(f"error: {e}", file=_sys.stderr)
        return 3
    except CapExceededError as e:
        print(f"error: {e}", file=_sys.stderr)
        return 4
    except OSError as e:
        print(f"error: {e}", file=_sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
