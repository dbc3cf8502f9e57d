"""Command-line scenario runner.

Exit codes: 0 success, 2 invalid scenario file or flags, 3 conditioning on
an impossible outcome.
"""

from __future__ import annotations

import argparse
import csv
import io
import itertools
import sys
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import __version__
from .counterfactual import (
    Scenario,
    closed_form_pure_l_first,
    closed_form_pure_r_first,
    conditional_prob,
    counterfactual_prob,
    joint_prob,
)
from .exceptions import DegenerateParams, ImpossibleCondition, NoConditionEvents
from .hardy import HardyParams, closed_form_Lr, closed_form_rL
from .measurement import check_reciprocity, is_symmetric_case
from .montecarlo import RunConfig, binomial_sigma, empirical_conditional, simulate
from .scenario_file import ORDERS, ScenarioError, ScenarioSpec, load_scenario, with_hardy_params
from .spacetime import (
    OrderTag,
    apply_boost,
    causally_separated,
    find_order_reversing_boost,
    interval,
)

CSV_HEADER = ("scenario", "order", "quantity", "label", "value", "path")
ORDER_CAPTION = (
    "note: which jump comes first (l-first / r-first) is an input hypothesis; "
    "no boost or coordinate data can decide it."
)


@dataclass(frozen=True)
class Row:
    scenario: str
    order: str
    quantity: str
    label: str
    value: float
    path: str

    def cells(self) -> list[str]:
        return [self.scenario, self.order, self.quantity, self.label, fmt(self.value), self.path]


def fmt(value: float) -> str:
    return format(float(value), ".12g")


def _cf_scenario(spec: ScenarioSpec, order: OrderTag) -> Scenario:
    return Scenario(spec.rho0, spec.l_basis, spec.r_basis, spec.r_prime_basis, order)


def analyze(spec: ScenarioSpec, scenario_name: str) -> tuple[list[Row], list[str]]:
    """Evaluate every requested analysis; returns CSV rows and extra report lines."""
    rows: list[Row] = []
    notes: list[str] = []

    def add(order, quantity, label, value, path):
        rows.append(Row(scenario_name, order, quantity, label, value, path))

    lb, rb = spec.l_basis, spec.r_basis
    cond_label = f"{spec.l_label}|{spec.r_label}"

    if "joint" in spec.analyses:
        for l_lab in lb.labels:
            for r_lab in rb.labels:
                add("-", "joint", f"{l_lab},{r_lab}", joint_prob(spec.rho0, lb, rb, l_lab, r_lab), "analytic")

    if "conditional" in spec.analyses:
        for order in spec.orders:
            p = conditional_prob(spec.rho0, lb, rb, spec.l_label, spec.r_label, order)
            add(order.value, "conditional", cond_label, p, "analytic")

    cf_label = f"{spec.r_prime_label}|{spec.r_label}"
    cf_values = {}
    if "counterfactual" in spec.analyses or "gap" in spec.analyses:
        for order in spec.orders:
            cf_values[order] = counterfactual_prob(_cf_scenario(spec, order), spec.r_label, spec.r_prime_label)
    closed = {}
    if spec.hardy is not None:
        closed = {OrderTag.R_FIRST: closed_form_rL(spec.hardy), OrderTag.L_FIRST: closed_form_Lr(spec.hardy)}
    elif spec.ket is not None and spec.r_prime_basis is not None:
        r_prime = spec.r_prime_basis.vector(spec.r_prime_label)
        closed = {
            OrderTag.R_FIRST: closed_form_pure_r_first(spec.ket, spec.space, r_prime),
            OrderTag.L_FIRST: closed_form_pure_l_first(
                spec.ket, spec.space, lb, rb.vector(spec.r_label), r_prime
            ),
        }
    if "counterfactual" in spec.analyses:
        for order in spec.orders:
            add(order.value, "counterfactual", cf_label, cf_values[order], "analytic")
            if order in closed:
                add(order.value, "counterfactual", cf_label, closed[order], "closed-form")

    if "gap" in spec.analyses:
        if len(cf_values) == 2:
            gap = cf_values[OrderTag.L_FIRST] - cf_values[OrderTag.R_FIRST]
        else:
            gap = (counterfactual_prob(_cf_scenario(spec, OrderTag.L_FIRST), spec.r_label, spec.r_prime_label)
                   - counterfactual_prob(_cf_scenario(spec, OrderTag.R_FIRST), spec.r_label, spec.r_prime_label))
        add("both", "gap", cf_label, gap, "analytic")
        if closed:
            add("both", "gap", cf_label, closed[OrderTag.L_FIRST] - closed[OrderTag.R_FIRST], "closed-form")

    if "reciprocity" in spec.analyses:
        report = check_reciprocity(spec.ket, spec.space, lb, rb)
        for e in report.entries:
            tag = f"{e.l_label}=>{e.r_label}"
            add("-", "reciprocity_premise_residual", tag, e.premise_residual, "analytic")
            add("-", "reciprocity_conclusion_residual", tag, e.conclusion_residual, "analytic")
            add("-", "reciprocity_degenerate", tag, float(e.degenerate), "analytic")
        sym = is_symmetric_case(spec.ket, spec.space, lb, rb)
        for lab, flag in sym.per_outcome.items():
            add("-", "symmetric_case", lab, float(flag), "analytic")
        notes.append(f"reciprocity holds: {report.holds()} (max residual {report.max_residual:.3g})")

    if "montecarlo" in spec.analyses:
        for order in spec.orders:
            cfg = RunConfig(spec.n_runs, spec.seed, order)
            table = simulate(spec.rho0, lb, rb, cfg, n_shards=spec.shards)
            for l_lab in lb.labels:
                for r_lab in rb.labels:
                    add(order.value, "joint", f"{l_lab},{r_lab}", table.frequency(l_lab, r_lab), "empirical")
            try:
                p_emp = empirical_conditional(table, spec.l_label, spec.r_label)
            except NoConditionEvents:
                notes.append(f"{order.value}: no runs produced {spec.r_label}; empirical conditional skipped")
                continue
            n_r = table.n_r(spec.r_label)
            add(order.value, "conditional", cond_label, p_emp, "empirical")
            add(order.value, "conditional_sigma", cond_label, binomial_sigma(p_emp, n_r), "empirical")
            add(order.value, "condition_count", spec.r_label, n_r, "empirical")

    if spec.events is not None:
        p, q = spec.events
        s2 = interval(p, q)
        add("-", "interval", "L,R", s2, "analytic")
        sep = causally_separated(p, q)
        add("-", "causally_separated", "L,R", float(sep), "analytic")
        if sep and p.t != q.t:
            boost = find_order_reversing_boost(p, q)
            pb, qb = apply_boost(boost, p), apply_boost(boost, q)
            add("-", "reversing_boost_speed", "L,R", boost.speed, "analytic")
            for axis, comp in zip("xyz", boost.velocity):
                add("-", f"reversing_boost_v{axis}", "L,R", comp, "analytic")
            add("-", "time_difference", "fiducial", p.t - q.t, "analytic")
            add("-", "time_difference", "boosted", pb.t - qb.t, "analytic")
        notes.append(ORDER_CAPTION)
    return rows, notes


def parse_sweep(items: list[str]) -> dict:
    """``alpha=a:b:n`` into ``{"alpha": linspace(a, b, n)}``; ends may be expressions like ``pi/8``."""
    from .scenario_file import parse_number

    grid = {}
    for item in items:
        try:
            key, rng = item.split("=", 1)
            a, b, n = rng.split(":")
            n = int(n)
            if key not in ("alpha", "beta") or n < 1:
                raise ValueError
            grid[key] = np.linspace(parse_number(a), parse_number(b), n)
        except ValueError:
            raise ScenarioError(f"bad --sweep {item!r}; expected alpha=a:b:n or beta=a:b:n") from None
    return grid


def expand(spec: ScenarioSpec, sweep: dict) -> list[tuple[str, ScenarioSpec]]:
    if not sweep:
        return [(spec.name, spec)]
    if spec.hardy is None:
        raise ScenarioError("--sweep needs the hardy state preset")
    alphas = sweep.get("alpha", [spec.hardy.alpha])
    betas = sweep.get("beta", [spec.hardy.beta])
    out = []
    for a, b in itertools.product(alphas, betas):
        try:
            params = HardyParams(a, b)
        except DegenerateParams as exc:
            raise ScenarioError(f"--sweep: {exc}") from None
        out.append((f"{spec.name}[alpha={fmt(a)},beta={fmt(b)}]", with_hardy_params(spec, params)))
    return out


def render_table(rows: list[Row]) -> str:
    cells = [list(CSV_HEADER)] + [r.cells() for r in rows]
    widths = [max(len(c[i]) for c in cells) for i in range(len(CSV_HEADER))]
    lines = ["  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip() for row in cells]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines)


def render_csv(rows: list[Row]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    writer.writerows(r.cells() for r in rows)
    return buf.getvalue()


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="jumporder",
        description="Actual and counterfactual probabilities for bipartite measurements "
        "under both causelike orderings of the quantum jumps.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="evaluate a scenario file")
    run.add_argument("scenario", type=Path, help="YAML scenario file")
    run.add_argument("--order", choices=sorted(ORDERS), help="override the file's ordering")
    run.add_argument("--sweep", action="append", default=[], metavar="PARAM=a:b:n",
                     help="grid over a hardy angle (repeatable)")
    run.add_argument("--seed", type=int, help="override montecarlo.seed")
    run.add_argument("--runs", type=int, help="override montecarlo.n_runs")
    run.add_argument("--csv", type=Path, metavar="PATH", help="write machine-readable results here")
    run.add_argument("--quiet", action="store_true", help="no table on standard output")
    return parser


def _err(msg: str):
    print(f"jumporder: error: {msg}", file=sys.stderr)


def run(args: argparse.Namespace) -> int:
    try:
        spec = load_scenario(args.scenario)
        if args.order:
            spec = replace(spec, orders=ORDERS[args.order])
        if args.seed is not None:
            if not 0 <= args.seed < 2**64:
                raise ScenarioError("--seed must be an unsigned 64-bit integer")
            spec = replace(spec, seed=args.seed)
        if args.runs is not None:
            if args.runs < 1:
                raise ScenarioError("--runs must be positive")
            spec = replace(spec, n_runs=args.runs)
        points = expand(spec, parse_sweep(args.sweep))
    except ScenarioError as exc:
        where = f"{args.scenario}:{exc.line}" if exc.line else str(args.scenario)
        _err(f"{where}: {exc}")
        return 2
    except OSError as exc:
        _err(f"{args.scenario}: {exc.strerror or exc}")
        return 2

    rows, notes = [], []
    try:
        for name, point in points:
            r, n = analyze(point, name)
            rows.extend(r)
            notes.extend(x for x in n if x not in notes)
    except ImpossibleCondition as exc:
        _err(f"{args.scenario}: cannot condition on outcome {exc.label!r} "
             f"(probability {exc.probability:.3g})")
        return 3

    if not args.quiet:
        print(f"scenario: {spec.name}  (orders: {', '.join(o.value for o in spec.orders)})")
        print(render_table(rows))
        for note in notes:
            print(note)
    if args.csv is not None:
        try:
            with open(args.csv, "w", encoding="utf-8", newline="") as fh:
                fh.write(render_csv(rows))
        except OSError as exc:
            _err(f"{args.csv}: {exc.strerror or exc}")
            return 2
    return 0


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "run":
        return run(args)
    return 2


if __name__ == "__main__":
    sys.exit(main())
