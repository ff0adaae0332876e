"""Command-line interface.

Subcommands: ``approx``, ``exact``, ``verify``, ``generate``, ``gap-study``.
Machine-readable output is JSON (``--json PATH``, ``-`` for stdout) or CSV;
a plain-text summary with per-phase timings goes to stdout.  JSON and CSV
never contain timings, so identical invocations produce identical bytes.

Exit codes: 0 success / ACCEPT, 1 REJECT, 2 input or validation error,
3 internal verification failure, 4 branch-and-bound budget exhausted.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time
from contextlib import contextmanager
from fractions import Fraction
from pathlib import Path

from .errors import BudgetExhausted, InternalInconsistencyError, MafError, PartitionError, TreeError
from .forest import AgreementForest, brute_force_maf, partition_from_cut, tbr_estimate, verify_af
from .instances import (
    RandomInstanceSpec,
    certified_gap,
    generate_caterpillar_grid,
    ilp_lower_bound,
    random_instance,
)
from .lp import DEFAULT_BUDGET, build_model, solve_ilp_exact, solve_lp, solve_lp_float
from .phylo import parse_newick, write_newick
from .quartets import format_constraints
from .rounding import rounding_certificate, rounding_trace
from .solution import fraction_decimal, fraction_text

EXIT_OK = 0
EXIT_REJECT = 1
EXIT_INPUT = 2
EXIT_INTERNAL = 3
EXIT_BUDGET = 4

GAP_COLUMNS = [
    "ell",
    "n",
    "constraints",
    "lp_obj_num",
    "lp_obj_den",
    "ilp_lower_bound",
    "certified_gap",
    "rounded_cut_size",
]


class Timer:
    def __init__(self):
        self.phases: list[tuple[str, float]] = []

    @contextmanager
    def phase(self, name):
        start = time.perf_counter()
        try:
            yield
        finally:
            self.phases.append((name, time.perf_counter() - start))

    def summary(self) -> str:
        return "  ".join(f"{name}={secs:.3f}s" for name, secs in self.phases)


def _rational(q) -> dict:
    return {"fraction": fraction_text(q), "decimal": fraction_decimal(q)}


def _load_trees(path):
    text = Path(path).read_text(encoding="utf-8")
    trees = parse_newick(text)
    if len(trees) < 2:
        raise TreeError("at least two trees are required")
    return trees


def _write_json(target, payload):
    text = json.dumps(payload, indent=2, ensure_ascii=False) + "\n"
    if target == "-":
        sys.stdout.write(text)
    else:
        Path(target).write_text(text, encoding="utf-8")


def _summary_forest(forest, limit=8):
    shown = ["{" + ",".join(b) + "}" for b in forest.components[:limit]]
    more = f" ... (+{forest.k - limit})" if forest.k > limit else ""
    return " ".join(shown) + more


# ---------------------------------------------------------------------- #
# approx


def cmd_approx(args) -> int:
    timer = Timer()
    with timer.phase("parse"):
        trees = _load_trees(args.input)
    t1 = trees[0]
    if args.root_leaf is not None:
        t1.taxon(args.root_leaf)
    with timer.phase("quartets"):
        model = build_model(trees)
    if args.dump_quartets:
        Path(args.dump_quartets).write_text(format_constraints(model.quartets), encoding="utf-8")
    if args.dump_model:
        Path(args.dump_model).write_text(model.dump(), encoding="utf-8")
    with timer.phase("lp"):
        x = solve_lp(model)
    float_obj = None
    if args.float_lp:
        with timer.phase("lp_float"):
            _, float_obj = solve_lp_float(model)
    with timer.phase("round"):
        trace = rounding_trace(t1, x, root=args.root_leaf)
        cut = trace.cut
    with timer.phase("verify"):
        cert = rounding_certificate(t1, x, cut, root=args.root_leaf, model=model)
        forest = partition_from_cut(t1, cut)
        verdict = verify_af(trees, forest)
        if not verdict.accepted:
            raise InternalInconsistencyError(f"rounded forest rejected: {verdict.witness}")
    tbr = tbr_estimate(forest.k, len(trees), exact=False)
    lp_bound_k = math.ceil(x.objective) + 1
    report = {
        "command": "approx",
        "instance": {"n": t1.n, "t": len(trees), "edges": t1.num_edges, "constraints": len(model.constraints)},
        "lp_objective": _rational(x.objective),
        "lp_solution": {str(e): fraction_text(v) for e, v in enumerate(x.values) if v},
        "cut_size": len(cut),
        "forest": forest.to_dict(cut, exact=False),
        "verification": {"af": verdict.to_dict()["verdict"], "ilp_feasible": cert.feasible},
        "certificate": cert.to_dict(),
        "ratio": {
            "cut_size": len(cut),
            "four_times_lp": _rational(4 * x.objective),
            "maf_lower_bound": lp_bound_k,
            "components_over_lower_bound": _rational(Fraction(forest.k, lp_bound_k)),
        },
        "tbr": None if tbr is None else {"value": tbr.value, "label": tbr.label},
    }
    if args.json:
        _write_json(args.json, report)
    print(f"approx: n={t1.n} t={len(trees)} constraints={len(model.constraints)}")
    print(f"  LP optimum {fraction_text(x.objective)} (~{float(x.objective):.6g})", end="")
    print(f"; float LP {float_obj:.9g}" if float_obj is not None else "")
    print(f"  cut size {len(cut)} <= 4*LP = {fraction_text(4 * x.objective)}; certificate OK")
    print(f"  forest k={forest.k}: {_summary_forest(forest)}")
    if tbr is not None:
        print(f"  {tbr.label}: {tbr.value}")
    print(f"  timings: {timer.summary()}")
    return EXIT_OK


# ---------------------------------------------------------------------- #
# exact


def cmd_exact(args) -> int:
    timer = Timer()
    with timer.phase("parse"):
        trees = _load_trees(args.input)
    t1 = trees[0]
    with timer.phase("quartets"):
        model = build_model(trees)
    try:
        with timer.phase("ilp"):
            sol = solve_ilp_exact(model, budget=args.budget, method=args.method)
    except BudgetExhausted as exc:
        inc = exc.incumbent
        payload = {
            "command": "exact",
            "optimal": False,
            "error": str(exc),
            "nodes": exc.nodes,
            "lower_bound_cut_size": exc.lower_bound,
            "incumbent": None
            if inc is None
            else partition_from_cut(t1, inc.cut).to_dict(inc.cut, exact=False),
        }
        if args.json:
            _write_json(args.json, payload)
        print(f"exact: budget of {args.budget} nodes exhausted; lower bound {exc.lower_bound}", file=sys.stderr)
        return EXIT_BUDGET
    with timer.phase("verify"):
        forest = partition_from_cut(t1, sol.cut)
        verdict = verify_af(trees, forest)
        if not verdict.accepted or forest.k != len(sol.cut) + 1:
            raise InternalInconsistencyError(f"exact forest failed verification: {verdict.witness}")
        oracle = None
        if t1.n <= 8:
            oracle_forest, oracle_cut = brute_force_maf(trees)
            if len(oracle_cut) != len(sol.cut):
                raise InternalInconsistencyError(
                    f"program optimum {len(sol.cut)} differs from brute force {len(oracle_cut)}"
                )
            oracle = {"k": oracle_forest.k, "agrees": True}
    tbr = tbr_estimate(forest.k, len(trees), exact=True)
    report = {
        "command": "exact",
        "instance": {"n": t1.n, "t": len(trees), "edges": t1.num_edges, "constraints": len(model.constraints)},
        "optimal": sol.optimal,
        "method": sol.method,
        "nodes": sol.nodes,
        "cut_size": len(sol.cut),
        "forest": forest.to_dict(sol.cut, exact=True),
        "verification": {"af": "ACCEPT", "brute_force": oracle},
        "tbr": None if tbr is None else {"value": tbr.value, "label": tbr.label},
    }
    if args.json:
        _write_json(args.json, report)
    print(f"exact: n={t1.n} t={len(trees)} constraints={len(model.constraints)} method={sol.method}")
    print(f"  optimal cut size {len(sol.cut)}; MAF k={forest.k}: {_summary_forest(forest)}")
    if oracle is not None:
        print("  brute-force oracle agrees")
    if tbr is not None:
        print(f"  {tbr.label}: {tbr.value}")
    print(f"  timings: {timer.summary()}")
    return EXIT_OK


# ---------------------------------------------------------------------- #
# verify


def cmd_verify(args) -> int:
    trees = parse_newick(Path(args.input).read_text(encoding="utf-8"))
    try:
        data = json.loads(Path(args.forest).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise PartitionError(f"forest file is not valid JSON: {exc}") from None
    forest = AgreementForest.from_dict(data)
    verdict = verify_af(trees, forest)
    payload = {"command": "verify", "k": forest.k, **verdict.to_dict()}
    if args.json:
        _write_json(args.json, payload)
    if verdict.accepted:
        print(f"ACCEPT: {forest.k} components form an agreement forest")
        return EXIT_OK
    print(f"REJECT: {json.dumps(verdict.witness, ensure_ascii=False)}")
    return EXIT_REJECT


# ---------------------------------------------------------------------- #
# generate


def cmd_generate(args) -> int:
    if args.family == "grid":
        trees = list(generate_caterpillar_grid(args.ell))
    else:
        trees = random_instance(RandomInstanceSpec(n=args.n, t=args.t, seed=args.seed))
    text = "".join(write_newick(tree) + "\n" for tree in trees)
    if args.output in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(args.output).write_text(text, encoding="utf-8")
        print(f"wrote {len(trees)} trees on {trees[0].n} taxa to {args.output}")
    return EXIT_OK


# ---------------------------------------------------------------------- #
# gap study


def gap_study_rows(ells, max_constraints=None, timer=None):
    """One dict per grid size with the :data:`GAP_COLUMNS` fields."""
    rows = []
    for ell in ells:
        t1, t2 = generate_caterpillar_grid(ell)
        model = build_model([t1, t2])
        gap = certified_gap(ell)
        row = {
            "ell": ell,
            "n": ell * ell,
            "constraints": len(model.constraints),
            "ilp_lower_bound": ilp_lower_bound(ell),
            "certified_gap": fraction_decimal(gap),
        }
        if max_constraints is not None and len(model.constraints) > max_constraints:
            row.update(lp_obj_num="skipped", lp_obj_den="skipped", rounded_cut_size="skipped")
            rows.append(row)
            continue
        start = time.perf_counter()
        x = solve_lp(model)
        cut = rounding_trace(t1, x).cut
        rounding_certificate(t1, x, cut, model=model)
        if timer is not None:
            timer.phases.append((f"ell={ell}", time.perf_counter() - start))
        row.update(
            lp_obj_num=x.objective.numerator,
            lp_obj_den=x.objective.denominator,
            rounded_cut_size=len(cut),
        )
        rows.append(row)
    return rows


def write_gap_csv(rows, target):
    fh = sys.stdout if target == "-" else open(target, "w", newline="", encoding="utf-8")
    try:
        writer = csv.DictWriter(fh, fieldnames=GAP_COLUMNS, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow(row)
    finally:
        if fh is not sys.stdout:
            fh.close()


def cmd_gap_study(args) -> int:
    ells = list(range(args.ell_min, args.ell_max + 1)) if args.ell is None else args.ell
    if any(ell < 2 for ell in ells):
        raise ValueError("grid side length must be at least 2")
    timer = Timer()
    rows = gap_study_rows(ells, args.max_constraints, timer)
    write_gap_csv(rows, args.output)
    if args.output != "-":
        print(f"{'ell':>4} {'n':>4} {'rows':>7} {'LP':>8} {'ILP>=':>6} {'gap>=':>9} {'rounded':>8}")
        for row in rows:
            lp = (
                "skipped"
                if row["lp_obj_num"] == "skipped"
                else fraction_text(Fraction(row["lp_obj_num"], row["lp_obj_den"]))
            )
            print(
                f"{row['ell']:>4} {row['n']:>4} {row['constraints']:>7} {lp:>8} "
                f"{row['ilp_lower_bound']:>6} {float(row['certified_gap']):>9.6f} {row['rounded_cut_size']!s:>8}"
            )
        print(f"timings: {timer.summary()}")
    return EXIT_OK


# ---------------------------------------------------------------------- #


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mafapprox",
        description="Maximum agreement forests of unrooted binary trees via LP rounding.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("approx", help="4-approximate MAF by LP rounding")
    p.add_argument("input", help="Newick file, one tree per line")
    p.add_argument("--json", metavar="PATH", help="write the JSON report here ('-' for stdout)")
    p.add_argument("--root-leaf", metavar="LABEL", help="root leaf for the rounding pass (default: smallest label)")
    p.add_argument("--float-lp", action="store_true", help="also solve the LP in floating point for comparison")
    p.add_argument("--dump-model", metavar="PATH", help="write the covering rows as plain text")
    p.add_argument("--dump-quartets", metavar="PATH", help="write the incompatible quartets as plain text")
    p.set_defaults(func=cmd_approx)

    p = sub.add_parser("exact", help="exact MAF via the integer program")
    p.add_argument("input")
    p.add_argument("--json", metavar="PATH")
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET, help="branch-and-bound node limit")
    p.add_argument("--method", choices=["auto", "bnb", "exhaustive"], default="auto")
    p.set_defaults(func=cmd_exact)

    p = sub.add_parser("verify", help="check that a forest JSON is an agreement forest")
    p.add_argument("input")
    p.add_argument("forest", help="JSON with a 'components' list (or a report containing 'forest')")
    p.add_argument("--json", metavar="PATH")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("generate", help="write instances as Newick")
    gen = p.add_subparsers(dest="family", required=True)
    g = gen.add_parser("grid", help="caterpillar grid pair")
    g.add_argument("--ell", type=int, required=True)
    g.add_argument("-o", "--output")
    g.set_defaults(func=cmd_generate)
    g = gen.add_parser("random", help="uniform random binary trees")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--t", type=int, default=2)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("-o", "--output")
    g.set_defaults(func=cmd_generate)

    p = sub.add_parser("gap-study", help="integrality-gap table for the caterpillar grid family")
    p.add_argument("--ell-min", type=int, default=2)
    p.add_argument("--ell-max", type=int, default=6)
    p.add_argument("--ell", type=int, nargs="+", help="explicit list of sizes (overrides the range)")
    p.add_argument("--max-constraints", type=int, help="skip sizes whose program has more rows")
    p.add_argument("-o", "--output", default="-", help="CSV path ('-' for stdout)")
    p.set_defaults(func=cmd_gap_study)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InternalInconsistencyError as exc:
        print(f"internal verification failure: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except (MafError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


def run():
    sys.exit(main())


__all__ = ["main", "build_parser", "gap_study_rows", "GAP_COLUMNS"]
