"""Command-line front end: build, solve, normalize, analyze, and gap reports.

Exit codes: 0 success, 2 invalid input, 3 search/resource limit breached.
Rationals print as "p/q"; floats appear only in fields labelled approx,
with 12 significant digits.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from fractions import Fraction

from .core import (
    AllocationError,
    InstanceFormatError,
    compare,
    format_rational,
    nsw_product,
    parse_rational,
    read_allocation,
    read_instance,
    write_allocation,
    write_instance,
)
from .graphs import (
    CoverBoundError,
    Graph,
    GraphError,
    gen_random_cubic,
    min_vertex_cover,
    named_graph,
    read_graph,
)
from .reduction import (
    ALPHA_DEFAULT,
    C_MAX_DEFAULT,
    C_MIN_DEFAULT,
    ReductionError,
    ReductionParams,
    build_instance,
    completeness_value,
    hardness_constants,
    improving_move_inequalities,
    load_reduced,
    write_tags,
)
from .solver import (
    NormalFormError,
    SearchConfig,
    SearchLimitError,
    analyze_structure,
    exact_max_nsw,
    normalize,
    soundness_bound,
    verify_identities,
)

WORKERS_ENV = "NSWLAB_WORKERS"


def _approx(x: float) -> float:
    return float(f"{x:.12g}")


def _graph_from_args(args) -> Graph:
    if getattr(args, "named", None):
        return named_graph(args.named)
    if getattr(args, "graph", None):
        return read_graph(args.graph)
    raise GraphError("give a graph file or --named NAME")


def _alpha_from_args(args) -> Fraction:
    return parse_rational(args.alpha)


def _workers(args) -> int:
    if getattr(args, "workers", None) is not None:
        return args.workers
    env = os.environ.get(WORKERS_ENV)
    if env is not None:
        try:
            value = int(env)
        except ValueError:
            raise InstanceFormatError(f"{WORKERS_ENV}={env!r} is not an integer") from None
        if value <= 0:
            raise InstanceFormatError(f"{WORKERS_ENV} must be positive")
        return value
    return 1


def _search_config(args) -> SearchConfig:
    return SearchConfig(
        item_limit=getattr(args, "limit", 64) or 64,
        worker_count=_workers(args),
        time_limit=getattr(args, "time_limit", None),
    )


def _emit_json(payload: dict) -> None:
    print(json.dumps(payload, indent=2, sort_keys=True))


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_reduce(args) -> int:
    g = _graph_from_args(args)
    params = ReductionParams(
        alpha=_alpha_from_args(args),
        vertex_item_count=args.k,
        allow_boundary=args.allow_boundary,
    )
    reduced = build_instance(g, params)
    if args.out:
        write_instance(reduced.instance, f"{args.out}.instance.json")
        write_tags(reduced, f"{args.out}.tags.json")
    print(f"n={reduced.instance.n} m={reduced.instance.m}")
    return 0


def cmd_solve(args) -> int:
    instance = read_instance(args.instance)
    alloc, value = exact_max_nsw(instance, _search_config(args))
    if args.out:
        write_allocation(alloc, args.out)
    if args.json:
        _emit_json(
            {
                "product": format_rational(value.product),
                "log_geomean_approx": None if value.product == 0 else _approx(value.log_geomean),
                "zero_agents": value.zero_agents,
                "allocation": dict(sorted(alloc.assignment.items())),
            }
        )
    else:
        print(f"product {format_rational(value.product)}")
        if value.product == 0:
            print(f"zero-utility agents {value.zero_agents}")
            print(f"positive part {format_rational(value.positive_product)}")
        else:
            print(f"log-geomean approx {value.log_geomean:.12g}")
    return 0


def cmd_vc(args) -> int:
    g = _graph_from_args(args)
    cover = min_vertex_cover(g, max_vertices=args.vc_limit)
    if args.json:
        _emit_json({"size": len(cover), "cover": cover})
    else:
        print(f"cover size {len(cover)}: {cover}")
    return 0


def cmd_normalize(args) -> int:
    reduced = load_reduced(args.instance, args.tags)
    alloc = read_allocation(args.allocation)
    before = nsw_product(reduced.instance, alloc)
    result = normalize(reduced, alloc)
    after = nsw_product(reduced.instance, result)
    if args.out:
        write_allocation(result, args.out)
    if args.json:
        _emit_json(
            {
                "product_before": format_rational(before.product),
                "product_after": format_rational(after.product),
                "moved": sum(
                    1 for item in reduced.instance.items
                    if alloc.assignment[item] != result.assignment[item]
                ),
                "allocation": dict(sorted(result.assignment.items())),
            }
        )
    else:
        print(
            f"product {format_rational(before.product)} -> {format_rational(after.product)}"
        )
    return 0


def cmd_analyze(args) -> int:
    reduced = load_reduced(args.instance, args.tags)
    alloc = read_allocation(args.allocation)
    profile = analyze_structure(reduced, alloc)
    report = verify_identities(reduced, profile)
    if args.json:
        _emit_json({"profile": profile.to_dict(), "identities": report.to_dict()})
    else:
        d = profile.to_dict()
        print(
            f"C={d['C']} I2={d['I2']} I3={d['I3']} "
            f"|E0|={len(d['E0'])} |E1C|={len(d['E1C'])} |E1I|={len(d['E1I'])} |E2|={len(d['E2'])} t={d['t']}"
        )
        for check in report.checks:
            print(f"{'ok  ' if check.ok else 'FAIL'} {check.name}: {check.detail}")
    return 0 if report.all_ok else 2


def _gap_report(args) -> dict:
    g = _graph_from_args(args)
    alpha = _alpha_from_args(args)
    params = ReductionParams(alpha, args.k, allow_boundary=args.allow_boundary)
    reduced = build_instance(g, params)
    tau = len(min_vertex_cover(g, max_vertices=args.vc_limit))
    complete = completeness_value(g, args.k, alpha)
    bound = soundness_bound(g, args.k, alpha, max_vertices=args.vc_limit)
    alloc, optimum = exact_max_nsw(reduced.instance, _search_config(args))
    verdict = "cover-achievable" if compare(optimum, complete) == 0 else "gap-realized"
    constants = hardness_constants(alpha, args.cmin, args.cmax)
    return {
        "graph": {"N": g.vertex_count, "M": g.edge_count, "tau": tau},
        "params": {"alpha": format_rational(alpha), "k": args.k},
        "completeness": {
            "product": format_rational(complete.product),
            "log_geomean_approx": _approx(complete.log_geomean),
        },
        "soundness_bound": {
            "product": format_rational(bound.product),
            "log_geomean_approx": _approx(bound.log_geomean),
        },
        "optimum": {
            "product": format_rational(optimum.product),
            "log_geomean_approx": None if optimum.product == 0 else _approx(optimum.log_geomean),
        },
        "verdict": verdict,
        "constants": {
            "c_min": constants.c_min,
            "c_max": constants.c_max,
            "beta_approx": _approx(constants.beta),
            "gamma_approx": _approx(constants.gamma),
            "mu_approx": _approx(constants.mu),
        },
    }


def cmd_gap(args) -> int:
    report = _gap_report(args)
    if args.json:
        _emit_json(report)
    else:
        g, p = report["graph"], report["params"]
        print(f"graph N={g['N']} M={g['M']} tau={g['tau']}; alpha={p['alpha']} k={p['k']}")
        print(f"completeness value {report['completeness']['product']}")
        print(f"soundness bound    {report['soundness_bound']['product']}")
        print(f"exact optimum      {report['optimum']['product']}")
        print(f"verdict {report['verdict']}")
        c = report["constants"]
        print(
            f"constants: beta approx {c['beta_approx']}, gamma approx {c['gamma_approx']}, "
            f"mu approx {c['mu_approx']}"
        )
    return 0


def _parse_seeds(text: str) -> list[int]:
    out: list[int] = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if ".." in part:
            lo, hi = part.split("..", 1)
            out.extend(range(int(lo), int(hi) + 1))
        else:
            out.append(int(part))
    return out


def cmd_sweep(args) -> int:
    alphas = [parse_rational(tok) for tok in args.alpha_grid.split(",") if tok.strip()]
    if not alphas:
        raise InstanceFormatError("empty alpha grid")
    seeds = _parse_seeds(args.seeds) if args.seeds else [0]
    graph_rows: list[tuple[str, int | None, Graph]] = []
    for token in args.graphs.split(","):
        token = token.strip()
        if not token:
            continue
        if token.startswith("random:"):
            size = int(token.split(":", 1)[1])
            for seed in seeds:
                graph_rows.append((f"random:{size}", seed, gen_random_cubic(size, seed)))
        else:
            graph_rows.append((token, None, named_graph(token)))
    if not graph_rows:
        raise InstanceFormatError("empty graph list")
    rows = []
    for alpha in alphas:
        # validates the grid entry (or rejects boundary values without the flag)
        ReductionParams(alpha, 0, allow_boundary=args.allow_boundary)
        checks = improving_move_inequalities(alpha)
        for label, seed, g in graph_rows:
            tau = len(min_vertex_cover(g, max_vertices=args.vc_limit))
            k = tau
            params = ReductionParams(alpha, k, allow_boundary=args.allow_boundary)
            reduced = build_instance(g, params)
            complete = completeness_value(g, k, alpha)
            bound = soundness_bound(g, k, alpha, max_vertices=args.vc_limit)
            _, optimum = exact_max_nsw(reduced.instance, _search_config(args))
            verdict = "cover-achievable" if compare(optimum, complete) == 0 else "gap-realized"
            constants = hardness_constants(alpha, args.cmin, args.cmax)
            rows.append(
                {
                    "alpha": format_rational(alpha),
                    "graph": label,
                    "seed": "" if seed is None else seed,
                    "N": g.vertex_count,
                    "M": g.edge_count,
                    "tau": tau,
                    "k": k,
                    "completeness_product": format_rational(complete.product),
                    "bound_product": format_rational(bound.product),
                    "optimum_product": format_rational(optimum.product),
                    "verdict": verdict,
                    "ineq1": checks[0].holds,
                    "ineq2": checks[1].holds,
                    "ineq3": checks[2].holds,
                    "ineq4": checks[3].holds,
                    "mu_approx": _approx(constants.mu),
                }
            )
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=list(rows[0].keys()))
    writer.writeheader()
    writer.writerows(rows)
    text = buffer.getvalue()
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def _add_graph_source(p: argparse.ArgumentParser) -> None:
    p.add_argument("graph", nargs="?", help="graph file path")
    p.add_argument("--named", help="named graph: K4, K33, Prism, Petersen")


def _add_search_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--workers", type=int, default=None, help=f"worker count (default ${WORKERS_ENV} or 1)")
    p.add_argument("--limit", type=int, default=64, help="item choice-point limit (default 64)")
    p.add_argument("--time-limit", type=float, default=None, help="search time limit in seconds")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nswlab",
        description="Gadget instances, exact welfare maximization, and gap experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("reduce", help="compile a cubic graph into a gadget instance")
    _add_graph_source(p)
    p.add_argument("--alpha", default=str(ALPHA_DEFAULT), help="utility constant, e.g. 2/5")
    p.add_argument("--k", type=int, required=True, help="number of identical vertex items")
    p.add_argument("--allow-boundary", action="store_true", help="accept alpha = 1/3 or 1/2")
    p.add_argument("--out", help="output prefix for .instance.json and .tags.json")
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("solve", help="exactly maximize the welfare product of an instance")
    p.add_argument("instance", help="instance file")
    _add_search_flags(p)
    p.add_argument("--out", help="write the optimal allocation JSON here")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("vc", help="exact minimum vertex cover")
    _add_graph_source(p)
    p.add_argument("--vc-limit", type=int, default=40, help="exact-search vertex bound (default 40)")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_vc)

    p = sub.add_parser("normalize", help="rewrite an allocation into normal form")
    p.add_argument("instance")
    p.add_argument("tags")
    p.add_argument("allocation")
    p.add_argument("--out", help="write the normalized allocation JSON here")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_normalize)

    p = sub.add_parser("analyze", help="structure profile + counting identities of a normal-form allocation")
    p.add_argument("instance")
    p.add_argument("tags")
    p.add_argument("allocation")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("gap", help="end-to-end gap report for one graph")
    _add_graph_source(p)
    p.add_argument("--alpha", default=str(ALPHA_DEFAULT))
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--allow-boundary", action="store_true")
    p.add_argument("--cmin", type=float, default=C_MIN_DEFAULT)
    p.add_argument("--cmax", type=float, default=C_MAX_DEFAULT)
    p.add_argument("--vc-limit", type=int, default=40)
    _add_search_flags(p)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_gap)

    p = sub.add_parser("sweep", help="CSV of gap results over an alpha grid and graph list")
    p.add_argument("--alpha-grid", default=str(ALPHA_DEFAULT), help="comma-separated rationals")
    p.add_argument("--graphs", default="K4", help="comma-separated named graphs or random:<n>")
    p.add_argument("--seeds", default="", help='seeds for random graphs, e.g. "1..3" or "1,2,5"')
    p.add_argument("--allow-boundary", action="store_true")
    p.add_argument("--cmin", type=float, default=C_MIN_DEFAULT)
    p.add_argument("--cmax", type=float, default=C_MAX_DEFAULT)
    p.add_argument("--vc-limit", type=int, default=40)
    _add_search_flags(p)
    p.add_argument("--out", help="write CSV here instead of stdout")
    p.set_defaults(func=cmd_sweep)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (
        InstanceFormatError,
        AllocationError,
        GraphError,
        ReductionError,
        NormalFormError,
        ValueError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (SearchLimitError, CoverBoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
