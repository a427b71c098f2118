"""Command-line entry point.

Every command writes a JSON run report (``--out`` or stdout).  The
``outputs`` section depends only on the inputs and ``--seed``; wall-clock
time is kept separately under ``timing``.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from threadpoolctl import threadpool_limits

from . import __version__
from . import generators as gen
from .dynamics import center, disagreement, equilibrium, index, index_closed_form, node_stress
from .graph import WeightedGraph, is_connected, laplacian
from .intervention import budget_sweep
from .io import GraphData, InputError, read_graph, read_opinions, write_csv, write_graph, write_opinions
from .optim import OptimizerConfig
from .sparsify import SparsifyConfig, rescale_trace, sparsify
from .topology import TopologyProblem, nonconvexity_witness, solve

log = logging.getLogger("polopt")

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2


class NumericalFailure(RuntimeError):
    pass


@dataclass
class RunReport:
    command: str
    inputs: dict
    outputs: dict
    seed: int
    timing: float = 0.0
    tool_version: str = __version__

    def to_json(self) -> str:
        doc = {
            "command": self.command,
            "inputs": self.inputs,
            "outputs": self.outputs,
            "timing": {"wall_seconds": self.timing},
            "seed": self.seed,
            "tool_version": self.tool_version,
        }
        return json.dumps(_plain(doc), indent=2, allow_nan=False) + "\n"


def _plain(obj):
    """Convert numpy scalars/arrays so ``json`` emits round-trippable floats."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x + 0.0  # normalize -0.0
    return obj


def _optimizer_config(args) -> OptimizerConfig:
    return OptimizerConfig(max_iters=args.max_iters, rel_tol=args.tol, seed=args.seed)


def _load_graph(args) -> GraphData:
    if not args.graph:
        raise InputError("--graph is required")
    return read_graph(args.graph)


def _load_opinions(args, data: GraphData) -> np.ndarray:
    if not args.opinions:
        raise InputError("--opinions is required")
    return read_opinions(args.opinions, data.labels)


def _graph_summary(data: GraphData) -> dict:
    g = data.graph
    return {
        "n": g.n,
        "m": g.m,
        "total_weight": g.total_weight(),
        "connected": is_connected(g),
        "self_loops_dropped": data.self_loops,
        "duplicate_edges_merged": data.duplicates,
    }


def _csv_path(args, name):
    return None if not args.csv_dir else Path(args.csv_dir) / name


def _edge_rows(g: WeightedGraph, labels):
    return [(labels[u], labels[v], w) for u, v, w in g.edges]


def _check_converged(args, converged: bool, what: str):
    if not converged:
        msg = f"{what} did not converge within {args.max_iters} iterations"
        if args.strict:
            raise NumericalFailure(msg)
        log.warning(msg)


def cmd_index(args) -> RunReport:
    data = _load_graph(args)
    s = _load_opinions(args, data)
    rep = index(data.graph, s)
    stress = node_stress(data.graph, s, rep.z_star)
    if (path := _csv_path(args, "nodes.csv")) is not None:
        write_csv(path, ["label", "s", "z_star", "z_bar", "stress"],
                  zip(data.labels, s, rep.z_star, rep.z_bar, stress))
    return RunReport(
        command="index",
        inputs={"graph": str(args.graph), "opinions": str(args.opinions)},
        outputs={"graph": _graph_summary(data), **rep.as_dict()},
        seed=args.seed,
    )


def _generated_instance(args):
    if args.n is None:
        raise InputError("give --graph/--opinions or --n to generate an instance")
    if args.opinion_model == "uniform":
        s = gen.uniform_opinions(args.n, args.seed)
    else:
        s = gen.power_law_sample(args.n, args.opinion_slope, args.seed)
    g = gen.erdos_renyi(args.n, args.reference_p, args.seed + 1)
    return GraphData(g, tuple(str(i) for i in range(args.n))), s


def cmd_optimize_topology(args) -> RunReport:
    if args.graph:
        data = _load_graph(args)
        s = _load_opinions(args, data)
        source = {"graph": str(args.graph), "opinions": str(args.opinions)}
    else:
        data, s = _generated_instance(args)
        source = {
            "n": args.n,
            "opinion_model": args.opinion_model,
            "opinion_slope": args.opinion_slope,
            "reference_p": args.reference_p,
        }
    g0 = data.graph
    total = args.total_weight if args.total_weight is not None else g0.total_weight()
    if not total > 0:
        raise InputError("total weight must be positive (reference graph has no edges?)")
    config = _optimizer_config(args)
    sol = solve(TopologyProblem(s, total), config)
    _check_converged(args, sol.converged, "topology optimization")
    g_opt = sol.graph()
    original = index(g0, s).index
    rows = {
        "original": {"index": original, "edges": g0.m, "total_weight": g0.total_weight()},
        "optimal": {
            "index": sol.objective,
            "edges": g_opt.m,
            "total_weight": total,
            "iterations": sol.iterations,
            "converged": sol.converged,
            "connected": sol.connected,
        },
    }
    if sol.objective > 0:
        rows["reduction_factor"] = original / sol.objective
    if args.sparsify:
        sp_cfg = _sparsify_config(args)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            g_sp = rescale_trace(sparsify(g_opt, sp_cfg), total)
        rows["sparsified"] = {
            "index": index(g_sp, s).index,
            "edges": g_sp.m,
            "samples": sp_cfg.sample_count(g_opt.n),
            "connected": is_connected(g_sp),
            "warnings": [str(w.message) for w in caught],
        }
        if (path := _csv_path(args, "sparsified_edges.csv")) is not None:
            write_csv(path, ["u", "v", "w"], _edge_rows(g_sp, data.labels))
    if (path := _csv_path(args, "optimal_edges.csv")) is not None:
        write_csv(path, ["u", "v", "w"], _edge_rows(g_opt, data.labels))
    return RunReport(
        command="optimize-topology",
        inputs={**source, "total_weight": total, "max_iters": args.max_iters, "tol": args.tol,
                "sparsify": bool(args.sparsify), "epsilon": args.epsilon, "samples": args.samples},
        outputs=rows,
        seed=args.seed,
    )


def _sparsify_config(args) -> SparsifyConfig:
    if args.epsilon is None and args.samples is None:
        return SparsifyConfig(epsilon=0.25, seed=args.seed)
    try:
        return SparsifyConfig(epsilon=args.epsilon, samples=args.samples, seed=args.seed)
    except ValueError as exc:
        raise InputError(str(exc)) from None


def cmd_sparsify(args) -> RunReport:
    data = _load_graph(args)
    g = data.graph
    cfg = _sparsify_config(args)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        g_sp = sparsify(g, cfg)
    target = args.total_weight if args.total_weight is not None else g.total_weight()
    g_sp = rescale_trace(g_sp, target)
    out = {
        "input": _graph_summary(data),
        "sparsified": {
            "edges": g_sp.m,
            "total_weight": g_sp.total_weight(),
            "samples": cfg.sample_count(g.n),
            "connected": is_connected(g_sp),
            "warnings": [str(w.message) for w in caught],
        },
    }
    if args.opinions:
        s = _load_opinions(args, data)
        out["input"]["index"] = index(g, s).index
        out["sparsified"]["index"] = index(g_sp, s).index
    if args.graph_out:
        write_graph(args.graph_out, g_sp, data.labels)
    if (path := _csv_path(args, "sparsified_edges.csv")) is not None:
        write_csv(path, ["u", "v", "w"], _edge_rows(g_sp, data.labels))
    return RunReport(
        command="sparsify",
        inputs={"graph": str(args.graph), "epsilon": args.epsilon, "samples": args.samples,
                "total_weight": target},
        outputs=out,
        seed=args.seed,
    )


def cmd_optimize_opinions(args) -> RunReport:
    data = _load_graph(args)
    s = _load_opinions(args, data)
    alphas = sorted(args.alpha or [])
    if not alphas:
        raise InputError("--alpha is required")
    if any(a < 0 for a in alphas):
        raise InputError("budgets must be nonnegative")
    results = budget_sweep(data.graph, s, alphas, _optimizer_config(args))
    sweep = []
    for a, r in zip(alphas, results):
        _check_converged(args, r.converged, f"opinion optimization (alpha={a})")
        sweep.append({
            "alpha": a,
            "objective": r.objective,
            "polarization": r.report.polarization,
            "disagreement": r.report.disagreement,
            "budget_used": r.budget_used,
            "nodes_changed": int(np.count_nonzero(r.ds)),
            "iterations": r.iterations,
            "converged": r.converged,
        })
        if (path := _csv_path(args, f"opinions_alpha_{a:g}.csv")) is not None:
            write_csv(path, ["label", "s", "ds", "z_star"],
                      zip(data.labels, s, r.ds, r.report.z_star))
    return RunReport(
        command="optimize-opinions",
        inputs={"graph": str(args.graph), "opinions": str(args.opinions), "alpha": alphas,
                "max_iters": args.max_iters, "tol": args.tol},
        outputs={"no_intervention_index": index(data.graph, s).index, "sweep": sweep},
        seed=args.seed,
    )


def cmd_generate(args) -> RunReport:
    if args.n is None or args.n < 1:
        raise InputError("--n must be a positive integer")
    if args.model == "er":
        g = gen.erdos_renyi(args.n, args.p, args.seed)
    else:
        g = gen.norros_reittu(args.n, args.slope, args.seed)
    out = {"graph": {"n": g.n, "m": g.m, "connected": is_connected(g)}}
    if args.opinion_model:
        if args.opinion_model == "uniform":
            s = gen.uniform_opinions(args.n, args.seed + 1)
        elif args.opinion_model == "powerlaw":
            s = gen.power_law_sample(args.n, args.opinion_slope, args.seed + 1)
        else:
            s = gen.degree_proportional_opinions(g)
        out["opinions"] = {"mean": float(s.mean()), "max": float(s.max()), "index": index(g, s).index}
        if args.opinions_out:
            write_opinions(args.opinions_out, s)
    if args.graph_out:
        write_graph(args.graph_out, g)
    return RunReport(
        command="generate",
        inputs={"model": args.model, "n": args.n, "p": args.p, "slope": args.slope,
                "opinion_model": args.opinion_model, "opinion_slope": args.opinion_slope},
        outputs=out,
        seed=args.seed,
    )


TABLE1_OPINIONS = np.array([0.0, 0.0, 1.0])
# (edge label, 0-based edge, expected P, D, I) with P, D from the worked computation
TABLE1_ROWS = [
    ("(1,2)", (0, 1), 0.667, 0.0, 0.667),
    ("(1,3)", (0, 2), 0.222, 0.111, 0.333),
    ("(2,3)", (1, 2), 0.222, 0.111, 0.333),
]
TABLE1_TOL = 1e-3


def reproduce_checks(seed: int = 0) -> list[dict]:
    """Worked three-node example, equilibrium identities and the witness."""
    checks = []
    for label, (u, v), P, D, I in TABLE1_ROWS:
        rep = index(WeightedGraph(3, ((u, v, 1.0),)), TABLE1_OPINIONS)
        ok = (abs(rep.polarization - P) <= TABLE1_TOL and abs(rep.disagreement - D) <= TABLE1_TOL
              and abs(rep.index - I) <= TABLE1_TOL)
        checks.append({"check": f"three-node example, edge {label}", "passed": ok,
                       "polarization": rep.polarization, "disagreement": rep.disagreement,
                       "index": rep.index})

    rng = np.random.default_rng(seed)
    n = 30
    g = gen.erdos_renyi(n, 0.3, rng.integers(2**32))
    g = WeightedGraph(n, tuple((u, v, float(rng.uniform(0.1, 3.0))) for u, v, _ in g.edges))
    s = rng.random(n)
    z = equilibrium(g, s)
    z_bar = center(z)
    L = laplacian(g)
    L_form = lambda x: float(x @ L @ x)
    err1 = max(abs(disagreement(g, z) - disagreement(g, z_bar)), abs(disagreement(g, z) - L_form(z)))
    err2 = float(np.max(np.abs(z_bar - equilibrium(g, center(s)))))
    err3 = abs(index(g, s).index - index_closed_form(g, s))
    checks.append({"check": "disagreement invariant under centering", "passed": err1 <= 1e-10, "error": err1})
    checks.append({"check": "centered equilibrium from centered opinions", "passed": err2 <= 1e-8, "error": err2})
    checks.append({"check": "index closed form", "passed": err3 <= 1e-8, "error": err3})

    _, _, lam_min = nonconvexity_witness()
    checks.append({"check": "disagreement-only objective is non-convex", "passed": lam_min < -1e-6,
                   "min_eigenvalue": lam_min})
    return checks


def cmd_reproduce(args) -> RunReport:
    checks = reproduce_checks(args.seed)
    note = ("the published three-node table lists P and D swapped for edges (1,3) and (2,3); "
            "values here follow the definitions: P=0.222, D=0.111")
    report = RunReport(
        command="reproduce",
        inputs={},
        outputs={"checks": checks, "all_passed": all(c["passed"] for c in checks), "note": note},
        seed=args.seed,
    )
    for c in checks:
        print(f"{'PASS' if c['passed'] else 'FAIL'}  {c['check']}", file=sys.stderr)
    print(f"note: {note}", file=sys.stderr)
    return report


COMMANDS = {
    "index": cmd_index,
    "optimize-topology": cmd_optimize_topology,
    "sparsify": cmd_sparsify,
    "optimize-opinions": cmd_optimize_opinions,
    "generate": cmd_generate,
    "reproduce": cmd_reproduce,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="polopt", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", help="write the JSON report here instead of stdout")
    common.add_argument("--csv-dir", help="directory for per-node / per-edge CSV tables")
    common.add_argument("--max-iters", type=int, default=5000)
    common.add_argument("--tol", type=float, default=1e-8, help="relative objective decrease to stop at")
    common.add_argument("--strict", action="store_true", help="exit 2 if an optimizer does not converge")
    common.add_argument("-v", "--verbose", action="store_true")

    data = argparse.ArgumentParser(add_help=False)
    data.add_argument("--graph", help="edge list: 'u v [w]' per line")
    data.add_argument("--opinions", help="opinions: '[label] value' per line")

    sparse = argparse.ArgumentParser(add_help=False)
    group = sparse.add_mutually_exclusive_group()
    group.add_argument("--epsilon", type=float)
    group.add_argument("--samples", type=int)

    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("index", parents=[common, data], help="equilibrium, polarization, disagreement")

    p = sub.add_parser("optimize-topology", parents=[common, data, sparse],
                       help="best edge weights of fixed total weight")
    p.add_argument("--total-weight", type=float)
    p.add_argument("--sparsify", action="store_true", help="also sparsify and rescale the optimum")
    p.add_argument("--n", type=int, help="generate an instance with this many nodes")
    p.add_argument("--opinion-model", choices=["powerlaw", "uniform"], default="powerlaw")
    p.add_argument("--opinion-slope", type=float, default=2.0)
    p.add_argument("--reference-p", type=float, default=0.5,
                   help="edge probability of the generated reference graph")

    p = sub.add_parser("sparsify", parents=[common, data, sparse], help="effective-resistance sampling")
    p.add_argument("--total-weight", type=float, help="rescale target (default: input total)")
    p.add_argument("--graph-out")

    p = sub.add_parser("optimize-opinions", parents=[common, data], help="budgeted opinion decreases")
    p.add_argument("--alpha", type=float, action="append", help="budget; repeat for a sweep")

    p = sub.add_parser("generate", parents=[common], help="random graphs and opinions")
    p.add_argument("--model", choices=["er", "nr"], default="nr")
    p.add_argument("--n", type=int)
    p.add_argument("--p", type=float, default=0.5)
    p.add_argument("--slope", type=float, default=2.0)
    p.add_argument("--opinion-model", choices=["uniform", "powerlaw", "degree"])
    p.add_argument("--opinion-slope", type=float, default=2.0)
    p.add_argument("--graph-out")
    p.add_argument("--opinions-out")

    sub.add_parser("reproduce", parents=[common], help="re-run the worked examples")
    return parser


def _thread_limit():
    raw = os.environ.get("POLOPT_THREADS")
    if not raw:
        return None
    try:
        value = int(raw)
    except ValueError:
        raise InputError(f"POLOPT_THREADS must be an integer, got {raw!r}") from None
    if value < 1:
        raise InputError("POLOPT_THREADS must be at least 1")
    return value


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        with threadpool_limits(limits=_thread_limit()):
            t0 = time.perf_counter()
            report = COMMANDS[args.command](args)
            report.timing = time.perf_counter() - t0
    except NumericalFailure as exc:
        print(f"polopt {args.command}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (InputError, ValueError, OSError) as exc:
        print(f"polopt {args.command}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    text = report.to_json()
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    if args.command == "reproduce" and not report.outputs["all_passed"]:
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
