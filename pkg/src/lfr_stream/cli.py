"""Command-line front end for every generation stage and experiment.

Graphs and degree sequences go to ``--output`` (stdout by default), stage
reports go to stderr. Exit codes: 0 success, 2 invalid input, 3 a
randomized repair gave up.
"""

import argparse
import logging
import sys
from collections.abc import Callable, Sequence
from typing import Any

import numpy as np

from lfr_stream import __version__, formatters, graph_io, settings
from lfr_stream.community_assign import assign_nodes
from lfr_stream.config_model import RepairPolicy, cm_sample, count_defects, rewire_to_simple
from lfr_stream.edge_swap import EdgeSwapper, RunConfig, apply_swaps, draw_random_swaps
from lfr_stream.em_primitives import MemoryBudget
from lfr_stream.errors import LasVegasFailure, ValidationError
from lfr_stream.hh_gen import realize
from lfr_stream.lfr_pipeline import LfrParams, build_lfr, load_param_file
from lfr_stream.metrics import convergence_experiment, distinct_degree_count, measure, realized_mixing
from lfr_stream.sampling import PldParams, make_rng, sample_monotonic_pld, sample_pld

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_LAS_VEGAS = 3

# LfrParams fields that have a flag of the same name on `lfr`.
_LFR_FIELDS = (
    "n", "dmin", "dmax", "gamma", "smin", "smax", "beta", "mu",
    "overlap_nodes", "nu", "sampler", "swaps_factor", "max_rounds",
)


# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------

def _report(text: str) -> None:
    print(text, file=sys.stderr)


def _budget(args: argparse.Namespace) -> MemoryBudget:
    if args.memory_budget is None:
        return MemoryBudget()
    return MemoryBudget(settings.parse_size(args.memory_budget))


def _input_format(args: argparse.Namespace) -> graph_io.Format | None:
    return "bin" if args.input_format == "bin" else ("text" if args.input_format == "text" else None)


# ---------------------------------------------------------------------------
# Handler functions
# ---------------------------------------------------------------------------

def _handle_degrees(args: argparse.Namespace) -> None:
    params = PldParams(args.dmin, args.dmax, args.gamma)
    rng = make_rng(args.seed, "degrees")
    degrees = sample_pld(args.n, params, rng) if args.unsorted else sample_monotonic_pld(args.n, params, rng)
    graph_io.write_degrees(args.output, degrees, args.format)
    logger.info("sampled %d degrees with %d distinct values", args.n, distinct_degree_count(degrees))


def _handle_hh(args: argparse.Namespace) -> None:
    degrees = graph_io.read_degrees(args.input, _input_format(args))
    result = realize(degrees, debug=args.debug)
    graph_io.write_graph(args.output, result.edges, len(degrees), args.format)
    _report(formatters.format_hh_result(result, args.input))


def _handle_es(args: argparse.Namespace) -> None:
    edges, n = graph_io.read_graph(args.input, _input_format(args))
    m = len(edges)
    if args.replay:
        swaps = graph_io.read_swap_trace(args.replay, m)
    else:
        k = int(round(args.swaps_factor * m))
        swaps = draw_random_swaps(m, k, make_rng(args.seed, "es")) if k else np.empty((0, 3), dtype=np.int64)
    if args.trace:
        graph_io.write_swap_trace(args.trace, swaps)
    cfg = RunConfig(args.run_size) if args.run_size else RunConfig.default(m)
    swapper = EdgeSwapper(_budget(args))
    if len(swaps):
        edges = apply_swaps(edges, swaps, cfg, in_memory=args.in_memory, swapper=swapper)
    graph_io.write_graph(args.output, edges, n, args.format)
    if not args.in_memory:
        _report(formatters.format_swap_report(swapper, m))


def _handle_cm(args: argparse.Namespace) -> None:
    degrees = graph_io.read_degrees(args.input, _input_format(args))
    rng = make_rng(args.seed, "cm")
    edges = cm_sample(degrees, rng)
    loops, multi = count_defects(edges)
    if args.repair:
        result = rewire_to_simple(
            edges,
            rng,
            policy=RepairPolicy(args.policy),
            max_rounds=args.max_rounds,
            swapper=EdgeSwapper(_budget(args)),
        )
        _report(formatters.format_rewire_result(result, loops, multi))
        if not result.success:
            raise LasVegasFailure(result.error or "repair failed", result.remaining_defects)
        edges = result.edges
    graph_io.write_graph(args.output, edges, len(degrees), args.format)


def _handle_ca(args: argparse.Namespace) -> None:
    sizes = graph_io.read_degrees(args.sizes)
    constraint = graph_io.read_degrees(args.degrees)
    nu = graph_io.read_degrees(args.memberships) if args.memberships else np.ones_like(constraint)
    result = assign_nodes(sizes, constraint, nu, make_rng(args.seed, "assign"))
    _report(formatters.format_assignment_result(result, len(sizes)))
    if not result.success or result.assignment is None:
        raise LasVegasFailure(result.error or "assignment failed", {"deferred_memberships": result.deferred})
    graph_io.write_assignment(args.output, result.assignment)


def lfr_params_from_args(args: argparse.Namespace) -> LfrParams:
    """Merge preset, config file and flags (later ones win) into LfrParams."""
    file_values = load_param_file(args.config) if args.config else {}
    flag_values = {name: getattr(args, name) for name in _LFR_FIELDS if getattr(args, name) is not None}
    n = flag_values.get("n", file_values.get("n"))
    if n is None:
        raise ValidationError("the number of nodes is required (--n or 'n' in --config)")
    values: dict[str, Any] = {}
    if args.preset:
        nu = flag_values.get("nu", file_values.get("nu", 1))
        values.update(LfrParams.preset_values(args.preset, int(n), int(nu)))
    values.update(file_values)
    values.update(flag_values)
    return LfrParams.from_mapping(values)


def _handle_lfr(args: argparse.Namespace) -> None:
    params = lfr_params_from_args(args)
    graph = build_lfr(params, args.seed, _budget(args), jobs=args.jobs)
    graph_io.write_graph(args.output, graph.edges, params.n, args.format)
    if args.communities:
        graph_io.write_assignment(args.communities, graph.ground_truth)
    if args.audit:
        with open(args.audit, "a") as f:
            f.write(formatters.format_audit_json(graph.audit))
    _report(formatters.format_lfr_summary(graph))


def _handle_metrics(args: argparse.Namespace) -> None:
    edges, n = graph_io.read_graph(args.input, _input_format(args))
    values: dict[str, float | None] = dict(measure(edges, n))
    values["distinct_degrees"] = float(distinct_degree_count(np.bincount(edges.ravel(), minlength=n)))
    if args.communities:
        truth = graph_io.read_assignment(args.communities, n_nodes=n)
        values["mixing"] = realized_mixing(edges, truth).mean
    text = formatters.format_metrics(values, "json" if args.json else "text")
    graph_io.write_bytes(args.output, (text + "\n").encode())


def _handle_converge(args: argparse.Namespace) -> None:
    edges, n = graph_io.read_graph(args.input, _input_format(args))
    report = convergence_experiment(
        edges,
        args.ensemble_size,
        args.max_multiple,
        sampler=args.sampler,
        seed=args.seed,
        n=n,
        jobs=args.jobs,
    )
    graph_io.write_bytes(args.output, formatters.format_ensemble_csv(report).encode())
    _report(formatters.format_convergence(report))


# ---------------------------------------------------------------------------
# Parser + dispatch table
# ---------------------------------------------------------------------------

def _common_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=graph_io.FORMATS, default="text", help="output file format")
    common.add_argument(
        "--input-format", choices=("auto", *graph_io.FORMATS), default="auto", help="input format (auto: by magic)"
    )
    common.add_argument("--memory-budget", default=None, help="working memory, e.g. 512MiB (default: 256MiB)")
    common.add_argument("--seed", type=int, default=0, help="root seed (default: 0)")
    common.add_argument("-o", "--output", default="-", help="output file (default: stdout)")
    common.add_argument(
        "--log-level",
        default=settings.LOG_LEVEL,
        choices=("DEBUG", "INFO", "WARNING", "ERROR"),
        type=str.upper,
    )
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_options()
    parser = argparse.ArgumentParser(prog="lfr-stream", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("degrees", parents=[common], help="sample a powerlaw degree sequence")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--dmin", type=int, required=True)
    p.add_argument("--dmax", type=int, required=True, help="exclusive upper bound")
    p.add_argument("--gamma", type=float, default=2.0)
    p.add_argument("--unsorted", action="store_true", help="i.i.d. order instead of non-decreasing")

    p = sub.add_parser("hh", parents=[common], help="realize a degree sequence with Havel-Hakimi")
    p.add_argument("input")
    p.add_argument("--debug", action="store_true", help="check group-list invariants every iteration")

    p = sub.add_parser("es", parents=[common], help="randomize a graph with edge switches")
    p.add_argument("input")
    p.add_argument("--swaps-factor", type=float, default=10.0, help="swaps per edge (default: 10)")
    p.add_argument("--run-size", type=int, default=None, help="swaps per run (default: m/8)")
    p.add_argument("--trace", default=None, help="write the swaps to this file")
    p.add_argument("--replay", default=None, help="read the swaps from this trace instead of drawing them")
    p.add_argument("--in-memory", action="store_true", help="use the sequential in-memory swapper")

    p = sub.add_parser("cm", parents=[common], help="sample the configuration model")
    p.add_argument("input")
    p.add_argument("--repair", action="store_true", help="rewire loops and multi-edges away")
    p.add_argument("--policy", choices=[x.value for x in RepairPolicy], default=RepairPolicy.DOUBLE.value)
    p.add_argument("--max-rounds", type=int, default=settings.MAX_ROUNDS)

    p = sub.add_parser("ca", parents=[common], help="assign nodes to communities")
    p.add_argument("--sizes", required=True, help="community sizes, one per line")
    p.add_argument("--degrees", required=True, help="per-node constraint degree, one per line")
    p.add_argument("--memberships", default=None, help="per-node membership count (default: 1)")

    p = sub.add_parser("lfr", parents=[common], help="generate an LFR benchmark")
    p.add_argument("--config", default=None, help="YAML file with LfrParams fields")
    p.add_argument("--preset", choices=("lin", "const"), default=None)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--dmin", type=int, default=None)
    p.add_argument("--dmax", type=int, default=None)
    p.add_argument("--gamma", type=float, default=None)
    p.add_argument("--smin", type=int, default=None)
    p.add_argument("--smax", type=int, default=None)
    p.add_argument("--beta", type=float, default=None)
    p.add_argument("--mu", type=float, default=None)
    p.add_argument("--overlap-nodes", type=int, default=None)
    p.add_argument("--nu", type=int, default=None)
    p.add_argument("--sampler", choices=("hh", "cm"), default=None)
    p.add_argument("--swaps-factor", type=float, default=None)
    p.add_argument("--max-rounds", type=int, default=None)
    p.add_argument("--communities", default=None, help="write the ground truth here")
    p.add_argument("--audit", default=None, help="append a JSON audit line here")
    p.add_argument("--jobs", type=int, default=1)

    p = sub.add_parser("metrics", parents=[common], help="triangles, assortativity, clustering, mixing")
    p.add_argument("input")
    p.add_argument("--communities", default=None, help="ground truth for the realized mixing")
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("converge", parents=[common], help="ensemble convergence experiment (CSV)")
    p.add_argument("input", help="seed graph")
    p.add_argument("--ensemble-size", type=int, default=20)
    p.add_argument("--max-multiple", type=int, default=10)
    p.add_argument("--sampler", choices=("hh", "cm"), default="hh")
    p.add_argument("--jobs", type=int, default=1)
    return parser


_HANDLERS: dict[str, Callable[[argparse.Namespace], None]] = {
    "degrees": _handle_degrees,
    "hh": _handle_hh,
    "es": _handle_es,
    "cm": _handle_cm,
    "ca": _handle_ca,
    "lfr": _handle_lfr,
    "metrics": _handle_metrics,
    "converge": _handle_converge,
}


def main(argv: Sequence[str] | None = None) -> int:
    """Parse ``argv``, run one subcommand and return its exit code."""
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=args.log_level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")
    handler = _HANDLERS[args.command]
    try:
        handler(args)
    except LasVegasFailure as e:
        _report(formatters.format_defects(str(e), e.defects))
        return EXIT_LAS_VEGAS
    except ValidationError as e:
        _report(f"Error: {e}")
        return EXIT_INVALID
    except OSError as e:
        _report(f"Error: {e}")
        return EXIT_INVALID
    return EXIT_OK
