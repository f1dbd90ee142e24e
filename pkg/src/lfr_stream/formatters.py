"""Output formatting for generation reports, metrics and experiment tables."""

import csv
import io
import json
import math
from collections.abc import Mapping
from dataclasses import dataclass

from lfr_stream import config_model, edge_swap, hh_gen, lfr_pipeline, metrics
from lfr_stream.community_assign import AssignmentResult

MSG_ALL_PASSED = "All stages completed."
MSG_INCOMPLETE = "OUTPUT INCOMPLETE - see failed stages above."
SEPARATOR = "=" * 50


@dataclass
class Step:
    name: str
    passed: bool
    error: str | None = None
    warnings: list[str] | None = None
    pass_detail: str | None = None


def format_step(
    name: str,
    passed: bool,
    error: str | None = None,
    warnings: list[str] | None = None,
    pass_detail: str | None = None,
) -> list[str]:
    """Return output lines for a single pipeline stage."""
    if passed:
        detail = f" ({pass_detail})" if pass_detail else ""
        if warnings:
            lines = [f"{name}: PASS with warnings{detail}"]
            lines.extend(f"  Warning: {w}" for w in warnings)
        else:
            lines = [f"{name}: PASS{detail}"]
    else:
        lines = [f"{name}: FAIL"]
        if error:
            lines.append(f"  Error: {error}")
    return lines


def render_steps(steps: list[Step]) -> tuple[list[str], int, int]:
    lines: list[str] = []
    passed = 0
    failed = 0
    for step in steps:
        lines.extend(format_step(step.name, step.passed, step.error, step.warnings, step.pass_detail))
        if step.passed:
            passed += 1
        else:
            failed += 1
    return lines, passed, failed


def format_summary(passed: int, failed: int) -> list[str]:
    """Return the footer shared by all stage reports."""
    return [
        SEPARATOR,
        f"Summary: {passed} passed, {failed} failed",
        MSG_INCOMPLETE if failed else MSG_ALL_PASSED,
    ]


def _header(title: str, **fields: object) -> list[str]:
    lines = [title]
    lines.extend(f"{key.replace('_', ' ').capitalize()}: {value}" for key, value in fields.items() if value is not None)
    lines.extend([SEPARATOR, ""])
    return lines


def _report(title: str, steps: list[Step], **fields: object) -> str:
    lines = _header(title, **fields)
    body, passed, failed = render_steps(steps)
    lines.extend(body)
    lines.append("")
    lines.extend(format_summary(passed, failed))
    return "\n".join(lines)


def format_hh_result(result: hh_gen.HavelHakimiResult, source: str | None = None) -> str:
    """Report of a Havel-Hakimi realization."""
    warnings = None
    if not result.graphical:
        worst = sorted(result.unmet_per_node.items(), key=lambda kv: -kv[1])[:5]
        warnings = [f"{result.unmet} half-edges unmet"]
        warnings.extend(f"node {v}: {k} unmet" for v, k in worst)
    steps = [
        Step(
            "Realization",
            True,
            warnings=warnings,
            pass_detail=f"{len(result.edges)} edges, {result.iterations} iterations",
        ),
        Step(
            "Group list",
            True,
            pass_detail=f"{result.initial_groups} initial groups, peak {result.peak_groups}",
        ),
    ]
    return _report("Havel-Hakimi Realization", steps, input=source, graphical="yes" if result.graphical else "no")


def format_swap_report(swapper: edge_swap.EdgeSwapper, m: int) -> str:
    runs = swapper.runs
    total = sum(r.swaps for r in runs)
    legal = sum(r.legal for r in runs)
    steps = [
        Step("Edge switching", True, pass_detail=f"{legal} of {total} swaps legal in {len(runs)} batches"),
        Step("Scans", True, pass_detail=f"{swapper.scans} passes over {m} edges"),
    ]
    return _report("Edge Switching", steps)


def format_rewire_result(result: config_model.RewireResult, loops: int, multi: int) -> str:
    """Report of a configuration-model sample and its repair."""
    steps = [
        Step("Sampling", True, pass_detail=f"{loops} self-loops, {multi} multi-edges"),
        Step(
            "Repair",
            result.success,
            result.error,
            pass_detail=f"{result.rounds} rounds, {result.swaps} swaps",
        ),
    ]
    return _report("Configuration Model", steps, edges=len(result.edges))


def format_assignment_result(result: AssignmentResult, communities: int) -> str:
    warnings = [f"{result.deferred} memberships deferred"] if result.deferred else None
    steps = [
        Step(
            "Assignment",
            result.success,
            result.error,
            warnings=warnings,
            pass_detail=f"{result.endgame_moves} endgame moves",
        ),
        Step("Duplicate repair", result.success, pass_detail=f"{result.repaired} exchanges"),
    ]
    return _report("Community Assignment", steps, communities=communities)


def format_lfr_summary(graph: lfr_pipeline.LfrGraph) -> str:
    """Stage-by-stage report of a generated benchmark."""
    a = graph.audit
    global_warn = [f"{a.global_dropped_edges} intra-community edges dropped"] if a.global_dropped_edges else []
    if a.unmet_global_half_edges:
        global_warn.append(f"{a.unmet_global_half_edges} external half-edges unmet")
    merge_warn = [f"{a.merge_dropped_edges} duplicated edges dropped"] if a.merge_dropped_edges else []
    if a.unmet_intra_half_edges:
        merge_warn.append(f"{a.unmet_intra_half_edges} internal half-edges unmet")
    steps = [
        Step("Community assignment", True, pass_detail=f"{a.communities} communities"),
        Step(
            "Global graph",
            True,
            warnings=global_warn or None,
            pass_detail=f"{a.global_edges} edges, {a.global_rewire_rounds} rewiring rounds",
        ),
        Step(
            "Community graphs",
            True,
            warnings=merge_warn or None,
            pass_detail=f"{a.intra_edges} edges, {a.merge_rounds} rewiring rounds",
        ),
    ]
    mixing = "n/a" if a.mean_mixing is None else f"{a.mean_mixing:.4f}"
    return _report("LFR Benchmark", steps, nodes=a.n, edges=a.m, seed=a.seed, mean_mixing=mixing)


def _fmt_value(value: float | None) -> str:
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return "undefined"
    if float(value).is_integer():
        return str(int(value))
    return f"{value:.6f}"


def format_metrics(values: Mapping[str, float | None], fmt: str = "text") -> str:
    """Render metric values as ``name: value`` lines or a JSON object."""
    if fmt == "json":
        return json.dumps({k: (None if v is None or math.isnan(v) else v) for k, v in values.items()}, sort_keys=True)
    return "\n".join(f"{name}: {_fmt_value(value)}" for name, value in values.items())


def format_ensemble_csv(report: metrics.EnsembleReport) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["metric", "snapshot_swaps_per_m", "mean", "stddev", "S"])
    for name, j, mean, std, size in report.rows():
        writer.writerow([name, j, repr(mean), repr(std), size])
    return buf.getvalue()


def format_convergence(report: metrics.EnsembleReport) -> str:
    lines = _header("Convergence Experiment", ensemble_size=report.ensemble_size, edges=report.m)
    for name, point in report.convergence.items():
        if point is None:
            lines.append(f"{name}: not converged within {report.max_multiple}m swaps")
        else:
            lines.append(f"{name}: converged after {point}m swaps")
    return "\n".join(lines)


def format_audit_json(audit: lfr_pipeline.LfrAudit) -> str:
    """One JSON line; keys sorted so reruns are byte-identical."""
    return json.dumps(audit.to_dict(), sort_keys=True) + "\n"


def format_defects(message: str, defects: Mapping[str, int]) -> str:
    lines = [f"Error: {message}"]
    lines.extend(f"  {name}: {count}" for name, count in sorted(defects.items()))
    return "\n".join(lines)
