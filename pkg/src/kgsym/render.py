"""Plain text tables for the command line."""

from __future__ import annotations

from collections.abc import Mapping
from collections.abc import Sequence

from .evaluation import CircleReport
from .evaluation import EvalReport
from .evaluation import RankMetrics
from .kg_constants import HITS_AT
from .kg_constants import EvalMode
from .kg_constants import Split
from .kg_defs import Completion
from .kg_defs import StatsReport


def render_table(headers: Sequence[str], rows: Sequence[Sequence[object]], title: str = "") -> str:
    """Align columns, the first left aligned and the others right aligned.

    Args:
        headers: Column names
        rows: Cell values, converted with ``str``
        title: Optional line printed above the table

    Returns:
        The table without a trailing newline
    """
    cells = [[str(cell) for cell in row] for row in rows]
    widths = [max(len(row[col]) for row in [list(headers), *cells]) for col in range(len(headers))]

    def line(row: Sequence[str]) -> str:
        parts = [f"{row[0]:<{widths[0]}}"] + [f"{cell:>{width}}" for cell, width in zip(row[1:], widths[1:])]
        return "  ".join(parts).rstrip()

    out = [title] if title else []
    out.append(line(list(headers)))
    out.append("  ".join("-" * width for width in widths))
    out.extend(line(row) for row in cells)
    return "\n".join(out)


def render_stats(report: StatsReport) -> str:
    """Dataset counts per split and the relation symmetry table."""
    split_rows = []
    for split in Split.concrete():
        stats = report.splits[split]
        split_rows.append(
            [
                str(split),
                stats.total,
                stats.symmetric,
                f"{stats.percent_before:.2f}",
                stats.added,
                stats.skipped,
                f"{stats.percent_after:.2f}",
                f"{stats.percent_after_unguarded:.2f}",
            ]
        )
    splits = render_table(
        ["split", "ALL", "SYM", "SYM%", "added", "skipped", "SYM% after", "unguarded"],
        split_rows,
        title=f"entities {report.entity_count}, relations {report.relation_count}",
    )
    relations = render_table(
        ["relation", "SYM", "ALL", "ratio", "class"],
        [
            [meta.name, meta.symmetric_count, meta.total, f"{meta.ratio:.3f}", "sym" if meta.is_symmetric else "-"]
            for meta in report.relations
        ],
        title=f"symmetry over {report.basis}, threshold {report.threshold:g}",
    )
    return f"{splits}\n\n{relations}"


def render_completion(completion: Completion) -> str:
    """Added and refused reverses per split."""
    rows = [
        [str(split), len(completion.store.split(split)), completion.added[split], completion.skipped[split]]
        for split in Split.concrete()
    ]
    return render_table(["split", "triples", "added", "skipped"], rows)


def _metric_cells(metrics: RankMetrics) -> list[str]:
    return [
        f"{metrics.mr:.3f}",
        f"{metrics.mrr:.3f}",
        *(f"{metrics.hits[k]:.3f}" for k in sorted(HITS_AT, reverse=True)),
    ]


def _metric_headers() -> list[str]:
    return ["MR", "MRR", *(f"H{k}" for k in sorted(HITS_AT, reverse=True))]


def render_eval(reports: Mapping[EvalMode, EvalReport], model_name: str) -> str:
    """Link prediction results, one row per mode and category."""
    rows = []
    for mode, report in reports.items():
        rows.append([f"{model_name} {mode}", report.count, *_metric_cells(report.metrics)])
        for category, metrics in report.per_category.items():
            if metrics.count:
                rows.append([f"  {category}", metrics.count // 2, *_metric_cells(metrics)])
    return render_table(["model", "triples", *_metric_headers()], rows)


def render_circle(report: CircleReport, model_name: str) -> str:
    """Circle test results, overall then per relation."""
    overall = report.overall
    rows = [[model_name, overall.metrics.count, f"{overall.mean_score:.4f}", *_metric_cells(overall.metrics)]]
    for relation, summary in sorted(report.per_relation.items()):
        name = report.relation_names.get(relation, str(relation))
        rows.append([f"  {name}", summary.metrics.count, f"{summary.mean_score:.4f}", *_metric_cells(summary.metrics)])
    return render_table(["circle", "triples", "score", *_metric_headers()], rows)
