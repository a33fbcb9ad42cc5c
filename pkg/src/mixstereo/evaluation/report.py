"""Markdown and CSV comparison tables.

Within each group of methods, every column ranks values (lower is better,
compared after rounding to two decimals) with standard competition ranking:
rank 1 is bold and rank 2 underlined, so tied bests share the bold and push
the next value to rank 3. A group of one method carries no emphasis.
"""

from __future__ import annotations

import csv
import io
from collections.abc import Mapping, Sequence
from dataclasses import dataclass
from decimal import Decimal
from typing import Literal

from mixstereo.errors import DomainError
from mixstereo.evaluation.metrics import EvalResult, round_half_up

Layout = Literal["table2", "table3"]
Benchmark = tuple[str, str]  # (dataset, resolution)
Results = Mapping[str, Mapping[Benchmark, EvalResult]]

KITTI: Benchmark = ("KITTI-2015", "full")


@dataclass(frozen=True)
class Column:
    label: str
    benchmark: Benchmark
    metric: Literal["bad", "avgerr", "all", "background", "foreground", "ratio"]
    tau: float = 3.0

    @property
    def region(self) -> str:
        if self.metric == "ratio":
            return "foreground/background"
        return self.metric if self.metric in ("background", "foreground") else "all"

    @property
    def metric_name(self) -> str:
        if self.metric == "avgerr":
            return "avgerr"
        if self.metric == "ratio":
            return "ratio"
        return f"bad {self.tau:.1f}"

    def value(self, result: EvalResult) -> float | None:
        if self.metric == "bad":
            return result.bad.get(self.tau)
        if self.metric == "avgerr":
            return result.avgerr
        regions = result.regions
        if regions is None or regions.tau != self.tau:
            return None
        if self.metric == "ratio":
            return regions.ratio
        return getattr(regions, self.metric)  # type: ignore[no-any-return]


LAYOUTS: dict[str, list[Column]] = {
    "table2": [
        Column("KITTI-2015 bad 3.0", KITTI, "bad", 3.0),
        Column("KITTI-2015 avgerr", KITTI, "avgerr"),
        Column("Middlebury Half bad 2.0", ("Middlebury", "half"), "bad", 2.0),
        Column("Middlebury Half avgerr", ("Middlebury", "half"), "avgerr"),
        Column("Middlebury Quarter bad 2.0", ("Middlebury", "quarter"), "bad", 2.0),
        Column("Middlebury Quarter avgerr", ("Middlebury", "quarter"), "avgerr"),
        Column("ETH3D bad 1.0", ("ETH3D", "full"), "bad", 1.0),
        Column("ETH3D avgerr", ("ETH3D", "full"), "avgerr"),
    ],
    "table3": [
        Column("all", KITTI, "all"),
        Column("backgr.", KITTI, "background"),
        Column("foregr.", KITTI, "foreground"),
        Column("foregr./backgr.", KITTI, "ratio"),
    ],
}


@dataclass(frozen=True)
class Report:
    markdown: str
    csv: str


def _cells(results: Results, columns: list[Column]) -> dict[str, list[Decimal]]:
    table: dict[str, list[Decimal]] = {}
    for method, per_benchmark in results.items():
        row = []
        for column in columns:
            result = per_benchmark.get(column.benchmark)
            value = None if result is None else column.value(result)
            if value is None:
                raise DomainError(f"Method {method} has no value for column '{column.label}'")
            row.append(round_half_up(value))
        table[method] = row
    return table


def _ranks(values: list[Decimal]) -> list[int]:
    return [1 + sum(other < v for other in values) for v in values]


def _emphasis(table: dict[str, list[Decimal]], groups: Sequence[Sequence[str]]) -> dict[str, list[str]]:
    styled = {m: [f"{v:.2f}" for v in row] for m, row in table.items()}
    for group in groups:
        if len(group) < 2:
            continue
        for col in range(len(next(iter(table.values())))):
            ranks = _ranks([table[m][col] for m in group])
            for method, rank in zip(group, ranks, strict=True):
                text = styled[method][col]
                if rank == 1:
                    styled[method][col] = f"**{text}**"
                elif rank == 2:
                    styled[method][col] = f"<u>{text}</u>"
    return styled


def render_report(
    results: Results,
    layout: Layout = "table2",
    groups: Sequence[Sequence[str]] | None = None,
    header: str = "Method",
) -> Report:
    """Render ``results[method][(dataset, resolution)]`` as markdown and CSV.

    ``groups`` partitions the methods into blocks ranked separately (methods
    keep their input order); by default all methods form one block.
    """
    if not results:
        raise DomainError("Nothing to report")
    if layout not in LAYOUTS:
        raise DomainError(f"Unknown report layout: {layout}")
    columns = LAYOUTS[layout]
    groups = [list(results)] if groups is None else [list(g) for g in groups]
    listed = [m for g in groups for m in g]
    if sorted(listed) != sorted(results):
        raise DomainError("Report groups must list every method exactly once")

    table = _cells(results, columns)
    styled = _emphasis(table, groups)

    lines = [
        "| " + " | ".join([header] + [c.label for c in columns]) + " |",
        "|" + "---|" + "---:|" * len(columns),
    ]
    for i, group in enumerate(groups):
        if i > 0:
            lines.append("| " + " | ".join([""] * (len(columns) + 1)) + " |")
        for method in group:
            lines.append("| " + " | ".join([method] + styled[method]) + " |")

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["method", "dataset", "resolution", "region", "metric", "value"])
    for method in listed:
        for column, value in zip(columns, table[method], strict=True):
            dataset, resolution = column.benchmark
            writer.writerow(
                [method, dataset, resolution, column.region, column.metric_name, f"{value:.2f}"]
            )
    return Report(markdown="\n".join(lines) + "\n", csv=buf.getvalue())


def _metric_cells(result: EvalResult) -> list[tuple[str, str, str, float | None]]:
    """(column label, region, metric name, value) for every metric a result carries."""
    cells: list[tuple[str, str, str, float | None]] = [
        (f"bad {tau:.1f}", "all", f"bad {tau:.1f}", value) for tau, value in sorted(result.bad.items())
    ]
    cells.append(("avgerr", "all", "avgerr", result.avgerr))
    if result.d1 is not None:
        cells.append(("D1", "all", "d1", result.d1))
    regions = result.regions
    if regions is not None:
        metric = f"bad {regions.tau:.1f}"
        cells += [
            ("all", "all", metric, regions.all),
            ("backgr.", "background", metric, regions.background),
            ("foregr.", "foreground", metric, regions.foreground),
            ("foregr./backgr.", "foreground/background", "ratio", regions.ratio),
        ]
    return cells


def _fmt(value: float | None) -> str:
    return "n/a" if value is None else f"{round_half_up(value):.2f}"


def render_evaluation(
    method: str,
    dataset: str,
    resolution: str,
    per_image: Mapping[str, EvalResult],
    overall: EvalResult,
) -> Report:
    """Per-image markdown rows plus an overall row; the CSV carries the overall metrics."""
    labels = [label for label, _, _, _ in _metric_cells(overall)]
    lines = [
        "| " + " | ".join(["sample"] + labels) + " |",
        "|---|" + "---:|" * len(labels),
    ]
    for frame in sorted(per_image):
        values = [_fmt(v) for _, _, _, v in _metric_cells(per_image[frame])]
        lines.append("| " + " | ".join([frame] + values) + " |")
    lines.append(
        "| " + " | ".join(["overall"] + [_fmt(v) for _, _, _, v in _metric_cells(overall)]) + " |"
    )

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["method", "dataset", "resolution", "region", "metric", "value"])
    for _, region, metric, value in _metric_cells(overall):
        if value is not None:
            writer.writerow([method, dataset, resolution, region, metric, _fmt(value)])
    return Report(markdown="\n".join(lines) + "\n", csv=buf.getvalue())
