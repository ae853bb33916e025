"""Report bundles, attribution-table serialization and SVG bar charts."""

from __future__ import annotations

import csv
import io
import json
import re
from dataclasses import dataclass, field
from xml.sax.saxutils import escape, quoteattr

import numpy as np

from .attribution import AttributionTable, ConsensusSummary, consensus
from .classifiers import ClassifierKind
from .errors import DataError, UsageError
from .intel_model import ActorName
from .rag_llm.parse import LlmAttribution, LlmEntry

FORMATS = ("csv", "json", "text")


class UnknownFormat(UsageError):
    pass


# -- tables -------------------------------------------------------------------


def table_to_dict(table: AttributionTable) -> dict:
    grid = table.formatted_matrix()
    return {
        a.display: {k.value: float(grid[i][j]) for j, k in enumerate(table.classifiers)}
        for i, a in enumerate(table.actors)
    }


def table_from_dict(doc: dict, n_rows: int | None = None) -> AttributionTable:
    if not doc:
        raise DataError("attribution table is empty")
    by_actor = {ActorName.of(a): cols for a, cols in doc.items()}
    actors = tuple(sorted(by_actor))
    present = {ClassifierKind.parse(k) for cols in by_actor.values() for k in cols}
    kinds = tuple(k for k in ClassifierKind if k in present)
    cells = np.zeros((len(actors), len(kinds)))
    for i, a in enumerate(actors):
        cols = {ClassifierKind.parse(k): v for k, v in by_actor[a].items()}
        for j, k in enumerate(kinds):
            if k not in cols:
                raise DataError(f"table has no {k.value} value for {a.display}")
            cells[i, j] = float(cols[k])
    return AttributionTable(actors, kinds, cells, n_rows)


def render_table(table: AttributionTable, fmt: str = "csv") -> str:
    grid = table.formatted_matrix()
    header = ["actor", *(k.value for k in table.classifiers)]
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        for a, row in zip(table.actors, grid):
            w.writerow([a.display, *row])
        return buf.getvalue()
    if fmt == "json":
        return json.dumps(table_to_dict(table), sort_keys=True, indent=2) + "\n"
    if fmt == "text":
        rows = [header] + [[a.display, *row] for a, row in zip(table.actors, grid)]
        widths = [max(len(r[c]) for r in rows) for c in range(len(header))]
        lines = []
        for r in rows:
            cells = [r[0].ljust(widths[0])] + [v.rjust(widths[c]) for c, v in enumerate(r) if c > 0]
            lines.append("  ".join(cells).rstrip())
        return "\n".join(lines) + "\n"
    raise UnknownFormat(f"unknown table format {fmt!r}; choose from {', '.join(FORMATS)}")


def parse_table_csv(text: str, n_rows: int | None = None) -> AttributionTable:
    rows = [r for r in csv.reader(io.StringIO(text)) if r and not r[0].lstrip().startswith("#")]
    if not rows:
        raise DataError("empty table file")
    header = [h.strip() for h in rows[0]]
    if not header or header[0].lower() != "actor" or len(header) < 2:
        raise DataError("table header must be 'actor,<classifier>,...'")
    try:
        kinds = [ClassifierKind.parse(h) for h in header[1:]]
    except UsageError as exc:
        raise DataError(str(exc)) from exc
    doc = {}
    for lineno, r in enumerate(rows[1:], start=2):
        if len(r) != len(header):
            raise DataError(f"table row {lineno}: expected {len(header)} columns, got {len(r)}")
        try:
            doc[r[0].strip()] = {k.value: float(v) for k, v in zip(kinds, r[1:])}
        except ValueError as exc:
            raise DataError(f"table row {lineno}: {exc}") from exc
    return table_from_dict(doc, n_rows)


def load_table_csv(path) -> AttributionTable:
    try:
        with open(path, encoding="utf-8") as fh:
            return parse_table_csv(fh.read())
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc


# -- report bundle ------------------------------------------------------------


@dataclass(frozen=True)
class ReportBundle:
    attack_name: str
    n_rows: int
    seed: int | None = None
    timestamp: str | None = None
    table: AttributionTable | None = None
    votes: dict | None = None
    consensus: ConsensusSummary | None = None
    llm: LlmAttribution | None = None
    provenance: tuple[str, ...] = ()
    config: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.table is None and self.consensus is None and self.llm is None:
            raise DataError("a report needs a table, a consensus or an LLM attribution")

    def to_dict(self) -> dict:
        doc = {
            "attack_name": self.attack_name,
            "n_rows": self.n_rows,
            "seed": self.seed,
            "timestamp": self.timestamp,
            "provenance": list(self.provenance),
            "config": self.config,
        }
        if self.table is not None:
            doc["table"] = table_to_dict(self.table)
        if self.votes is not None:
            doc["votes"] = self.votes
        if self.consensus is not None:
            doc["consensus"] = self.consensus.to_dict()
        if self.llm is not None:
            doc["llm"] = {
                "entries": [
                    {
                        "actor_raw": e.actor_raw,
                        "actor_canonical": e.actor_canonical.display if e.actor_canonical else None,
                        "likelihood_pct": e.likelihood_pct,
                    }
                    for e in self.llm.entries
                ],
                "notes": list(self.llm.notes),
                "raw_response": self.llm.raw_response,
            }
        return doc

    @classmethod
    def from_dict(cls, doc: dict) -> ReportBundle:
        try:
            n_rows = int(doc["n_rows"])
            table = table_from_dict(doc["table"], n_rows) if doc.get("table") else None
            cons = ConsensusSummary.from_dict(doc["consensus"]) if doc.get("consensus") else None
            llm = None
            if doc.get("llm"):
                lm = doc["llm"]
                entries = tuple(
                    LlmEntry(
                        e["actor_raw"],
                        ActorName.of(e["actor_canonical"]) if e["actor_canonical"] else None,
                        float(e["likelihood_pct"]),
                    )
                    for e in lm["entries"]
                )
                llm = LlmAttribution(entries, lm["raw_response"], tuple(lm["notes"]))
            return cls(
                attack_name=doc["attack_name"],
                n_rows=n_rows,
                seed=doc.get("seed"),
                timestamp=doc.get("timestamp"),
                table=table,
                votes=doc.get("votes"),
                consensus=cons,
                llm=llm,
                provenance=tuple(doc.get("provenance", ())),
                config=doc.get("config", {}),
            )
        except (KeyError, TypeError, ValueError, UsageError) as exc:
            raise DataError(f"malformed report: {exc!r}") from exc


def render_report(report: ReportBundle) -> str:
    """Canonical JSON: sorted keys, two-space indent, trailing newline."""
    return json.dumps(report.to_dict(), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def parse_report(text: str) -> ReportBundle:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DataError(f"report is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise DataError("report must be a JSON object")
    return ReportBundle.from_dict(doc)


def load_report(path) -> ReportBundle:
    try:
        with open(path, encoding="utf-8") as fh:
            return parse_report(fh.read())
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc


def report_consensus(report: ReportBundle) -> ConsensusSummary:
    if report.consensus is not None:
        return report.consensus
    if report.table is None:
        raise DataError("report has no attribution table")
    return consensus(report.table)


# -- SVG charts ---------------------------------------------------------------

VIEW_W, VIEW_H = 1000, 600
MARGIN_LEFT, MARGIN_RIGHT, MARGIN_TOP, MARGIN_BOTTOM = 90, 30, 60, 170
PLOT_W = VIEW_W - MARGIN_LEFT - MARGIN_RIGHT
PLOT_H = VIEW_H - MARGIN_TOP - MARGIN_BOTTOM
_COLOR_RE = re.compile(r"#[0-9a-fA-F]{3,8}|[a-zA-Z]+")


@dataclass(frozen=True)
class ChartSpec:
    series: tuple[tuple[str, float], ...]
    title: str = "Threat actor attribution likelihood"
    x_label: str = "APT Group Names"
    y_label: str = "Likelihood (%)"
    color: str = "lightblue"

    def __post_init__(self):
        if not self.series:
            raise DataError("a chart needs at least one bar")
        if not _COLOR_RE.fullmatch(self.color):
            raise DataError(f"bad colour token {self.color!r}")
        clamped = tuple((str(label), min(100.0, max(0.0, float(v)))) for label, v in self.series)
        object.__setattr__(self, "series", clamped)


def _n(x: float) -> str:
    return f"{x:.3f}"


def render_svg_chart(spec: ChartSpec) -> str:
    """Standalone SVG 1.1 bar chart on a fixed 1000x600 canvas."""
    n = len(spec.series)
    slot = PLOT_W / n
    bar_w = slot * 0.6
    base_y = MARGIN_TOP + PLOT_H
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" viewBox="0 0 {VIEW_W} {VIEW_H}" width="{VIEW_W}" height="{VIEW_H}">',
        f"<title>{escape(spec.title)}</title>",
        f'<rect x="0" y="0" width="{VIEW_W}" height="{VIEW_H}" fill="white"/>',
        f'<text x="{VIEW_W / 2:.3f}" y="32.000" font-family="sans-serif" font-size="20" text-anchor="middle">{escape(spec.title)}</text>',
    ]
    for tick in range(0, 101, 20):
        y = base_y - PLOT_H * tick / 100.0
        out.append(f'<line x1="{MARGIN_LEFT}" y1="{_n(y)}" x2="{MARGIN_LEFT + PLOT_W}" y2="{_n(y)}" stroke="#dddddd" stroke-width="1"/>')
        out.append(f'<text x="{MARGIN_LEFT - 8}" y="{_n(y + 4)}" font-family="sans-serif" font-size="12" text-anchor="end">{tick}</text>')
    for i, (label, value) in enumerate(spec.series):
        x = MARGIN_LEFT + i * slot + (slot - bar_w) / 2.0
        h = PLOT_H * value / 100.0
        cx = x + bar_w / 2.0
        out.append(
            f'<rect class="bar" x="{_n(x)}" y="{_n(base_y - h)}" width="{_n(bar_w)}" height="{_n(h)}" fill={quoteattr(spec.color)}/>'
        )
        out.append(
            f'<text class="value" x="{_n(cx)}" y="{_n(base_y - h - 6)}" font-family="sans-serif" font-size="12" text-anchor="middle">{value:g}</text>'
        )
        ly = base_y + 16
        out.append(
            f'<text class="label" x="{_n(cx)}" y="{_n(ly)}" font-family="sans-serif" font-size="13" text-anchor="end" transform="rotate(-45 {_n(cx)} {_n(ly)})">{escape(label)}</text>'
        )
    out += [
        f'<line x1="{MARGIN_LEFT}" y1="{MARGIN_TOP}" x2="{MARGIN_LEFT}" y2="{base_y}" stroke="black" stroke-width="1.5"/>',
        f'<line x1="{MARGIN_LEFT}" y1="{base_y}" x2="{MARGIN_LEFT + PLOT_W}" y2="{base_y}" stroke="black" stroke-width="1.5"/>',
        f'<text x="{MARGIN_LEFT + PLOT_W / 2:.3f}" y="{VIEW_H - 12}" font-family="sans-serif" font-size="15" text-anchor="middle">{escape(spec.x_label)}</text>',
        f'<text x="24" y="{MARGIN_TOP + PLOT_H / 2:.3f}" font-family="sans-serif" font-size="15" text-anchor="middle" transform="rotate(-90 24 {MARGIN_TOP + PLOT_H / 2:.3f})">{escape(spec.y_label)}</text>',
        "</svg>",
    ]
    return "\n".join(out) + "\n"


def classifier_chart(table: AttributionTable, kind: ClassifierKind, color: str = "lightblue") -> ChartSpec:
    col = table.column(kind)
    return ChartSpec(tuple((a.display, v) for a, v in col.items()), title=f"{kind.value} attribution (% of indicator rows)", color=color)


def mean_chart(table: AttributionTable, color: str = "lightblue") -> ChartSpec:
    means = table.cells.mean(axis=1)
    return ChartSpec(
        tuple((a.display, float(v)) for a, v in zip(table.actors, means)),
        title="Mean attribution across classifiers (% of indicator rows)",
        color=color,
    )


def llm_chart(llm: LlmAttribution, color: str = "violet") -> ChartSpec:
    return ChartSpec(tuple((e.actor_raw, e.likelihood_pct) for e in llm.entries), title="LLM-estimated likelihood per threat actor", color=color)
