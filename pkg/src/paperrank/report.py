"""Author tables and scatter data for comparing PaperRank-based and classical indices."""

from __future__ import annotations

import csv
import io
import json
import math
from collections import Counter
from dataclasses import asdict, dataclass
from typing import Iterable, Sequence

from .graph import CitationGraph, RefCountMode
from .ranks import (
    ALL_TIME, DEFAULT_ALPHA, DEFAULT_BETA, AuthorProfile, TimeWindow, author_profiles, author_shares,
    citation_counts, h_alpha_of, h_index_of, i_beta_of, i_n_of, paperrank, paperrank_all,
)

UNDEFINED = "undefined"


@dataclass(frozen=True)
class ReportRow:
    author: str
    subject: str
    n_pub: int
    sum_cit: int
    sum_pr: float
    authorrank: float
    h_index: int
    h_alpha: int
    i_beta: int
    i_n: int


@dataclass(frozen=True)
class RegressionSummary:
    slope: float | None
    intercept: float | None
    n: int


def least_squares(xs: Sequence[float], ys: Sequence[float]) -> RegressionSummary:
    """Closed-form y = slope * x + intercept; slope is None when x has no spread."""
    n = len(xs)
    if n != len(ys):
        raise ValueError("x and y differ in length")
    if n < 2:
        return RegressionSummary(None, None, n)
    xm = math.fsum(xs) / n
    ym = math.fsum(ys) / n
    sxx = math.fsum((x - xm) ** 2 for x in xs)
    if sxx == 0:
        return RegressionSummary(None, None, n)
    sxy = math.fsum((x - xm) * (y - ym) for x, y in zip(xs, ys))
    slope = sxy / sxx
    return RegressionSummary(slope, ym - slope * xm, n)


def _subject_of(graph: CitationGraph, profile: AuthorProfile) -> str:
    tags = Counter(graph.papers[p].subject for p in profile.papers if graph.papers[p].subject)
    if not tags:
        return ""
    top = max(tags.values())
    return min(t for t, c in tags.items() if c == top)


def author_row(graph: CitationGraph, profile: AuthorProfile, mode: RefCountMode,
               window: TimeWindow = ALL_TIME, alpha: float = DEFAULT_ALPHA, beta: float = DEFAULT_BETA,
               i_threshold: int = 20, ranks: dict | None = None) -> ReportRow:
    ranks = ranks if ranks is not None else paperrank_all(graph, mode)
    papers = [p for p in profile.papers if window.contains(graph.papers[p].year)]
    counts = citation_counts(graph, profile, window)
    shares = author_shares(graph, profile, mode, window=window)
    sum_pr = 0.0
    for p in papers:
        sum_pr += ranks[p]
    ar = 0.0
    for s in shares:
        ar += s
    return ReportRow(
        author=profile.id, subject=_subject_of(graph, profile), n_pub=len(papers), sum_cit=sum(counts),
        sum_pr=sum_pr, authorrank=ar, h_index=h_index_of(counts), h_alpha=h_alpha_of(shares, alpha),
        i_beta=i_beta_of(shares, beta), i_n=i_n_of(counts, i_threshold),
    )


def rank_rows(graph: CitationGraph, mode: RefCountMode = RefCountMode.BIBLIOGRAPHY, window: TimeWindow = ALL_TIME,
              alpha: float = DEFAULT_ALPHA, beta: float = DEFAULT_BETA, i_threshold: int = 20) -> list[ReportRow]:
    ranks = paperrank_all(graph, mode)
    return [author_row(graph, prof, mode, window, alpha, beta, i_threshold, ranks)
            for prof in author_profiles(graph).values()]


@dataclass(frozen=True)
class Totals:
    paperrank: float
    authorrank: float

    @property
    def gap(self) -> float:
        return abs(self.paperrank - self.authorrank)


def totals(graph: CitationGraph, rows: Iterable[ReportRow], mode: RefCountMode) -> Totals:
    """Global PaperRank over all papers against AuthorRank summed over the rows."""
    return Totals(math.fsum(paperrank(graph, p, mode) for p in graph.ids), math.fsum(r.authorrank for r in rows))


METRICS = {
    "sum_cit": "sum_cit",
    "sumcit": "sum_cit",
    "sum_pr": "sum_pr",
    "sumpr": "sum_pr",
    "authorrank": "authorrank",
    "ar": "authorrank",
    "h_index": "h_index",
    "h": "h_index",
}


def scatter_points(rows: Iterable[ReportRow], x: str, y: str, exclude: Iterable[str] = ()) -> list[tuple[float, float, str]]:
    x, y = METRICS[x], METRICS[y]
    skip = set(exclude)
    return [(getattr(r, x), getattr(r, y), r.author) for r in rows if r.author not in skip]


def wants_identity_line(x: str, y: str) -> bool:
    return {METRICS[x], METRICS[y]} == {"authorrank", "h_index"}


# -- formatting ---------------------------------------------------------------

def fmt_cell(value) -> str:
    if value is None:
        return UNDEFINED
    if isinstance(value, float):
        return f"{value:.6f}"
    return str(value)


def render_table(header: Sequence[str], rows: Sequence[Sequence]) -> str:
    cells = [list(header)] + [[fmt_cell(v) for v in row] for row in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
    lines = []
    for k, r in enumerate(cells):
        lines.append("  ".join(c.ljust(w) if i == 0 else c.rjust(w) for i, (c, w) in enumerate(zip(r, widths))).rstrip())
        if k == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


def render_csv(header: Sequence[str], rows: Sequence[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([UNDEFINED if v is None else repr(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def render_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def row_dict(row: ReportRow) -> dict:
    return asdict(row)
