"""PaperRank, AuthorRank and the classical indices they are compared with.

Everything here is a pure function of an immutable graph. Sums always run
in sorted-id order so results are bit-reproducible.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import DataInconsistencyError, GraphError, NotFoundError
from .graph import AuthorId, CitationGraph, PaperId, PaperRecord, RefCountMode, ref_count

DEFAULT_ALPHA = 0.01
DEFAULT_BETA = 0.1


@dataclass(frozen=True)
class TimeWindow:
    """Inclusive year range; either end may be open.

    Papers without a year fall outside any bounded window.
    """

    from_year: int | None = None
    to_year: int | None = None

    def __post_init__(self):
        if self.from_year is not None and self.to_year is not None and self.from_year > self.to_year:
            raise ValueError(f"empty window {self.from_year}:{self.to_year}")

    @property
    def unbounded(self) -> bool:
        return self.from_year is None and self.to_year is None

    def contains(self, year: int | None) -> bool:
        if self.unbounded:
            return True
        if year is None:
            return False
        if self.from_year is not None and year < self.from_year:
            return False
        if self.to_year is not None and year > self.to_year:
            return False
        return True

    @classmethod
    def parse(cls, text: str) -> "TimeWindow":
        """Parse ``FROM:TO``; either side may be empty (``2010:``, ``:2015``)."""
        if ":" not in text:
            raise ValueError(f"window must look like FROM:TO, got {text!r}")
        lo, hi = text.split(":", 1)
        return cls(int(lo) if lo.strip() else None, int(hi) if hi.strip() else None)


ALL_TIME = TimeWindow()


class WeightingStrategy(enum.Enum):
    """How a paper's rank is split among its authors. Only UNIFORM exists for now."""

    UNIFORM = "uniform"

    def shares(self, record: PaperRecord) -> dict[AuthorId, float]:
        if self is WeightingStrategy.UNIFORM:
            n = record.n_authors
            return {a: 1.0 / n for a in record.authors}
        raise NotImplementedError(self)


@dataclass(frozen=True)
class AuthorProfile:
    id: AuthorId
    papers: tuple[PaperId, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "papers", tuple(sorted(set(self.papers))))


def author_profiles(graph: CitationGraph) -> dict[AuthorId, AuthorProfile]:
    """Profiles of every author appearing in the graph, keyed and ordered by author id."""
    owned: dict[AuthorId, list[PaperId]] = {}
    for pid in graph.ids:
        for a in graph.papers[pid].authors:
            owned.setdefault(a, []).append(pid)
    return {a: AuthorProfile(a, tuple(owned[a])) for a in sorted(owned)}


def _profile_records(graph: CitationGraph, profile: AuthorProfile, window: TimeWindow) -> list[PaperRecord]:
    out = []
    for pid in profile.papers:
        rec = graph.record(pid)
        if profile.id not in rec.authors:
            raise GraphError(f"paper {pid!r} does not list author {profile.id!r}")
        if window.contains(rec.year):
            out.append(rec)
    return out


# -- paper level ------------------------------------------------------------

def contributions(
    graph: CitationGraph,
    pid: PaperId,
    mode: RefCountMode = RefCountMode.BIBLIOGRAPHY,
    window: TimeWindow = ALL_TIME,
) -> list[tuple[PaperId, float]]:
    """Per-citer terms ``1/#Ref(citer)`` of a paper's rank, in citer-id order."""
    terms = []
    for cid in graph.citers_of(pid):
        citer = graph.papers[cid]
        if not window.contains(citer.year):
            continue
        f = ref_count(graph, cid, mode)
        if f == 0:
            raise DataInconsistencyError(f"citing paper {cid!r} cites {pid!r} but has reference count 0")
        terms.append((cid, 1.0 / f))
    return terms


def paperrank(
    graph: CitationGraph,
    pid: PaperId,
    mode: RefCountMode = RefCountMode.BIBLIOGRAPHY,
    window: TimeWindow = ALL_TIME,
) -> float:
    total = 0.0
    for _, term in contributions(graph, pid, mode, window):
        total += term
    return total


def paperrank_all(graph: CitationGraph, mode: RefCountMode = RefCountMode.BIBLIOGRAPHY) -> dict[PaperId, float]:
    return {pid: paperrank(graph, pid, mode) for pid in graph.ids}


def citation_count(graph: CitationGraph, pid: PaperId, window: TimeWindow = ALL_TIME) -> int:
    return sum(1 for cid in graph.citers_of(pid) if window.contains(graph.papers[cid].year))


def rho(graph: CitationGraph, pid: PaperId, mode: RefCountMode = RefCountMode.BIBLIOGRAPHY) -> float | None:
    """Citations per unit of PaperRank; ``None`` for an uncited paper."""
    pr = paperrank(graph, pid, mode)
    if pr == 0:
        return None
    return citation_count(graph, pid) / pr


# -- author level -----------------------------------------------------------

def author_shares(
    graph: CitationGraph,
    profile: AuthorProfile,
    mode: RefCountMode = RefCountMode.BIBLIOGRAPHY,
    weighting: WeightingStrategy = WeightingStrategy.UNIFORM,
    window: TimeWindow = ALL_TIME,
) -> list[float]:
    """The author's share of each of their papers' PaperRank, in paper-id order."""
    out = []
    for rec in _profile_records(graph, profile, window):
        out.append(paperrank(graph, rec.id, mode) * weighting.shares(rec)[profile.id])
    return out


def authorrank(
    graph: CitationGraph,
    profile: AuthorProfile,
    mode: RefCountMode = RefCountMode.BIBLIOGRAPHY,
    weighting: WeightingStrategy = WeightingStrategy.UNIFORM,
    window: TimeWindow = ALL_TIME,
) -> float:
    total = 0.0
    for share in author_shares(graph, profile, mode, weighting, window):
        total += share
    return total


def sum_paperrank(
    graph: CitationGraph,
    profile: AuthorProfile,
    mode: RefCountMode = RefCountMode.BIBLIOGRAPHY,
    window: TimeWindow = ALL_TIME,
) -> float:
    total = 0.0
    for rec in _profile_records(graph, profile, window):
        total += paperrank(graph, rec.id, mode)
    return total


def citation_counts(graph: CitationGraph, profile: AuthorProfile, window: TimeWindow = ALL_TIME) -> list[int]:
    return [citation_count(graph, rec.id) for rec in _profile_records(graph, profile, window)]


def sum_citations(graph: CitationGraph, profile: AuthorProfile, window: TimeWindow = ALL_TIME) -> int:
    return sum(citation_counts(graph, profile, window))


def aggregate_group(
    graph: CitationGraph,
    profiles: Iterable[AuthorProfile],
    mode: RefCountMode = RefCountMode.BIBLIOGRAPHY,
) -> float:
    """Summed AuthorRank of a research group, journal board, department..."""
    profiles = sorted(profiles, key=lambda p: p.id)
    ids = [p.id for p in profiles]
    if len(set(ids)) != len(ids):
        raise ValueError("group lists the same author twice")
    total = 0.0
    for p in profiles:
        total += authorrank(graph, p, mode)
    return total


# -- classical indices on plain values ---------------------------------------

def h_index_of(counts: Sequence[float]) -> int:
    """Largest k such that k of the values are >= k."""
    h = 0
    for i, c in enumerate(sorted(counts, reverse=True), start=1):
        if c >= i:
            h = i
        else:
            break
    return h


def i_n_of(counts: Sequence[int], threshold: int) -> int:
    # strictly more than threshold, as in Google Scholar's i10
    return sum(1 for c in counts if c > threshold)


def h_alpha_of(shares: Sequence[float], alpha: float) -> int:
    """Largest p with at least p shares >= alpha * p (0 if none qualifies at p=1)."""
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    best = 0
    for p in range(1, len(shares) + 1):
        if sum(1 for s in shares if s >= alpha * p) >= p:
            best = p
    return best


def i_beta_of(shares: Sequence[float], beta: float) -> int:
    if beta <= 0:
        raise ValueError("beta must be positive")
    return sum(1 for s in shares if s >= beta)


# -- classical indices on a graph --------------------------------------------

def h_index(graph: CitationGraph, profile: AuthorProfile, window: TimeWindow = ALL_TIME) -> int:
    return h_index_of(citation_counts(graph, profile, window))


def i_n_index(graph: CitationGraph, profile: AuthorProfile, threshold_n: int = 10,
              window: TimeWindow = ALL_TIME) -> int:
    if threshold_n < 1:
        raise ValueError("threshold_n must be a positive integer")
    return i_n_of(citation_counts(graph, profile, window), threshold_n)


def h_alpha(graph: CitationGraph, profile: AuthorProfile, alpha: float = DEFAULT_ALPHA,
            mode: RefCountMode = RefCountMode.BIBLIOGRAPHY, window: TimeWindow = ALL_TIME) -> int:
    return h_alpha_of(author_shares(graph, profile, mode, window=window), alpha)


def i_beta(graph: CitationGraph, profile: AuthorProfile, beta: float = DEFAULT_BETA,
           mode: RefCountMode = RefCountMode.BIBLIOGRAPHY, window: TimeWindow = ALL_TIME) -> int:
    return i_beta_of(author_shares(graph, profile, mode, window=window), beta)


def profile_for(graph: CitationGraph, author: AuthorId) -> AuthorProfile:
    try:
        return author_profiles(graph)[author]
    except KeyError:
        raise NotFoundError(f"unknown author {author!r}") from None
