"""In-memory citation graph.

A graph is built once from a list of :class:`PaperRecord` and never mutated.
``citers[j]`` holds the papers citing ``j`` (the columns of the citation
matrix read by row), kept sorted so every downstream sum has a fixed order.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .errors import GraphError, NotFoundError

log = logging.getLogger(__name__)

PaperId = str
AuthorId = str


class RefCountMode(enum.Enum):
    """How the reference count of a citing paper is measured.

    BIBLIOGRAPHY uses the full length of the reference list, as reported by
    the metadata provider. IN_DATABASE counts only references that resolve
    to papers inside the graph.
    """

    BIBLIOGRAPHY = "bibliography"
    IN_DATABASE = "indb"

    @classmethod
    def parse(cls, value: "str | RefCountMode") -> "RefCountMode":
        if isinstance(value, cls):
            return value
        aliases = {"bib": cls.BIBLIOGRAPHY, "in_database": cls.IN_DATABASE, "indatabase": cls.IN_DATABASE}
        key = str(value).strip().lower()
        if key in aliases:
            return aliases[key]
        return cls(key)


@dataclass(frozen=True)
class PaperRecord:
    id: PaperId
    authors: tuple[AuthorId, ...]
    references: tuple[PaperId, ...] = ()
    bibliography_length: int = 0
    year: int | None = None
    subject: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "authors", tuple(self.authors))
        object.__setattr__(self, "references", tuple(self.references))
        if not self.id:
            raise GraphError("paper id must be non-empty")
        if not self.authors:
            raise GraphError(f"paper {self.id!r} has no authors")
        if any(not a for a in self.authors):
            raise GraphError(f"paper {self.id!r} has an empty author id")
        if len(set(self.authors)) != len(self.authors):
            raise GraphError(f"paper {self.id!r} lists an author twice")
        if len(set(self.references)) != len(self.references):
            raise GraphError(f"paper {self.id!r} lists a reference twice")
        if self.bibliography_length < 0:
            raise GraphError(f"paper {self.id!r} has negative bibliography_length")
        if self.bibliography_length < len(self.references):
            raise GraphError(
                f"paper {self.id!r}: bibliography_length {self.bibliography_length} "
                f"< {len(self.references)} in-database references"
            )

    @property
    def n_authors(self) -> int:
        return len(self.authors)


@dataclass(frozen=True)
class CitationGraph:
    papers: Mapping[PaperId, PaperRecord]
    citers: Mapping[PaperId, tuple[PaperId, ...]]
    # dropped references per citing paper, for the validation report
    pruned: Mapping[PaperId, tuple[PaperId, ...]] = field(default_factory=dict)

    @property
    def paper_count(self) -> int:
        return len(self.papers)

    @property
    def ids(self) -> list[PaperId]:
        return sorted(self.papers)

    def __contains__(self, pid: PaperId) -> bool:
        return pid in self.papers

    def __len__(self) -> int:
        return len(self.papers)

    def record(self, pid: PaperId) -> PaperRecord:
        try:
            return self.papers[pid]
        except KeyError:
            raise NotFoundError(f"unknown paper {pid!r}") from None

    def citers_of(self, pid: PaperId) -> tuple[PaperId, ...]:
        if pid not in self.papers:
            raise NotFoundError(f"unknown paper {pid!r}")
        return self.citers[pid]

    def authors(self) -> list[AuthorId]:
        return sorted({a for rec in self.papers.values() for a in rec.authors})

    def records(self) -> list[PaperRecord]:
        return [self.papers[pid] for pid in self.ids]

    @property
    def dropped_reference_count(self) -> int:
        return sum(len(v) for v in self.pruned.values())


def build_graph(records: Iterable[PaperRecord]) -> CitationGraph:
    """Assemble records into a graph, pruning references that leave the record set.

    Pruned references are removed from ``references`` only; the bibliography
    length is kept as reported.
    """
    records = list(records)
    papers: dict[PaperId, PaperRecord] = {}
    for rec in records:
        if rec.id in papers:
            raise GraphError(f"duplicate paper id {rec.id!r}")
        papers[rec.id] = rec

    pruned: dict[PaperId, tuple[PaperId, ...]] = {}
    citers: dict[PaperId, list[PaperId]] = {pid: [] for pid in papers}
    for pid in sorted(papers):
        rec = papers[pid]
        kept = tuple(sorted(r for r in rec.references if r in papers))
        dropped = tuple(sorted(r for r in rec.references if r not in papers))
        if dropped:
            pruned[pid] = dropped
        if kept != rec.references:
            # PaperRecord re-checks bibliography_length >= len(kept)
            rec = PaperRecord(rec.id, rec.authors, kept, rec.bibliography_length, rec.year, rec.subject)
            papers[pid] = rec
        for target in kept:
            citers[target].append(pid)

    if pruned:
        log.warning("pruned %d dangling references from %d papers",
                    sum(len(v) for v in pruned.values()), len(pruned))
    # pids were visited in sorted order, so every citer list is already sorted
    return CitationGraph(
        papers={pid: papers[pid] for pid in sorted(papers)},
        citers={pid: tuple(c) for pid, c in sorted(citers.items())},
        pruned=pruned,
    )


def ref_count(graph: CitationGraph, pid: PaperId, mode: RefCountMode = RefCountMode.BIBLIOGRAPHY) -> int:
    rec = graph.record(pid)
    if mode is RefCountMode.BIBLIOGRAPHY:
        return rec.bibliography_length
    return len(rec.references)


@dataclass(frozen=True)
class ValidationReport:
    mode: RefCountMode
    dangling: tuple[PaperId, ...] = ()
    self_citations: tuple[PaperId, ...] = ()
    orphan_authors: tuple[AuthorId, ...] = ()
    pruned_references: int = 0

    @property
    def is_clean(self) -> bool:
        return not (self.dangling or self.self_citations or self.orphan_authors or self.pruned_references)


def validate(
    graph: CitationGraph,
    mode: RefCountMode = RefCountMode.IN_DATABASE,
    authors: Iterable[AuthorId] = (),
) -> ValidationReport:
    """Report dangling papers, self-citations and orphan authors without touching the graph.

    ``authors`` is an optional list of expected author ids; any of them that
    appears on no record is reported as an orphan.
    """
    dangling = tuple(pid for pid in graph.ids if ref_count(graph, pid, mode) == 0)
    self_cites = tuple(pid for pid in graph.ids if pid in graph.papers[pid].references)
    known = set(graph.authors())
    orphans = tuple(sorted(set(authors) - known))
    return ValidationReport(mode, dangling, self_cites, orphans, graph.dropped_reference_count)
