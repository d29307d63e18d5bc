"""Persistent rank state with O(delta) updates.

PaperRank is additive in the citations: a new citation from a paper with
``f`` references adds ``1/f`` to the cited paper and ``1/(f * #Auth)`` to
each of its authors. The state keeps just enough provenance (who cites
whom, bibliography lengths, authorship) to apply such updates without
re-reading the database, and to detect citations it has already seen.

IN_DATABASE mode needs one extra step: when an already known paper gains an
in-database reference, its ``f`` grows, so its earlier contributions shrink
from ``1/f`` to ``1/(f+1)``. Those corrections are applied as part of the
same update, which keeps the incremental state equal to a batch recompute.
"""

from __future__ import annotations

import copy
import json
import logging
import math
import os
import tempfile
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterable

from .errors import DataInconsistencyError, IntegrityError, NotFoundError, StateError, StateFormatError
from .graph import AuthorId, CitationGraph, PaperId, PaperRecord, RefCountMode
from .ranks import author_profiles, authorrank, paperrank_all

log = logging.getLogger(__name__)

FORMAT_NAME = "paperrank-state"
FORMAT_VERSION = 1
CONSERVATION_RTOL = 1e-9


@dataclass
class RankDelta:
    paper_deltas: dict[PaperId, float] = field(default_factory=dict)
    author_deltas: dict[AuthorId, float] = field(default_factory=dict)
    # (citing, cited) pairs whose target was not in the state
    skipped: list[tuple[PaperId, PaperId]] = field(default_factory=list)

    @property
    def paper_total(self) -> float:
        return math.fsum(self.paper_deltas.values())

    @property
    def author_total(self) -> float:
        return math.fsum(self.author_deltas.values())

    @property
    def is_zero(self) -> bool:
        return not any(self.paper_deltas.values()) and not any(self.author_deltas.values())

    def merge(self, other: "RankDelta") -> "RankDelta":
        for k, v in other.paper_deltas.items():
            self.paper_deltas[k] = self.paper_deltas.get(k, 0.0) + v
        for k, v in other.author_deltas.items():
            self.author_deltas[k] = self.author_deltas.get(k, 0.0) + v
        self.skipped.extend(other.skipped)
        return self


@dataclass
class RankState:
    mode: RefCountMode
    paper_ranks: dict[PaperId, float] = field(default_factory=dict)
    author_ranks: dict[AuthorId, float] = field(default_factory=dict)
    authorship: dict[PaperId, tuple[AuthorId, ...]] = field(default_factory=dict)
    # every citing paper seen so far, registered or external
    bibliography: dict[PaperId, int] = field(default_factory=dict)
    references: dict[PaperId, set[PaperId]] = field(default_factory=dict)
    revision: int = 0
    as_of: str = ""
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False, compare=False)

    def __contains__(self, pid: PaperId) -> bool:
        return pid in self.authorship

    def has_citation(self, citing: PaperId, cited: PaperId) -> bool:
        return cited in self.references.get(citing, ())

    @property
    def paper_sum(self) -> float:
        return math.fsum(self.paper_ranks.values())

    @property
    def author_sum(self) -> float:
        return math.fsum(self.author_ranks.values())

    def conservation_gap(self) -> float:
        """Relative gap between the global PaperRank and AuthorRank sums."""
        p, a = self.paper_sum, self.author_sum
        return abs(p - a) / max(1.0, abs(p), abs(a))

    def snapshot(self) -> "RankState":
        """Consistent deep copy for readers; never shows a half-applied update."""
        with self._lock:
            clone = copy.deepcopy({k: v for k, v in self.__dict__.items() if k != "_lock"})
        return RankState(**clone)

    def __deepcopy__(self, memo):
        return self.snapshot()


def init_state(graph: CitationGraph, mode: RefCountMode = RefCountMode.BIBLIOGRAPHY, as_of: str = "") -> RankState:
    state = RankState(mode=mode, as_of=as_of)
    state.paper_ranks = paperrank_all(graph, mode)
    state.author_ranks = {a: authorrank(graph, prof, mode) for a, prof in author_profiles(graph).items()}
    for pid in graph.ids:
        rec = graph.papers[pid]
        state.authorship[pid] = rec.authors
        state.bibliography[pid] = rec.bibliography_length
        if rec.references:
            state.references[pid] = set(rec.references)
    return state


# -- updates ----------------------------------------------------------------

def _plan_references(state: RankState, citing: PaperId, targets: list[PaperId], bib_len: int) -> list[tuple[PaperId, float]]:
    """Rank increments caused by ``citing`` gaining in-database references ``targets``."""
    old = sorted(state.references.get(citing, ()))
    if state.mode is RefCountMode.BIBLIOGRAPHY:
        if bib_len <= 0:
            raise DataInconsistencyError(f"citing paper {citing!r} has bibliography length 0")
        if len(old) + len(targets) > bib_len:
            raise DataInconsistencyError(
                f"citing paper {citing!r} would have {len(old) + len(targets)} in-database "
                f"references but a bibliography of {bib_len}")
        return [(t, 1.0 / bib_len) for t in targets]
    f_old, f_new = len(old), len(old) + len(targets)
    plan = []
    if f_old:
        correction = 1.0 / f_new - 1.0 / f_old
        plan.extend((t, correction) for t in old)
    plan.extend((t, 1.0 / f_new) for t in targets)
    return plan


def _commit(state: RankState, citing: PaperId, targets: list[PaperId], bib_len: int,
            plan: list[tuple[PaperId, float]], delta: RankDelta) -> None:
    state.bibliography[citing] = bib_len
    if targets:
        state.references.setdefault(citing, set()).update(targets)
    for pid, amount in plan:
        state.paper_ranks[pid] += amount
        delta.paper_deltas[pid] = delta.paper_deltas.get(pid, 0.0) + amount
        authors = state.authorship[pid]
        share = amount / len(authors)
        for a in authors:
            state.author_ranks[a] += share
            delta.author_deltas[a] = delta.author_deltas.get(a, 0.0) + share
    state.revision += 1


def _citing_info(state: RankState, citing) -> tuple[PaperId, int]:
    if isinstance(citing, PaperRecord):
        cid, bib = citing.id, citing.bibliography_length
    elif isinstance(citing, str):
        cid = citing
        if cid not in state.bibliography:
            raise NotFoundError(f"citing paper {cid!r} is unknown; pass (id, bibliography_length)")
        bib = state.bibliography[cid]
    else:
        cid, bib = citing
        bib = int(bib)
    known = state.bibliography.get(cid)
    if known is not None and known != bib:
        raise DataInconsistencyError(f"citing paper {cid!r}: bibliography length {bib} != recorded {known}")
    return cid, bib


def apply_citation(state: RankState, citing, cited: PaperId) -> RankDelta:
    """Record that ``citing`` cites ``cited`` and update ranks in place.

    ``citing`` is a known paper id, a ``(paper_id, bibliography_length)`` pair
    for a citer outside the state, or a :class:`PaperRecord`.
    """
    with state._lock:
        cid, bib = _citing_info(state, citing)
        if cited not in state.authorship:
            raise NotFoundError(f"cited paper {cited!r} is not in the state; register it first")
        if state.has_citation(cid, cited):
            raise StateError(f"citation {cid!r} -> {cited!r} is already recorded")
        plan = _plan_references(state, cid, [cited], bib)
        delta = RankDelta()
        _commit(state, cid, [cited], bib, plan, delta)
    return delta


def apply_new_paper(state: RankState, record: PaperRecord) -> RankDelta:
    """Register a paper and credit every in-state paper it references.

    References to papers the state does not know are skipped and listed in
    ``delta.skipped``; they can be applied later with :func:`apply_citation`.
    """
    with state._lock:
        if record.id in state.authorship:
            raise StateError(f"paper {record.id!r} is already registered")
        known = state.bibliography.get(record.id)
        if known is not None and known != record.bibliography_length:
            raise DataInconsistencyError(
                f"paper {record.id!r}: bibliography length {record.bibliography_length} != recorded {known}")
        resolvable = set(state.authorship) | {record.id}
        targets, skipped = [], []
        for ref in sorted(record.references):
            if ref not in resolvable:
                skipped.append((record.id, ref))
            elif not state.has_citation(record.id, ref):
                targets.append(ref)
        plan = _plan_references(state, record.id, targets, record.bibliography_length) if targets else []

        state.authorship[record.id] = record.authors
        state.paper_ranks[record.id] = 0.0
        for a in record.authors:
            state.author_ranks.setdefault(a, 0.0)
        delta = RankDelta(skipped=skipped)
        _commit(state, record.id, targets, record.bibliography_length, plan, delta)
    if skipped:
        log.info("paper %s: %d references outside the state skipped", record.id, len(skipped))
    return delta


# -- consistency ------------------------------------------------------------

@dataclass(frozen=True)
class DriftReport:
    paper_drift: float
    author_drift: float
    missing_papers: tuple[PaperId, ...] = ()
    extra_papers: tuple[PaperId, ...] = ()

    @property
    def max_drift(self) -> float:
        return max(self.paper_drift, self.author_drift)

    def within(self, tol: float) -> bool:
        return self.max_drift <= tol and not self.missing_papers and not self.extra_papers


def _max_abs_diff(a: dict, b: dict) -> float:
    keys = set(a) | set(b)
    return max((abs(a.get(k, 0.0) - b.get(k, 0.0)) for k in keys), default=0.0)


def reconcile(state: RankState, graph: CitationGraph) -> DriftReport:
    batch = init_state(graph, state.mode)
    return DriftReport(
        paper_drift=_max_abs_diff(state.paper_ranks, batch.paper_ranks),
        author_drift=_max_abs_diff(state.author_ranks, batch.author_ranks),
        missing_papers=tuple(sorted(set(batch.paper_ranks) - set(state.paper_ranks))),
        extra_papers=tuple(sorted(set(state.paper_ranks) - set(batch.paper_ranks))),
    )


# -- persistence ------------------------------------------------------------

def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def dumps_state(state: RankState) -> str:
    """Serialise to JSON lines; floats are written as hex so the round trip is exact."""
    lines = [_dump({"format": FORMAT_NAME, "format_version": FORMAT_VERSION, "mode": state.mode.value,
                    "as_of": state.as_of, "revision": state.revision})]
    for pid in sorted(state.authorship):
        lines.append(_dump({"paper": pid, "rank": state.paper_ranks[pid].hex(),
                            "authors": list(state.authorship[pid]),
                            "bibliography_length": state.bibliography.get(pid, 0),
                            "references": sorted(state.references.get(pid, ()))}))
    for cid in sorted(set(state.bibliography) - set(state.authorship)):
        lines.append(_dump({"citer": cid, "bibliography_length": state.bibliography[cid],
                            "references": sorted(state.references.get(cid, ()))}))
    for a in sorted(state.author_ranks):
        lines.append(_dump({"author": a, "rank": state.author_ranks[a].hex()}))
    lines.append(_dump({"paper_sum": state.paper_sum.hex(), "author_sum": state.author_sum.hex(),
                        "papers": len(state.paper_ranks), "authors": len(state.author_ranks)}))
    return "\n".join(lines) + "\n"


def save_state(state: RankState, sink: str | os.PathLike | IO[str]) -> None:
    with state._lock:
        text = dumps_state(state)
    if hasattr(sink, "write"):
        sink.write(text)
        return
    write_atomic(Path(sink), text)


def write_atomic(path: Path, text: str) -> None:
    """Write-new-then-swap so readers see either the old file or the new one."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent or ".")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _float(value, lineno: int) -> float:
    try:
        return float.fromhex(value)
    except (TypeError, ValueError):
        raise StateFormatError(f"bad hex float {value!r}", lineno) from None


def loads_state(text: str) -> RankState:
    lines = text.splitlines()
    if not lines:
        raise StateFormatError("empty state file", 1)
    objs = []
    for lineno, line in enumerate(lines, start=1):
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise StateFormatError(f"malformed JSON ({exc.msg}, column {exc.colno})", lineno) from None
        if not isinstance(obj, dict):
            raise StateFormatError("record is not an object", lineno)
        objs.append(obj)

    header = objs[0]
    if header.get("format") != FORMAT_NAME:
        raise StateFormatError("missing state header", 1)
    if header.get("format_version") != FORMAT_VERSION:
        raise StateFormatError(f"unsupported format version {header.get('format_version')!r}", 1)
    try:
        mode = RefCountMode(header["mode"])
    except (KeyError, ValueError):
        raise StateFormatError(f"bad mode {header.get('mode')!r}", 1) from None
    state = RankState(mode=mode, as_of=header.get("as_of", ""), revision=int(header.get("revision", 0)))

    footer = None
    for lineno, obj in enumerate(objs[1:], start=2):
        if footer is not None:
            raise StateFormatError("content after footer", lineno)
        try:
            if "paper" in obj:
                pid = obj["paper"]
                state.paper_ranks[pid] = _float(obj["rank"], lineno)
                state.authorship[pid] = tuple(obj["authors"])
                state.bibliography[pid] = int(obj["bibliography_length"])
                if obj["references"]:
                    state.references[pid] = set(obj["references"])
            elif "citer" in obj:
                state.bibliography[obj["citer"]] = int(obj["bibliography_length"])
                if obj["references"]:
                    state.references[obj["citer"]] = set(obj["references"])
            elif "author" in obj:
                state.author_ranks[obj["author"]] = _float(obj["rank"], lineno)
            elif "paper_sum" in obj:
                footer = (lineno, obj)
            else:
                raise StateFormatError("unrecognised record", lineno)
        except (KeyError, TypeError) as exc:
            raise StateFormatError(f"missing or invalid field {exc}", lineno) from None
    if footer is None:
        raise StateFormatError("missing footer (truncated file?)", len(lines))

    lineno, obj = footer
    if obj.get("papers") != len(state.paper_ranks) or obj.get("authors") != len(state.author_ranks):
        raise IntegrityError("record counts do not match footer")
    if _float(obj.get("paper_sum"), lineno) != state.paper_sum or _float(obj.get("author_sum"), lineno) != state.author_sum:
        raise IntegrityError("global sums do not match footer")
    if state.conservation_gap() > CONSERVATION_RTOL:
        raise IntegrityError(
            f"sum of PaperRank {state.paper_sum!r} != sum of AuthorRank {state.author_sum!r}")
    for pid, authors in state.authorship.items():
        if any(a not in state.author_ranks for a in authors):
            raise IntegrityError(f"paper {pid!r} names an author without a rank record")
    return state


def load_state(source: str | os.PathLike | IO[str]) -> RankState:
    if hasattr(source, "read"):
        return loads_state(source.read())
    return loads_state(Path(source).read_text(encoding="utf-8"))


def apply_all(state: RankState, updates: Iterable) -> RankDelta:
    """Apply a sequence of ``("paper", record)`` / ``("cite", citing, cited)`` updates."""
    total = RankDelta()
    for upd in updates:
        if upd[0] == "paper":
            total.merge(apply_new_paper(state, upd[1]))
        elif upd[0] == "cite":
            total.merge(apply_citation(state, upd[1], upd[2]))
        else:
            raise ValueError(f"unknown update kind {upd[0]!r}")
    return total
