"""Snapshot files and the citation-metadata API client.

Snapshot format: UTF-8 JSON lines, one paper per line::

    {"id": "2-s2.0-1", "authors": ["7202686127"], "year": 2001, "subject": "Medic",
     "references": ["2-s2.0-0"], "bibliography_length": 31}

Unknown keys are ignored; ``year``, ``subject`` and ``references`` are
optional. Blank lines and lines starting with ``#`` are skipped.

API wire format (JSON bodies, ``X-API-Key`` header):

    GET {base}/authors/{author_id}/papers     -> {"author": id, "papers": [eid, ...]}
    GET {base}/papers/{eid}                   -> snapshot-line object for the paper
    GET {base}/papers/{eid}/citations?count=N[&cursor=C]
        -> {"total": n, "entries": [{"id": eid, "bibliography_length": k}, ...],
            "next": cursor-or-null}

The citing paper's bibliography length is returned inline with each
citation entry, so listing the citers of a paper costs one query per page.
"""

from __future__ import annotations

import json
import logging
import os
import time
import urllib.error
import urllib.parse
import urllib.request
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, TYPE_CHECKING, Callable, Iterable, Protocol

from .errors import (
    ApiError, GraphError, NotFoundError, ProtocolError, RateLimitError, SnapshotError, TransportError,
)
from .graph import AuthorId, PaperId, PaperRecord
from .ranks import AuthorProfile

if TYPE_CHECKING:
    from .engine import RankDelta, RankState

log = logging.getLogger(__name__)


# -- snapshot files -----------------------------------------------------------

def record_from_dict(obj: dict) -> PaperRecord:
    if not isinstance(obj, dict):
        raise ValueError("record is not an object")
    try:
        pid = obj["id"]
        authors = obj["authors"]
        bib = obj["bibliography_length"]
    except KeyError as exc:
        raise ValueError(f"missing field {exc.args[0]!r}") from None
    refs = obj.get("references") or []
    if not isinstance(pid, str) or not isinstance(authors, list) or not isinstance(refs, list):
        raise ValueError("id must be a string; authors and references must be lists")
    if not isinstance(bib, int) or isinstance(bib, bool):
        raise ValueError("bibliography_length must be an integer")
    year = obj.get("year")
    if year is not None and (not isinstance(year, int) or isinstance(year, bool)):
        raise ValueError("year must be an integer")
    subject = obj.get("subject")
    try:
        return PaperRecord(pid, tuple(str(a) for a in authors), tuple(str(r) for r in refs), bib, year,
                           None if subject is None else str(subject))
    except GraphError as exc:
        raise ValueError(str(exc)) from None


def record_to_dict(rec: PaperRecord) -> dict:
    out = {"id": rec.id, "authors": list(rec.authors), "references": list(rec.references),
           "bibliography_length": rec.bibliography_length}
    if rec.year is not None:
        out["year"] = rec.year
    if rec.subject is not None:
        out["subject"] = rec.subject
    return out


def parse_snapshot(lines: Iterable[str], strict: bool = True,
                   errors: list[tuple[int, str]] | None = None) -> list[PaperRecord]:
    """Parse snapshot lines in order.

    In strict mode the first malformed line raises :class:`SnapshotError`. In
    lenient mode bad lines are skipped and ``(line, message)`` pairs are
    appended to ``errors`` if given.
    """
    records = []
    for lineno, line in enumerate(lines, start=1):
        text = line.strip()
        if not text or text.startswith("#"):
            continue
        try:
            records.append(record_from_dict(json.loads(text)))
        except (json.JSONDecodeError, ValueError) as exc:
            msg = exc.msg if isinstance(exc, json.JSONDecodeError) else str(exc)
            if strict:
                raise SnapshotError(msg, lineno) from None
            log.warning("snapshot line %d skipped: %s", lineno, msg)
            if errors is not None:
                errors.append((lineno, msg))
    return records


def load_snapshot(source: str | os.PathLike | IO[str], strict: bool = True,
                  errors: list[tuple[int, str]] | None = None) -> list[PaperRecord]:
    if hasattr(source, "read"):
        return parse_snapshot(source.read().splitlines(), strict, errors)
    try:
        text = Path(source).read_text(encoding="utf-8")
    except OSError as exc:
        raise SnapshotError(f"cannot read {source}: {exc.strerror}") from None
    except UnicodeDecodeError as exc:
        raise SnapshotError(f"{source} is not UTF-8: {exc.reason}") from None
    return parse_snapshot(text.splitlines(), strict, errors)


def dumps_snapshot(records: Iterable[PaperRecord]) -> str:
    return "".join(json.dumps(record_to_dict(r), sort_keys=True) + "\n" for r in records)


# -- transport ------------------------------------------------------------------

@dataclass(frozen=True)
class Response:
    status: int
    body: dict | None = None


class Transport(Protocol):
    def __call__(self, path: str, params: dict, headers: dict) -> Response: ...


@dataclass(frozen=True)
class ApiEndpointSet:
    base_url: str
    credentials: str = ""
    page_size: int = 25
    max_retries: int = 3
    backoff_seconds: float = 0.5

    def __post_init__(self):
        if self.page_size < 1:
            raise ValueError("page_size must be >= 1")
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")

    def __repr__(self):
        # keep API keys out of logs and tracebacks
        return f"ApiEndpointSet(base_url={self.base_url!r}, page_size={self.page_size}, max_retries={self.max_retries})"


def load_endpoints(config_path: str | os.PathLike | None = None, env: dict | None = None) -> ApiEndpointSet:
    """Endpoint settings from a JSON config file, overridden by ``PAPERRANK_*`` variables."""
    env = os.environ if env is None else env
    cfg: dict = {}
    if config_path is not None:
        cfg = json.loads(Path(config_path).read_text(encoding="utf-8"))
        if isinstance(cfg.get("base_url"), str) and cfg["base_url"].startswith("fixture://"):
            # fixture paths in a config file are relative to that file
            rel = cfg["base_url"][len("fixture://"):]
            if not os.path.isabs(rel):
                cfg["base_url"] = "fixture://" + str(Path(config_path).resolve().parent / rel)
    overrides = {"base_url": "PAPERRANK_BASE_URL", "credentials": "PAPERRANK_API_KEY",
                 "page_size": "PAPERRANK_PAGE_SIZE", "max_retries": "PAPERRANK_MAX_RETRIES",
                 "backoff_seconds": "PAPERRANK_BACKOFF"}
    for key, var in overrides.items():
        if env.get(var):
            cfg[key] = env[var]
    if "base_url" not in cfg:
        raise ValueError("no base_url configured (config file or PAPERRANK_BASE_URL)")
    return ApiEndpointSet(
        base_url=str(cfg["base_url"]),
        credentials=str(cfg.get("credentials", cfg.get("api_key", ""))),
        page_size=int(cfg.get("page_size", 25)),
        max_retries=int(cfg.get("max_retries", 3)),
        backoff_seconds=float(cfg.get("backoff_seconds", 0.5)),
    )


class HttpTransport:
    def __init__(self, base_url: str, timeout: float = 30.0):
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout

    def __call__(self, path, params, headers):
        url = self.base_url + path
        if params:
            url += "?" + urllib.parse.urlencode(params)
        req = urllib.request.Request(url, headers={**headers, "Accept": "application/json"})
        try:
            with urllib.request.urlopen(req, timeout=self.timeout) as resp:
                return Response(resp.status, json.loads(resp.read().decode("utf-8")))
        except urllib.error.HTTPError as exc:
            return Response(exc.code, None)
        except (urllib.error.URLError, OSError) as exc:
            raise TransportError(f"cannot reach {self.base_url}: {exc}") from None
        except json.JSONDecodeError:
            raise ProtocolError(f"non-JSON response from {url}") from None


class FixtureBackend:
    """In-process stand-in for the metadata API, serving canned JSON.

    Fixture document::

        {"api_key": "...",            # optional; requests must match it
         "authors": {author_id: [eid, ...]},
         "papers": {eid: {snapshot-line fields except id}},
         "citations": {eid: [{"id": eid, "bibliography_length": k}, ...]},
         "script": [429, 503, "down", ...],   # consumed one per request before real answers
         "broken_cursor": [eid, ...]}         # these listings repeat the same cursor forever

    ``script`` entries: an HTTP status to return, or ``"down"`` to raise a
    transport error.
    """

    def __init__(self, data: dict):
        self.data = data
        self.script = list(data.get("script", []))
        self.requests: list[str] = []

    @classmethod
    def from_file(cls, path: str | os.PathLike) -> "FixtureBackend":
        return cls(json.loads(Path(path).read_text(encoding="utf-8")))

    def __call__(self, path, params, headers):
        self.requests.append(path)
        if self.script:
            step = self.script.pop(0)
            if step == "down":
                raise TransportError("fixture backend unreachable")
            return Response(int(step))
        key = self.data.get("api_key")
        if key is not None and headers.get("X-API-Key") != key:
            return Response(401)
        parts = [urllib.parse.unquote(p) for p in path.strip("/").split("/")]
        if len(parts) == 3 and parts[0] == "authors" and parts[2] == "papers":
            papers = self.data.get("authors", {}).get(parts[1])
            if papers is None:
                return Response(404)
            return Response(200, {"author": parts[1], "papers": list(papers)})
        if len(parts) == 2 and parts[0] == "papers":
            paper = self.data.get("papers", {}).get(parts[1])
            if paper is None:
                return Response(404)
            return Response(200, {"id": parts[1], **paper})
        if len(parts) == 3 and parts[0] == "papers" and parts[2] == "citations":
            eid = parts[1]
            if eid not in self.data.get("papers", {}):
                return Response(404)
            entries = self.data.get("citations", {}).get(eid, [])
            count = int(params.get("count", 25))
            start = int(params.get("cursor", 0))
            page = entries[start:start + count]
            if eid in self.data.get("broken_cursor", []):
                nxt = "0"
            else:
                nxt = str(start + count) if start + count < len(entries) else None
            return Response(200, {"total": len(entries), "entries": page, "next": nxt})
        return Response(404)


def transport_for(endpoints: ApiEndpointSet) -> Transport:
    if endpoints.base_url.startswith("fixture://"):
        return FixtureBackend.from_file(endpoints.base_url[len("fixture://"):])
    return HttpTransport(endpoints.base_url)


# -- client -----------------------------------------------------------------

@dataclass
class QueryBudget:
    """Successful queries, by kind. Retried attempts are not counted."""

    author_lookups: int = 0
    paper_lookups: int = 0
    citation_pages: int = 0
    retries: int = 0
    per_paper_pages: dict[PaperId, int] = field(default_factory=dict)

    @property
    def queries_used(self) -> int:
        return self.author_lookups + self.paper_lookups + self.citation_pages


class ApiClient:
    def __init__(self, endpoints: ApiEndpointSet, transport: Transport | None = None,
                 sleep: Callable[[float], None] = time.sleep):
        self.endpoints = endpoints
        self.transport = transport if transport is not None else transport_for(endpoints)
        self.sleep = sleep
        self.budget = QueryBudget()

    def _get(self, path: str, params: dict | None = None) -> dict:
        headers = {"X-API-Key": self.endpoints.credentials} if self.endpoints.credentials else {}
        attempt = 0
        while True:
            try:
                resp = self.transport(path, dict(params or {}), headers)
            except TransportError:
                resp = None
            if resp is not None and resp.status == 200:
                if not isinstance(resp.body, dict):
                    raise ProtocolError(f"{path}: response body is not an object")
                return resp.body
            if resp is not None and resp.status == 404:
                raise NotFoundError(f"{path}: not found")
            if resp is not None and resp.status in (401, 403):
                raise ApiError(f"{path}: credentials rejected ({resp.status})")
            retryable = resp is None or resp.status == 429 or resp.status >= 500
            if not retryable:
                raise ApiError(f"{path}: unexpected status {resp.status}")
            if attempt >= self.endpoints.max_retries:
                if resp is not None and resp.status == 429:
                    raise RateLimitError(f"{path}: still rate limited after {attempt} retries")
                what = "unreachable" if resp is None else f"status {resp.status}"
                raise TransportError(f"{path}: {what} after {attempt} retries")
            self.sleep(self.endpoints.backoff_seconds * 2 ** attempt)
            attempt += 1
            self.budget.retries += 1

    def fetch_paper(self, pid: PaperId) -> PaperRecord:
        body = self._get(f"/papers/{urllib.parse.quote(pid, safe='')}")
        self.budget.paper_lookups += 1
        try:
            return record_from_dict({**body, "id": pid})
        except ValueError as exc:
            raise ProtocolError(f"paper {pid!r}: {exc}") from None

    def fetch_author(self, author: AuthorId) -> tuple[AuthorProfile, list[PaperRecord]]:
        body = self._get(f"/authors/{urllib.parse.quote(author, safe='')}/papers")
        self.budget.author_lookups += 1
        papers = body.get("papers")
        if not isinstance(papers, list):
            raise ProtocolError(f"author {author!r}: 'papers' is not a list")
        records = [self.fetch_paper(str(pid)) for pid in papers]
        return AuthorProfile(author, tuple(r.id for r in records)), records

    def fetch_citations(self, pid: PaperId) -> list[tuple[PaperId, int]]:
        path = f"/papers/{urllib.parse.quote(pid, safe='')}/citations"
        out: list[tuple[PaperId, int]] = []
        seen_cursors: set[str] = set()
        cursor = None
        pages = 0
        while True:
            params = {"count": self.endpoints.page_size}
            if cursor is not None:
                params["cursor"] = cursor
            body = self._get(path, params)
            self.budget.citation_pages += 1
            pages += 1
            entries = body.get("entries")
            if not isinstance(entries, list):
                raise ProtocolError(f"{path}: 'entries' is not a list")
            for e in entries:
                try:
                    out.append((str(e["id"]), int(e["bibliography_length"])))
                except (KeyError, TypeError, ValueError):
                    raise ProtocolError(f"{path}: malformed citation entry {e!r}") from None
            cursor = body.get("next")
            if cursor is None:
                break
            cursor = str(cursor)
            if cursor in seen_cursors:
                raise ProtocolError(f"{path}: pagination cursor {cursor!r} repeated")
            seen_cursors.add(cursor)
        self.budget.per_paper_pages[pid] = self.budget.per_paper_pages.get(pid, 0) + pages
        return out


# module-level forms mirroring the operation names

def fetch_author(client: ApiClient, author: AuthorId) -> tuple[AuthorProfile, list[PaperRecord]]:
    return client.fetch_author(author)


def fetch_citations(client: ApiClient, pid: PaperId) -> list[tuple[PaperId, int]]:
    return client.fetch_citations(pid)


def sync_author(client: ApiClient, state: "RankState", author: AuthorId) -> "RankDelta":
    """Bring ``state`` up to date with the backend for one author.

    Everything is fetched before the state is touched, so a network failure
    leaves it unchanged. Updates are then applied one at a time; since
    novelty is judged by (citing, cited) pairs already in the state, a sync
    interrupted half way can simply be run again.
    """
    from .engine import RankDelta, apply_citation, apply_new_paper

    profile, records = client.fetch_author(author)
    citations = {pid: client.fetch_citations(pid) for pid in profile.papers}

    delta = RankDelta()
    fresh = sorted((r for r in records if r.id not in state), key=lambda r: r.id)
    for rec in fresh:
        delta.merge(apply_new_paper(state, rec))
    # references between papers registered in this same sync
    for rec in fresh:
        for ref in sorted(rec.references):
            if ref in state and not state.has_citation(rec.id, ref):
                delta.merge(apply_citation(state, rec.id, ref))
    delta.skipped = [(c, t) for c, t in delta.skipped if not state.has_citation(c, t)]
    for pid in profile.papers:
        for citer, bib_len in sorted(citations[pid]):
            if not state.has_citation(citer, pid):
                delta.merge(apply_citation(state, (citer, bib_len), pid))
    return delta
