"""Seeded random citation corpora for property tests and experiment scripts."""

from __future__ import annotations

import random

from .graph import PaperRecord


def random_records(
    rng: random.Random,
    n: int,
    n_authors: int | None = None,
    max_refs: int = 6,
    max_coauthors: int = 4,
    external_refs: int = 10,
    allow_self: bool = True,
    strongly_connected: bool = False,
    subjects: tuple[str, ...] = (),
    years: tuple[int, int] | None = (1990, 2021),
) -> list[PaperRecord]:
    """``n`` papers citing one another at random.

    Bibliographies are padded with up to ``external_refs`` items outside the
    corpus. With ``strongly_connected`` every paper cites the next one on a
    random Hamiltonian cycle, so all reference counts are positive and the
    citation graph is strongly connected.
    """
    ids = [f"2-s2.0-{k:06d}" for k in range(n)]
    n_authors = n_authors or max(1, n // 2)
    pool = [f"{7000000000 + k}" for k in range(n_authors)]
    refs: dict[str, set[str]] = {pid: set() for pid in ids}
    for pid in ids:
        k = rng.randint(0, max_refs) if n else 0
        for target in rng.sample(ids, min(k, n)):
            if target != pid or allow_self:
                refs[pid].add(target)
    if strongly_connected and n:
        order = ids[:]
        rng.shuffle(order)
        for a, b in zip(order, order[1:] + order[:1]):
            refs[a].add(b)
    out = []
    for pid in ids:
        r = tuple(sorted(refs[pid]))
        authors = tuple(rng.sample(pool, rng.randint(1, min(max_coauthors, len(pool)))))
        bib = len(r) + rng.randint(0, external_refs)
        year = rng.randint(*years) if years else None
        subject = rng.choice(subjects) if subjects else None
        out.append(PaperRecord(pid, authors, r, bib, year, subject))
    return out


def update_scenario(rng: random.Random, final: list[PaperRecord], new_fraction: float = 0.3,
                    drop_fraction: float = 0.3) -> tuple[list[PaperRecord], list[tuple]]:
    """Split a corpus into a bootstrap snapshot and the updates that complete it.

    Updates are ``("paper", record)`` and ``("cite", citing_id, cited_id)``.
    A new paper arrives carrying only its references to bootstrap papers;
    every other edge that is missing from the bootstrap becomes a citation
    update. Applying all updates to the bootstrap yields ``final``.
    """
    new_ids = {r.id for r in final if rng.random() < new_fraction}
    base, ops = [], []
    for r in final:
        if r.id in new_ids:
            carried = tuple(t for t in r.references if t not in new_ids)
            ops.append(("paper", PaperRecord(r.id, r.authors, carried, r.bibliography_length, r.year, r.subject)))
            ops.extend(("cite", r.id, t) for t in r.references if t in new_ids)
        else:
            kept = []
            for t in r.references:
                if t in new_ids or rng.random() < drop_fraction:
                    ops.append(("cite", r.id, t))
                else:
                    kept.append(t)
            base.append(PaperRecord(r.id, r.authors, tuple(kept), r.bibliography_length, r.year, r.subject))
    return base, ops


def _deps(op) -> list[str]:
    return [op[1].id] if op[0] == "paper" else [op[1], op[2]]


def random_valid_order(ops: list[tuple], rng: random.Random, base_ids) -> list[tuple]:
    """A random interleaving in which no update touches a paper before it is registered."""
    known = set(base_ids)
    provides = {op[1].id: k for k, op in enumerate(ops) if op[0] == "paper"}
    waiting: dict[str, list[int]] = {}
    ready = []
    for k, op in enumerate(ops):
        missing = [] if op[0] == "paper" else [p for p in _deps(op) if p not in known]
        if missing:
            waiting.setdefault(missing[0], []).append(k)
        else:
            ready.append(k)
    out = []
    while ready:
        k = ready.pop(rng.randrange(len(ready)))
        op = ops[k]
        out.append(op)
        if op[0] == "paper":
            known.add(op[1].id)
            for j in waiting.pop(op[1].id, []):
                missing = [p for p in _deps(ops[j]) if p not in known]
                if missing:
                    waiting.setdefault(missing[0], []).append(j)
                else:
                    ready.append(j)
    if len(out) != len(ops):
        raise ValueError(f"updates reference papers never registered: {sorted(set(waiting) - set(provides))}")
    return out


def apply_ops_to_records(base: list[PaperRecord], ops: list[tuple]) -> list[PaperRecord]:
    """The corpus obtained by applying ``ops`` to ``base`` at the record level."""
    recs = {r.id: r for r in base}
    extra: dict[str, list[str]] = {}
    for op in ops:
        if op[0] == "paper":
            recs[op[1].id] = op[1]
        else:
            extra.setdefault(op[1], []).append(op[2])
    out = []
    for pid, r in recs.items():
        refs = tuple(r.references) + tuple(extra.get(pid, ()))
        out.append(PaperRecord(r.id, r.authors, refs, r.bibliography_length, r.year, r.subject))
    return out
