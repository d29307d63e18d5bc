"""Acceptance gate.

Each criterion is a ``check_*`` function returning ``(ok, detail)``. Under
pytest every check prints one PASS/FAIL line (collected again in the terminal
summary); run this file directly to get the same lines without pytest.
"""

import contextlib
import io
import json
import math
import random
import shutil
import sys
import tempfile
import time
from pathlib import Path

import pytest

from paperrank.cli import main as cli_main
from paperrank.engine import apply_all, apply_citation, apply_new_paper, dumps_state, init_state, reconcile
from paperrank.graph import PaperRecord, RefCountMode, build_graph
from paperrank.ingest import ApiClient, ApiEndpointSet, FixtureBackend, dumps_snapshot, sync_author
from paperrank.oracle import build_matrix, fixed_point_residual, ones, power_method, power_step
from paperrank.ranks import (
    AuthorProfile, author_profiles, authorrank, h_alpha, h_index, i_beta, i_n_index, paperrank_all,
)
from paperrank.synthetic import apply_ops_to_records, random_records, random_valid_order, update_scenario

BIB, INDB = RefCountMode.BIBLIOGRAPHY, RefCountMode.IN_DATABASE
FIXTURES = Path(__file__).parent / "fixtures"
RESULTS: list[str] = []


def record(name, ok, detail, elapsed=None, limit=None):
    if limit is not None and elapsed > limit:
        ok = False
        detail += f"; runtime {elapsed:.2f}s over {limit:g}s"
    timing = f" [{elapsed:.2f}s]" if elapsed is not None else ""
    line = f"{'PASS' if ok else 'FAIL'}  {name}: {detail}{timing}"
    RESULTS.append(line)
    print(line)
    return ok


# -- 1 ------------------------------------------------------------------------

def check_worked_example():
    t0 = time.perf_counter()
    # P has two authors and PaperRank 2; A also owns Q so that AuthorRank(A) = 1 + 9 = 10
    recs = [PaperRecord("P", ("A", "B")), PaperRecord("Q", ("A",))]
    recs += [PaperRecord(f"c{k}", ("Z",), ("P",), 1) for k in range(2)]
    recs += [PaperRecord(f"d{k}", ("Z",), ("Q",), 1) for k in range(9)]
    s = init_state(build_graph(recs), BIB)
    start = (s.paper_ranks["P"], s.author_ranks["A"])
    apply_citation(s, ("new", 5), "P")
    pr, ar = s.paper_ranks["P"], s.author_ranks["A"]
    ok = start == (2, 10) and abs(pr - 2.2) <= 1e-15 and abs(ar - 10.1) <= 1e-15
    return record("1 worked example", ok, f"PaperRank {start[0]} -> {pr!r}, AuthorRank {start[1]} -> {ar!r}",
                  time.perf_counter() - t0, 1.0)


# -- 2 ------------------------------------------------------------------------

def check_conservation():
    t0 = time.perf_counter()
    rng = random.Random(2)
    worst = 0.0
    for _ in range(100):
        g = build_graph(random_records(rng, rng.randint(1, 500)))
        profs = author_profiles(g).values()
        for mode in (BIB, INDB):
            total_pr = math.fsum(paperrank_all(g, mode).values())
            total_ar = math.fsum(authorrank(g, p, mode) for p in profs)
            worst = max(worst, abs(total_pr - total_ar) / max(total_pr, 1.0))
    return record("2 conservation", worst <= 1e-9, f"100 graphs x 2 modes, worst relative gap {worst:.2e}",
                  time.perf_counter() - t0, 10.0)


# -- 3 ------------------------------------------------------------------------

def check_unit_mass():
    rng = random.Random(3)
    base = random_records(rng, 200)
    s = init_state(build_graph(base), INDB)
    ids = [r.id for r in base]
    worst = 0.0
    for k in range(100):
        refs = tuple(rng.sample(ids, rng.randint(1, 12)))
        rec = PaperRecord(f"new-{k}", (f"{8000000000 + k % 7}",), refs, len(refs) + rng.randint(0, 20))
        before = s.paper_sum
        d = apply_new_paper(s, rec)
        worst = max(worst, abs(s.paper_sum - before - 1), abs(d.paper_total - 1))
        ids.append(rec.id)
    return record("3 unit mass", worst <= 1e-12, f"100 insertions, worst |delta - 1| {worst:.2e}")


# -- 4 ------------------------------------------------------------------------

def first_step_deviation(graph):
    m = build_matrix(graph)
    step = power_step(m, ones(m)).values
    pr = paperrank_all(graph, INDB)
    return max((abs(step[i] - pr[pid]) for i, pid in enumerate(m.ids)), default=0.0), len(m.dangling)


def check_first_step():
    from conftest import cycle_records, g4_records
    rng = random.Random(4)
    graphs = [build_graph([]), build_graph(g4_records()), build_graph(cycle_records(5))]
    graphs += [build_graph(random_records(rng, rng.randint(1, 300))) for _ in range(60)]
    worst, with_dangling = 0.0, 0
    for g in graphs:
        dev, dangling = first_step_deviation(g)
        worst = max(worst, dev)
        with_dangling += dangling > 0
    return record("4 first-step identity", worst <= 1e-12,
                  f"{len(graphs)} graphs ({with_dangling} with dangling papers), worst deviation {worst:.2e}")


# -- 5 ------------------------------------------------------------------------

def check_incremental():
    rng = random.Random(5)
    final = random_records(rng, 400, max_refs=8)
    base, ops = update_scenario(rng, final, new_fraction=0.25, drop_fraction=0.3)
    base_ids = [r.id for r in base]
    # any prefix of a valid order is closed under its own dependencies
    delta = random_valid_order(ops, rng, base_ids)[:500]
    target = build_graph(apply_ops_to_records(base, delta))
    worst, gaps = 0.0, 0.0
    for mode in (BIB, INDB):
        for _ in range(10):
            s = init_state(build_graph(base), mode)
            for op in random_valid_order(delta, rng, base_ids):
                apply_all(s, [op])
            gaps = max(gaps, s.conservation_gap())
            rep = reconcile(s, target)
            worst = max(worst, rep.max_drift if not (rep.missing_papers or rep.extra_papers) else math.inf)
    ok = len(delta) == 500 and worst <= 1e-9 and gaps <= 1e-9
    return record("5 incremental = batch", ok,
                  f"{len(delta)} updates x 10 orderings x 2 modes, worst drift {worst:.2e}, "
                  f"worst conservation gap {gaps:.1e}")


# -- 6 ------------------------------------------------------------------------

def check_eigen_oracle():
    t0 = time.perf_counter()
    rng = random.Random(6)
    worst_res, worst_col, unconverged = 0.0, 0.0, 0
    for _ in range(25):
        n = rng.randint(2, 200)
        m = build_matrix(build_graph(random_records(rng, n, strongly_connected=True)))
        assert not m.dangling
        sums = m.column_sums()
        worst_col = max(worst_col, max(abs(c - 1.0) for c in sums))
        v = power_method(m, 1e-12, 200_000)
        unconverged += not v.converged
        worst_res = max(worst_res, fixed_point_residual(m, v))
    ok = worst_res < 1e-10 and worst_col <= 1e-15 and unconverged == 0
    return record("6 eigen-oracle", ok, f"25 strongly connected graphs, worst |Sv - v| {worst_res:.2e}, "
                  f"worst column-sum error {worst_col:.1e}, unconverged {unconverged}",
                  time.perf_counter() - t0, 30.0)


# -- 7 ------------------------------------------------------------------------
# brute-force versions work from raw records, never from the library's counts

def brute_counts_and_shares(records, author):
    own = [r for r in records if author in r.authors]
    counts, shares = [], []
    for r in own:
        citers = [c for c in records if r.id in c.references]
        counts.append(len(citers))
        shares.append(sum(1 / c.bibliography_length for c in citers) / len(r.authors))
    return counts, shares


def brute_h(counts):
    h = 0
    for k in range(1, len(counts) + 1):
        if len([c for c in counts if c >= k]) >= k:
            h = k
    return h


def brute_i_n(counts, n):
    return len([c for c in counts if c > n])


def brute_h_alpha(shares, alpha):
    ranked = sorted(shares, reverse=True)
    best = 0
    for p, s in enumerate(ranked, start=1):
        if s >= alpha * p:
            best = p
    return best


def brute_i_beta(shares, beta):
    return len([s for s in shares if s >= beta])


def random_profile(rng):
    k = rng.randint(0, 100)
    own = [PaperRecord(f"o{j}", ("A",) + (("B",) if rng.random() < 0.3 else ())) for j in range(k)]
    citers = []
    for j in range(rng.randint(0, 40)):
        refs = tuple(rng.sample([r.id for r in own], min(k, rng.randint(0, 12))))
        citers.append(PaperRecord(f"c{j}", ("Z",), refs, len(refs) + rng.randint(0, 6) if refs else 1))
    return own + citers


def check_classical_indices():
    rng = random.Random(7)
    mismatches = 0
    for _ in range(1000):
        records = random_profile(rng)
        g = build_graph(records)
        prof = AuthorProfile("A", tuple(r.id for r in records if "A" in r.authors))
        counts, shares = brute_counts_and_shares(records, "A")
        alpha, beta, n = rng.choice([0.01, 0.05, 0.2]), rng.choice([0.05, 0.1, 0.5]), rng.choice([1, 2, 3, 20])
        got = (h_index(g, prof), i_n_index(g, prof, n), h_alpha(g, prof, alpha), i_beta(g, prof, beta))
        want = (brute_h(counts), brute_i_n(counts, n), brute_h_alpha(shares, alpha), brute_i_beta(shares, beta))
        mismatches += got != want
    return record("7 classical indices", mismatches == 0, f"1000 profiles, {mismatches} mismatches")


# -- 8 ------------------------------------------------------------------------

def check_query_budget():
    """Author lookup plus citation pages; per-paper record lookups are counted apart."""
    failures, cases = [], 0
    for name in ("api_v1", "api_v2", "api_v3"):
        data = json.loads((FIXTURES / f"{name}.json").read_text())
        for author, papers in data["authors"].items():
            for ps in range(1, 9):
                cl = ApiClient(ApiEndpointSet("fixture://inline", data["api_key"], ps, 0), FixtureBackend(data),
                               sleep=lambda s: None)
                sync_author(cl, init_state(build_graph([])), author)
                cits = [len(data["citations"].get(p, [])) for p in papers]
                # an uncited paper still costs the one request that reports it empty
                expected = 1 + sum(max(1, math.ceil(c / ps)) for c in cits)
                got = cl.budget.author_lookups + cl.budget.citation_pages
                cases += 1
                if got != expected or cl.budget.paper_lookups != len(papers) or cl.budget.retries:
                    failures.append(f"{name}/{author}/ps={ps}: {got} != {expected}")
    return record("8 query budget", not failures, f"{cases} author/page-size cases" +
                  (f", failures {failures[:3]}" if failures else ", all exact"))


# -- 9 ------------------------------------------------------------------------

def run_cli(argv):
    out = io.StringIO()
    with contextlib.redirect_stdout(out):
        code = cli_main([str(a) for a in argv])
    return code, out.getvalue()


def check_determinism():
    rng = random.Random(9)
    recs = random_records(rng, 300, subjects=("Math", "Medic", "Phys", "Comp"))
    with tempfile.TemporaryDirectory() as tmp:
        paths = []
        for k in range(3):
            shuffled = recs[:]
            rng.shuffle(shuffled)
            p = Path(tmp) / f"snap{k}.jsonl"
            p.write_text(dumps_snapshot(shuffled))
            paths.append(p)
        commands = []
        for fmt in ("table", "csv", "json"):
            for mode in ("bibliography", "indb"):
                commands.append(["rank", "--format", fmt, "--mode", mode])
                commands.append(["rank", "--format", fmt, "--mode", mode, "--window", "2000:2015"])
                commands.append(["scatter", "--format", fmt, "--mode", mode, "--x", "sum_cit", "--y", "authorrank"])
                commands.append(["scatter", "--format", fmt, "--mode", mode, "--x", "sum_pr", "--y", "authorrank"])
        differing = []
        for cmd in commands:
            outputs = {run_cli([cmd[0], p, *cmd[1:]]) for p in paths for _ in range(2)}
            if len(outputs) != 1 or next(iter(outputs))[0] != 0:
                differing.append(" ".join(cmd))
    return record("9 determinism", not differing,
                  f"{len(commands)} commands x 3 record orders x 2 runs" +
                  (f", differing: {differing}" if differing else ", byte-identical"))


# -- 10 -----------------------------------------------------------------------

def check_sync_idempotence():
    failures = []
    for mode in (BIB, INDB):
        state = init_state(build_graph([]), mode)
        for name in ("api_v1", "api_v2", "api_v3"):
            data = json.loads((FIXTURES / f"{name}.json").read_text())
            for author in sorted(data["authors"]):
                ep = ApiEndpointSet("fixture://inline", data["api_key"], 3, 0)
                sync_author(ApiClient(ep, FixtureBackend(data)), state, author)
                first = dumps_state(state)
                again = sync_author(ApiClient(ep, FixtureBackend(data)), state, author)
                if not again.is_zero or again.paper_deltas or dumps_state(state) != first:
                    failures.append(f"{mode.value}/{name}/{author}")
    # and through the state file on disk
    with tempfile.TemporaryDirectory() as tmp:
        shutil.copy(FIXTURES / "api_v2.json", Path(tmp) / "api.json")
        cfg = Path(tmp) / "config.json"
        cfg.write_text(json.dumps({"base_url": "fixture://api.json", "api_key": "test-key", "page_size": 3}))
        state_path = Path(tmp) / "state.jsonl"
        state_path.write_text(dumps_state(init_state(build_graph([]))))
        run_cli(["sync", "--state", state_path, "--config", cfg, "7202686127"])
        first = state_path.read_bytes()
        _, out = run_cli(["sync", "--state", state_path, "--config", cfg, "7202686127"])
        if state_path.read_bytes() != first or "paper delta 0.0" not in out:
            failures.append("cli state file")
    return record("10 sync idempotence", not failures,
                  "zero delta and identical state bytes" + (f", failures {failures}" if failures else ""))


CHECKS = [
    check_worked_example, check_conservation, check_unit_mass, check_first_step, check_incremental,
    check_eigen_oracle, check_classical_indices, check_query_budget, check_determinism, check_sync_idempotence,
]


@pytest.mark.parametrize("check", CHECKS, ids=[f"criterion_{k}" for k in range(1, 11)])
def test_acceptance(check):
    assert check()


if __name__ == "__main__":
    sys.path.insert(0, str(Path(__file__).parent))
    passed = sum(bool(c()) for c in CHECKS)
    print(f"{passed}/{len(CHECKS)} criteria passed")
    sys.exit(0 if passed == len(CHECKS) else 1)
