"""Time incremental updates against full recomputation and track drift.

    python scripts/incremental_vs_batch.py --papers 2000 --mode indb --seed 3
"""

import argparse
import random
import time
from dataclasses import dataclass

from paperrank import RefCountMode, build_graph
from paperrank.engine import apply_all, init_state, reconcile
from paperrank.synthetic import apply_ops_to_records, random_records, random_valid_order, update_scenario


@dataclass
class StreamConfig:
    papers: int = 2000
    seed: int = 3
    mode: RefCountMode = RefCountMode.BIBLIOGRAPHY
    checkpoints: int = 5


def run(cfg: StreamConfig) -> None:
    rng = random.Random(cfg.seed)
    final = random_records(rng, cfg.papers, max_refs=8)
    base, ops = update_scenario(rng, final)
    order = random_valid_order(ops, rng, [r.id for r in base])
    state = init_state(build_graph(base), cfg.mode)
    marks = {len(order) * (k + 1) // cfg.checkpoints for k in range(cfg.checkpoints)}
    print(f"{len(base)} bootstrap papers, {len(order)} updates, mode {cfg.mode.value}")
    print(f"{'applied':>8} {'us/update':>10} {'batch ms':>9} {'max drift':>10} {'cons. gap':>10}")
    spent, done = 0.0, 0
    for k, op in enumerate(order, start=1):
        t0 = time.perf_counter()
        apply_all(state, [op])
        spent += time.perf_counter() - t0
        done += 1
        if k in marks:
            t0 = time.perf_counter()
            graph = build_graph(apply_ops_to_records(base, order[:k]))
            batch = init_state(graph, cfg.mode)
            batch_ms = (time.perf_counter() - t0) * 1e3
            drift = max(max(abs(state.paper_ranks[p] - v) for p, v in batch.paper_ranks.items()),
                        reconcile(state, graph).max_drift)
            print(f"{k:>8} {spent / done * 1e6:>10.1f} {batch_ms:>9.1f} {drift:>10.1e} "
                  f"{state.conservation_gap():>10.1e}")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--papers", type=int, default=StreamConfig.papers)
    ap.add_argument("--seed", type=int, default=StreamConfig.seed)
    ap.add_argument("--mode", type=RefCountMode.parse, default=StreamConfig.mode)
    args = ap.parse_args()
    run(StreamConfig(args.papers, args.seed, args.mode))


if __name__ == "__main__":
    main()
