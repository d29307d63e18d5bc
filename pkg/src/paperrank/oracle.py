"""Full eigenvector model used to cross-check PaperRank.

``S = L F^-1`` is column-stochastic on every column with at least one
in-database reference; columns of papers without references stay zero (no
damping, no teleportation). PaperRank in IN_DATABASE mode is exactly
``S @ e``, one power step from the all-ones vector.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .graph import CitationGraph, PaperId, RefCountMode
from .ranks import paperrank_all

FIRST_STEP_TOLERANCE = 1e-12


@dataclass(frozen=True)
class StochasticMatrix:
    ids: tuple[PaperId, ...]
    matrix: sp.csc_array
    dangling: frozenset[int] = field(default_factory=frozenset)

    @property
    def dimension(self) -> int:
        return len(self.ids)

    def column(self, j: int) -> list[tuple[int, float]]:
        lo, hi = self.matrix.indptr[j], self.matrix.indptr[j + 1]
        return list(zip(self.matrix.indices[lo:hi].tolist(), self.matrix.data[lo:hi].tolist()))

    def column_sums(self) -> np.ndarray:
        # fsum: exact rounding, so f copies of 1/f sum to 1 within one ulp
        return np.array([math.fsum(w for _, w in self.column(j)) for j in range(self.dimension)])

    def index(self, pid: PaperId) -> int:
        return self.ids.index(pid)


@dataclass(frozen=True)
class RankVector:
    values: np.ndarray
    iteration_count: int = 0
    residual: float = 0.0
    converged: bool = True

    def __len__(self) -> int:
        return len(self.values)

    def as_dict(self, ids) -> dict[PaperId, float]:
        return dict(zip(ids, self.values.tolist()))


def build_matrix(graph: CitationGraph) -> StochasticMatrix:
    ids = tuple(graph.ids)
    pos = {pid: k for k, pid in enumerate(ids)}
    rows, cols, data = [], [], []
    dangling = set()
    for j, pid in enumerate(ids):
        refs = graph.papers[pid].references
        if not refs:
            dangling.add(j)
            continue
        w = 1.0 / len(refs)
        for target in refs:
            rows.append(pos[target])
            cols.append(j)
            data.append(w)
    n = len(ids)
    mat = sp.csc_array((np.array(data, dtype=float), (np.array(rows, dtype=np.int64), np.array(cols, dtype=np.int64))),
                       shape=(n, n))
    mat.sort_indices()
    return StochasticMatrix(ids, mat, frozenset(dangling))


def ones(matrix: StochasticMatrix) -> RankVector:
    return RankVector(np.ones(matrix.dimension))


def power_step(matrix: StochasticMatrix, v: RankVector | np.ndarray) -> RankVector:
    if isinstance(v, RankVector):
        values, count = v.values, v.iteration_count
    else:
        values, count = np.asarray(v, dtype=float), 0
    if values.shape != (matrix.dimension,):
        raise ValueError(f"vector of length {values.shape} does not match dimension {matrix.dimension}")
    out = matrix.matrix @ values
    residual = float(np.max(np.abs(out - values))) if len(values) else 0.0
    return RankVector(out, count + 1, residual)


def power_method(matrix: StochasticMatrix, tolerance: float = 1e-10, max_iterations: int = 10_000) -> RankVector:
    """Iterate ``v <- S v`` from ``e`` until the max-norm change drops below ``tolerance``.

    No normalisation between steps: a column-stochastic map preserves the
    1-norm. If ``max_iterations`` is exhausted the last iterate is returned
    with ``converged=False``.
    """
    if tolerance <= 0 or max_iterations < 1:
        raise ValueError("tolerance and max_iterations must be positive")
    v = ones(matrix)
    for _ in range(max_iterations):
        v = power_step(matrix, v)
        if v.residual < tolerance:
            return v
    return RankVector(v.values, v.iteration_count, v.residual, converged=False)


def fixed_point_residual(matrix: StochasticMatrix, v: RankVector) -> float:
    """max |S v - v|, the eigenvector certificate."""
    return power_step(matrix, v.values).residual


def verify_first_step(graph: CitationGraph, tolerance: float = FIRST_STEP_TOLERANCE) -> tuple[bool, float]:
    """Check PaperRank (IN_DATABASE) against ``S @ e``; returns (ok, max deviation)."""
    if graph.paper_count == 0:
        return True, 0.0
    matrix = build_matrix(graph)
    step = power_step(matrix, ones(matrix)).values
    ranks = paperrank_all(graph, RefCountMode.IN_DATABASE)
    direct = np.array([ranks[pid] for pid in matrix.ids])
    deviation = float(np.max(np.abs(direct - step)))
    return deviation <= tolerance, deviation


def is_strongly_connected(matrix: StochasticMatrix) -> bool:
    if matrix.dimension == 0:
        return True
    n_comp, _ = connected_components(matrix.matrix, directed=True, connection="strong")
    return n_comp == 1
