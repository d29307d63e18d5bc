"""PaperRank and AuthorRank: additive, cheaply updatable citation indices."""

from .engine import (
    DriftReport, RankDelta, RankState, apply_citation, apply_new_paper, init_state, load_state, reconcile,
    save_state,
)
from .errors import (
    DataInconsistencyError, GraphError, IntegrityError, NotFoundError, PaperRankError, StateError,
    StateFormatError,
)
from .graph import CitationGraph, PaperRecord, RefCountMode, ValidationReport, build_graph, ref_count, validate
from .oracle import RankVector, StochasticMatrix, build_matrix, power_method, power_step, verify_first_step
from .ranks import (
    AuthorProfile, TimeWindow, WeightingStrategy, aggregate_group, author_profiles, authorrank,
    citation_count, h_alpha, h_index, i_beta, i_n_index, paperrank, paperrank_all, rho, sum_citations,
)

__version__ = "0.1.0"
