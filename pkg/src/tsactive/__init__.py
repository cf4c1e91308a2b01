"""Active semi-supervised clustering of time series.

An iterative super-instance refinement engine answers "should these two
series be in the same cluster?" queries against an oracle (ground-truth
labels, a recorded log, or a human behind the HTTP service) and assembles a
clustering under a fixed query budget.  Two refiners are available:
spectral clustering over a banded-DTW affinity matrix, and k-Shape over the
shape-based distance.
"""

from .constraints import (BudgetExhausted, Constraint, ConstraintStore,
                          InconsistentConstraintError, Origin, Relation)
from .data import CbfParams, Dataset, UcrParseError, generate_cbf, load_ucr, save_ucr, z_normalize
from .dtw import (AffinityMatrix, DistanceMatrix, WarpingWindow, cdtw,
                  distance_matrix, to_affinity)
from .engine import (Clustering, Engine, EngineConfig, EngineSessionError,
                     RefinerKind, RunResult, SuperInstance, medoid_of, run)
from .evaluation import EvalResult, FoldSplit, ari, evaluate, kshape_baseline, sweep
from .oracle import (LabelOracle, MailboxOracle, QueryRecord, ReplayOracle,
                     SessionAborted, replay_from_log)
from .shape import (DegenerateSeriesError, KShapeResult, extract_centroid,
                    kshape, ncc_max, sbd, sbd_representative)
from .spectral import SpectralParams, spectral_cluster

__version__ = "0.1.0"

__all__ = [
    "AffinityMatrix", "BudgetExhausted", "CbfParams", "Clustering", "Constraint",
    "ConstraintStore", "Dataset", "DegenerateSeriesError", "DistanceMatrix",
    "Engine", "EngineConfig", "EngineSessionError", "EvalResult", "FoldSplit",
    "InconsistentConstraintError", "KShapeResult", "LabelOracle", "MailboxOracle",
    "Origin", "QueryRecord", "RefinerKind", "Relation", "ReplayOracle", "RunResult",
    "SessionAborted", "SpectralParams", "SuperInstance", "UcrParseError",
    "WarpingWindow", "ari", "cdtw", "distance_matrix", "evaluate",
    "extract_centroid", "generate_cbf", "kshape", "kshape_baseline", "load_ucr",
    "medoid_of", "ncc_max", "replay_from_log", "run", "save_ucr", "sbd",
    "sbd_representative", "spectral_cluster", "sweep", "to_affinity", "z_normalize",
]
