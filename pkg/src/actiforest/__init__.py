"""Isolation-forest anomaly detection with an active-learning loop that
rewrites leaf depths from expert labels instead of retraining."""

from ._kernels import HAVE_COMPILED, backend_name
from .active import (
    ANOMALY,
    NORMAL,
    AlreadyLabeled,
    BudgetExhausted,
    DepthMatrix,
    Session,
    leaf_color,
    supervised_depth_linear,
    supervised_depth_log,
)
from .data import Dataset, SplitSpec, load_csv, make_toroid, simulated_oracle, split
from .iforest import Forest, c_factor, fit, score_from_depth
from .metrics import average_precision, roc_auc

__version__ = "0.1.0"

__all__ = [
    "ANOMALY",
    "NORMAL",
    "AlreadyLabeled",
    "BudgetExhausted",
    "Dataset",
    "DepthMatrix",
    "Forest",
    "HAVE_COMPILED",
    "Session",
    "SplitSpec",
    "average_precision",
    "backend_name",
    "c_factor",
    "fit",
    "leaf_color",
    "load_csv",
    "make_toroid",
    "roc_auc",
    "score_from_depth",
    "simulated_oracle",
    "split",
    "supervised_depth_linear",
    "supervised_depth_log",
]
