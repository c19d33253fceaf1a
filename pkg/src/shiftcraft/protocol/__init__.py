"""Test-time ensembling, evaluation, TCV, grids, selection and correlation analysis."""

from .ensemble import PROB_FLOOR, ensemble_predict
from .evaluate import SHAPE_INPUTS, TEST_KINDS, OraclePolicyError, PreparedSet, TestVariant, accuracy_from_probs, evaluate, predict, prepare
from .grids import grid_lambda, grid_lr, grid_w
from .select import VAL_KINDS, ExperimentRecord, SelectionReport, correlation, select
from .stats import UndefinedCorrelationError, average_ranks, spearman
from .tcv import ProtocolError, TcvFold, TcvResult, check_no_leakage, tcv_fold_models, tcv_split, tcv_validate

__all__ = [
    "PROB_FLOOR",
    "SHAPE_INPUTS",
    "TEST_KINDS",
    "VAL_KINDS",
    "ExperimentRecord",
    "OraclePolicyError",
    "PreparedSet",
    "ProtocolError",
    "SelectionReport",
    "TcvFold",
    "TcvResult",
    "TestVariant",
    "UndefinedCorrelationError",
    "accuracy_from_probs",
    "average_ranks",
    "check_no_leakage",
    "correlation",
    "ensemble_predict",
    "evaluate",
    "grid_lambda",
    "grid_lr",
    "grid_w",
    "predict",
    "prepare",
    "select",
    "spearman",
    "tcv_fold_models",
    "tcv_split",
    "tcv_validate",
]
