"""seqnull: sequential martingale tests for the global null.

Subpackages/modules:
    boundaries  uniform crossing boundaries u_alpha(k) and their inverses
    masking     tent/railway/calibrator p-value decompositions
    engines     preordered, adaptive, interactive, and baseline test engines
    models      EM working model, structural priors, ordering policies
    anytime     anytime-valid p-values and e-values from trajectories
    scenarios   simulation scenario generators
    harness     Monte-Carlo power/detection estimation and figure CSVs
    service     HTTP session service for live interactive runs
"""

from .boundaries import BoundarySpec, Family, curve_constant, eval_boundary, invert_boundary
from .engines import (
    Combiner,
    Hypothesis,
    ImtSession,
    ScreeningRule,
    TestState,
    imt_session_new,
    run_amt_batch,
    run_amt_online,
    run_calibrator_test,
    run_preordered,
)
from .masking import MaskPair, MaskScheme, SchemeKind, mask, mask_statistic, unmask
from .anytime import AnytimeRecord, track_anytime

__version__ = "0.1.0"

__all__ = [
    "BoundarySpec",
    "Family",
    "curve_constant",
    "eval_boundary",
    "invert_boundary",
    "Combiner",
    "Hypothesis",
    "ImtSession",
    "ScreeningRule",
    "TestState",
    "imt_session_new",
    "run_amt_batch",
    "run_amt_online",
    "run_calibrator_test",
    "run_preordered",
    "MaskPair",
    "MaskScheme",
    "SchemeKind",
    "mask",
    "mask_statistic",
    "unmask",
    "AnytimeRecord",
    "track_anytime",
    "__version__",
]
