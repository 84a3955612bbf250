"""Sybil detection from the targets and responses of friend requests."""

from ._sybiledge import (
    DEFAULT_PHI,
    DEFAULT_SIGMA,
    EdgeContribution,
    RateTable,
    RequestGraph,
    SybilEdgeError,
    TargetRates,
    UserScore,
    experiment,
    generate,
    product_form_posterior,
    reject_rate,
    roc_auc,
    run_method,
    score,
    train,
)

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_PHI",
    "DEFAULT_SIGMA",
    "EdgeContribution",
    "RateTable",
    "RequestGraph",
    "SybilEdgeError",
    "TargetRates",
    "UserScore",
    "experiment",
    "generate",
    "product_form_posterior",
    "reject_rate",
    "roc_auc",
    "run_method",
    "score",
    "train",
]
