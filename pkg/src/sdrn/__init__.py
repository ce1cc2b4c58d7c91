"""Online incremental clustering with scale-free hyperbox resonance networks."""
from .core import (
    SDRN,
    ChannelSpec,
    GlobalBound,
    Hyperbox,
    Hyperparams,
    InputError,
    distance_to_box,
    learn_template,
)
from .baselines import DRNLike, KMeansModel, kmeans_assign, kmeans_fit
from .metrics import combined_score, dbi, nmi, purity

__version__ = "0.1.0"

__all__ = [
    "SDRN",
    "DRNLike",
    "ChannelSpec",
    "GlobalBound",
    "Hyperbox",
    "Hyperparams",
    "InputError",
    "KMeansModel",
    "combined_score",
    "dbi",
    "distance_to_box",
    "kmeans_assign",
    "kmeans_fit",
    "learn_template",
    "nmi",
    "purity",
]
