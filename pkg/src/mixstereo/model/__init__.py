__all__ = [
    "CorrelationPyramid",
    "ModelWeights",
    "PadRecord",
    "build_correlation_pyramid",
    "convex_upsample",
    "extract_features",
    "gru_update",
    "infer",
    "init_weights",
    "load_weights",
    "lookup",
    "pad_to_multiple",
    "save_weights",
]

from .correlation import CorrelationPyramid, build_correlation_pyramid, lookup
from .encoder import extract_features
from .raft import PadRecord, infer, pad_to_multiple
from .update import gru_update
from .upsample import convex_upsample
from .weights import ModelWeights, init_weights, load_weights, save_weights
