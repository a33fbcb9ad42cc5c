__all__ = ["infer", "build_manifest", "make_schedule", "evaluate_pair"]

from .evaluation.metrics import evaluate_pair
from .model.raft import infer
from .pipeline.manifest import build_manifest
from .pipeline.schedule import make_schedule
