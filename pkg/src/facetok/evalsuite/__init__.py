from .metrics import (
    clip_features,
    export_embeddings,
    frechet_distance,
    keyword_correctness,
    l2_metric,
    silhouette,
)
from .retrieval import RetrievalConfig, RetrievalModel, retrieve, train_retrieval

__all__ = [
    "clip_features",
    "export_embeddings",
    "frechet_distance",
    "keyword_correctness",
    "l2_metric",
    "silhouette",
    "RetrievalConfig",
    "RetrievalModel",
    "retrieve",
    "train_retrieval",
]
