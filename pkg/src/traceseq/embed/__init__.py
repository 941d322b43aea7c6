from .projection import pca, project_2d, tsne
from .sgns import EmbeddingSpace, SgnsConfig, cosine, load_text, sgns_grad, sgns_loss, train
from .tokens import event_token, sequence_tokens, synthetic_word
from .trajectory import TrajectorySummary, radius_of_gyration, token_entropy, trajectory_metrics

__all__ = [
    "EmbeddingSpace", "SgnsConfig", "TrajectorySummary", "cosine", "event_token", "load_text", "pca",
    "project_2d", "radius_of_gyration", "sequence_tokens", "sgns_grad", "sgns_loss", "synthetic_word",
    "token_entropy", "train", "trajectory_metrics", "tsne",
]
