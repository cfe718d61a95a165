"""Structure learning of Suppes-Bayes Causal Networks from binary data."""
__version__ = "0.1.0"

from sbcn.model import ArcMask, BinaryDataset, Dag, ScoreCache  # noqa: E402
from sbcn.scoring import ScoreSpec, score  # noqa: E402
from sbcn.search import SearchSpec, run_search  # noqa: E402
from sbcn.suppes import full_mask, prima_facie_mask  # noqa: E402

__all__ = [
    "ArcMask", "BinaryDataset", "Dag", "ScoreCache", "ScoreSpec", "SearchSpec",
    "full_mask", "prima_facie_mask", "run_search", "score",
]
