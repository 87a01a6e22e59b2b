"""Feature selection by community-detection guided genetic search."""

from .community import Partition, detect_communities, modularity
from .dataset import Dataset, SplitDataset, impute_missing, load_csv, softmax_scale, split
from .errors import CdgafsError, ParseError, ValidationError
from .feature_graph import FeatureGraph, build_graph, pearson_similarity
from .ga import GaConfig, RunReport, run_cdgafs
from .knn import SubsetView, classification_accuracy, knn_predict
from .relevance import fisher_scores, filter_irrelevant, normalize_scores, subset_count

__version__ = "0.1.0"

__all__ = [
    "CdgafsError", "Dataset", "FeatureGraph", "GaConfig", "ParseError", "Partition",
    "RunReport", "SplitDataset", "SubsetView", "ValidationError", "build_graph",
    "classification_accuracy", "detect_communities", "filter_irrelevant", "fisher_scores",
    "impute_missing", "knn_predict", "load_csv", "modularity", "normalize_scores",
    "pearson_similarity", "run_cdgafs", "softmax_scale", "split", "subset_count",
]
