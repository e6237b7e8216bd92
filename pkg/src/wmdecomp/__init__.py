"""Word mover's distance between document sets, decomposed into word and cluster contributions."""

from .analysis import (
    ComparisonConfig,
    ComparisonReport,
    CostChangeRecord,
    assimilation_filter,
    build_sets,
    compare_sets,
    cost_change,
    welch_t_test,
)
from .clustering import ClusterModel, elbow_scan, kmeans, reduce, silhouette
from .corpus import (
    DocumentSet,
    DocumentVector,
    TokenizedDocument,
    Vocabulary,
    build_vocabulary,
    filter_and_sample,
    idf,
    vectorize,
)
from .decomposition import (
    ClusterDistanceTable,
    WordContributionTable,
    accumulate_word_costs,
    apply_difference,
    cluster_distance,
    format_top_words,
    top_words,
)
from .embeddings import CostMatrix, EmbeddingStore, load_embeddings
from .pairing import PairingResult, gale_shapley, random_pairs, verify_stable
from .transport import DistanceMatrix, TransportPlan, lc_rwmd_matrix, pair_costs, rwmd, solve_transport

__version__ = "0.1.0"
