"""Demographic prediction from browsing histories.

Pipeline: extract site text by HTML tag mask, weight terms with one of
twelve tf-idf variants, compose tf-idf-weighted sums of word embeddings
into site vectors, aggregate them per user (weighted / log / simple
average), and classify with linear max-margin models.
"""

from .aggregation import (
    METHODS,
    AggregationError,
    BrowsingMatrix,
    UserVector,
    aggregate,
    aggregation_weights,
)
from .embeddings import (
    EmbeddingLoadError,
    EmbeddingMatrix,
    load_word2vec_binary,
    write_word2vec_binary,
)
from .html_extract import (
    DEFAULT_MASK,
    ExtractedDocument,
    FetchError,
    TagMask,
    all_tag_combinations,
    experiment_masks,
    extract,
    fetch,
    fetch_many,
    tokenize,
)
from .learn import (
    DEFAULT_C_GRID,
    ClassificationMetrics,
    Dataset,
    GridSearchResult,
    LearnError,
    LinearModel,
    RegressionMetrics,
    evaluate,
    grid_search_cv,
    kfold_indices,
    load_model,
    logistic_objective,
    predict,
    predict_batch,
    predict_proba,
    save_model,
    stratified_kfold_indices,
    train_logistic,
    train_model,
    train_svm,
    train_svr,
    train_test_split,
)
from .pipeline import (
    AGE_BANDS,
    ATTRIBUTES,
    GENDERS,
    ExperimentReport,
    FilterConfig,
    FilterResult,
    Labels,
    PipelineError,
    apply_filters,
    build_user_vectors,
    compute_site_vectors,
    extract_site_documents,
    load_browsing_log,
    load_tendency,
    load_token_docs,
    read_html_dir,
    run_demography_experiment,
    run_tag_experiment,
    save_token_docs,
)
from .representation import SiteVector, compose_site_vector, load_vectors, save_vectors
from .synth import SynthConfig, generate_corpora
from .weighting import (
    ALL_SCHEMES,
    CorpusStats,
    SiteDocument,
    WeightingError,
    WeightingScheme,
    build_corpus_stats,
    idf_weight,
    term_weights,
    tf_weight,
)

__version__ = "0.1.0"
