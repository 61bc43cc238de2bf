"""titleqa: question answering that retrieves document titles as answers.

The pipeline indexes a corpus dump into title/content/passage fields,
queries two local ranking backends (tf-idf vector space and Dirichlet
query likelihood) plus an offline web-engine mock, turns retrieved
titles into candidate answers, scores supporting passages with n-gram
and phrase overlap, and ranks candidates with a trained confidence
model. Evaluation reports recall at rank 1 / top 3 / full candidate set
and mean reciprocal rank.
"""

__version__ = "0.1.0"

from .analysis import STOPWORDS, analyze, extract_ngrams, token_set_match
from .config import RunConfig, load_config_file
from .corpus import (
    CorpusStore,
    Document,
    PageViewStats,
    attach_popularity,
    ingest_corpus,
    load_pageviews,
    popularity_score,
)
from .evaluation import EvalReport, compute_metrics, mark_correct, run_eval
from .pipeline import (
    CandidateAnswer,
    Question,
    answer_question,
    classify_question,
    extract_fitb_answer,
    generate_candidates,
    merge_candidates,
)
from .ranker import (
    FeatureMatrix,
    LogisticModel,
    NaiveBayesModel,
    TrainingConfig,
    load_model,
    predict_confidence,
    rank_candidates,
    save_model,
    train_logistic,
    train_model,
    train_naive_bayes,
)
from .scoring import (
    ScoreVector,
    aggregate_evidence,
    assemble_feature_vector,
    common_phrase_score,
    engine_rank_scores,
    feature_layout,
    ngram_overlap_scores,
)
from .search import (
    EngineConfig,
    InvertedIndex,
    Query,
    QueryClause,
    SearchResult,
    WebMockFixture,
    build_index,
    fuse_results,
    search_qlm,
    search_vsm,
    search_webmock,
)

__all__ = [
    "STOPWORDS", "analyze", "extract_ngrams", "token_set_match",
    "RunConfig", "load_config_file",
    "CorpusStore", "Document", "PageViewStats", "attach_popularity",
    "ingest_corpus", "load_pageviews", "popularity_score",
    "EvalReport", "compute_metrics", "mark_correct", "run_eval",
    "CandidateAnswer", "Question", "answer_question", "classify_question",
    "extract_fitb_answer", "generate_candidates", "merge_candidates",
    "FeatureMatrix", "LogisticModel", "NaiveBayesModel", "TrainingConfig",
    "load_model", "predict_confidence", "rank_candidates", "save_model",
    "train_logistic", "train_model", "train_naive_bayes",
    "ScoreVector", "aggregate_evidence", "assemble_feature_vector",
    "common_phrase_score", "engine_rank_scores", "feature_layout",
    "ngram_overlap_scores",
    "EngineConfig", "InvertedIndex", "Query", "QueryClause", "SearchResult",
    "WebMockFixture", "build_index", "fuse_results", "search_qlm",
    "search_vsm", "search_webmock",
]
