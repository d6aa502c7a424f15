"""botdetect: classify GitHub PR/issue comments as bot- or human-authored."""

__version__ = "0.1.0"

from botdetect.corpus import (
    BOT,
    HUMAN,
    Corpus,
    LabeledComment,
    SplitResult,
    generate_synthetic_corpus,
    group_train_test_split,
    load_corpus,
    stratified_group_kfold,
)
from botdetect.textprep import (
    SparseVector,
    TfIdfModel,
    Vocabulary,
    fit_tfidf,
    fit_vocabulary,
    tokenize,
    transform,
)
from botdetect.classifiers import (
    NBParams,
    Prediction,
    TrainedKNN,
    TrainedNB,
    TrainedSVM,
    TrainedZeroR,
    fit_knn,
    fit_nb,
    fit_svm,
    fit_zeror,
    load_model,
    predict,
    predict_knn,
    predict_nb,
    predict_proba_nb,
    predict_svm,
    predict_zeror,
    save_model,
)
from botdetect.evaluation import (
    ClassMetrics,
    ConfusionMatrix,
    EvaluationReport,
    GridSearchResult,
    ProbabilitySummary,
    confusion,
    cross_validate,
    evaluate,
    grid_search,
    metrics,
    summarize_probabilities,
)
