"""strokekit: feature engineering and classical classification for
CT brain-stroke feature pipelines.

The package covers the pipeline downstream of CNN feature extraction:
loading feature CSVs, PCA/LDA/BFO feature engineering, seven classifiers
behind one fit/predict/score surface, the accuracy/precision/recall/F1 +
ROC metric suite, stratified k-fold evaluation, and a benchmark/reporting
CLI. Everything is deterministic under a declared seed.
"""

from .chain import Chain, fit_chain
from .config import EvaluationSpec, OptimizerSpec, PipelineConfig
from .data import (
    FeatureMatrix,
    FoldPlan,
    LabelVector,
    Scaler,
    SplitAssignment,
    load_features,
    save_features,
    standardize_apply,
    standardize_fit,
    stratified_kfold,
    stratified_split,
)
from .evaluate import (
    BenchReport,
    ConfusionMatrix,
    CvResult,
    MetricsReport,
    RocCurve,
    benchmark,
    confusion,
    cross_validate,
    learning_curve,
    metrics,
    micro_recall,
    roc,
)
from .learn import LearnerSpec, TrainedClassifier, fit, predict, predict_scores
from .pipeline import (
    ExperimentGrid,
    RunRecord,
    emit_report,
    load_bundle,
    run,
    run_and_bundle,
    run_grid,
    save_bundle,
)
from .reduce import (
    BfoConfig,
    FeatureMask,
    LdaModel,
    PcaModel,
    bfo_minimize,
    bfo_select,
    lda_fit,
    lda_transform,
    pca_fit,
    pca_transform,
    wrapper_fitness,
)

__version__ = "0.1.0"
