"""Perturbation-consistency active learning: scoring, selection, simulation."""

from .consistency import (DISPERSION_KINDS, DispersionFn, PredictionSet,
                          ScoreError, ScoreRecord, classification_score,
                          entropy_score, load_manifest, mean_prediction,
                          score_batch, score_set, segmentation_score)
from .errors import (FormatError, LayoutError, PcdalError, ShapeError,
                     TruncationError, UndefinedMetricError)
from .learners import (LearnerConfig, LogisticModel, gradient_check,
                       load_model, logistic_fit, logistic_predict_proba,
                       pixel_feature_stack, save_model, segmenter_fit,
                       segmenter_predict_proba)
from .metrics import (ConfusionCounts, SurfaceSet, accuracy, confusion, dice,
                      evaluate_pair, extract_surface, hd95, pixel_accuracy,
                      precision_macro)
from .perturb import (KINDS, Perturbation, PerturbationSet, apply, inverse,
                      parse_perturbation, realign)
from .pool import (STRATEGIES, PoolState, RoundRecord, advance_round,
                   budget_schedule, load_pool, new_pool, normalize_strategy,
                   pool_from_manifest, pool_to_manifest, save_pool, select,
                   stratified_kfold)
from .simulate import (SimulationConfig, SimulationReport,
                       bundled_classification_config,
                       bundled_segmentation_config, emit_report,
                       run_simulation)
from .synth import (ClassificationSpec, SegmentationSpec,
                    synth_classification, synth_segmentation)
from .tensor import (AxisRole, check_tensor, image_roles, prediction_roles,
                     read_tensor, softmax, write_tensor)

__version__ = "0.1.0"

__all__ = [
    "AxisRole", "ClassificationSpec", "ConfusionCounts", "DISPERSION_KINDS",
    "DispersionFn", "FormatError", "KINDS", "LayoutError", "LearnerConfig",
    "LogisticModel", "PcdalError", "Perturbation", "PerturbationSet",
    "PoolState", "PredictionSet", "RoundRecord", "STRATEGIES", "ScoreError",
    "ScoreRecord", "SegmentationSpec", "ShapeError", "SimulationConfig",
    "SimulationReport", "SurfaceSet", "TruncationError",
    "UndefinedMetricError", "accuracy", "advance_round", "apply",
    "budget_schedule", "bundled_classification_config",
    "bundled_segmentation_config", "check_tensor", "classification_score",
    "confusion",
    "dice", "emit_report", "entropy_score", "evaluate_pair",
    "extract_surface", "gradient_check", "hd95", "image_roles", "inverse",
    "load_manifest", "load_model", "load_pool", "logistic_fit",
    "logistic_predict_proba", "mean_prediction", "new_pool",
    "normalize_strategy", "parse_perturbation", "pixel_accuracy",
    "pixel_feature_stack", "pool_from_manifest", "pool_to_manifest",
    "precision_macro", "prediction_roles", "read_tensor", "realign",
    "run_simulation", "save_model", "save_pool", "score_batch", "score_set",
    "segmentation_score", "segmenter_fit", "segmenter_predict_proba",
    "select", "softmax", "stratified_kfold", "synth_classification",
    "synth_segmentation", "write_tensor",
]
