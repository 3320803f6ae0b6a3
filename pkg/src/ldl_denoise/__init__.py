"""Recover label distributions from instance- and label-dependent noise.

Library entry points: :func:`fit` trains the alternating solver on a
corrupted label distribution matrix, :func:`corrupt` generates one, and
:func:`evaluate_all` scores recoveries/predictions with the six standard
measures. The ``ldl-denoise`` CLI wraps corruption, training, evaluation,
benchmarking and report rendering.
"""

from .types import (
    Hyperparams,
    InstanceMatrix,
    LabelDistributionMatrix,
    Model,
    default_hyperparams,
    validate_distribution_matrix,
)
from .prox import l21_norm, l21_reweight_diag, nuclear_norm, project_simplex, svt
from .graph import SimilarityGraph, build_knn_similarity, empty_graph, induced_similarity
from .solver import FitReport, SolverState, fit, predict, recover_D, recovered_estimate
from .noise import NoiseConfig, NoiseDraw, corrupt, softmax
from .metrics import MetricReport, evaluate_all, metric
from .stats import (
    RankMatrix,
    TestResult,
    bonferroni_dunn_cd,
    friedman_statistic,
    rank_matrix,
    wilcoxon_signed_rank,
)
from .datasets import DatasetManifest, SplitSpec, load_dataset, read_manifest, split
from .model_io import load_model, save_model

__all__ = [
    "Hyperparams",
    "InstanceMatrix",
    "LabelDistributionMatrix",
    "Model",
    "default_hyperparams",
    "validate_distribution_matrix",
    "svt",
    "nuclear_norm",
    "l21_norm",
    "l21_reweight_diag",
    "project_simplex",
    "SimilarityGraph",
    "build_knn_similarity",
    "empty_graph",
    "induced_similarity",
    "fit",
    "predict",
    "recover_D",
    "recovered_estimate",
    "FitReport",
    "SolverState",
    "NoiseConfig",
    "NoiseDraw",
    "corrupt",
    "softmax",
    "MetricReport",
    "evaluate_all",
    "metric",
    "RankMatrix",
    "TestResult",
    "rank_matrix",
    "friedman_statistic",
    "bonferroni_dunn_cd",
    "wilcoxon_signed_rank",
    "DatasetManifest",
    "SplitSpec",
    "load_dataset",
    "read_manifest",
    "split",
    "save_model",
    "load_model",
]

__version__ = "0.1.0"
