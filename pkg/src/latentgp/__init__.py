"""Latent Gaussian-process classification of computer-model inputs with two labels."""

from .baselines import fit_logistic, voronoi_field
from .config import RunConfig
from .dataset import ClassLabel, LabelledDataset, load_dataset, make_dataset
from .gp_core import Hyperparameters, MeanBasis
from .inference import McmcConfig, PriorSpec, TraceSet, run_chain
from .prediction import PredictionGrid, boundary_1d, classify_grid
from .validation import loo_misclassification

__all__ = [
    "ClassLabel", "Hyperparameters", "LabelledDataset", "McmcConfig", "MeanBasis",
    "PredictionGrid", "PriorSpec", "RunConfig", "TraceSet", "boundary_1d", "classify_grid",
    "fit_logistic", "load_dataset", "loo_misclassification", "make_dataset", "run_chain",
    "voronoi_field",
]
