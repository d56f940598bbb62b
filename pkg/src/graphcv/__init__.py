"""Bandlimited graph signal reconstruction with conditioning-aware cross-validation."""

from graphcv.errors import (
    DecompositionError,
    GraphCVError,
    IngestError,
    InfeasibleError,
    NumericalError,
)
from graphcv.graph import Graph, SpectralBasis, laplacian, spectral_decompose, submatrix
from graphcv.builders import GeoPoint, KnnGraphConfig, geo_distance, knn_graph, random_regular
from graphcv.signals import BandlimitedSpec, GraphSignal, gft, igft, spectral_split, synth_bandlimited
from graphcv.sampling import FoldPlan, make_folds, select_known_set
from graphcv.reconstruct import ReconstructionResult, error_operator, reconstruct_ls
from graphcv.crossval import (
    FoldError,
    SweepResult,
    estimate_error,
    fold_error_naive,
    fold_error_weighted,
    sweep,
)

__version__ = "0.1.0"

__all__ = [
    "BandlimitedSpec",
    "DecompositionError",
    "FoldError",
    "FoldPlan",
    "GeoPoint",
    "Graph",
    "GraphCVError",
    "GraphSignal",
    "IngestError",
    "InfeasibleError",
    "KnnGraphConfig",
    "NumericalError",
    "ReconstructionResult",
    "SpectralBasis",
    "SweepResult",
    "error_operator",
    "estimate_error",
    "fold_error_naive",
    "fold_error_weighted",
    "geo_distance",
    "gft",
    "igft",
    "knn_graph",
    "laplacian",
    "make_folds",
    "random_regular",
    "reconstruct_ls",
    "select_known_set",
    "spectral_decompose",
    "spectral_split",
    "submatrix",
    "sweep",
    "synth_bandlimited",
]
