"""Clustering multinomial count vectors and choosing the number of clusters.

The hot loops run in a compiled extension when it is built; see
:data:`mnclust._accel.BACKEND`.
"""
__version__ = "0.1.0"

from ._accel import BACKEND
from .core import (
    ClusterModel,
    CountMatrix,
    CriterionParams,
    Factorization,
    MnclustError,
    read_count_csv,
    validate_count_matrix,
    write_count_csv,
)
from .factorize import NmfParams, nmf, preliminary_estimate
from .metrics import adjusted_rand_index
from .mlqe import SearchParams, closed_form_prototypes, refine_labels
from .selection import SelectionReport, delta, penalty, sweep

__all__ = [
    "BACKEND",
    "ClusterModel",
    "CountMatrix",
    "CriterionParams",
    "Factorization",
    "MnclustError",
    "NmfParams",
    "SearchParams",
    "SelectionReport",
    "adjusted_rand_index",
    "closed_form_prototypes",
    "delta",
    "nmf",
    "penalty",
    "preliminary_estimate",
    "read_count_csv",
    "refine_labels",
    "sweep",
    "validate_count_matrix",
    "write_count_csv",
]
