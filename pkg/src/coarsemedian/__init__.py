"""Finite median algebras, median metrics and coarse median approximation."""

from ._kernels import BACKEND
from .median_core import (
    CoordinateMedianAlgebra,
    FiniteMedianAlgebra,
    InternalConsistencyError,
    MajorityAlgebra,
    MedianAlgebraError,
    ProductMedianAlgebra,
    SubAlgebra,
    TableMedianAlgebra,
    TreeMedianAlgebra,
    Wall,
    crossing,
    enumerate_walls,
    interval,
    median_closure,
    rank,
    verify_median_axioms,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "CoordinateMedianAlgebra",
    "FiniteMedianAlgebra",
    "InternalConsistencyError",
    "MajorityAlgebra",
    "MedianAlgebraError",
    "ProductMedianAlgebra",
    "SubAlgebra",
    "TableMedianAlgebra",
    "TreeMedianAlgebra",
    "Wall",
    "crossing",
    "enumerate_walls",
    "interval",
    "median_closure",
    "rank",
    "verify_median_axioms",
]
