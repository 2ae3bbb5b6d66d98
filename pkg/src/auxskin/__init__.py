"""Electroadhesive auxetic skin toolkit.

Rotating-squares unit cells whose stacked layers are clutched by
electroadhesion: single-cell force model, parameter fitting, spring-array
mechanics, row-column addressing with drive power and cost, and an inflatable
shape-display model.
"""

from .catalog import get_dielectric, load_catalog, reference_geometry
from .errors import AuxskinError, NumericalError, ParseError, ValidationError
from .types import AucGeometry, DielectricSpec, HysteresisTrace, ModelParams

__version__ = "0.1.0"

__all__ = [
    "AucGeometry", "AuxskinError", "DielectricSpec", "HysteresisTrace", "ModelParams",
    "NumericalError", "ParseError", "ValidationError", "get_dielectric", "load_catalog",
    "reference_geometry",
]
