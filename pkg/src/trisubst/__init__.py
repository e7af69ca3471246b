"""Exhaustive search for edge-to-edge substitution rules on triangles with angles k*pi/n."""
from .cyclotomic import (
    ConfigurationError,
    FieldElement,
    InadmissibleError,
    InflationFactor,
    classify_factor,
    length_matrix,
    minimal_polynomial,
    substitution_matrix,
)
from .geometry import canonical_prototile, special_set
from .parallel import run_campaign
from .postprocess import apply_and_verify, group_families
from .search import SearchConfig, SearchContext

__all__ = [
    "ConfigurationError",
    "FieldElement",
    "InadmissibleError",
    "InflationFactor",
    "SearchConfig",
    "SearchContext",
    "apply_and_verify",
    "canonical_prototile",
    "classify_factor",
    "group_families",
    "length_matrix",
    "minimal_polynomial",
    "run_campaign",
    "special_set",
    "substitution_matrix",
]
__version__ = "0.1.0"
