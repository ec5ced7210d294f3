"""Dimensions, uniform-fibre conditions and classification of Barański carpets."""

from .carpet import (
    CarpetSpec,
    CarpetType,
    IndexSets,
    TypeClass,
    ValidationReport,
    classify_type,
    index_sets,
    load_spec,
    random_carpet,
    validate,
)
from .conditions import (
    Classification,
    ConditionReport,
    classify,
    condition_flags,
    dimensions,
    fibre_uniformity,
)
from .report import AnalysisReport, analyze
from .roots import (
    ExponentProfile,
    assouad_lower_profile,
    fibre_exponents,
    solve_box_exponent,
    solve_partition_exponent,
)
from .symbolic import (
    ahlfors_probe,
    approximate_square,
    box_count_estimate,
    brute_mass_oracle,
    square_mass,
    stopping_set,
)
from .variational import (
    dim_hausdorff,
    entropy_stats,
    eval_objective,
    grid_oracle,
    maximize_objective,
)

__version__ = "0.1.0"
