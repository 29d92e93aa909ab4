"""Numerics for the parametric fundamental equation of information: solution
families, degree-alpha entropy, defect functionals, recursive measures and
stability probes.
"""
__version__ = "0.1.0"

from .domain import (  # noqa: F401
    ClosedD2Point,
    D2Point,
    D3Point,
    GridSpec,
    SimplexPoint,
    grid_d2,
    grid_d3,
    grid_simplex,
    make_d2,
    make_d3,
    nested_coords,
)
from .errors import (  # noqa: F401
    BudgetViolation,
    DomainViolation,
    EmptyGrid,
    SingularDesign,
    SlopeUndefined,
)
from .measures import (  # noqa: F401
    BasisPerturbed,
    Family,
    JParams,
    Sampled,
    SolutionParams,
    entropy_alpha,
    eval_closed_family,
    eval_family,
    eval_function,
    eval_J,
    params_from_fit,
)
from .defect import (  # noqa: F401
    DefectReport,
    closed_fe_defect,
    cocycle_residual,
    fe_defect,
    fe_defect_sup,
    g_symmetry_gap,
    g_value,
    homogeneity_gap,
    scaling_exponent,
)
from .recursive import (  # noqa: F401
    EpsilonBudget,
    MeasureSequence,
    eval_measure,
    kernel_from_sequence,
    kernel_stability_eps,
    recursivity_defect,
    semisymmetry_defect,
    thm32_check,
)
from .analysis import (  # noqa: F401
    SearchConfig,
    SearchReport,
    counterexample_search,
    distance_to_family,
    fit_family,
)
