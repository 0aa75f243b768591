"""Overlap energies of thin tubes around great circles on the unit sphere.

The hot loops (Monte Carlo membership counts and greedy selection) run in a
compiled extension when it is built; otherwise a numpy implementation is
used.  ``gctubes.kernels.BACKEND`` names the active one.
"""

from .arrangements import (
    ConstructionSpec,
    annulus_counts,
    fibonacci_poles,
    greedy_separated,
    min_separation,
    pencil,
    random_poles,
)
from .energies import (
    EnergyReport,
    PlanarArrangement,
    antipodal_energy,
    circular_inverse_sum,
    circular_sum_bound,
    delta_limit_curve,
    overlap_energy,
    planar_overlap_energy,
    rate_bound,
    riesz_energy,
)
from .errors import (
    CoincidentCircles,
    ConstructionFailed,
    DomainError,
    DuplicatePoints,
    GCTubesError,
    InsufficientData,
    NearZeroVector,
    NumericDomainError,
    ParallelLines,
)
from .kernels import BACKEND
from .optimizer import Objective, OptimizationTrace, OptimizerParams, make_objective, minimize, tangent_gradient
from .overlap import (
    AreaEstimate,
    band_area,
    lens_overlap_bounds,
    lens_overlap_exact,
    mc_pair_overlap,
    mc_second_moment,
    mc_union_area,
    pair_overlap,
)
from .sphere import Arrangement, GreatCircleTube, UnitVector, intersection_angle, make_unit

__version__ = "0.1.0"
