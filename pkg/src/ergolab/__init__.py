"""Numerical experiments on C^1 expanding circle maps: empirical measures,
partition entropy, Pesin residuals, Ulam equilibrium states and SRB-like
measure detection."""

from ergolab.circle_map import CircleMap, GenericPoint, lebesgue_points, make_map, map_from_spec, orbit
from ergolab.entropy import (
    Partition,
    PesinReport,
    branch_partition,
    entropy_estimate,
    make_partition,
    partition_entropy,
    pesin_report,
    pesin_residual,
    refine,
)
from ergolab.equilibrium import (
    kr_membership,
    markov_entropy,
    pressure_estimate,
    stationary_measure,
    ulam_matrix,
)
from ergolab.measures import (
    EmpiricalMeasure,
    GridMeasure,
    TestFamily,
    empirical_measure,
    integrate,
    pushforward,
    to_grid,
    weak_star_distance,
)
from ergolab.srb_like import basin_fraction, deviation_decay, p_limit_set, srb_like_candidates

__version__ = "0.1.0"
