"""Counting conjugacy classes of discrete isometry groups by displacement."""

from .analysis import (
    GrowthFit,
    Histogram,
    TheoreticalConstant,
    discrepancy_stats,
    empirical_constant,
    fit_growth_rate,
    theoretical_constant,
)
from .counting import (
    CountSeries,
    DirectionSample,
    SubgroupSpec,
    conj_count_direct,
    conj_count_geometric,
    direction_measure,
    subgroup_conj_count,
)
from .displacement import ConjClassInvariants, displacement, invariants_of, psi_asymptotic, psi_exact
from .hyp_core import Horoball, Isometry2, Isometry3, Kind, UH2Point, UH3Point, classify

__version__ = "0.1.0"
