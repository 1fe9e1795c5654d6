"""AoI-optimal stationary randomized sampling under cost and CAE constraints."""

from .analysis import (
    AoiDistribution,
    CaeCoefficients,
    JointDist,
    UnboundedAoI,
    aoi_stationary_distribution,
    average_aoi,
    cae_coefficients,
    exact_joint_stationary,
    expected_cae,
    closed_form_gap,
    closed_form_joint,
    lower_bound_value,
)
from .io import load_instance, table1
from .model import (
    Action,
    AoiWeights,
    Bounds,
    CaePenalty,
    ChannelModel,
    CostModel,
    InvalidInstanceError,
    SourceModel,
    SrpPolicy,
    StationaryDist,
    SystemInstance,
    ValidationReport,
    expected_cost,
    stationary_distribution,
    success_probabilities,
    success_rate,
    validate_instance,
)
from .optimizer import (
    FeasibilityStatus,
    InfeasibleInstance,
    SrpSolution,
    classify_feasibility,
    feasible_vertices,
    optimality_ratio,
    solve_lower_bound,
    solve_srp,
)
from .simulator import SimConfig, SimResult, SimState, SlotRecord, run, run_trace, step
from .sweeps import GridSpec, SweepTable, sweep_bounds, sweep_costs, tradeoff_scan

__version__ = "0.1.0"
