"""Customized modular bus design: joint passenger-route assignment and
transfer incentivization, solved exactly as a linearized mixed-integer
program at desk scale."""

from .choice import DrawSet, UtilitySpec, export_draws, logit_probability, parse_draws, sample_draws, saa_probability
from .evaluate import (
    BusPlan,
    DesignOutcome,
    Kpis,
    TransferPlan,
    ValidationReport,
    compute_kpis,
    decode,
    kpi_csv_row,
    validate_nonlinear,
)
from .formulation import (
    BigMSet,
    FormulationArtifacts,
    build_elp,
    build_mtz_variant,
    compute_big_m,
    make_lazy_separator,
    separate_subtours,
    subtour_cut_sets,
)
from .instance import (
    BusType,
    CostParams,
    DemandMatrix,
    FleetSpec,
    IncentiveSpec,
    Instance,
    RoadNetwork,
    SchemaError,
    Station,
    TravelMetrics,
    apportion_largest_remainder,
    derive_metrics,
    generate_demand,
    load_instance,
    make_instance,
    to_document,
    with_demand,
)
from .milp import BINARY, CONTINUOUS, INTEGER, LinearConstraint, MilpModel, ModelError, Variable
from .milpio import ParseError, export_model, models_equal, parse_model
from .oracle import TinyLimitError, TinyLimits, enumerate_optimal
from .simplex import SimplexNumericsError
from .solver import Solution, SolverConfig, solve_lp, solve_milp, verify

__version__ = "0.1.0"
