"""Lower and upper bounds for L^p approximation by neural networks, made computable."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    CapacityError, DisjointnessError, DomainError, EmptyInputError, InputShapeError,
    InvalidNumericError, LpApproxError, OracleContractError, ParseError, ProfileContractError,
    UnsupportedExactnessError, UnsupportedSmoothnessError, ValidationError,
)
from .network import Activation, Architecture, Network, evaluate, weight_count  # noqa: E402
from .compiler import DyadicCube, PiecewiseConstantFn, compile_cubes  # noqa: E402
from .monotone import (  # noqa: E402
    CubeDecomposition, DecompositionParams, MonotoneOracle, build_approximant, cube_count_bound,
    decompose, decomposition_error_bound, predicted_weight_budget, upper_rate,
)
from .holder import BumpProfile, Code, PackingFamily, build_packing, gilbert_varshamov_code  # noqa: E402
from .measures import LpEstimate, lp_distance_exact, lp_distance_mc, packing_transfer_check, sup_grid  # noqa: E402
from .dims import FiniteFunctionClass, fat_dim, packing_number, pseudo_dim, vc_dim  # noqa: E402
from .bounds import (  # noqa: E402
    BoundQuery, ParametricPacking, RateResult, closed_form_lower_bound, implicit_lower_bound,
    mendelson_rhs, pdim_upper_bound, rate_table, solve_inequation,
)
