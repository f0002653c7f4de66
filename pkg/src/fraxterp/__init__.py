"""Fractal functions on intervals, half lines and the real line.

Read-Bajraktarevic operators, their fixed points, pullbacks to unbounded
domains, linear structure, Lp contractivity and local IFS attractors.
"""

from .errors import (
    ConfigError, DepthExceededError, DomainError, FraxError, NotContractiveError, PrecisionError,
    StructuralError, UnlocatableError,
)
from .geometry import Interval, compactify, decompactify, interval
from .maps import Homeomorphism1D, affine, compose, mobius, translation
from .partition import PartitionScheme, PieceId, validate_partition
from .rb import (
    FractalFunction, RBOperator, VerticalMap, affine_operator, evaluate, fixed_point,
    fractal_function, iterate,
)
from .scenarios import Scenario, build_example1, build_halfline_global, builtin, pullback_scenario
from .algebra import Scales, OffsetTuple, evaluate_tensor, lagrange_basis, tensor, theta
from .lp import QuadratureRule, lp_contractivity, lp_norm
from .local_ifs import (
    CellSet, Window, apply_floc, attractor_iterate, build_local_ifs, graph_invariance,
    hausdorff_distance,
)
from .config import load_config, parse_config, dump_config

__version__ = "0.1.0"
