"""Geometric multigrid on tensor grids with local Fourier analysis.

Boundary-value problems (Dirichlet, Neumann, mixed) are linked to periodic
ones through odd, even and mixed symmetric extensions, which lets the exact
periodic Fourier analysis be checked against the boundary problem.
"""

__version__ = "0.1.0"

from .grid import BC, GridFunction, GridSpec, make_grid, lex_index, lex_unindex, node_phase, fourier_mode
from .linear import DENSE_LIMIT, DenseSolver, LinearMap, SizeGuardError, materialize
from .operators import (
    DiscreteOperator,
    Stencil1D,
    assemble_tensor_operator,
    dirichlet_operator_1d,
    make_operator,
    materialize_dense,
    mixed_operator_1d,
    neumann_operator_1d,
    periodic_operator_1d,
)
from .extension import (
    CompatReport,
    ExtensionPair,
    Kind,
    check_lfa_compatible,
    even_extend,
    even_restrict,
    in_range_of_extension,
    mixed_extend,
    mixed_restrict,
    odd_extend,
    odd_restrict,
)
from .transfer import TransferSpec, dlinear_interpolate, full_weighting_restrict, prolongation_map, restriction_map
from .smoothers import SmootherKind, SmootherSpec, error_propagator, smoother_iterator, smoother_step
from .multigrid import (
    ConvergenceReport,
    CycleSpec,
    CycleType,
    Hierarchy,
    cycle_error_propagator,
    cycle_iterator,
    dense_spectral_radius,
    measure_asymptotic_rate,
    stationary_iterate,
    two_grid_apply,
    two_grid_error_propagator,
    v_cycle_apply,
)
from .lfa import (
    FrequencySet,
    LFAResult,
    SymbolExtractionError,
    harmonic_tuple,
    lfa_convergence_factor,
    lfa_smoothing_factor,
    operator_symbol,
    smoother_symbol_block,
    transfer_symbol,
    two_grid_symbol_block,
)

import types as _types

__all__ = [name for name, value in globals().items()
           if not name.startswith("_") and not isinstance(value, _types.ModuleType)]
