"""Washboard-potential toolkit for frustrated Josephson-junction arrays.

Builds the multidimensional tilted washboard potential of a single magnetic
unit cell from its incidence data, analyzes its stationary structure
(fixed points, critical currents, the pinned-phase boundary), and integrates
overdamped / underdamped / Hamiltonian dynamics with thermal noise.

Typical use::

    from washboard import builtin_cell, build_potential, find_ground_state
    p = build_potential(builtin_cell("1/2"), i_x=0.4)
    gs = find_ground_state(p)

Energies are in units of the Josephson energy, currents in units of the
junction critical current, and time in units of the single-junction
relaxation time.
"""

__version__ = "0.1.0"

from .backend import active_backend, available_backends
from .cells import (AffineMap, FluxIdentity, FrustrationCell, builtin_cell,
                    builtin_names, dumps_cell, load_cell, loads_cell,
                    parse_number, phase_map_y, save_cell, validate_cell)
from .dynamics import (SimulationConfig, Trajectory, energy_series,
                       mean_voltage, noise_factor, simulate)
from .errors import (AsymmetricTarget, BadSliceSpec, CanonicalMismatch,
                     DimensionMismatch, EmptyTrajectory, InvalidConfig,
                     IOFailure, MissingVelocities, NoConvergence,
                     NotPositiveDefinite, NotPSD, NumericalBlowup, ParseError,
                     RootBranchLost, SingularIncidence, UnsupportedFrustration,
                     ValidationError, WashboardError)
from .potential import (ReducedPotential, SliceGrid, TiltedPotential,
                        build_potential, fd_check, periodicity_check,
                        reduced_embedding_check, reduced_potential_y0,
                        slice_grid, tilt_decompose)
from .stationary import (CRITICAL_CURRENT_HALF, CRITICAL_X_HALF,
                         CRITICAL_Z_HALF, CriticalCurrentResult, FixedPoint,
                         PinnedBoundaryCurve, biaxial_current_relation,
                         boundary_current_discriminant, classify_hessian,
                         companion_report, critical_current_uniaxial,
                         depinning_cubic, depinning_discriminant,
                         energy_barrier, find_fixed_point, find_ground_state,
                         halfcell_stationarity_residual, pinned_boundary,
                         uniaxial_current_relation)
from .transform import (ExactnessReport, Transform, compute_target,
                        derive_transform, factor_transform, phase_map_x,
                        verify_exactness)

__all__ = [name for name in dir() if not name.startswith("_")]
