"""Conservative spectral solver for the Boltzmann equation in 1-D space, 3-D velocity."""
from .collision import (CollisionWorkspace, ConservationOperator, NonFiniteStateError, collide,
                        collision_raw, conserve, direct_collision_oracle, evaluate_qhat)
from .moments import MomentSet, compute_moments, conserved_moments, h_functional
from .parallel import (DecompositionPlan, LoopbackHub, LoopbackTransport, SerialTransport,
                       WorkerTeam, halo_exchange, plan_decomposition, predict_speedup, run_loopback)
from .scenarios import (Scenario, marginal_distribution, maxwellian, relaxation_0d,
                        sudden_cooling_scenario, sudden_heating_scenario)
from .timestepper import LocalDomain, SplittingScheme, collision_rk2, strang_step
from .transport import (SpatialGrid, WallSpec, minmod3, reconstruct_slopes, transport_step,
                        upwind_flux, wall_boundary)
from .velocity_grid import VelocityGrid, build_grid, forward_transform, inverse_transform
from .weights import (KernelSpec, WeightTable, generate_table, load_table, save_table,
                      weight_closed_form, weight_quadrature)

__version__ = "0.1.0"
