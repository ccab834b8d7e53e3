"""Cancer stem-cell / non-stem cancer-cell dynamics.

Two coupled populations, immortal cancer stem cells (density u) and
ordinary cancer cells (density v, death rate alpha), interacting through a
non-local birth term saturated by the progeny kernel k(u + v).  The
package covers the mean-density ODE reduction, the diffusive non-local PDE
under zero-flux boundary conditions, slow-manifold construction, linear
stability under diffusion, and detectors for the tumor growth paradox:
raising the death rate can make the tumor larger at matched sizes, because
treatment tilts the composition toward the immortal stem cells.
"""

from .diagnostics import (
    energy_functional,
    invariant_region_audit,
    paradox_check_pde,
    total_mass,
)
from .errors import ConfigError, IntegrationError
from .grids import (
    DomainSpec,
    Grid,
    build_grid,
    integrate_field,
    laplacian_matrix,
    neumann_eigenvalues,
    neumann_laplacian_apply,
)
from .kernel import ProgenyKernel
from .model import (
    EXTINCTION,
    PURE_CC,
    PURE_CSC,
    Equilibrium,
    FieldState,
    MeanState,
    ModelParams,
    Trajectory,
)
from .ode import (
    DEGENERATE,
    SADDLE,
    STABLE_NODE,
    STABLE_SPIRAL,
    UNSTABLE_NODE,
    UNSTABLE_SPIRAL,
    SlowManifoldCurve,
    classify_ode_equilibrium,
    equilibria,
    integrate_ode,
    manifold_state,
    ode_jacobian,
    ode_rhs,
    paradox_check_ode,
    slow_manifold_curve,
    slow_manifold_residual,
)
from .paradox import (
    VERDICT_AMBIGUOUS,
    VERDICT_NO_MATCH,
    VERDICT_PARADOX,
    VERDICT_REFUTED,
    ParadoxReport,
)
from .pde import (
    cfl_time_step,
    constant_field,
    fast_rhs,
    integrate_pde,
    on_manifold_field,
    pde_rhs,
    stationarity_residual,
)
from .stability import (
    HyperbolicityMargin,
    StabilityReport,
    assembled_fast_linearization,
    classify_pde_equilibrium,
    distance_to_polyline,
    lambda2_substituted,
    manifold_distance_scaling,
    mode_eigenvalues,
    normal_hyperbolicity_margin,
)

__version__ = "0.1.0"
