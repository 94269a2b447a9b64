from .forces import (
    Absorbed,
    Compensated,
    ConstantExternal,
    Coupled,
    ExternalLaw,
    FunctionExternal,
    FunctionInternal,
    Gravity,
    Grouped,
    InternalLaw,
    Resplit,
    TabulatedExternal,
    TabulatedInternal,
    ZeroExternal,
    ZeroInternal,
)
from .integrate import rk4_step, simulate
from .system import (
    DEFAULT_TOL,
    MSSSystem,
    absorb_external,
    angular_momentum,
    conservation_drift,
    equivalent,
    is_isolated,
    is_subsystem,
    isolation_check,
    momentum,
    restrict,
    subsystem_residual,
    total_applied_force,
    validate,
)
from .theorems import embed_isolated_uniform, embedding_horizon, resplit_forces, verify_embedding
from .trajectory import Trajectory, accel
