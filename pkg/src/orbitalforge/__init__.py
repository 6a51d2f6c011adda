"""orbitalforge: closed-form and Monte Carlo evaluation of adjoint-orbit
exponential integrals over compact classical groups, with saddle-point,
heat-flow, and character-theoretic cross-checks."""

__version__ = "0.1.0"

from .errors import (
    ConfigurationError,
    DegenerateInputError,
    NumericalFailureError,
    OrbitalForgeError,
    ResolutionError,
    ResourceError,
)
from .rootsys import (
    RootSystem,
    SparsePolynomial,
    WeylElement,
    bracket,
    build_root_system,
    discriminant,
    eval_poly,
    generate_weyl_group,
    pi_pi_norm,
    root_system_to_json,
)
from .closedform import (
    CartanPoint,
    Weight,
    coadjoint_volume,
    hc_rhs,
    hciz,
    kirillov_character,
    orbital_integral_closed,
    weight_from_labels,
    weyl_character,
    weyl_dimension,
)
from .groups import (
    CompactGroupSpec,
    GroupElement,
    IntegralEstimate,
    embed_cartan,
    group_spec,
    haar_sample,
    mc_orbital_integral,
    pairing,
)
from .saddle import (
    CriticalPoint,
    find_critical_points,
    hessian_determinant_check,
    stationary_phase_estimate,
)
from .heatflow import (
    GridSpec,
    HeatKernelParams,
    SmoothBump,
    averaged_kernel_closed,
    boundary_delta_check,
    cm_pde_residual,
    heat_kernel,
    radial_heat_residual,
    v_function,
    v_weyl_sum,
)
