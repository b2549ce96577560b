"""Geometric quantum dynamics toolkit at finite dimension.

Subpackages: dense linear-algebra primitives (`linalg`), linear relations and
their form geometry (`relations`), Lagrangian generation of implicit dynamics
(`tulczyjew`), Cayley-transform extension theory (`extensions`), the Kahler
geometry of pure states (`projective`), unitary-orbit utilities (`orbits`),
unitary evolution (`evolution`), JSON wire formats (`serialize`), and the
scenario-runner CLI (`cli`).
"""

from .linalg import (
    DEFAULT_TOL,
    Subspace,
    Tolerance,
    orthonormalize,
    polar_decomposition,
    schatten_norm,
    spectral_decomp_hermitian,
)
from .relations import (
    FormKind,
    LinearRelation,
    OperatorWithDomain,
    decompose_self_adjoint,
    domain_of,
    form_value,
    full_domain_operator,
    gram_matrix,
    graph_relation,
    integrability_extract,
    inverse_relation,
    is_complex_linear,
    is_isotropic,
    is_lagrangian,
    kernel_of_inverse,
    ortho_complement,
    symplectic_value,
)
from .tulczyjew import (
    DynamicsReport,
    QuadraticLagrangian,
    alpha,
    alpha_inverse,
    build_lagrangian_subspace,
    complexify,
    discretized_laplacian_lagrangian,
    generate_dynamics,
    hamiltonian_relation,
    hamiltonian_value,
    lagrangian_of,
    oscillator_lagrangian,
)
from .extensions import (
    CayleyData,
    cayley_relation,
    cayley_vector,
    deficiency_of_operator,
    deficiency_routes,
    extend,
    partial_isometry_of,
)
from .projective import (
    ProjTangent,
    PureState,
    complex_j,
    g_p,
    hamiltonian_field,
    hermitian_p,
    is_critical_point,
    omega_p,
    pure_state,
    reduced_dynamics_set,
    reduced_hamiltonian,
    tangent_of_projection,
    tangent_rep,
    unitary_action_tangent,
)
from .orbits import (
    SpectralResolution,
    closedness_witness,
    embed_orbit,
    kks_bracket,
    orbit_equivalent,
    spectral_projections,
)
from .evolution import (
    Trajectory,
    commutator_generator,
    duality_residual,
    euler_lagrange_residual,
    evolve_observable,
    evolve_state,
    hs_inner,
    propagator,
)

__version__ = "0.1.0"
