"""Phase-space reflection machinery for oscillator Hamiltonians.

Exact Wigner/cross-Wigner oracles for 1-D oscillator eigenstates,
semiclassical spectral Wigner functions, the geometry of reflected
energy-shell intersections, classical and Airy-resolved transition
densities between energy shells, and symplectic polygon utilities.
"""

from ._kernels import BACKEND, airy_ai, laguerre_sum
from .caustic import (
    CausticFrame1D,
    abramochkin_check,
    airy_widths,
    calibrate_kappa,
    diagonal_consistency,
    energy_plane_density,
    fringe_averaged_density,
    peak_scale,
    projected_double_frequency_density,
    transition_density_airy_closed,
    transition_density_airy_quadrature,
)
from .config import get_hbar, hbar_context, resolve_hbar, set_hbar
from .core import (
    HamiltonianModel,
    ReflectionFrame,
    apply_j,
    finite_difference_gradient,
    finite_difference_hessian,
    harmonic_model,
    join_pq,
    ndof_of,
    poisson_bracket,
    quartic_model,
    reflect,
    skew_product,
    spherical_model,
    split_pq,
)
from .oracle import (
    EigenBasis1D,
    GridCoverageError,
    MoyalEntry,
    QuadratureConvergenceError,
    TruncationError,
    autocorrelation_closed,
    convolution_identity_check,
    correlation_identity_check,
    cross_wigner,
    lorentzian,
    reflection_matrix,
    reflection_matrix_element,
    smoothed_dos,
    spectral_wigner_exact,
    transition_probability_exact,
    transition_probability_row,
    wigner,
)
from .polygons import (
    PolygonPath,
    closure_residual,
    open_polygon_side,
    reconstruct_vertices,
    symplectic_area,
    tangency_residual,
    trajectory_polygon_centres,
    vertices_from_even_centres,
)
from .section import (
    NormalForm,
    SectionGeometry,
    build_section,
    normalized_velocity_skew,
    section_frame,
    section_momentum,
    section_point_check,
    section_sum_residual,
    spherical_normal_form,
    spherical_section_point,
)
from .spectral import (
    WidthDomainError,
    airy_spectral_smoothed,
    airy_spectral_wigner,
    airy_width,
    classical_spectral_wigner,
    regime_report,
)
from .transition import (
    CausticTangencyError,
    SectionSample,
    TransitionQuery,
    collect_section_samples,
    scaling_exponent_fit,
    sphere_area_constant,
    transition_density_1d,
    transition_density_delta_extrapolated,
    transition_density_mc,
    transition_density_smeared,
    transition_density_spherical,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
