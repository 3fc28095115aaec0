"""Linear stability of traveling waves for second-order-in-time PDEs.

The package builds self-adjoint linearizations H on a Fourier collocation
grid, checks their spectral structure, and decides stability of the
quadratic pencil lambda^2 + 2 omega lambda d/dx + H through the stability
index omega*(H) and the scalar function G(omega, lambda).
"""

from .grid import Grid, make_grid, diff_matrix, inner_product
from .profiles import (
    SolverOpts,
    WaveProfile,
    beam_profile,
    boussinesq_profile,
    default_grid,
    kgz_profile,
    make_profile,
    profile_c_derivative,
    profile_residual,
)
from .operators import (
    OperatorH,
    analytic_kernel,
    build_beam_H,
    build_boussinesq_H,
    build_hill_L,
    build_kgz_H,
    build_operator,
)
from .spectral import (
    SpectralReport,
    Spectrum,
    Tolerances,
    analyze,
    check_assumption_A,
    check_assumption_B,
    eigendecompose,
    kernel_pseudo_solve,
    project_P0,
    project_P1,
)
from .pencil import (
    LaurentCoeffs,
    PencilEval,
    StabilityVerdict,
    companion_spectrum,
    eval_G,
    find_unstable_lambda,
    laurent_coeffs,
    pencil_residual,
    stability_index,
    verdict,
)
from .evolve import Trajectory, linearized_evolve
from .verify import (
    ScanTable,
    beam_closed_form_index,
    boussinesq_closed_form_index,
    kgz_closed_form_index,
    locate_threshold,
    model_instance,
    threshold_scan,
)

__version__ = "0.1.0"
