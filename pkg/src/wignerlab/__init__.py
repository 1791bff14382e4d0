"""Numerical laboratory for generalized Wigner ensembles."""

from .profile import (
    AssumptionReport,
    ProfileError,
    VarianceProfile,
    assumption_report,
    band_profile,
    custom_profile,
    flat_profile,
)
from .sampler import (
    EntryDistribution,
    HERMITIAN,
    SYMMETRIC,
    WignerSample,
    derive_stream,
    gaussian,
    moment_report,
    moments_match,
    rademacher,
    sample_indexed,
    sample_matrix,
    two_point,
    uniform,
)
from .semicircle import (
    SpectralGrid,
    SpectralPoint,
    classical_locations,
    im_msc_scale,
    m_sc,
    make_grid,
    n_sc,
    rho_sc,
)
from .resolvent import (
    GreenSnapshot,
    MinorSpec,
    control_params,
    green_at,
    identity_residuals,
    k_quantity,
    minor_green,
    ward_residual,
    xi_quantities,
)
from .dbm import FlowState, GapSample, gap_distribution, ou_endpoint, ou_path
from .experiments import (
    ExperimentConfig,
    ExperimentReport,
    ks_two_sample,
    slope_fit,
)

__version__ = "0.1.0"
