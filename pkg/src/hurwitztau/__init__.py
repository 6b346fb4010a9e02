"""Bergman tau-functions on Hurwitz spaces and model-cone spectral data.

Numerical library plus batch CLI: builds hyperelliptic covers, evaluates the
tau-function in all genus regimes, cross-verifies the governing variational
identities (Rauch, det Im B, Schiffer-connection forms, zero-energy S-matrix
blocks), and computes the explicitly solvable Dirichlet-to-Neumann spectra
and regularized determinants on model cones.
"""

from .covers import (
    CoverSpec,
    Permutation,
    cover_from_json,
    cover_to_json,
    genus_from_riemann_hurwitz,
    reference_surface,
    validate_cover,
)
from .cones import (
    ConeCircle,
    detstar_N0_model,
    detzeta_N_model,
    dtn_exterior_eigenvalue,
    dtn_zero_spectrum,
    mu0_asymptotic_fit,
    spectral_shift_asymptotic,
)
from .curves import CurvePoint, Genus0Cover, HyperellipticCurve
from .specfun import (
    RiemannMatrix,
    ThetaCharacteristic,
    hankel1,
    poly_roots,
    resultant,
    riemann_theta,
    schwarzian,
    theta1_prime,
)
from .taufn import (
    RationalCoverP1,
    TauValue,
    m_polynomial,
    tau_genus0,
    tau_genus1,
    tau_genus2,
    tau_polynomial,
    tau_three_poles,
)
from .variational import (
    CubicFamily,
    amatrix,
    clue_identity_check,
    det_imB_derivative,
    dln_tau_genus1_fd,
    dln_tau_genus2_fd,
    rauch_check,
    smatrix_hh_zero,
    trace_identity_check,
    vardwa_rhs_curve,
    vardwa_rhs_genus0,
    varodin_rhs_curve,
    varodin_rhs_genus0,
)

__version__ = "0.1.0"
