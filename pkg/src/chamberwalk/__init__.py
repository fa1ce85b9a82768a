"""Special functions of complex classical Lie groups and Monte-Carlo
verification of hypergroup convolution identities and strong laws for
singular spectra of biinvariant random matrix products."""

__version__ = "0.1.0"

from .roots import (
    RootSystem,
    RootSystemError,
    WeylElement,
    build_root_system,
    chamber_project,
    enumerate_weyl,
    in_chamber,
)
from .special import (
    SphericalValue,
    m1_closed,
    m1_expectation,
    semicharacter,
    spherical_phi,
    spherical_psi,
)
from .kernels import (
    haar_orthogonal,
    haar_unitary,
    hermitian_spectrum,
    jacobi_eigh,
    log_singular_spectrum,
    sample_biinvariant,
    sample_orbit,
)
from .convolve import (
    CheckResult,
    EmpiricalMeasure,
    SupportReport,
    conv_group_cloud,
    conv_group_sample,
    conv_hermitian_cloud,
    conv_hermitian_sample,
    deformation_check,
    support_equivalence,
)
from .walk import (
    ProductAccumulator,
    WalkConfig,
    WalkReport,
    euclidean_walk_crosscheck,
    run_group_walk,
    substream,
)

__all__ = [
    "__version__",
    "RootSystem", "RootSystemError", "WeylElement", "build_root_system",
    "chamber_project", "enumerate_weyl", "in_chamber",
    "SphericalValue", "m1_closed", "m1_expectation", "semicharacter",
    "spherical_phi", "spherical_psi",
    "haar_orthogonal", "haar_unitary", "hermitian_spectrum", "jacobi_eigh",
    "log_singular_spectrum", "sample_biinvariant", "sample_orbit",
    "CheckResult", "EmpiricalMeasure", "SupportReport", "conv_group_cloud",
    "conv_group_sample", "conv_hermitian_cloud", "conv_hermitian_sample",
    "deformation_check", "support_equivalence",
    "ProductAccumulator", "WalkConfig", "WalkReport",
    "euclidean_walk_crosscheck", "run_group_walk", "substream",
]
