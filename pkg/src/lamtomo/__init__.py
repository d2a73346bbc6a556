"""Discrete-data Lambda tomography and its transition-behavior calculus.

Simulate line-integral data of piecewise-constant phantoms on a finite
angle/offset lattice, reconstruct with the second-derivative (Lambda)
filter, and predict the resulting edge response and sampling artifacts in
closed form from the interface parameters.
"""

from .geometry import ScanGeometry, Sinogram, build_geometry, genericity, sample_sinogram
from .kernel import Kernel, bspline_eval, exactness_defect, interpolation_kernel, kernel_certificate, kernel_eval
from .metrics import profile_compare, roi_std, scaling_report
from .phantom import Disk, EdgeSite, Phantom, Rect, edge_site, radon, radon_pixel_avg
from .recon import EdgeProfile, ReconGrid, edge_profile, lambda_recon_grid, lambda_recon_point, lambda_recon_points
from .transition import (
    CtbSpec,
    LineEdge,
    RemoteSite,
    SingularityParams,
    UnsupportedParametersError,
    capital_psi,
    ctb_mu,
    ctb_spec,
    dtb,
    dtb_double_integral_oracle,
    exact3d_spec,
    f0_singularity,
    fhat0_coefficients,
    fhat0_singularity,
    line_artifact_model,
    lt_disk_spec,
    lt_edge_response,
    lt_unit_spec,
    psi,
    remote_ripple_model,
)

__version__ = "0.1.0"
