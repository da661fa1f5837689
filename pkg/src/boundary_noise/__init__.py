"""Simulation of elliptic and parabolic equations with noise on the boundary.

Submodules: :mod:`domains`, :mod:`noise`, :mod:`kernels`, :mod:`dirichlet`,
:mod:`fields`, :mod:`estimators` and :mod:`harness` (the ``boundary-noise``
command).
"""
from . import dirichlet, domains, estimators, fields, kernels, noise
from .dirichlet import BoundaryData, dirichlet_map, distributional_laplacian_check, weak_residual
from .domains import HalfLine, HalfSpace, Interval, TimeGrid, UnitBall, boundary_quadrature, normal_probe_line
from .errors import (
    BoundaryNoiseError,
    ConfigurationError,
    DomainError,
    MonteCarloError,
    SingularityError,
    UsageError,
)
from .estimators import (
    check_7E1,
    check_bound,
    elliptic_ito_check,
    fit_blowup,
    mc_second_moment,
    parabolic_ito_check,
    run_proposition,
)
from .fields import (
    ConvolutionPlan,
    FieldEstimate,
    analytic_variance_elliptic,
    analytic_variance_parabolic,
    convolve,
    elliptic_field,
    mild_solution,
    young_bound,
)
from .kernels import (
    KernelConfig,
    green_kernel,
    green_normal_derivative,
    heat_kernel,
    heat_kernel_normal_derivative,
    kernel_selftest,
)
from .noise import (
    CylFractionalWiener,
    DiscreteMeasure,
    HomogeneousWiener,
    PoissonMeasure,
    SignedMeasureSeries,
    WhiteNoise,
    sample_fbm_paths,
)

__version__ = "0.1.0"
