"""Lyapunov functions for systems known only through noisy samples.

The pipeline reconstructs the vector field by weighted regularized least
squares in a Wendland-kernel RKHS, then solves the Lyapunov equations for
``V`` (``<grad V, f> = -p``) or ``T`` (``<grad T, f> = -cbar``) by meshfree
collocation against the reconstructed field.
"""

__version__ = "0.1.0"

from ._backend import BACKEND
from .errors import (DuplicateSiteError, EmptyRegionError, LyapfitError, NoCrossingError,
                     NotInBasinError, NumericalFailure, SmallFieldError, SmoothnessError,
                     SolverError)
from .geometry import (Ball, Box, DomainSpec, Sphere, WeightedSites, fill_distance, make_grid,
                       voronoi_weights, weigh_sites)
from .kernel import WendlandKernel, build_wendland, kernel_eval, radial_derivatives, wendland_poly
from .lyap import (LyapunovModel, PFunction, assemble_B, eval_lyap, fit_T, fit_V,
                   orbital_derivative)
from .testbed import (SYSTEMS, NoiseModel, ReferenceSystem, generate_data, get_system,
                      oracle_T_flow, oracle_V_flow, oracle_V_quadratic)
from .vfield import (SampleSet, VectorFieldModel, choose_lambda, eval_vf, fit_noise_free,
                     fit_vector_field)

__all__ = [
    "BACKEND", "Ball", "Box", "DomainSpec", "DuplicateSiteError", "EmptyRegionError",
    "LyapfitError", "LyapunovModel", "NoCrossingError", "NoiseModel", "NotInBasinError",
    "NumericalFailure", "PFunction", "ReferenceSystem", "SYSTEMS", "SampleSet",
    "SmallFieldError", "SmoothnessError", "SolverError", "Sphere", "VectorFieldModel",
    "WeightedSites", "WendlandKernel", "assemble_B", "build_wendland", "choose_lambda",
    "eval_lyap", "eval_vf", "fill_distance", "fit_T", "fit_V", "fit_noise_free",
    "fit_vector_field", "generate_data", "get_system", "kernel_eval", "make_grid",
    "orbital_derivative", "oracle_T_flow", "oracle_V_flow", "oracle_V_quadratic",
    "radial_derivatives", "voronoi_weights", "weigh_sites", "wendland_poly",
]
