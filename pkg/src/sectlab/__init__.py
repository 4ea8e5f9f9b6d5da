"""sectlab: numerical integral geometry of sections of convex bodies.

Exact log-domain special constants, star-body and density oracles,
Haar-distributed subspaces, reproducible Monte Carlo estimators for
section functionals, and a verification suite that checks every
computable identity and inequality of the theory with explicit error
control.
"""

from .constants import (LogScalar, gamma_nk, gamma_within_bounds, growth_ratio,
                        log_ball_volume, log_bp_constant)
from .estimates import CheckReport, Estimate
from .bodies import (Ellipsoid, HPolytope, LpBall, StarBody, body_from_json,
                     body_from_spec, center_of_mass, centered_simplex, cube,
                     linear_image, section, translate, volume)
from .grassmann import Frame, sample_haar
from .measures import (DensityOracle, GaussianDensity, IndicatorDensity,
                       LebesgueDensity, RadialExpDensity, SectionDensity,
                       density_from_json, density_from_spec, kp_body,
                       max_section_measure, measure_of_body, measure_of_section)
from .sampler import (StreamHandle, covariance, sample_restricted, simplex_volume,
                      uniform_in_body)
from .functionals import (blaschke_check, draw_frames, dual_affine_quermass,
                          i_minus_k, isotropic_constant, isotropize, simplex_moment,
                          sylvester, volume_radius, w_tilde)
from .verifier import CHECKS, SuiteConfig, SuiteResult, run_suite

__version__ = "0.1.0"
