"""Moment-map gradient flows for compact group representations.

The package integrates the downward gradient flow of |mu|^2 and its
projectivization, lifts it to the complexified group, extracts the
asymptotic geodesic ray in the symmetric space of positive-definite
matrices, certifies the optimal degeneration direction against a
convex-geometry oracle, and numerically verifies the local model-space
symplectic data around zeros of the moment map.
"""

from .algebra import (GroupPresentation, WeightSystem, adjoint_coadjoint,
                      direct_sum_presentation, exp_group, matrix_presentation,
                      su2_presentation, su2_sym_presentation, torus_presentation,
                      un_presentation, validate_presentation)
from .degeneration import (DegenerationReport, certify_rational,
                           compare_with_oracle, hermitian_generator,
                           limit_direction, torus_oracle)
from .flow import (FlowOptions, FlowTrajectory, check_rates, cointegrate_group,
                   fit_lojasiewicz, integrate_kempf_ness, integrate_projective,
                   reparametrize)
from .normal_form import (ModelPoint, NormalFormModel, build_model,
                          infinitesimal_model_action, model_moment_map,
                          model_symplectic_form, rho_tilde,
                          verify_closedness, verify_moment_identity)
from .representation import (energy_and_gradient, infinitesimal_action,
                             kempf_ness_value, moment_map,
                             moment_map_via_adjoint, projective_moment_map)
from .symmetric_space import (GeodesicRay, SymmetricSpacePoint, convexity_probe,
                              distance, exp_map, extract_asymptotic_ray,
                              geodesic, geodesic_path, log_map)

__version__ = "0.1.0"
