"""Hessian metric-measure spaces from optimal transport of log-concave
measures: exact transport scenarios, pointwise curvature/diffusion tensors,
and desk-scale verification of the identities and inequalities they satisfy.
"""

from .errors import (ConfigError, DomainError, HessMetricError, InvalidExponent,
                     InvalidN, InversionFailure, MissingComposites,
                     OrderUnsupported, QuadratureFailure, RouteUnavailable,
                     SeedRequired, SingularHessian)
from .jets import Jet, fd_jet_oracle
from .potentials import (GaussianPotential1D, Potential1D, QuarticPotential1D,
                         SupportBox, UniformPotential1D)
from .scenarios import (CATALOG, Custom1D, GaussianScaleScenario,
                        GaussianToUniform1D, IdentityScenario, ProductScenario,
                        RadialGaussianToBall, Scenario, TargetComposites,
                        catalog_names, catalog_scenario, catalog_scenarios,
                        jets_phi, jets_potential, legendre_dual_jets,
                        ma1807_residual, ma_residual, scenario_from_descriptor,
                        target_composites)
from .transport1d import Transport1D, solve_1d
from .geometry import (CurvatureFrame, GeometryReport, MetricFrame,
                       WeightTensors, bakry_emery, hess_m, metric_frame,
                       modified_tensor, ricci, riemann, verify_bounds,
                       weight_tensors)
from .diffusion import apply_l, gamma2, gamma_phi, ibp_check, ma_diffusion_check
from .calabi import (CalabiFrame, calabi_decomposition, calabi_inequality_check,
                     calabi_positivity_check, lphi_identity_check,
                     quadratic_form_min_eig, synthetic_jet, third_contraction)
from .metric_space import (ConcentrationReport, Polyline, bishop_gromov_profile,
                           completeness_check, concentration_profile,
                           diameter_experiment, distance_1d, geodesic_upper,
                           km_combination, lemma_contraction_check, path_length)
from .integrals import (F_ID, F_ONE, F_SQUARE, FunctionOfLambda, IntegralReport,
                        integrate, lambda_field, lm_check, poincare_rayleigh,
                        reverse_holder, theorem61_check, variance_estimate,
                        vw_check)
from .fields import TestField, bump_field, coordinate_field, linear_field
from .suite import run_verify_suite

__version__ = "0.1.0"
