"""Numerical certification of order-statistic averages, minimal
pairwise-independent map families, and Orlicz-norm equivalences."""

from .errors import (BoundViolation, BudgetExceeded, DegenerateQuantile,
                     DomainTooLarge, ImplicitFamily, IndexOutOfRange,
                     NotInBall, NotPrimePower, OsboundsError, ZeroInverse)
from .finite_field import FiniteField, field_inv, find_irreducible, make_field
from .map_family import (ConditionReport, MapFamily, WeightedSpace,
                         affine_family, cardinality_lower_bound,
                         full_function_family, symmetric_group,
                         verify_conditions)
from .order_stats import (BivariateFunction, BoundReport, Estimate,
                          LevelSet, ReductionReport, StepFunction,
                          averaged_function, check_bounds,
                          decreasing_rearrangement, expected_sum,
                          integral_rearrangement, kmax, level_set,
                          order_stat_sum, strictify, verify_reduction)
from .orlicz import (OrliczFunction, QuantileFunction, SandwichReport,
                     conjugate, duality_gap, from_grid, hinge,
                     luxemburg_norm, m_from_rv, mstar_from_rv, power,
                     sandwich_check, satisfies_embedding_hypotheses)
from .rv_order_stats import (Distribution, RatioReport, constant,
                             exponential1, get_distribution, ratio_cell,
                             simulate_expected_sum, theorem_ratio, two_point,
                             uniform01)
from .embedding import (DistortionReport, EmbeddingSpec, EquivalenceReport,
                        SignSelection, build_spec, distortion_report,
                        equivalence_averages_check, p_family_weights, psi,
                        psi_l1, rademacher_average, reference_norm,
                        select_sign_vectors)

__version__ = "0.1.0"
