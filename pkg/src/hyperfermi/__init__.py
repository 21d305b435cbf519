"""Exact Grassmann-algebra engine with cluster-expansion, spanning-forest
and decay-bound toolkits for fermionic hyperbolic sigma models."""

from .grassmann import (AlgebraContext, CapacityError, GrassmannElement,
                        berezin, derivative, exp_even, gmul, l1_norm,
                        log_nilpotent, make_algebra, series_apply,
                        symmetric_product)
from .graphs import WeightedGraph
from .model import (H0Model, ModelParams, TField, build_D_matrix, build_W,
                    build_nu, d_matrix_positivity, generating_function,
                    partition_function, two_point, two_point_from_sources)
from .singlesite import (SingleSiteParams, coeff_a, coeff_b, norm_psi_pow,
                         one_point_norm_ratios, ratio_R, single_site_Z)
from .cluster import (ActivityTable, activity, activity2, connected_part,
                      exp_partition_identity_check, mayer_bound, phi_conn,
                      polymer_identity_check, two_point_series)
from .forests import (Forest, arboreal_Z, bareiss_determinant, duality_check,
                      enumerate_forests, h02_partition, kirchhoff_tree_sum,
                      rooted_forest_det_check)
from .bounds import (DecayBoundReport, InteractionClass, activity_bound_check,
                     decay_bound, exp_decay_bound, nn_decay_bound,
                     poly_decay_bound, verify_section32_norms)

__version__ = "0.1.0"

__all__ = [
    "AlgebraContext", "CapacityError", "GrassmannElement", "berezin",
    "derivative", "exp_even", "gmul", "l1_norm", "log_nilpotent",
    "make_algebra", "series_apply", "symmetric_product",
    "WeightedGraph",
    "H0Model", "ModelParams", "TField", "build_D_matrix", "build_W",
    "build_nu", "d_matrix_positivity", "generating_function",
    "partition_function", "two_point", "two_point_from_sources",
    "SingleSiteParams", "coeff_a", "coeff_b", "norm_psi_pow",
    "one_point_norm_ratios", "ratio_R", "single_site_Z",
    "ActivityTable", "activity", "activity2", "connected_part",
    "exp_partition_identity_check", "mayer_bound", "phi_conn",
    "polymer_identity_check", "two_point_series",
    "Forest", "arboreal_Z", "bareiss_determinant", "duality_check",
    "enumerate_forests", "h02_partition", "kirchhoff_tree_sum",
    "rooted_forest_det_check",
    "DecayBoundReport", "InteractionClass", "activity_bound_check",
    "decay_bound", "exp_decay_bound", "nn_decay_bound", "poly_decay_bound",
    "verify_section32_norms",
]
