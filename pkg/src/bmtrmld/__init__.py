"""Brownian motion tree models: exact reciprocal ML-degree certification and reciprocal MLE."""

__version__ = "0.1.0"

from .exact import GF, P1, P2, QQ, ExactMatrix, IntegerMatrix, integer_kernel, rank_rref, rowspan_equal, solve_or_invert
from .groebner import GroebnerBasis, PolyRing, Polynomial, buchberger, ideal_equal, normal_form, quotient_degree
from .mle import ModelFit, SampleCovariance, newton_fit, rloglik, rloglik_and_grad, stationarity_residuals
from .model import PCoordinates, build_design_A, build_path_B, p_coords, perp_linear_system, row_transform_b_of_a
from .rmld import (
    CertificationReport,
    bad_toric_design,
    bad_toric_generators,
    bad_toric_lspace,
    certified_degree,
    linear_rmld,
    rmld_certify,
    rmld_formula,
    star_origin_check,
    toric_mld_given_gens,
)
from .toric import Binomial, TfpReport, all_gluings, hypersimplex_binomials, lattice_member, tfp_kernel_check, tree_binomials
from .trees import Gluing, QuartetTopology, RootedTree, TreeError, enumerate_topologies, glue, load_tree, parse_newick, star_tree
