"""Schmidt decompositions, separability checks and purification tools for
multipartite pure and mixed states."""

__version__ = "0.1.0"

from .errors import MultisepError
from .fixtures import epr, ghz, make_fixture, ncat, random_gsd, random_pure, tiles, w_state
from .numerics import DEFAULT_TOL, Tolerance, herm_eig, svd
from .proofcheck import certify_gsd, induction_step, orthogonality_certificate, pair_pt_condition, project_pair
from .purification import Ensemble, LayeredEnsemble, ensemble_reduce, hjw_steering, nobs_normal_form, purify
from .schmidt import GSDResult, SchmidtForm, ghz_coefficient, gsd_detect, gsd_reconstruct, schmidt_decompose
from .separability import (
    Classification,
    Verdict,
    classify_bipartite,
    multiseparability_report,
    ppt_report,
    range_product_search,
    realignment_value,
    triangle_classify,
)
from .states import (
    Bipartition,
    DensityMatrix,
    PureState,
    partial_entropy,
    partial_trace,
    partial_transpose,
    tensor_product,
    von_neumann_entropy,
)

__all__ = [
    "MultisepError",
    "Tolerance",
    "DEFAULT_TOL",
    "herm_eig",
    "svd",
    "PureState",
    "DensityMatrix",
    "Bipartition",
    "tensor_product",
    "partial_trace",
    "partial_transpose",
    "partial_entropy",
    "von_neumann_entropy",
    "SchmidtForm",
    "GSDResult",
    "schmidt_decompose",
    "gsd_detect",
    "gsd_reconstruct",
    "ghz_coefficient",
    "Verdict",
    "Classification",
    "ppt_report",
    "realignment_value",
    "range_product_search",
    "classify_bipartite",
    "multiseparability_report",
    "triangle_classify",
    "Ensemble",
    "LayeredEnsemble",
    "purify",
    "hjw_steering",
    "ensemble_reduce",
    "nobs_normal_form",
    "project_pair",
    "pair_pt_condition",
    "orthogonality_certificate",
    "certify_gsd",
    "induction_step",
    "epr",
    "ghz",
    "ncat",
    "w_state",
    "tiles",
    "random_pure",
    "random_gsd",
    "make_fixture",
]
