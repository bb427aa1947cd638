"""Numerical verification of envelope inequalities for G_{n,k}-invariant
admissible functions on complex projective space."""
from .errors import KahlerEnvError
from .projective import (ChartPoint, Gamma, MPoint, ProjectivePoint, Sigma, Tau, TupleShape,
                         apply_generator, apply_word, check_invariance, lift_to_M,
                         make_point, moduli_point, orbit_sample, to_chart)
from .hermitian import HermitianForm, ScalarField, complex_hessian, is_positive_definite
from .geometry import (MetricSpec, admissibility, fs_metric, fs_potential, fs_volume_density,
                       gM_det_formula, gM_metric, gM_potential)
from .envelope import (GridSpec, ReductionTrace, eval_psi, eval_psi_M, eval_psi_tilde,
                       eval_psi_tilde_M, lemma1_reduce, lemma2_reduce, reduction_chain,
                       verify_center_bound, verify_envelope)
from .integrals import (IntegralEstimate, dirichlet_oracle, divergence_sweep, tian_integrand,
                        tian_mc_integral, tian_psi_integral)
from .testfuncs import (TestFunctionSpec, calibrate_admissible, calibrated_test_function,
                        make_test_function, normalize_sup)

__version__ = "0.1.0"

__all__ = [
    "KahlerEnvError",
    "ChartPoint",
    "Gamma",
    "MPoint",
    "ProjectivePoint",
    "Sigma",
    "Tau",
    "TupleShape",
    "apply_generator",
    "apply_word",
    "check_invariance",
    "lift_to_M",
    "make_point",
    "moduli_point",
    "orbit_sample",
    "to_chart",
    "HermitianForm",
    "ScalarField",
    "complex_hessian",
    "is_positive_definite",
    "MetricSpec",
    "admissibility",
    "fs_metric",
    "fs_potential",
    "fs_volume_density",
    "gM_det_formula",
    "gM_metric",
    "gM_potential",
    "GridSpec",
    "ReductionTrace",
    "eval_psi",
    "eval_psi_M",
    "eval_psi_tilde",
    "eval_psi_tilde_M",
    "lemma1_reduce",
    "lemma2_reduce",
    "reduction_chain",
    "verify_center_bound",
    "verify_envelope",
    "IntegralEstimate",
    "dirichlet_oracle",
    "divergence_sweep",
    "tian_integrand",
    "tian_mc_integral",
    "tian_psi_integral",
    "TestFunctionSpec",
    "calibrate_admissible",
    "calibrated_test_function",
    "make_test_function",
    "normalize_sup",
]
