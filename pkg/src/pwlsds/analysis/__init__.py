"""Injectivity, entropy, bound tests, contraction and certificates."""

from .bounds import BoundTest, j_sup_approx, lemma31_bound_test, qstar_bound_test
from .certificates import (
    INAPPLICABLE,
    INCONCLUSIVE,
    UNIQUE,
    DiagnosticReport,
    UniquenessCertificate,
    corollary41_diagnostic,
    in_support,
    theorem36_certificate,
)
from .contraction import ContractionCertificate, contracts_neighborhood_check, interval_contraction_sim
from .entropy import (
    EntropyReport,
    IncompatibleIFS,
    SymbolicLog,
    UndefinedDerivative,
    entropy_birkhoff_mc,
    entropy_cylinder,
    entropy_exact,
    rn_derivative,
)
from .injectivity import InjectivityReport, check_mu_injectivity, preimage_count_function

__all__ = [
    "BoundTest",
    "ContractionCertificate",
    "DiagnosticReport",
    "EntropyReport",
    "INAPPLICABLE",
    "INCONCLUSIVE",
    "IncompatibleIFS",
    "InjectivityReport",
    "SymbolicLog",
    "UNIQUE",
    "UndefinedDerivative",
    "UniquenessCertificate",
    "check_mu_injectivity",
    "contracts_neighborhood_check",
    "corollary41_diagnostic",
    "entropy_birkhoff_mc",
    "entropy_cylinder",
    "entropy_exact",
    "in_support",
    "interval_contraction_sim",
    "j_sup_approx",
    "lemma31_bound_test",
    "preimage_count_function",
    "qstar_bound_test",
    "rn_derivative",
    "theorem36_certificate",
]
