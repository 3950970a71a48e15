"""Integral-closure membership: monomial, dependence and arc engines."""

from .arcs import ARC_VAR, CurveArc, NoArcStrategy, Parametrization, UncertifiedArc, arc_from_polys, sample_arcs, sample_pair_arcs
from .certificates import CertificateError, verify_certificate
from .dependence import DependenceCertificate, dependence_search
from .newton import NotMonomial, monomial_closure, newton_weights, separating_weight
from .pullback import PullbackResult, arc_pullback_membership
from .verdict import (
    Bounds,
    CertificateInvariantError,
    ClosureVerdict,
    StrictClosureUnsupported,
    closure_membership_ideal,
    closure_membership_module,
)

__all__ = [
    "ARC_VAR",
    "CurveArc",
    "NoArcStrategy",
    "Parametrization",
    "UncertifiedArc",
    "arc_from_polys",
    "sample_arcs",
    "sample_pair_arcs",
    "CertificateError",
    "verify_certificate",
    "DependenceCertificate",
    "dependence_search",
    "NotMonomial",
    "monomial_closure",
    "newton_weights",
    "separating_weight",
    "PullbackResult",
    "arc_pullback_membership",
    "Bounds",
    "CertificateInvariantError",
    "ClosureVerdict",
    "StrictClosureUnsupported",
    "closure_membership_ideal",
    "closure_membership_module",
]
