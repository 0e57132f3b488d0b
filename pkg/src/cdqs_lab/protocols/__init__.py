from . import predicates, zoo
from .cds import CdsProtocol, parallel_cds, verify_cds_exact
from .model import CdqsProtocol, FRoutingProtocol, ReportRow, VerificationReport
from .verify import (
    compose_joint,
    decoupling_check,
    frouting_to_cdqs,
    referee_state,
    verify_cdqs,
    verify_frouting,
)

__all__ = [
    "predicates",
    "zoo",
    "CdsProtocol",
    "parallel_cds",
    "verify_cds_exact",
    "CdqsProtocol",
    "FRoutingProtocol",
    "ReportRow",
    "VerificationReport",
    "compose_joint",
    "decoupling_check",
    "frouting_to_cdqs",
    "referee_state",
    "verify_cdqs",
    "verify_frouting",
]
