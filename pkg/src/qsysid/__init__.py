"""Identification of finite-dimensional controlled quantum systems.

Controllability by Lie closure, input-output equivalence and similarity
certificates, residual unitary freedom from a-priori knowledge, the graph
infection criterion, and indirect coupling estimation.
"""

__version__ = "0.1.0"

from qsysid.dynamics import ControlSchedule, propagate, record
from qsysid.equivalence import (
    KnownMask,
    commutant,
    equivalence_certificate,
    extract_unitary,
    identifiability_report,
    moment,
    moments_equal,
)
from qsysid.infection import (
    Topology,
    build_system,
    infect,
    is_infecting,
    minimal_infecting_set,
    verify_infection_controllability,
)
from qsysid.lie import LieBasis, is_controllable, lie_closure
from qsysid.system import QuantumSystem, conjugate_system

__all__ = [
    "ControlSchedule",
    "KnownMask",
    "LieBasis",
    "QuantumSystem",
    "Topology",
    "build_system",
    "commutant",
    "conjugate_system",
    "equivalence_certificate",
    "extract_unitary",
    "identifiability_report",
    "infect",
    "is_controllable",
    "is_infecting",
    "lie_closure",
    "minimal_infecting_set",
    "moment",
    "moments_equal",
    "propagate",
    "record",
    "verify_infection_controllability",
]
