"""Scattering through non-Hermitian tight-binding centers and the symmetries that protect it."""
from .errors import ScatterError
from .models import catalog, get_model
from .network import LeadAttachment, ScatteringNetwork, parse_network, serialize_network, two_port_network
from .scattering import ScatteringCoefficients, SMatrix, oracle_two_port, s_matrix, two_port
from .symmetry import SymmetrySpec, classify_mapping, detect, predict, verify

__all__ = [
    "LeadAttachment",
    "ScatterError",
    "ScatteringCoefficients",
    "ScatteringNetwork",
    "SMatrix",
    "SymmetrySpec",
    "catalog",
    "classify_mapping",
    "detect",
    "get_model",
    "oracle_two_port",
    "parse_network",
    "predict",
    "s_matrix",
    "serialize_network",
    "two_port",
    "two_port_network",
    "verify",
]
