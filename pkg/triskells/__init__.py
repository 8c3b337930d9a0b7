"""Weighted triskells, execution, Fock functors and the determinant-trace bridge."""

from .errors import TriskellError
from .fock import det_m, fock_lift, fock_rel, fock_sym, tr_m
from .relmat import WeightedMatrix, contract
from .triskell import Carrier, Edge, Triskell, compose, direct_sum, exec_trace, identity, tensor, union
from .weights import COMPLEX, NONNEG_REAL, RATIONAL, SIGNED_REAL, UNIT, Weight, make_weight, signed_pair

__version__ = "0.1.0"

__all__ = [
    "Carrier",
    "COMPLEX",
    "Edge",
    "NONNEG_REAL",
    "RATIONAL",
    "SIGNED_REAL",
    "Triskell",
    "TriskellError",
    "UNIT",
    "Weight",
    "WeightedMatrix",
    "compose",
    "contract",
    "det_m",
    "direct_sum",
    "exec_trace",
    "fock_lift",
    "fock_rel",
    "fock_sym",
    "identity",
    "make_weight",
    "signed_pair",
    "tensor",
    "tr_m",
    "union",
]
