"""Twisted hypergraph-product codes over GF(2): construction, checks and simulation."""

from .complexes import ChainComplex, homology_basis, tensor_product
from .f2core import BitMatrix, BitVector, kernel_basis, rank, rref, solve
from .metrics import distance_report, min_weight_logical, rate_report, subsystem_distance
from .operators import PhasePolyOp, twisted_stabilizers, untwisted_stabilizers
from .pathintegral import logical_action, projector_product
from .protocol import crosscheck, plan_fountain, run_dense, run_ledger
from .skeleton import intersection_tensor, triple_code

__version__ = "0.1.0"

__all__ = [
    "BitMatrix",
    "BitVector",
    "ChainComplex",
    "PhasePolyOp",
    "crosscheck",
    "distance_report",
    "homology_basis",
    "intersection_tensor",
    "kernel_basis",
    "logical_action",
    "min_weight_logical",
    "plan_fountain",
    "projector_product",
    "rank",
    "rate_report",
    "rref",
    "run_dense",
    "run_ledger",
    "solve",
    "subsystem_distance",
    "tensor_product",
    "triple_code",
    "twisted_stabilizers",
    "untwisted_stabilizers",
]
