"""Reduction of minimal modular symbols over number fields to a finite spanning set."""

from .field_arith import NumberOrder, OrderSpec, load_field, load_order
from .minkowski import spanning_bound
from .pivot_search import Pivot, PivotConfig, exhaustive_pivot, find_pivot
from .reduction import (
    NormalSymbol,
    ReduceConfig,
    ReductionCertificate,
    SymbolChain,
    canonicalize,
    cf_reduce_2x2_rational,
    enumerate_hnf_classes,
    reduce,
    reduce_step,
)
from .regular_rep import SymbolMatrix
from .verify import chain_equal_small, verify

__all__ = [
    "NormalSymbol", "NumberOrder", "OrderSpec", "Pivot", "PivotConfig", "ReduceConfig",
    "ReductionCertificate", "SymbolChain", "SymbolMatrix", "canonicalize", "cf_reduce_2x2_rational",
    "chain_equal_small", "enumerate_hnf_classes", "exhaustive_pivot", "find_pivot", "load_field",
    "load_order", "reduce", "reduce_step", "spanning_bound", "verify",
]
