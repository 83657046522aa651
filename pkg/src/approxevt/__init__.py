"""Constructive approximate extremum search over Lipschitz function spaces."""
from .creal import CReal, cmax, cmin, from_rational, lt_witness
from .errors import (
    ApproxEVTError, CapExceeded, ConfigInvalid, DegenerateDiscount, DivergentRollout, DomainInset, EmptySet,
    IncompatibleValues, MaxIterExceeded, NoContraction, NotCovered, StateEscape,
)
from .metric import BoxSpace, FiniteSpace, finite_approximation, locate, regular_partition
from .funcspace import FunctionNet, LipschitzSpaceDesc, PWLFunction, build_net, enumerate_net, sup_dist
from .evt import approx_inf, approx_sup, net_min
from .kernels import BACKEND

__version__ = "0.1.0"

__all__ = [
    "CReal", "cmax", "cmin", "from_rational", "lt_witness",
    "ApproxEVTError", "CapExceeded", "ConfigInvalid", "DegenerateDiscount", "DivergentRollout", "DomainInset",
    "EmptySet", "IncompatibleValues", "MaxIterExceeded", "NoContraction", "NotCovered", "StateEscape",
    "BoxSpace", "FiniteSpace", "finite_approximation", "locate", "regular_partition",
    "FunctionNet", "LipschitzSpaceDesc", "PWLFunction", "build_net", "enumerate_net", "sup_dist",
    "approx_inf", "approx_sup", "net_min", "BACKEND",
]
