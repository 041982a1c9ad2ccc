"""Derandomization workbench: hard functions, NW designs and generator,
random restrictions, NOF protocols and the experiments tying them together.

Set ``NWBENCH_NUMBA=0`` to force the pure-numpy kernels and
``NWBENCH_WORKERS`` to fan trials out over processes.
"""
from ._accel import backend
from .boolcore import Cell, Restriction, TruthTable
from .circuits import CircuitSpec, SparseF2Poly, TopGate
from .designs import Design, nw_params
from .errors import (
    CapError, ConstructionError, DimensionError, NWBenchError, ParamError, SpecError, WidthError,
)
from .hardfn import GIPParams, RWParams
from .nwgen import HardFunctionHandle, NWGenerator

__version__ = "0.1.0"
