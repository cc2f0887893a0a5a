"""Simulator for a pipelined silicon spin-qubit processor."""

__version__ = "0.1.0"

from .core import CONST, PhysConstants, process_fidelity  # noqa: E402,F401
from .errors import SpinPipeError  # noqa: E402,F401
