"""Pipelined execution: circuits, compiler, statevector check and run-time estimates."""

from .circuit import LogicalCircuit, code_block, random_circuit, simulate
from .compiler import CompileConfig, PipelineProgram, SiteTable, compile, run_statevector
from .runtime import (
    GateTimes,
    RuntimeEstimate,
    control_footprints,
    footprint,
    gate_time_table,
    schedule,
    vqe_runtime,
)

__all__ = [
    "LogicalCircuit", "code_block", "random_circuit", "simulate", "CompileConfig",
    "PipelineProgram", "SiteTable", "compile", "run_statevector", "GateTimes",
    "RuntimeEstimate", "control_footprints", "footprint", "gate_time_table", "schedule",
    "vqe_runtime",
]
