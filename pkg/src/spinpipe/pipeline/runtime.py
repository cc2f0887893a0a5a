"""Gate-time tables, pipelined versus sequential run times, and footprints."""

from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np

from ..errors import SchedulingError
from ..shuttle import MIN_SPACING
from ..singlequbit import init_fidelity

SHUTTLES_PER_STEP = 3
READOUT_FIDELITY = 0.993
READOUT_TIME = 4e-6


@dataclass(frozen=True)
class GateTimes:
    tau1Q: float = 1e-6
    tau2Q: float = 1e-6
    tau_s: float = 10e-9

    def __post_init__(self):
        if self.tau1Q <= 0 or self.tau2Q <= 0 or self.tau_s < 0:
            raise ValueError("gate times must be positive and tau_s non-negative")


PRESETS = {
    "paper-1us": GateTimes(1e-6, 1e-6, 10e-9),
    "paper-0.1us": GateTimes(0.1e-6, 0.1e-6, 10e-9),
}


@dataclass(frozen=True)
class RuntimeEstimate:
    tau_1X: float
    tau_2P: float
    tau_2S: float
    tau_config: float = float("nan")
    tau_run: float = float("nan")
    speedup: float = float("nan")
    tau_config_seq: float = float("nan")
    tau_run_seq: float = float("nan")

    def as_dict(self) -> dict:
        return {k: float(v) for k, v in self.__dict__.items()}


def gate_time_table(tau1Q: float = 1e-6, tau2Q: float = 1e-6, tau_s: float = 10e-9
                    ) -> RuntimeEstimate:
    """Durations of a Y-type single-qubit step, a phase-type and a SWAP-type two-qubit step."""
    GateTimes(tau1Q, tau2Q, tau_s)
    return RuntimeEstimate(
        tau_1X=3 * tau1Q + 8 * tau_s,
        tau_2P=tau2Q + tau1Q + 3 * tau_s,
        tau_2S=3 * tau2Q + 2 * tau1Q + 12 * tau_s,
    )


def step_times(times: GateTimes) -> tuple[float, float]:
    """Per-step durations (single-qubit layer, two-qubit layer) including shuttling."""
    tab = gate_time_table(times.tau1Q, times.tau2Q, times.tau_s)
    s = SHUTTLES_PER_STEP * times.tau_s
    return times.tau1Q + s, tab.tau_2S + s


def sequential_config_time(d1q: int, d2q: int, n_reps: float, times: GateTimes) -> float:
    t1, t2 = step_times(times)
    return (d1q * t1 + d2q * t2) * n_reps


def pipelined_config_time(d1q: int, d2q: int, n_reps: float, times: GateTimes) -> float:
    t1, t2 = step_times(times)
    return (d1q + 2 * n_reps) * t1 + (d2q + 2 * n_reps) * t2


def vqe_runtime(d1q: int = 1174, d2q: int = 2196, n_reps: float = 1.25e5,
                n_configs: int = 3900, n_iters: int = 100,
                times: GateTimes = GateTimes()) -> RuntimeEstimate:
    """Per-configuration and total eigensolver run times in both execution modes."""
    if min(d1q, d2q) < 0 or n_reps <= 0 or n_configs <= 0 or n_iters <= 0:
        raise ValueError("depths must be non-negative and counts positive")
    tab = gate_time_table(times.tau1Q, times.tau2Q, times.tau_s)
    seq = sequential_config_time(d1q, d2q, n_reps, times)
    pipe = pipelined_config_time(d1q, d2q, n_reps, times)
    k = n_configs * n_iters
    return RuntimeEstimate(tab.tau_1X, tab.tau_2P, tab.tau_2S, pipe, k * pipe, seq / pipe,
                           seq, k * seq)


# discrete-event timeline ------------------------------------------------------

@dataclass
class Timeline:
    """Occupancy events ``(tick, instance, column)``; columns -1 and D are init and readout."""

    depth: int
    n_reps: int
    entry_stride: int
    events: list[tuple[int, int, int]]
    makespan_ticks: int

    def min_site_gap(self, sites_per_tick: int = SHUTTLES_PER_STEP + 1) -> int:
        """Smallest physical-site distance between simultaneously moving instances."""
        by_tick: dict[int, list[int]] = {}
        for tick, _, col in self.events:
            by_tick.setdefault(tick, []).append(col)
        best = np.iinfo(int).max
        for cols in by_tick.values():
            if len(cols) > 1:
                c = np.sort(cols)
                best = min(best, int(np.diff(c).min()) * sites_per_tick)
        return best


def simulate_stream(depth: int, n_reps: int, entry_stride: int = 2) -> Timeline:
    """Event-driven run of ``n_reps`` instances through ``depth`` gate columns.

    An instance is initialized, advances one column per tick when the next
    column is free, and is read out.  New instances are injected every
    ``entry_stride`` ticks.
    """
    if depth < 0 or n_reps < 1 or entry_stride < 1:
        raise ValueError("need depth >= 0, n_reps >= 1 and entry_stride >= 1")
    busy: dict[tuple[int, int], int] = {}
    events: list[tuple[int, int, int]] = []
    heap = [(entry_stride * k, k, -1) for k in range(n_reps)]
    heapq.heapify(heap)
    end = 0
    while heap:
        tick, k, col = heapq.heappop(heap)
        if (tick, col) in busy:
            heapq.heappush(heap, (tick + 1, k, col))
            continue
        busy[(tick, col)] = k
        events.append((tick, k, col))
        if col < depth:
            heapq.heappush(heap, (tick + 1, k, col + 1))
        else:
            end = max(end, tick + 1)
    events.sort()
    return Timeline(depth, n_reps, entry_stride, events, end)


@dataclass(frozen=True)
class ScheduleResult:
    ticks_1q: int
    ticks_2q: int
    makespan: float
    formula: float
    sequential: float
    min_site_gap: int


def schedule(d1q: int, d2q: int, n_reps: int, times: GateTimes = GateTimes(),
             filling: int = 2) -> ScheduleResult:
    """Simulated makespan of the single- and two-qubit streams, next to the closed forms."""
    if filling * (SHUTTLES_PER_STEP + 1) < MIN_SPACING:
        raise SchedulingError("entry stride violates the shuttle adjacency rule")
    t1, t2 = step_times(times)
    a = simulate_stream(d1q, n_reps, filling)
    b = simulate_stream(d2q, n_reps, filling)
    gap = min(a.min_site_gap(), b.min_site_gap())
    if gap < MIN_SPACING:
        raise SchedulingError(f"instances only {gap} sites apart")
    mk = a.makespan_ticks * t1 + b.makespan_ticks * t2
    return ScheduleResult(a.makespan_ticks, b.makespan_ticks, mk,
                          pipelined_config_time(d1q, d2q, n_reps, times),
                          sequential_config_time(d1q, d2q, n_reps, times), gap)


# endpoints and footprints -----------------------------------------------------

@dataclass(frozen=True)
class Endpoints:
    init_fidelity: float
    readout_fidelity: float
    readout_time: float

    @property
    def spam_fidelity(self) -> float:
        return self.init_fidelity * self.readout_fidelity


def endpoints(T: float = 0.073, B0: float = 1.0, readout_fidelity: float = READOUT_FIDELITY,
              readout_time: float = READOUT_TIME) -> Endpoints:
    return Endpoints(init_fidelity(T, B0), readout_fidelity, readout_time)


def footprint(n_qubits: int, depth: int, pipe_width: float = 340e-9,
              step_length: float = 190e-9) -> tuple[float, float]:
    if n_qubits <= 0 or depth <= 0 or pipe_width <= 0 or step_length <= 0:
        raise ValueError("inputs must be positive")
    return n_qubits * pipe_width, depth * step_length


@dataclass(frozen=True)
class ControlFootprint:
    resistor_length: float
    capacitance: float
    capacitor_area: float
    capacitor_side: float
    column_length: float
    column_width: float
    cutoff: float


def control_footprints(R: float = 10e3, rho_sheet: float = 100.0, trace_width: float = 50e-9,
                       f_cutoff: float = 100e3, cap_density: float = 1.0,
                       n_qubits_column: int = 50) -> ControlFootprint:
    """On-chip RC filter sizes per qubit and per gate column.

    ``cap_density`` is in F/m^2 (1 F/m^2 = 1 pF/um^2).  The column is
    ``n_qubits_column`` capacitor squares long and one square plus the
    resistor trace wide.
    """
    if min(R, rho_sheet, trace_width, f_cutoff, cap_density) <= 0 or n_qubits_column <= 0:
        raise ValueError("inputs must be positive")
    length = R / rho_sheet * trace_width
    C = 1.0 / (2 * np.pi * R * f_cutoff)
    area = C / cap_density
    side = float(np.sqrt(area))
    return ControlFootprint(length, C, area, side, n_qubits_column * side,
                            side + trace_width, 1.0 / (2 * np.pi * R * C))
