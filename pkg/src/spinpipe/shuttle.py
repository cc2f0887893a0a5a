"""Landau-Zener adiabaticity of charge shuttling and the global waveform schedule."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import CONST, PhysConstants
from .errors import SchedulingError
from .io import csv_text

MAXIMAL_SPACING = 5
MIN_SPACING = 3  # two empty sites between electrons


@dataclass(frozen=True)
class ShuttleSpec:
    t_ij: float
    A: float
    omega: float

    def __post_init__(self):
        if self.t_ij < 0 or self.A <= 0 or self.omega <= 0:
            raise ValueError("t_ij must be non-negative, A and omega positive")

    @classmethod
    def from_lever(cls, t_hz: float, alpha_lever: float, dV_range: float, omega: float,
                   const: PhysConstants = CONST) -> "ShuttleSpec":
        return cls(t_hz * const.h, ramp_amplitude(alpha_lever, dV_range, const), omega)


def ramp_amplitude(alpha_lever: float, dV_range: float, const: PhysConstants = CONST) -> float:
    """A = e alpha dV in joules."""
    return const.e_charge * alpha_lever * dV_range


def adiabaticity(t_ij: float, A: float, omega: float, const: PhysConstants = CONST) -> float:
    return t_ij**2 / (4.0 * A * const.hbar * omega)


def lz_probability(s: ShuttleSpec, const: PhysConstants = CONST) -> float:
    return float(np.exp(-2 * np.pi * adiabaticity(s.t_ij, s.A, s.omega, const)))


@dataclass(frozen=True)
class ShuttleTime:
    time: float
    omega: float

    @property
    def freq_hz(self) -> float:
        return self.omega / (2 * np.pi)


def min_shuttle_time(t_ij: float, A: float, P_max: float = 1e-4,
                     forbidden: Sequence[tuple[float, float]] = (),
                     const: PhysConstants = CONST) -> ShuttleTime:
    """Shortest drive period keeping the diabatic probability at or below ``P_max``.

    ``forbidden`` lists angular-frequency windows (e.g. valley-orbit
    resonances) the drive must avoid; the drive is slowed to the lower edge
    of any window containing the optimum.
    """
    if not 0 < P_max < 1:
        raise ValueError("P_max must lie in (0, 1)")
    if t_ij <= 0:
        return ShuttleTime(np.inf, 0.0)
    delta = -np.log(P_max) / (2 * np.pi)
    w = t_ij**2 / (4.0 * A * const.hbar * delta)
    for lo, hi in sorted(forbidden, reverse=True):
        if lo <= w <= hi:
            w = lo
    return ShuttleTime(2 * np.pi / w, w)


@dataclass
class Schedule:
    n_columns: int
    tau_s: float
    spacing: int
    phases: np.ndarray
    groups: np.ndarray
    occupancy: np.ndarray  # (steps, columns) bool

    def steady_occupied(self) -> np.ndarray:
        """Occupied columns at the final step."""
        return np.flatnonzero(self.occupancy[-1])

    @property
    def n_steps(self) -> int:
        return self.occupancy.shape[0]

    def min_gap(self) -> int:
        """Smallest distance between occupied columns over the whole timeline."""
        best = np.iinfo(int).max
        for row in self.occupancy:
            idx = np.flatnonzero(row)
            if idx.size > 1:
                best = min(best, int(np.diff(idx).min()))
        return best

    def to_csv(self, cfg: dict | None = None) -> str:
        rows = ((s, d, int(self.phases[d]), int(self.occupancy[s, d]))
                for s in range(self.n_steps) for d in range(self.n_columns))
        return csv_text(["timestep", "column", "phase", "occupied"], rows, cfg or {})


def _conveyor_timeline(n_columns: int, n_steps: int, period: int) -> np.ndarray:
    """Step electrons through columns driven by ``period`` bias groups.

    Group ``d mod period`` is the low (attracting) bias at steps
    ``s = d mod period``; an electron is injected whenever column 0 is low.
    """
    occ = np.zeros((n_steps, n_columns), dtype=bool)
    groups = np.arange(n_columns) % period
    electrons: list[int] = []
    for s in range(n_steps):
        low = s % period
        electrons = [d + 1 for d in electrons if d + 1 < n_columns]
        if groups[0] == low:
            electrons.insert(0, 0)
        if any(groups[d] != low for d in electrons):
            raise SchedulingError("electron left the low bias group")
        occ[s, electrons] = True
    return occ


def _group_timeline(n_columns: int, n_steps: int, period: int) -> np.ndarray:
    """Closed-form occupancy: column ``d`` is loaded at step ``s`` iff ``d = s mod period``."""
    d = np.arange(n_columns)[None, :]
    s = np.arange(n_steps)[:, None]
    return ((d % period) == (s % period)) & (d <= s)


def waveform_schedule(n_columns: int, tau_s: float = 10e-9, filling: str | int = "maximal",
                      n_steps: int | None = None) -> Schedule:
    """Drive-phase assignment and occupancy timeline for a row of gate columns.

    ``filling`` is ``"maximal"`` (one electron every fifth column) or an
    integer spacing ``k >= 3``.  ``phases`` is the three-waveform label
    ``d mod 3`` and ``groups`` the five-way ac-combination label ``d mod 5``.
    Electrons advance one column per step of length ``tau_s``.
    """
    if n_columns < 1:
        raise ValueError("n_columns must be at least 1")
    k = MAXIMAL_SPACING if filling == "maximal" else int(filling)
    if k < MIN_SPACING:
        raise SchedulingError(
            f"spacing {k} puts electrons within {k - 1} empty sites; need {MIN_SPACING - 1}"
        )
    n_steps = n_columns if n_steps is None else n_steps
    phases = np.arange(n_columns) % 3
    groups = np.arange(n_columns) % MAXIMAL_SPACING
    occ = _conveyor_timeline(n_columns, n_steps, k)
    if not np.array_equal(occ, _group_timeline(n_columns, n_steps, k)):
        raise SchedulingError("stepped and closed-form timelines disagree")
    sched = Schedule(n_columns, tau_s, k, phases, groups, occ)
    if sched.min_gap() < MIN_SPACING:
        raise SchedulingError("adjacent electrons in timeline")
    return sched
