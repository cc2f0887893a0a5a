"""Rabi dynamics, Stark-shift Z gates, frequency binning and initialization."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import CONST, PhysConstants
from .errors import ConstraintError, CoverageError

DEFAULT_VOLTS_PER_G = 615.0


@dataclass(frozen=True)
class RabiParams:
    omega0: float
    omega1: float
    nu: float
    varphi: float = 0.0
    frame: float = 0.0

    def __post_init__(self):
        if np.any(np.asarray(self.omega1) < 0):
            raise ValueError("omega1 must be non-negative")

    @property
    def detuning(self) -> float:
        return self.omega0 - self.nu

    @property
    def rabi_freq(self) -> float:
        return float(np.hypot(self.detuning, self.omega1))


def rotating_hamiltonian(p: RabiParams) -> np.ndarray:
    """Time-independent Hamiltonian (rad/s) in the frame of the drive."""
    d, w1, ph = p.detuning, p.omega1, p.varphi
    return 0.5 * np.array(
        [[d, w1 * np.exp(-1j * ph)], [w1 * np.exp(1j * ph), -d]], dtype=complex
    )


def lab_hamiltonian(p: RabiParams, t: float) -> np.ndarray:
    """Lab-frame Hamiltonian (rad/s) at time ``t``, with the frame rotation removed."""
    w = p.omega0 - p.frame
    a = (p.nu - p.frame) * t + p.varphi
    return 0.5 * np.array(
        [[w, p.omega1 * np.exp(-1j * a)], [p.omega1 * np.exp(1j * a), -w]], dtype=complex
    )


def rabi_unitary(p: RabiParams, t) -> np.ndarray:
    """Closed-form propagator from 0 to ``t`` in the frame rotating at ``p.frame``.

    Fields of ``p`` and ``t`` may be arrays; the result then has shape
    ``broadcast_shape + (2, 2)``.
    """
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("t must be non-negative")
    d = np.asarray(p.omega0, dtype=float) - p.nu
    w1 = np.asarray(p.omega1, dtype=float)
    om = np.hypot(d, w1)
    c = np.cos(0.5 * om * t)
    s = np.sin(0.5 * om * t)
    safe = np.where(om == 0, 1.0, om)
    sd, so = d / safe * s, w1 / safe * s
    a = 0.5 * (p.nu - p.frame) * t
    ph = p.varphi + a
    u00 = np.exp(-1j * a) * (c - 1j * sd)
    u11 = np.exp(1j * a) * (c + 1j * sd)
    u01 = -1j * so * np.exp(-1j * ph)
    u10 = -1j * so * np.exp(1j * ph)
    u00, u01, u10, u11 = np.broadcast_arrays(u00, u01, u10, u11)
    return np.stack([np.stack([u00, u01], -1), np.stack([u10, u11], -1)], -2)


def lab_frame_as_z_then_x90(p: RabiParams, t: float, atol: float = 1e-9) -> float:
    """Return ``phi`` with ``rabi_unitary(p, t) = Z(phi) X(omega1 t)`` (resonant, varphi = 0)."""
    if abs(p.detuning) > atol * max(1.0, abs(p.omega0)):
        raise ConstraintError("qubit is not resonant with its drive tone")
    return (p.nu - p.frame) * t


@dataclass(frozen=True)
class StarkSolve:
    delta_g: float
    dV_q: float
    dV_mu: float
    r_q: float
    n_q: int


def stark_shift_for_phase(
    phi_q: float,
    G_q: float,
    B0: float = 1.0,
    tau1Q: float = 1e-6,
    k_volts_per_g: float = DEFAULT_VOLTS_PER_G,
    alpha_ratio: float = 1.0,
    wrap: bool = True,
    const: PhysConstants = CONST,
) -> StarkSolve:
    """g-factor shift so that a qubit with offset ``G_q`` accrues ``phi_q`` in ``tau1Q``.

    Phases are relative to a spin with ``g = g_Si``.  With ``wrap`` the
    correction ``phi_q - 2 pi r_q`` is brought into ``(-pi, pi]`` so that
    ``|delta_g|`` never exceeds the pi-shift.
    """
    if tau1Q <= 0 or B0 <= 0:
        raise ValueError("tau1Q and B0 must be positive")
    scale = const.mu_B * B0 * tau1Q / const.hbar
    turns = G_q * scale / (2 * np.pi)
    n_q = int(np.floor(turns))
    r_q = float(turns - n_q)
    if r_q >= 1.0:  # rounding for tiny negative offsets
        n_q, r_q = n_q + 1, 0.0
    corr = phi_q - 2 * np.pi * r_q
    if wrap:
        corr = -((-corr + np.pi) % (2 * np.pi) - np.pi)
    dg = corr / scale
    dv_q, dv_mu = gate_voltage_for_shift(dg, k_volts_per_g, alpha_ratio)
    return StarkSolve(float(dg), dv_q, dv_mu, r_q, n_q)


def z_phase(G: float, B0: float, tau: float, const: PhysConstants = CONST) -> float:
    """Relative Z angle accrued by a spin with offset ``G`` over ``tau``."""
    return G * const.mu_B * B0 * tau / const.hbar


def gate_voltage_for_shift(
    delta_g: float, k_volts_per_g: float = DEFAULT_VOLTS_PER_G, alpha_ratio: float = 1.0
) -> tuple[float, float]:
    """Plunger shift and the mu-gate shift compensating it.

    ``alpha_ratio`` is alpha_qq / alpha_qmu.
    """
    if k_volts_per_g <= 0:
        raise ValueError("k_volts_per_g must be positive")
    if alpha_ratio == 0:
        raise ConstraintError("lever-arm ratio must be nonzero")
    dv = k_volts_per_g * delta_g
    return float(dv), float(-alpha_ratio * dv)


def delta_g_pi(B0: float = 1.0, tau1Q: float = 1e-6, const: PhysConstants = CONST) -> float:
    return np.pi * const.hbar / (const.mu_B * B0 * tau1Q)


@dataclass(frozen=True)
class BinAssignment:
    bin_index: int
    delta_g: float
    residual_hz: float


@dataclass
class BinPlan:
    N1: int
    g_bin: float
    bin_spacing: float
    bins: list[tuple[int, float]] = field(default_factory=list)
    assignments: list[BinAssignment] = field(default_factory=list)

    @property
    def g_range(self) -> float:
        return (self.N1 + 0.5) * self.g_bin


def binning_plan(
    G_list,
    B0: float = 1.0,
    delta_g_pi_: float | None = None,
    N1: int = 140,
    const: PhysConstants = CONST,
) -> BinPlan:
    """Assign each qubit to the nearest comb tone ``i g_bin`` with ``g_bin = 2 delta_g_pi``."""
    dgp = delta_g_pi(B0, const=const) if delta_g_pi_ is None else delta_g_pi_
    g_bin = 2.0 * dgp
    spacing = g_bin * const.mu_B * B0 / const.h
    bins = [(i, i * spacing) for i in range(-N1, N1 + 1)]
    plan = BinPlan(N1, g_bin, spacing, bins)
    lim = (N1 + 0.5) * g_bin
    for q, G in enumerate(np.asarray(G_list, dtype=float).ravel()):
        if abs(G) > lim * (1 + 1e-12):
            raise CoverageError(f"qubit {q} with G={G:.4g} lies outside +/-{lim:.4g}")
        i = int(np.clip(np.rint(G / g_bin), -N1, N1))
        plan.assignments.append(BinAssignment(i, float(i * g_bin - G), 0.0))
    return plan


def b1_for_gate_time(
    tau1Q: float, convention: str = "rwa_half", const: PhysConstants = CONST
) -> float:
    """Drive amplitude giving a pi rotation in ``tau1Q``.

    ``rwa_half``: omega1 = g mu_B B1 / (2 hbar).  ``full``: omega1 = g mu_B B1 / hbar.
    """
    if tau1Q <= 0:
        raise ValueError("tau1Q must be positive")
    w1 = np.pi / tau1Q
    factor = {"rwa_half": 2.0, "full": 1.0}[convention]
    return factor * const.hbar * w1 / (const.g_Si * const.mu_B)


def omega1_from_b1(B1: float, g: float | None = None, convention: str = "rwa_half",
                   const: PhysConstants = CONST) -> float:
    g = const.g_Si if g is None else g
    factor = {"rwa_half": 2.0, "full": 1.0}[convention]
    return g * const.mu_B * B1 / (factor * const.hbar)


def init_fidelity(
    T: float, B0: float = 1.0, convention: str = "half_zeeman", const: PhysConstants = CONST
) -> float:
    if T <= 0:
        raise ValueError("temperature must be positive")
    ez = const.g_Si * const.mu_B * B0
    div = {"half_zeeman": 2.0, "full_zeeman": 1.0}[convention]
    return float(1.0 - np.exp(-ez / (div * const.k_B * T)))


def power_scaling_check(B1_single: float, B1_bin: float, n_tones: int) -> float:
    if B1_single <= 0 or B1_bin <= 0 or n_tones <= 0:
        raise ValueError("inputs must be positive")
    return n_tones * abs(B1_bin) ** 2 / abs(B1_single) ** 2


def bin_x90(
    bin_index: int,
    B0: float = 1.0,
    tau1Q: float = 1e-6,
    const: PhysConstants = CONST,
) -> tuple[RabiParams, float, float]:
    """Resonant pi/2 drive for a qubit tuned to comb tone ``bin_index``.

    Returns the Rabi parameters in the g_Si frame, the pulse length and the
    Z angle ``phi_i`` of the ``Z(phi_i) X(pi/2)`` decomposition.
    """
    g_bin = 2.0 * delta_g_pi(B0, tau1Q, const)
    g_q = const.g_Si + bin_index * g_bin
    frame = const.zeeman_rate(const.g_Si, B0)
    w0 = const.zeeman_rate(g_q, B0)
    b1 = b1_for_gate_time(tau1Q, const=const) * const.g_Si / g_q
    w1 = omega1_from_b1(b1, g_q, const=const)
    t0 = 0.5 * np.pi / w1
    p = RabiParams(w0, w1, w0, 0.0, frame)
    return p, t0, lab_frame_as_z_then_x90(p, t0)
