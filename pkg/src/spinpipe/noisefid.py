"""Seeded Monte Carlo gate-fidelity maps.

Each noise source draws its standard normals from a stream keyed by
``(seed, source tag)``, so a map is a pure function of its inputs and
seed, independent of evaluation order.  The same normals are reused across the
sigma axes of a map (common random numbers), which keeps trends smooth.
Draws are clipped at +/-6 sigma and clip events are counted.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import CONST, PhysConstants, Z, X, process_fidelity
from .engineer import GateTarget, TargetKind, sample_g_pair, solve_native_gate
from .errors import ConstraintError, SolverError
from .io import csv_text, json_text
from .singlequbit import DEFAULT_VOLTS_PER_G, RabiParams, bin_x90, omega1_from_b1, rabi_unitary
from .twoqubit import (
    ExchangeParams,
    GateKind,
    native_angles,
    native_from_angles,
    reference_gate,
    zz,
)

CLIP = 6.0

_TAG = {"G": 1, "tau": 2, "V": 3, "tij": 4, "B1": 5, "tij2": 6}


@dataclass(frozen=True)
class NoiseModel:
    sigma_G: float = 1e-3 * CONST.g_Si
    sigma_tau: float = 0.0
    sigma_V: float = 0.0
    sigma_tij_rel: float = 0.0
    sigma_B1: float = 0.0
    n_samples: int = 1000
    seed: int = 0

    def __post_init__(self):
        for k in ("sigma_G", "sigma_tau", "sigma_V", "sigma_tij_rel", "sigma_B1"):
            if getattr(self, k) < 0:
                raise ValueError(f"{k} must be non-negative")
        if self.n_samples < 1:
            raise ValueError("n_samples must be at least 1")


@dataclass
class FidelityMap:
    axis1_name: str
    axis1: np.ndarray
    axis2_name: str
    axis2: np.ndarray
    values: np.ndarray
    stderr: np.ndarray
    meta: dict = field(default_factory=dict)

    def rows(self):
        for i, a in enumerate(self.axis1):
            for j, b in enumerate(self.axis2):
                yield (float(a), float(b), float(self.values[i, j]), float(self.stderr[i, j]))

    def to_csv(self, cfg: dict | None = None) -> str:
        return csv_text([self.axis1_name, self.axis2_name, "mean", "stderr"], self.rows(),
                        cfg or {})

    def to_json(self, cfg: dict | None = None) -> str:
        return json_text({
            "axis1": {"name": self.axis1_name, "values": self.axis1},
            "axis2": {"name": self.axis2_name, "values": self.axis2},
            "mean": self.values, "stderr": self.stderr, "meta": self.meta,
        }, cfg or {})


class _Normals:
    """Counter-keyed standard normals with clipping bookkeeping."""

    def __init__(self, seed: int):
        self.seed = int(seed)
        self.clipped = 0

    def draw(self, tag: str, n: int, *key: int) -> np.ndarray:
        rng = np.random.default_rng([self.seed, _TAG[tag], *map(int, key)])
        z = rng.standard_normal(n)
        over = np.abs(z) > CLIP
        self.clipped += int(over.sum())
        return np.clip(z, -CLIP, CLIP)


def _mean_se(f: np.ndarray) -> tuple[float, float]:
    n = f.size
    se = float(f.std(ddof=1) / np.sqrt(n)) if n > 1 else 0.0
    return float(f.mean()), se


def z_gate_samples(sigma_tau: float, sigma_V: float, nm: NoiseModel, *, phi: float = np.pi,
                   tau1Q: float = 1e-6, B0: float = 1.0,
                   k_volts_per_g: float = DEFAULT_VOLTS_PER_G,
                   const: PhysConstants = CONST, normals: _Normals | None = None) -> np.ndarray:
    """Per-sample process fidelities of a Stark-shift Z(phi) gate."""
    nz = normals or _Normals(nm.seed)
    n = nm.n_samples
    G = nm.sigma_G * nz.draw("G", n)
    scale = const.mu_B * B0 * tau1Q / const.hbar
    turns = G * scale / (2 * np.pi)
    corr = phi - 2 * np.pi * (turns - np.floor(turns))
    corr = -((-corr + np.pi) % (2 * np.pi) - np.pi)
    dg = corr / scale
    dt = sigma_tau * nz.draw("tau", n)
    dV = sigma_V * nz.draw("V", n)
    theta = (G + dg + dV / k_volts_per_g) * const.mu_B * B0 * (tau1Q + dt) / const.hbar
    U = np.zeros((n, 2, 2), dtype=complex)
    U[:, 0, 0] = np.exp(-0.5j * theta)
    U[:, 1, 1] = np.exp(0.5j * theta)
    return process_fidelity(Z(phi), U)


def z_gate_fidelity_map(grid_tau, grid_V, nm: NoiseModel = NoiseModel(), **kw) -> FidelityMap:
    grid_tau = np.asarray(grid_tau, dtype=float)
    grid_V = np.asarray(grid_V, dtype=float)
    vals = np.zeros((grid_tau.size, grid_V.size))
    se = np.zeros_like(vals)
    nz = _Normals(nm.seed)
    for i, st in enumerate(grid_tau):
        for j, sv in enumerate(grid_V):
            vals[i, j], se[i, j] = _mean_se(z_gate_samples(st, sv, nm, normals=nz, **kw))
    return FidelityMap("sigma_tau_s", grid_tau, "sigma_V_V", grid_V, vals, se,
                       {"clipped": nz.clipped, "n_samples": nm.n_samples})


def x90_samples(sigma_B1: float, sigma_tau: float, bin_index: int, nm: NoiseModel, *,
                B0: float = 1.0, tau1Q: float = 1e-6, const: PhysConstants = CONST,
                normals: _Normals | None = None) -> np.ndarray:
    nz = normals or _Normals(nm.seed)
    n = nm.n_samples
    p, t0, phi_i = bin_x90(bin_index, B0, tau1Q, const)
    g_q = p.omega0 * const.hbar / (const.mu_B * B0)
    b1 = omega1_from_b1(1.0, g_q, const=const)  # omega1 per tesla
    B1_nom = p.omega1 / b1
    w1 = b1 * (B1_nom + sigma_B1 * nz.draw("B1", n))
    t = np.maximum(t0 + sigma_tau * nz.draw("tau", n), 0.0)
    noisy = rabi_unitary(RabiParams(p.omega0, np.abs(w1), p.nu, p.varphi, p.frame), t)
    ideal = Z(phi_i) @ X(np.pi / 2)
    return process_fidelity(ideal, noisy)


def x90_fidelity_map(grid_sigma_B1, grid_sigma_tau, bin_index: int = 10,
                     nm: NoiseModel = NoiseModel(), N1: int = 140, **kw) -> FidelityMap:
    if abs(bin_index) > N1:
        raise ConstraintError(f"bin {bin_index} outside +/-{N1}")
    gb = np.asarray(grid_sigma_B1, dtype=float)
    gt = np.asarray(grid_sigma_tau, dtype=float)
    vals = np.zeros((gb.size, gt.size))
    se = np.zeros_like(vals)
    nz = _Normals(nm.seed)
    for i, sb in enumerate(gb):
        for j, st in enumerate(gt):
            vals[i, j], se[i, j] = _mean_se(x90_samples(sb, st, bin_index, nm, normals=nz, **kw))
    return FidelityMap("sigma_B1_T", gb, "sigma_tau_s", gt, vals, se,
                       {"clipped": nz.clipped, "bin_index": bin_index,
                        "n_samples": nm.n_samples})


TWOQ_KINDS = ("ISING", "GIVENS_SWAP", "SWAP_ROTATION")


def _perturb(p: ExchangeParams, factor: float) -> ExchangeParams:
    return ExchangeParams(p.t_ij * max(factor, 0.0), p.dK, p.eps, p.E_Z, p.dE_Z)


def two_qubit_fidelity_map(kind: str, grid_angle, grid_sigma_tij_rel,
                           nm: NoiseModel = NoiseModel(), *, tau2Q: float = 1e-6,
                           B0: float = 1.0, dK: float = 1e-3 * CONST.e_charge,
                           const: PhysConstants = CONST) -> FidelityMap:
    """Composite-gate fidelity versus target angle and relative tunnel-coupling noise.

    ``angle`` is the Ising angle, the Givens-like chi, or the SWAP rotation
    theta depending on ``kind``.  g-factor pairs are drawn per sample and
    shared by every cell; t_ij is perturbed per sample and per native gate.
    """
    if kind not in TWOQ_KINDS:
        raise ValueError(f"kind must be one of {TWOQ_KINDS}")
    ga = np.asarray(grid_angle, dtype=float)
    gs = np.asarray(grid_sigma_tij_rel, dtype=float)
    n = nm.n_samples
    nz = _Normals(nm.seed)
    z1 = nz.draw("tij", n)
    z2 = nz.draw("tij2", n)
    vals = np.zeros((ga.size, gs.size))
    se = np.zeros_like(vals)
    errors = np.zeros(ga.size, dtype=int)
    mean_t = np.zeros(ga.size)
    pairs = [sample_g_pair(nm.seed, s, nm.sigma_G) for s in range(n)]
    swap_cache = None
    for i, ang in enumerate(ga):
        if kind == "SWAP_ROTATION":
            if swap_cache is None:
                swap_cache = _solve_all(TargetKind.GIVENS_LIKE, np.pi / 4, pairs, tau2Q, B0,
                                        dK, const)
            solves = swap_cache
        else:
            tk = TargetKind.ISING if kind == "ISING" else TargetKind.GIVENS_LIKE
            solves = _solve_all(tk, abs(ang) if tk is TargetKind.GIVENS_LIKE else ang,
                                pairs, tau2Q, B0, dK, const)
        ok = [s for s in solves if s is not None]
        errors[i] = len(solves) - len(ok)
        mean_t[i] = np.mean([s.t_ij for s in ok]) / const.h if ok else np.nan
        for j, sig in enumerate(gs):
            f = []
            for s_idx, sol in enumerate(solves):
                if sol is None:
                    continue
                p1 = _perturb(sol.params, 1.0 + sig * z1[s_idx])
                if kind == "SWAP_ROTATION":
                    p2 = _perturb(sol.params, 1.0 + sig * z2[s_idx])
                    a0 = native_angles(sol.params, sol.tau_realized, const)
                    U1 = native_from_angles(native_angles(p1, sol.tau_realized, const))
                    U2 = native_from_angles(native_angles(p2, sol.tau_realized, const))
                    L = _swap_rotation_noisy(ang, a0, U1, U2)
                    f.append(process_fidelity(reference_gate(GateKind.SWAP_THETA, ang), L))
                else:
                    c = sol.composite(p1 if sig > 0 else None, const)
                    f.append(c.fidelity)
            vals[i, j], se[i, j] = _mean_se(np.asarray(f)) if f else (np.nan, np.nan)
    return FidelityMap("angle_rad", ga, "sigma_tij_rel", gs, vals, se,
                       {"kind": kind, "solver_errors": errors.tolist(),
                        "mean_t_ij_hz": mean_t.tolist(), "clipped": nz.clipped,
                        "n_samples": n})


def _swap_rotation_noisy(theta, a0, U1, U2):
    s = 1.0 if a0.chi >= 0 else -1.0
    ising = reference_gate(GateKind.ISING, -theta - 2 * a0.alpha - 2 * a0.phi)
    return zz(-2 * a0.phi_Z) @ ising @ U2 @ zz(s * theta, -s * theta) @ U1


def _solve_all(kind, angle, pairs, tau2Q, B0, dK, const):
    out = []
    for gi, gj in pairs:
        try:
            out.append(solve_native_gate(GateTarget(kind, angle, tau2Q, B0, dK, 0.0, gi, gj),
                                         const=const))
        except (SolverError, ConstraintError):
            out.append(None)
    return out


__all__ = [
    "NoiseModel", "FidelityMap", "z_gate_samples", "z_gate_fidelity_map", "x90_samples",
    "x90_fidelity_map", "two_qubit_fidelity_map",
]
