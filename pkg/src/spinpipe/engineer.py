"""Solve exchange parameters that realize a target gate in a fixed time slot.

The solver follows a three-stage recipe:

1. pick the ratio ``|x| = |Delta/J|`` from the target angle and the number
   of extra native rotations ``n`` (scanning ``n`` upward until the native
   duration reaches the slot ``tau2Q``);
2. fine-tune the Zeeman difference with a g-factor shift on qubit ``j`` so
   the native duration matches the slot;
3. solve the tunnel coupling exactly so that the full ``Delta_ij / J_ij``
   equals ``x``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.optimize import minimize_scalar

from .core import CONST, PhysConstants
from .errors import ConstraintError, SolverError
from .twoqubit import (
    Composite,
    ExchangeParams,
    J_s,
    compose_cphase,
    compose_givens_swap,
    compose_ising,
    exchange_strength,
    native_angles,
    native_from_angles,
    omega_ij,
    zz,
)

log = logging.getLogger(__name__)

DG_MAX = 1e-4
GRID_POINTS = 10_001
N_MAX = 100_000


class TargetKind(str, Enum):
    CPHASE = "CPHASE"
    ISING = "ISING"
    GIVENS_LIKE = "GIVENS_LIKE"


@dataclass(frozen=True)
class GateTarget:
    kind: TargetKind
    angle: float
    tau2Q: float = 1e-6
    B0: float = 1.0
    dK: float = 1e-3 * CONST.e_charge
    eps: float = 0.0
    G_i: float = 0.0
    G_j: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", TargetKind(self.kind))
        if self.tau2Q <= 0:
            raise ValueError("tau2Q must be positive")


@dataclass
class NativeGateSolve:
    kind: TargetKind
    x: float
    n: int
    J_ij: float
    t_ij: float
    delta_g: float
    tau_realized: float
    delta_tau: float
    params: ExchangeParams
    angle: float
    k: int | None = None
    fallbacks: list[str] = field(default_factory=list)

    @property
    def chi(self) -> float:
        return float(np.arctan(self.x))

    @property
    def phi(self) -> float:
        off = np.pi / 2 if self.kind is TargetKind.GIVENS_LIKE else np.pi
        return off + 2 * np.pi * self.n

    def composite(self, params: ExchangeParams | None = None,
                  const: PhysConstants = CONST) -> Composite:
        """Composite gate at the realized time.

        With ``params`` the native runs with perturbed exchange parameters
        while the Z wrappers and target stay at their nominal values.
        """
        fn = {TargetKind.CPHASE: compose_cphase, TargetKind.ISING: compose_ising,
              TargetKind.GIVENS_LIKE: compose_givens_swap}[self.kind]
        nominal = fn(native_angles(self.params, self.tau_realized, const))
        if params is None:
            return nominal
        a = native_angles(params, self.tau_realized, const)
        U = zz(*nominal.wrappers["post"]) @ native_from_angles(a)
        return Composite(U, nominal.target, nominal.wrappers, a)


def tij_for_J(J: float, dK: float, eps: float = 0.0) -> float:
    """Tunnel coupling giving exchange ``J`` in the small Zeeman-difference limit."""
    if J < 0:
        raise ValueError("J must be non-negative")
    if abs(eps) >= dK:
        raise ValueError("|eps| must be below dK")
    return float(np.sqrt(J * (dK**2 - eps**2) / (2 * dK)))


def _normalize_angle(t: GateTarget) -> float:
    a = float(t.angle)
    if t.kind is TargetKind.CPHASE:
        if a <= 0:
            a = a % (2 * np.pi)
        if np.isclose(a % (2 * np.pi), 0.0, atol=1e-12) or np.isclose(
            a % (2 * np.pi), 2 * np.pi, atol=1e-12
        ):
            raise ConstraintError("CPhase angle 0 or 2 pi is degenerate")
    elif t.kind is TargetKind.ISING:
        a = a % (2 * np.pi)
        if a == 0.0:
            a = 2 * np.pi
        if np.isclose(a, np.pi, atol=1e-12):
            raise ConstraintError("Ising angle pi is degenerate")
    else:
        if abs(a) < 1e-12 or abs(abs(a) - np.pi / 2) < 1e-12 or abs(a) > np.pi / 2:
            raise ConstraintError("Givens-like chi must lie strictly inside (0, pi/2)")
    return a


def abs_x_for(kind: TargetKind, angle: float, n: int) -> tuple[float | None, int | None]:
    """``|x|`` realizing ``angle`` with ``n`` extra rotations, or None if inadmissible."""
    if kind is TargetKind.GIVENS_LIKE:
        return abs(np.tan(angle)), None
    phi = np.pi + 2 * np.pi * n
    if kind is TargetKind.CPHASE:
        if angle > 2 * phi:
            return None, None
        return float(np.sqrt(4 * phi**2 - angle**2) / angle), None
    k = n // 2
    A = angle + (2 * k - 1) * np.pi
    if not (0 < A <= phi):
        return None, k
    return float(np.sqrt(phi**2 - A**2) / A), k


def _tau(phi: float, dE: float, ax: float, hbar: float) -> float:
    # shortcut Delta = dE, J = |dE| / |x|
    return phi * hbar / (abs(dE) * np.sqrt(1.0 + ax**-2))


def _admissible(kind: TargetKind, angle: float, n: int, alt_k: bool = False):
    """Yield ``(|x|, k)`` options for ``n``; ``alt_k`` adds non-default Ising branches."""
    ax, k = abs_x_for(kind, angle, n)
    if ax is not None and ax > 0.0:
        yield ax, k
    if alt_k and kind is TargetKind.ISING:
        phi = np.pi + 2 * np.pi * n
        for kk in range(0, n + 2):
            if kk == n // 2:
                continue
            A = angle + (2 * kk - 1) * np.pi
            if 0 < A < phi:
                yield float(np.sqrt(phi**2 - A**2) / A), kk


def solve_native_gate(
    t: GateTarget, dg_max: float = DG_MAX, const: PhysConstants = CONST,
    tau_tol: float | None = None,
) -> NativeGateSolve:
    """Solve (x, n, J, t_ij, delta_g) for ``t``.

    The rotation count follows the scan rule (increase ``n`` until the
    native duration reaches ``tau2Q``, keep the closer of the last two).
    If g-factor fine-tuning cannot close the remaining gap, other
    admissible candidates are tried in order of their gate-time mismatch
    and each fallback is logged.
    """
    angle = _normalize_angle(t)
    kind = t.kind
    mub = const.mu_B * t.B0
    dE0 = (t.G_j - t.G_i) * mub
    if dE0 == 0.0:
        raise SolverError("zero Zeeman difference requires infinite exchange")
    hbar = const.hbar
    off = np.pi / 2 if kind is TargetKind.GIVENS_LIKE else np.pi
    tol = 1e-3 * t.tau2Q if tau_tol is None else tau_tol
    fallbacks: list[str] = []

    prev = last = None
    for n in range(N_MAX):
        opts = list(_admissible(kind, angle, n))
        if not opts:
            fallbacks.append(f"n={n} inadmissible")
            log.debug("n=%d inadmissible for %s angle %.6g", n, kind.value, angle)
            continue
        ax, k = opts[0]
        cur = (n, ax, k, _tau(off + 2 * np.pi * n, dE0, ax, hbar))
        if cur[3] >= t.tau2Q:
            last = cur
            break
        prev = cur
    if last is None:
        raise SolverError("no admissible rotation count reaches the gate time")
    ordered = [last] if prev is None else sorted(
        (last, prev), key=lambda c: abs(c[3] - t.tau2Q))
    extra = []
    for n in range(max(0, last[0] - 3), last[0] + 4):
        for ax, k in _admissible(kind, angle, n, alt_k=True):
            c = (n, ax, k, _tau(off + 2 * np.pi * n, dE0, ax, hbar))
            if all(c[:3] != o[:3] for o in ordered):
                extra.append(c)
    extra.sort(key=lambda c: abs(c[3] - t.tau2Q))

    sgn = np.sign(dE0)
    lo, hi = -dg_max, dg_max
    lim = -dE0 / mub  # delta_g that would null the Zeeman difference
    if sgn > 0 and lim > lo:
        lo = lim * (1 - 1e-9)
    if sgn < 0 and lim < hi:
        hi = lim * (1 - 1e-9)

    residual = np.inf
    for idx, (n, ax, k, _) in enumerate(ordered + extra):
        phi = off + 2 * np.pi * n
        dg, residual = _fine_tune(phi, dE0, ax, t.tau2Q, lo, hi, mub, hbar)
        if residual <= tol:
            break
        msg = f"n={n} k={k} residual {residual:.3g} s"
        fallbacks.append(msg)
        log.info("fallback after %s", msg)
    else:
        raise SolverError(
            f"g-factor range +/-{dg_max:g} cannot reach the gate time "
            f"(best residual {residual:.3g} s)"
        )

    dE = dE0 + dg * mub
    x = float(sgn * ax)
    params = _exact_params(t, dE, x, const)
    J = exchange_strength(params)
    tau_r = phi / omega_ij(params, const)
    return NativeGateSolve(kind, x, n, J, params.t_ij, dg, float(tau_r),
                           float(abs(t.tau2Q - tau_r)), params, angle, k, fallbacks)


def _fine_tune(phi, dE0, ax, tau2Q, lo, hi, mub, hbar):
    """Grid search plus bounded refinement of the g-factor shift on qubit j."""

    def err(dg):
        return np.abs(tau2Q - _tau(phi, dE0 + dg * mub, ax, hbar))

    grid = np.linspace(lo, hi, GRID_POINTS)
    e = err(grid)
    i = int(np.argmin(e))
    a, b = grid[max(i - 1, 0)], grid[min(i + 1, GRID_POINTS - 1)]
    dg, best = float(grid[i]), float(e[i])
    if b > a:
        res = minimize_scalar(err, bounds=(a, b), method="bounded",
                              options={"xatol": 1e-16, "maxiter": 500})
        if res.fun <= best:
            dg, best = float(res.x), float(res.fun)
    return dg, best


def _exact_params(t: GateTarget, dE: float, x: float, const: PhysConstants) -> ExchangeParams:
    """Tunnel coupling with exact ``Delta_ij / J_ij = x``.

    Every perturbative term scales as ``t_ij^2``, so the ratio condition is
    linear in ``u = t_ij^2``.
    """
    E_Z = t.G_i * const.mu_B * t.B0
    unit = ExchangeParams(1.0, t.dK, t.eps, E_Z, dE)
    j1 = exchange_strength(unit)
    d1 = 0.5 * ((-J_s(unit, -1, -1, -1) - J_s(unit, -1, -1, 1))
                - (-J_s(unit, 1, -1, -1) - J_s(unit, 1, -1, 1)))
    den = x * j1 - d1
    u = dE / den if den != 0 else -1.0
    if not u > 0:
        raise SolverError("no positive tunnel coupling realizes the requested ratio")
    return ExchangeParams(float(np.sqrt(u)), t.dK, t.eps, E_Z, dE)


def solve_phase_gate(t: GateTarget, **kw) -> NativeGateSolve:
    if t.kind not in (TargetKind.CPHASE, TargetKind.ISING):
        raise ValueError("solve_phase_gate handles CPHASE and ISING")
    return solve_native_gate(t, **kw)


def solve_givens_like(t: GateTarget, **kw) -> NativeGateSolve:
    if t.kind is not TargetKind.GIVENS_LIKE:
        raise ValueError("solve_givens_like handles GIVENS_LIKE")
    return solve_native_gate(t, **kw)


@dataclass
class EnsembleSummary:
    solves: list[NativeGateSolve]
    errors: list[str]

    def _arr(self, f):
        return np.array([f(s) for s in self.solves], dtype=float)

    def summary(self, const: PhysConstants = CONST) -> dict:
        if not self.solves:
            return {"n_ok": 0, "n_errors": len(self.errors)}
        return {
            "n_ok": len(self.solves),
            "n_errors": len(self.errors),
            "mean_J_hz": float(self._arr(lambda s: s.J_ij).mean() / const.h),
            "mean_n": float(self._arr(lambda s: s.n).mean()),
            "mean_abs_dtau_s": float(self._arr(lambda s: s.delta_tau).mean()),
            "mean_abs_dg": float(np.abs(self._arr(lambda s: s.delta_g)).mean()),
            "mean_t_hz": float(self._arr(lambda s: s.t_ij).mean() / const.h),
        }


def sample_g_pair(seed: int, index: int, sigma_G: float) -> tuple[float, float]:
    rng = np.random.default_rng([int(seed), 0x9E37, int(index)])
    gi, gj = rng.normal(0.0, sigma_G, 2)
    return float(gi), float(gj)


def solve_ensemble(
    kind: TargetKind | str,
    angle: float,
    n_pairs: int = 1000,
    sigma_G: float = 1e-3 * CONST.g_Si,
    seed: int = 0,
    tau2Q: float = 1e-6,
    B0: float = 1.0,
    dK: float = 1e-3 * CONST.e_charge,
    eps: float = 0.0,
    const: PhysConstants = CONST,
) -> EnsembleSummary:
    _normalize_angle(GateTarget(kind, angle, tau2Q, B0, dK, eps))  # reject degenerate targets once
    solves, errors = [], []
    for i in range(n_pairs):
        gi, gj = sample_g_pair(seed, i, sigma_G)
        try:
            solves.append(solve_native_gate(
                GateTarget(kind, angle, tau2Q, B0, dK, eps, gi, gj), const=const))
        except (SolverError, ConstraintError) as exc:
            errors.append(f"pair {i}: {exc}")
    return EnsembleSummary(solves, errors)
