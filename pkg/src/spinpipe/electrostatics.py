"""Rectangular charge-sheet gate model, lever arms and triple-dot stability maps."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .core import CONST, PhysConstants
from .errors import ConstraintError, SingularityError
from .io import csv_text

NM = 1e-9
DG_DEZ = 1e-3 / 1e6  # dg/dE_z in (V/m)^-1


@dataclass(frozen=True)
class Layer:
    thickness: float
    eps_r: float


DEFAULT_STACK = (Layer(5 * NM, 3.8), Layer(0.5e-3, 11.8))


@dataclass(frozen=True)
class SheetGeometry:
    a: float = 50 * NM
    b: float = 50 * NM
    stack: tuple[Layer, ...] = DEFAULT_STACK
    mu_pitch: float = 90 * NM  # centre-to-centre plunger to mu gate
    eval_offset: float = 0.5 * NM
    eval_eps_r: float | None = None  # default: permittivity below the oxide

    def __post_init__(self):
        if self.a <= 0 or self.b <= 0:
            raise ValueError("sheet sides must be positive")
        if not self.stack or any(l.thickness <= 0 for l in self.stack):
            raise ValueError("stack layers need positive thickness")

    @property
    def d_ox(self) -> float:
        return self.stack[0].thickness

    @property
    def dot_eps_r(self) -> float:
        if self.eval_eps_r is not None:
            return self.eval_eps_r
        return self.stack[1].eps_r if len(self.stack) > 1 else self.stack[0].eps_r

    @classmethod
    def edge_gap(cls, gap: float = 40 * NM, **kw) -> "SheetGeometry":
        """Geometry with the mu gate placed ``gap`` edge-to-edge from the plunger."""
        a = kw.get("a", 50 * NM)
        return cls(mu_pitch=a + gap, **kw)


def sheet_field(a: float, b: float, x: float, y: float, z: float, sigma: float = 1.0,
                eps_r: float = 1.0, const: PhysConstants = CONST) -> np.ndarray:
    """Field (V/m) of a uniformly charged ``a x b`` sheet centred at the origin in z = 0."""
    if z == 0 and abs(x) <= a / 2 and abs(y) <= b / 2:
        raise SingularityError("evaluation point lies on the sheet")
    k = sigma / (4 * np.pi * const.eps0 * eps_r)
    ex = ey = ez = 0.0
    for su, u in ((-1.0, x - a / 2), (1.0, x + a / 2)):
        for sv, v in ((-1.0, y - b / 2), (1.0, y + b / 2)):
            R = np.sqrt(u * u + v * v + z * z)
            s = su * sv
            if z != 0:
                ez += s * np.arctan(u * v / (z * R))
            ex -= s * np.arcsinh(v / np.hypot(u, z))
            ey -= s * np.arcsinh(u / np.hypot(v, z))
    return k * np.array([ex, ey, ez])


def sheet_field_quad(a: float, b: float, x: float, y: float, z: float, sigma: float = 1.0,
                     eps_r: float = 1.0, const: PhysConstants = CONST,
                     epsrel: float = 1e-11) -> np.ndarray:
    """Adaptive quadrature of the Coulomb integrals over the sheet."""
    k = sigma / (4 * np.pi * const.eps0 * eps_r)

    def comp(num):
        f = lambda yp, xp: num(xp, yp) * ((x - xp) ** 2 + (y - yp) ** 2 + z * z) ** -1.5
        return integrate.dblquad(f, -a / 2, a / 2, -b / 2, b / 2, epsabs=0,
                                 epsrel=epsrel)[0]

    return k * np.array([comp(lambda xp, yp: x - xp), comp(lambda xp, yp: y - yp),
                         comp(lambda xp, yp: z)])


def sigma_of_V(g: SheetGeometry = SheetGeometry(), const: PhysConstants = CONST) -> float:
    """Charge density per volt: inverse of the line integral of E_z from gate to ground."""
    total = 0.0
    z0 = 0.0
    for layer in g.stack:
        f = lambda z, er=layer.eps_r: sheet_field(g.a, g.b, 0.0, 0.0, z, 1.0, er, const)[2]
        brk = [p for p in (1e-9, 1e-8, 1e-7, 1e-6, 1e-5, 1e-4) if z0 < p < z0 + layer.thickness]
        val, _ = integrate.quad(f, z0, z0 + layer.thickness, epsabs=0, epsrel=1e-11,
                                limit=500, points=brk or None)
        total += val
        z0 += layer.thickness
    return 1.0 / total


@dataclass
class FieldDerivatives:
    dEx_dVq: float
    dEz_dVq: float
    dEx_dVmu: float
    dEz_dVmu: float
    a_sigma: float

    def ratios(self) -> dict:
        return {
            "dEx_dVq": abs(self.dEx_dVq) / self.dEz_dVq,
            "dEx_dVmu": abs(self.dEx_dVmu) / self.dEz_dVq,
            "dEz_dVmu": abs(self.dEz_dVmu) / self.dEz_dVq,
        }

    def volts_per_g(self, dg_dEz: float = DG_DEZ) -> float:
        """Plunger voltage per unit g-factor shift."""
        return 1.0 / (self.dEz_dVq * dg_dEz)


def field_derivatives(g: SheetGeometry = SheetGeometry(), x: float | None = None,
                      const: PhysConstants = CONST, a_sigma: float | None = None
                      ) -> FieldDerivatives:
    """dE/dV for the plunger (centred at 0) and the mu gate at the dot site."""
    xs = g.eval_offset if x is None else x
    asg = sigma_of_V(g, const) if a_sigma is None else a_sigma
    z = g.d_ox
    er = g.dot_eps_r
    eq = asg * sheet_field(g.a, g.b, xs, 0.0, z, 1.0, er, const)
    em = asg * sheet_field(g.a, g.b, xs - g.mu_pitch, 0.0, z, 1.0, er, const)
    return FieldDerivatives(float(eq[0]), float(eq[2]), float(em[0]), float(em[2]), asg)


def field_profile(xs, g: SheetGeometry = SheetGeometry(), const: PhysConstants = CONST):
    asg = sigma_of_V(g, const)
    rows = []
    for x in np.asarray(xs, dtype=float):
        d = field_derivatives(g, x, const, asg)
        rows.append((x, d.dEx_dVq, d.dEx_dVmu, d.dEz_dVq, d.dEz_dVmu))
    return rows


def field_profile_csv(xs, g: SheetGeometry = SheetGeometry(), cfg: dict | None = None) -> str:
    return csv_text(["x_m", "dEx_dVq", "dEx_dVmu", "dEz_dVq", "dEz_dVmu"],
                    field_profile(xs, g), cfg or {})


# triple-dot stability ---------------------------------------------------------

LABELS = ("100", "010", "001")  # electron on dot q+1, q, q-1
GATES = ("q+1", "q", "q-1", "mu")


@dataclass(frozen=True)
class LeverArmMatrix:
    """Rows: dots (q+1, q, q-1).  Columns: gates (q+1, q, q-1, mu)."""

    alpha: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.alpha, dtype=float)
        if a.shape != (3, 4):
            raise ValueError("lever-arm matrix must be 3 dots x 4 gates")
        if np.any(a <= 0):
            raise ValueError("lever arms must be positive")
        object.__setattr__(self, "alpha", a)

    def ratio_condition(self, rtol: float = 1e-12) -> bool:
        a = self.alpha
        r = a[1, 1] / a[1, 3]
        return all(np.isclose(a[k, 1] / a[k, 3], r, rtol=rtol, atol=0) for k in (0, 2))

    @classmethod
    def default(cls) -> "LeverArmMatrix":
        # dyadic values keep the compensation arithmetic exact
        return cls(np.array([
            [0.5, 0.125, 0.0625, 0.0625],
            [0.125, 0.5, 0.125, 0.25],
            [0.0625, 0.125, 0.5, 0.0625],
        ]))


@dataclass
class ChargeStabilityMap:
    v1: np.ndarray
    v2: np.ndarray
    axes: tuple[int, int]
    ground: np.ndarray  # index into LABELS, shape (len(v1), len(v2))
    ties: np.ndarray

    def occupancy(self, i: int, j: int) -> tuple[int, int, int]:
        occ = [0, 0, 0]
        occ[int(self.ground[i, j])] = 1
        return tuple(occ)

    def label(self, i: int, j: int) -> str:
        return LABELS[int(self.ground[i, j])]

    def to_csv(self, cfg: dict | None = None) -> str:
        rows = ((float(a), float(b), LABELS[int(self.ground[i, j])])
                for i, a in enumerate(self.v1) for j, b in enumerate(self.v2))
        return csv_text(["V1", "V2", "config"], rows, cfg or {})


def dot_energies(lam: LeverArmMatrix, offsets, V, const: PhysConstants = CONST) -> np.ndarray:
    """Single-electron energies eps_q - e sum_j alpha_qj V_j for gate voltages ``V[..., 4]``."""
    V = np.asarray(V, dtype=float)
    return np.asarray(offsets, dtype=float) - const.e_charge * (V @ lam.alpha.T)


def stability_map(lam: LeverArmMatrix, offsets, v1, v2, axes=(2, 0), base=(0, 0, 0, 0),
                  dV=(0, 0, 0, 0), const: PhysConstants = CONST) -> ChargeStabilityMap:
    """Ground configuration over a 2D sweep of gates ``axes`` (default q-1 and q+1).

    ``dV`` is an extra gate-voltage shift (e.g. g-factor tuning plus
    compensation); its energy shift is added separately so that an exactly
    compensating shift leaves every cell bit-for-bit unchanged.
    """
    v1 = np.asarray(v1, dtype=float)
    v2 = np.asarray(v2, dtype=float)
    V = np.broadcast_to(np.asarray(base, dtype=float), (v1.size, v2.size, 4)).copy()
    V[..., axes[0]] = v1[:, None]
    V[..., axes[1]] = v2[None, :]
    E = dot_energies(lam, offsets, V, const)
    shift = -const.e_charge * (lam.alpha @ np.asarray(dV, dtype=float))
    E = E + shift
    ground = np.argmin(E, axis=-1)
    srt = np.sort(E, axis=-1)
    ties = srt[..., 0] == srt[..., 1]
    return ChargeStabilityMap(v1, v2, tuple(axes), ground, ties)


def mu_compensation(lam: LeverArmMatrix, dV_q: float) -> float:
    a = lam.alpha
    if a[1, 3] <= 0:
        raise ConstraintError("mu lever arm must be positive")
    return float(-(a[1, 1] / a[1, 3]) * dV_q)


def path_labels(lam: LeverArmMatrix, offsets, start, stop, n: int = 201, dV=(0, 0, 0, 0),
                const: PhysConstants = CONST) -> list[str]:
    """Ground labels along a straight gate-voltage ramp, with repeats collapsed."""
    s = np.linspace(0.0, 1.0, n)[:, None]
    V = np.asarray(start, float) + s * (np.asarray(stop, float) - np.asarray(start, float))
    E = dot_energies(lam, offsets, V, const) - const.e_charge * (lam.alpha @ np.asarray(dV, float))
    seq = [LABELS[i] for i in np.argmin(E, axis=-1)]
    out = [seq[0]]
    for lab in seq[1:]:
        if lab != out[-1]:
            out.append(lab)
    return out
