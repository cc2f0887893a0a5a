"""Compile logical circuits onto a row of preconfigured gate columns.

Qubits move through the grid one column per step with three shuttle sites
between gate columns.  Every site has its own g-factor offset ``G``, so a
qubit picks up a Z phase wherever it goes.  The compiler tracks these
pending phases per qubit (in the g_Si rotating frame) and folds them into
the next Z column, which is realized by a g-factor Stark shift.  Two-qubit
gates are solved with the exchange engineer for the g-factors of the sites
they sit on; their Z wrappers become pending phases as well.

A Z column that precedes an X column or a non-diagonal two-qubit gate also
pre-compensates the transit phases of the following shuttle steps, so
those gates see exactly the logical state.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from ..core import CONST, PhysConstants, Z, process_fidelity
from ..engineer import GateTarget, NativeGateSolve, TargetKind, solve_native_gate
from ..errors import CompileError, ConstraintError, DimensionError, SolverError
from ..singlequbit import (
    DEFAULT_VOLTS_PER_G,
    RabiParams,
    StarkSolve,
    bin_x90,
    binning_plan,
    rabi_unitary,
    stark_shift_for_phase,
)
from ..twoqubit import GateKind, native_unitary, reference_gate, zz
from .circuit import (
    MAX_QUBITS,
    LogicalCircuit,
    apply_1q,
    apply_2q,
    basis_state,
)

log = logging.getLogger(__name__)

SHUTTLE_SITES = 3
PHASE_TOL = 1e-6


def _wrap(a):
    return (np.asarray(a) + np.pi) % (2 * np.pi) - np.pi


class SiteTable:
    """Per-site g-factor offsets, drawn lazily from a seeded normal distribution.

    Keys are ``("gate", column, row)`` and ``("shuttle", column, k, row)``
    where shuttle sites ``k = 0..2`` lie just before gate column ``column``.
    Explicit ``values`` override the random draw.
    """

    def __init__(self, seed: int = 0, sigma_G: float = 1e-3 * CONST.g_Si,
                 values: dict | None = None):
        if sigma_G < 0:
            raise ValueError("sigma_G must be non-negative")
        self.seed = int(seed)
        self.sigma_G = float(sigma_G)
        self.values: dict = dict(values or {})

    def _get(self, key: tuple) -> float:
        if key not in self.values:
            tag = 0 if key[0] == "gate" else 1
            rng = np.random.default_rng([self.seed, 0x517E, tag, *key[1:]])
            self.values[key] = float(self.sigma_G * rng.standard_normal())
        return self.values[key]

    def gate(self, col: int, row: int) -> float:
        return self._get(("gate", col, row))

    def shuttle(self, col: int, k: int, row: int) -> float:
        return self._get(("shuttle", col, k, row))


@dataclass(frozen=True)
class CompileConfig:
    B0: float = 1.0
    tau1Q: float = 1e-6
    tau2Q: float = 1e-6
    tau_s: float = 10e-9
    dK: float = 1e-3 * CONST.e_charge
    k_volts_per_g: float = DEFAULT_VOLTS_PER_G
    N1: int = 140


@dataclass
class ZOp:
    row: int
    theta: float  # logical angle
    G_site: float
    G_eff: float  # site offset plus folded pending phase
    stark: StarkSolve
    phase: float  # physical Z angle accrued in the column


@dataclass
class XOp:
    row: int
    G_site: float
    bin_index: int
    delta_g: float
    params: RabiParams
    pulse: float


@dataclass
class NativeOp:
    row: int
    role: str  # gate, swap1, swap2, swap_ising
    kind: str  # logical kind
    angle: float
    G_i: float
    G_j: float
    solve: NativeGateSolve | None = None


@dataclass
class IdleOp:
    row: int
    G_site: float


@dataclass
class PhysColumn:
    kind: str  # Z, X, NATIVE
    logical_index: int  # -1 for the terminal column
    role: str = "logic"
    thetas: list[float] = field(default_factory=list)
    ops: list = field(default_factory=list)


@dataclass
class SwapMacro:
    """Bookkeeping of a SWAP(theta) realized as native, Z, native, Z, Ising."""

    row: int
    theta: float
    start: int  # physical index of the first native
    pre: tuple[float, float] = (0.0, 0.0)
    mid: tuple[float, float] = (0.0, 0.0)
    after: tuple[float, float] = (0.0, 0.0)
    kappa: float = 0.0


@dataclass
class PipelineProgram:
    circuit: LogicalCircuit
    cfg: CompileConfig
    columns: list[PhysColumn]
    transits: list[np.ndarray]  # (n,) phase accrued on the way into column c
    sites: SiteTable
    resolved: dict = field(default_factory=dict)
    macros: list[SwapMacro] = field(default_factory=list)
    const: PhysConstants = CONST

    @property
    def n_qubits(self) -> int:
        return self.circuit.n_qubits

    def kinds(self) -> list[str]:
        return [c.kind for c in self.columns]

    def layout(self) -> list[str]:
        """Physical column sequence with ``S`` marking each shuttle site."""
        out: list[str] = []
        for c, col in enumerate(self.columns):
            if c > 0:
                out += ["S"] * SHUTTLE_SITES
            out.append(col.kind)
        return out

    def to_dict(self) -> dict:
        cols = []
        for c, col in enumerate(self.columns):
            ops = []
            for op in col.ops:
                if isinstance(op, ZOp):
                    ops.append({"row": op.row, "gate": "Z", "theta": op.theta, "G": op.G_site,
                                "G_eff": op.G_eff, "delta_g": op.stark.delta_g,
                                "dV_q": op.stark.dV_q, "dV_mu": op.stark.dV_mu})
                elif isinstance(op, XOp):
                    ops.append({"row": op.row, "gate": "X90", "G": op.G_site,
                                "bin": op.bin_index, "delta_g": op.delta_g})
                elif isinstance(op, NativeOp):
                    s = op.solve
                    ops.append({"row": op.row, "gate": op.kind, "role": op.role,
                                "angle": op.angle, "G_i": op.G_i, "G_j": op.G_j,
                                "n": s.n, "x": s.x, "delta_g": s.delta_g,
                                "t_ij_hz": s.t_ij / self.const.h, "tau": s.tau_realized})
                else:
                    ops.append({"row": op.row, "gate": "IDLE", "G": op.G_site})
            cols.append({"index": c, "kind": col.kind, "logical": col.logical_index,
                         "role": col.role, "ops": ops,
                         "transit_phase": self.transits[c].tolist()})
        return {"n": self.n_qubits, "columns": cols}


# compilation ------------------------------------------------------------------

def _expand(c: LogicalCircuit) -> list[PhysColumn]:
    n = c.n_qubits
    out: list[PhysColumn] = []
    for j, col in enumerate(c.columns):
        kind = c.column_type(j)
        if kind == "Z":
            out.append(PhysColumn("Z", j, thetas=[p if t == "Z" else 0.0 for t, p in col]))
        elif kind == "X":
            out.append(PhysColumn("X", j))
        else:
            pairs = c.pairs(j)
            first = PhysColumn("NATIVE", j)
            first.ops = [(r, "swap1" if k == "SWAP_ROTATION" else "gate", k, a)
                         for r, k, a in pairs]
            out.append(first)
            swaps = [(r, k, a) for r, k, a in pairs if k == "SWAP_ROTATION"]
            if swaps:
                out.append(PhysColumn("Z", j, "mid", [0.0] * n))
                out.append(PhysColumn("NATIVE", j, "swap2",
                                      ops=[(r, "swap2", k, a) for r, k, a in swaps]))
                out.append(PhysColumn("Z", j, "post", [0.0] * n))
                out.append(PhysColumn("NATIVE", j, "swap_ising",
                                      ops=[(r, "swap_ising", k, a) for r, k, a in swaps]))
    if out and out[0].kind == "NATIVE" and any(o[1] == "swap1" for o in out[0].ops):
        out.insert(0, PhysColumn("Z", 0, "lead", [0.0] * n))
    out.append(PhysColumn("Z", -1, "terminal", [0.0] * n))
    return out


def _target_kind(kind: str) -> TargetKind:
    return {"CPHASE": TargetKind.CPHASE, "ISING": TargetKind.ISING}.get(
        kind, TargetKind.GIVENS_LIKE)


def _engineer_angle(kind: str, angle: float) -> float:
    if kind == "CPHASE":
        return -angle  # the phase-gate composite realizes CPhase(-angle)
    if kind == "SWAP_ROTATION":
        return np.pi / 4
    if kind == "GIVENS_LIKE":
        return abs(angle)
    return angle


def _solve(tkind: TargetKind, angle: float, Gi: float, Gj: float, cfg: CompileConfig,
           const: PhysConstants, where: str) -> NativeGateSolve:
    try:
        return solve_native_gate(
            GateTarget(tkind, angle, cfg.tau2Q, cfg.B0, cfg.dK, 0.0, Gi, Gj), const=const)
    except (SolverError, ConstraintError) as exc:
        raise CompileError(f"{where}: {exc}") from exc


def _phase_scale(cfg: CompileConfig, const: PhysConstants, tau: float) -> float:
    return const.mu_B * cfg.B0 * tau / const.hbar


def _swap_decompose(M: np.ndarray, theta: float) -> tuple[float, float, float]:
    """``M = e^{i gamma} D(b1) R(theta) D(b2)`` with ``D(b) = diag(e^{ib}, e^{-ib})``.

    ``R(theta)`` is the m_z = 0 block of SWAP(theta).  Returns
    ``(gamma, b1, b2)``.  Phase halving is ambiguous by pi, so both
    branches are tried and the better reconstruction kept.
    """
    c, s = np.cos(theta), np.sin(theta)
    R = np.array([[c, 1j * s], [1j * s, c]])
    eps = 1e-12
    big = abs(c) > eps
    ssum0 = 0.5 * (np.angle(M[0, 0] / c) - np.angle(M[1, 1] / c)) if big else 0.0
    best, out = np.inf, (0.0, 0.0, 0.0)
    for ssum in (ssum0, ssum0 + np.pi):
        if big:
            gamma = np.angle(M[0, 0] / c) - ssum
        else:
            gamma = 0.5 * (np.angle(M[0, 1] / (1j * s)) + np.angle(M[1, 0] / (1j * s)))
        d = np.angle(M[0, 1] / (1j * s)) - gamma if abs(s) > eps else 0.0
        b1, b2 = 0.5 * (ssum + d), 0.5 * (ssum - d)
        D1 = np.diag([np.exp(1j * b1), np.exp(-1j * b1)])
        D2 = np.diag([np.exp(1j * b2), np.exp(-1j * b2)])
        err = np.abs(np.exp(1j * gamma) * D1 @ R @ D2 - M).max()
        if err < best:
            best, out = err, (float(gamma), float(b1), float(b2))
    return out


def _plan_swap(m: SwapMacro, s1: NativeGateSolve, s2: NativeGateSolve, const) -> None:
    U1 = native_unitary(s1.params, s1.tau_realized, const)
    U2 = native_unitary(s2.params, s2.tau_realized, const)
    B1, B2 = U1[1:3, 1:3], U2[1:3, 1:3]
    z1, z2 = B2[0, 0] * B1[0, 0], B2[0, 1] * B1[1, 0]
    r1, r2 = abs(z1), abs(z2)
    cval = (np.cos(m.theta) ** 2 - r1**2 - r2**2) / (2 * r1 * r2)
    if abs(cval) > 1 + 1e-9:
        raise CompileError(f"row {m.row}: SWAP({m.theta:.6g}) is out of reach of the natives")
    tp = 0.5 * (np.angle(z1) - np.angle(z2) - np.arccos(np.clip(cval, -1.0, 1.0)))
    mid = zz(tp, -tp)
    M = B2 @ mid[1:3, 1:3] @ B1
    _, _, b2 = _swap_decompose(M, m.theta)
    L = U2 @ mid @ U1 @ zz(-b2, b2)
    Dx = L @ reference_gate(GateKind.SWAP_THETA, m.theta).conj().T
    if np.max(np.abs(Dx - np.diag(np.diag(Dx)))) > 1e-9:
        raise CompileError(f"row {m.row}: SWAP decomposition left a non-diagonal residue")
    d = np.diag(Dx)
    kappa = 0.5 * np.angle(d[1] * d[2] / (d[0] * d[3]))
    r = d * np.array([1, np.exp(-1j * kappa), np.exp(-1j * kappa), 1])
    upv, umv = np.angle(r[3] / r[0]), np.angle(r[2] / r[1])
    u, v = 0.5 * (upv + umv), 0.5 * (upv - umv)
    # halving leaves a (pi, pi) ambiguity, which is not a global phase
    ising = reference_gate(GateKind.ISING, kappa)
    if process_fidelity(Dx, zz(u + np.pi, v + np.pi) @ ising) > process_fidelity(
            Dx, zz(u, v) @ ising):
        u, v = u + np.pi, v + np.pi
    m.pre = (-b2, b2)
    m.mid = (tp, -tp)
    m.after = (float(u), float(v))
    m.kappa = float(kappa)


def compile(c: LogicalCircuit, sites: SiteTable | None = None,
            cfg: CompileConfig = CompileConfig(),
            const: PhysConstants = CONST) -> PipelineProgram:
    """Map ``c`` onto physical columns and solve every column's configuration."""
    sites = SiteTable() if sites is None else sites
    n = c.n_qubits
    cols = _expand(c)
    nc = len(cols)
    s_shuttle = _phase_scale(cfg, const, cfg.tau_s)
    transits = [np.zeros(n)] + [
        np.array([sum(sites.shuttle(k, s, r) for s in range(SHUTTLE_SITES)) * s_shuttle
                  for r in range(n)]) for k in range(1, nc)]

    # solve every two-qubit gate first: none of them depends on pending phases
    macros: dict[tuple[int, int], SwapMacro] = {}
    resolved: dict = {}
    for k, col in enumerate(cols):
        if col.kind != "NATIVE":
            continue
        specs, col.ops = col.ops, []
        for r, role, kind, angle in specs:
            Gi, Gj = sites.gate(k, r), sites.gate(k, r + 1)
            where = f"logical column {col.logical_index} row {r} ({kind})"
            if role == "swap_ising":
                m = macros[(col.logical_index, r)]
                ang = -m.kappa
                tk = TargetKind.ISING
            else:
                ang = _engineer_angle(kind, angle)
                tk = _target_kind(kind)
            op = NativeOp(r, role, kind, angle, Gi, Gj, _solve(tk, ang, Gi, Gj, cfg, const, where))
            col.ops.append(op)
            if role == "gate" and kind == "GIVENS_LIKE":
                resolved[(col.logical_index, r)] = op.solve.composite(const=const).target
            if role == "swap1":
                macros[(col.logical_index, r)] = SwapMacro(r, angle, k)
            if role == "swap2":
                m = macros[(col.logical_index, r)]
                s1 = next(o.solve for o in cols[m.start].ops if o.row == r)
                _plan_swap(m, s1, op.solve, const)
        busy = {o.row for o in col.ops} | {o.row + 1 for o in col.ops}
        col.ops += [IdleOp(r, sites.gate(k, r)) for r in range(n) if r not in busy]

    prog = PipelineProgram(c, cfg, cols, transits, sites, resolved, list(macros.values()), const)
    _assign_phases(prog)
    return prog


def _requirement(prog: PipelineProgram, k: int) -> dict[int, float]:
    """Pending phase each row must carry on arrival at column ``k``."""
    col = prog.columns[k]
    if col.kind == "X":
        return {r: 0.0 for r in range(prog.n_qubits)}
    req: dict[int, float] = {}
    if col.kind == "NATIVE":
        for op in col.ops:
            if isinstance(op, NativeOp) and op.role == "gate" and op.kind == "GIVENS_LIKE":
                req[op.row] = req[op.row + 1] = 0.0
            elif isinstance(op, NativeOp) and op.role == "swap1":
                m = next(m for m in prog.macros if m.start == k and m.row == op.row)
                req[op.row], req[op.row + 1] = m.pre
    return req


def _check(p: float, want: float, where: str) -> None:
    if abs(_wrap(p - want)) > PHASE_TOL:
        raise CompileError(f"{where}: residual phase {float(_wrap(p - want)):.3g} rad")


def _assign_phases(prog: PipelineProgram) -> None:
    cfg, const, sites = prog.cfg, prog.const, prog.sites
    n = prog.n_qubits
    s1 = _phase_scale(cfg, const, cfg.tau1Q)
    s2 = _phase_scale(cfg, const, cfg.tau2Q)
    pending = np.zeros(n)
    in_macro: dict[int, SwapMacro] = {}
    for k, col in enumerate(prog.columns):
        pending = pending + prog.transits[k]
        if col.kind == "Z":
            req = _requirement(prog, k + 1) if k + 1 < len(prog.columns) else {}
            col.ops = []
            for r in range(n):
                G = sites.gate(k, r)
                if col.role == "mid" and r in in_macro:
                    m = in_macro[r]
                    nxt = prog.transits[k + 1][r]
                    want = (m.mid[0] if r == m.row else m.mid[1]) - prog.transits[k][r] - nxt
                    st = stark_shift_for_phase(want, G, cfg.B0, cfg.tau1Q, cfg.k_volts_per_g,
                                               const=const)
                    col.ops.append(ZOp(r, 0.0, G, G, st, (G + st.delta_g) * s1))
                    continue
                target = req.get(r, 0.0) - (prog.transits[k + 1][r] if r in req else 0.0)
                theta = col.thetas[r]
                G_eff = G + (pending[r] - target) / s1
                st = stark_shift_for_phase(theta, G_eff, cfg.B0, cfg.tau1Q, cfg.k_volts_per_g,
                                           const=const)
                phase = (G + st.delta_g) * s1
                pending[r] = pending[r] + phase - theta
                col.ops.append(ZOp(r, theta, G, G_eff, st, phase))
        elif col.kind == "X":
            G_list = [sites.gate(k, r) for r in range(n)]
            for r in range(n):
                _check(pending[r], 0.0, f"X column {k} row {r}")
            try:
                plan = binning_plan(G_list, cfg.B0, N1=cfg.N1, const=const)
            except Exception as exc:
                raise CompileError(f"logical column {col.logical_index}: {exc}") from exc
            col.ops = []
            for r, a in enumerate(plan.assignments):
                p, t0, _ = bin_x90(a.bin_index, cfg.B0, cfg.tau1Q, const)
                col.ops.append(XOp(r, G_list[r], a.bin_index, a.delta_g, p, t0))
                pending[r] = (p.nu - p.frame) * cfg.tau1Q
        else:
            for op in col.ops:
                if isinstance(op, IdleOp):
                    pending[op.row] += op.G_site * s2
                    continue
                r = op.row
                if op.role == "swap1":
                    m = next(m for m in prog.macros if m.start == k and m.row == r)
                    _check(pending[r], m.pre[0], f"column {k} row {r}")
                    _check(pending[r + 1], m.pre[1], f"column {k} row {r + 1}")
                    in_macro[r] = in_macro[r + 1] = m
                    pending[r] = pending[r + 1] = 0.0
                elif op.role == "swap2":
                    m = in_macro[r]
                    pending[r], pending[r + 1] = m.after
                    del in_macro[r], in_macro[r + 1]
                else:
                    if op.kind == "GIVENS_LIKE":
                        _check(pending[r], 0.0, f"column {k} row {r}")
                        _check(pending[r + 1], 0.0, f"column {k} row {r + 1}")
                    w = op.solve.composite(const=const).wrappers["post"]
                    pending[r] -= w[0]
                    pending[r + 1] -= w[1]
    for r in range(n):
        _check(pending[r], 0.0, f"terminal column row {r}")


# execution --------------------------------------------------------------------

def column_unitaries(prog: PipelineProgram, k: int):
    """Yield ``(rows, U)`` for the physical operations of column ``k``."""
    cfg, const = prog.cfg, prog.const
    col = prog.columns[k]
    s2 = _phase_scale(cfg, const, cfg.tau2Q)
    for op in col.ops:
        if isinstance(op, ZOp):
            yield (op.row,), Z(op.phase)
        elif isinstance(op, XOp):
            rest = (op.params.nu - op.params.frame) * (cfg.tau1Q - op.pulse)
            yield (op.row,), Z(rest) @ rabi_unitary(op.params, op.pulse)
        elif isinstance(op, IdleOp):
            yield (op.row,), Z(op.G_site * s2)
        else:
            yield (op.row, op.row + 1), native_unitary(op.solve.params, op.solve.tau_realized,
                                                       const)


def run_statevector(prog: PipelineProgram, psi: np.ndarray | None = None) -> np.ndarray:
    """Evolve ``psi`` through every shuttle step and gate column of ``prog``."""
    n = prog.n_qubits
    if n > MAX_QUBITS:
        raise DimensionError(f"statevector limited to {MAX_QUBITS} qubits")
    psi = basis_state(n) if psi is None else np.asarray(psi, dtype=complex).copy()
    if psi.shape != (2**n,):
        raise DimensionError("state has the wrong dimension")
    for k in range(len(prog.columns)):
        for r, ph in enumerate(prog.transits[k]):
            if ph:
                psi = apply_1q(psi, Z(ph), r, n)
        for rows, U in column_unitaries(prog, k):
            psi = apply_1q(psi, U, rows[0], n) if len(rows) == 1 else apply_2q(psi, U, rows[0], n)
    return psi
