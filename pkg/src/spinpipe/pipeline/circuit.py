"""Logical circuits on a row of qubits and a direct statevector simulator.

A circuit is a list of columns; each column holds one tag per row:

* ``("Z", theta)``: Z(theta) rotation
* ``("X", None)``: X(pi/2); X columns are global (every row or none)
* ``("I", None)``: idle
* ``(kind, angle)`` with kind in :data:`NATIVE_KINDS`: two-qubit gate on
  this row and the next; the next row carries ``("PAIR", None)``

JSON form: ``{"n": 3, "columns": [[["Z", 0.5], ["I", null], ["X", null]], ...]}``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from ..core import X, Z
from ..errors import CompileError, DimensionError
from ..twoqubit import GateKind, reference_gate

NATIVE_KINDS = ("CPHASE", "ISING", "GIVENS_LIKE", "SWAP_ROTATION")
NON_DIAGONAL = ("GIVENS_LIKE", "SWAP_ROTATION")
MAX_QUBITS = 12


def _tag(item) -> tuple[str, float | None]:
    if isinstance(item, str):
        return item.upper(), None
    name = str(item[0]).upper()
    param = item[1] if len(item) > 1 else None
    return name, (None if param is None else float(param))


@dataclass
class LogicalCircuit:
    n_qubits: int
    columns: list[list[tuple[str, float | None]]] = field(default_factory=list)

    def __post_init__(self):
        if self.n_qubits < 1:
            raise DimensionError("circuit needs at least one qubit")
        self.columns = [[_tag(t) for t in col] for col in self.columns]
        self.validate()

    @property
    def depth(self) -> int:
        return len(self.columns)

    def column_type(self, j: int) -> str:
        """``"X"``, ``"NATIVE"`` or ``"Z"`` (idle-only columns count as Z)."""
        names = {t[0] for t in self.columns[j]}
        if "X" in names:
            return "X"
        if names & set(NATIVE_KINDS):
            return "NATIVE"
        return "Z"

    def pairs(self, j: int) -> list[tuple[int, str, float]]:
        return [(r, t[0], t[1]) for r, t in enumerate(self.columns[j]) if t[0] in NATIVE_KINDS]

    def needs_clean_phase(self, j: int) -> bool:
        """True if column ``j`` does not commute with pending Z phases."""
        if self.column_type(j) == "X":
            return True
        return any(k in NON_DIAGONAL for _, k, _ in self.pairs(j))

    def validate(self) -> None:
        n = self.n_qubits
        for j, col in enumerate(self.columns):
            if len(col) != n:
                raise CompileError(f"column {j} has {len(col)} rows, expected {n}")
            names = [t[0] for t in col]
            if "X" in names and any(x != "X" for x in names):
                raise CompileError(f"column {j}: X columns must act on every row")
            has_native = any(x in NATIVE_KINDS for x in names)
            if has_native and "Z" in names:
                raise CompileError(f"column {j}: Z and two-qubit gates cannot share a column")
            r = 0
            while r < n:
                name, param = col[r]
                if name in NATIVE_KINDS:
                    if r + 1 >= n or col[r + 1][0] != "PAIR":
                        raise CompileError(f"column {j} row {r}: {name} needs PAIR on row {r + 1}")
                    if param is None:
                        raise CompileError(f"column {j} row {r}: {name} needs an angle")
                    r += 2
                    continue
                if name == "PAIR":
                    raise CompileError(f"column {j} row {r}: PAIR without a two-qubit gate")
                if name == "Z" and param is None:
                    raise CompileError(f"column {j} row {r}: Z needs an angle")
                if name not in ("Z", "X", "I"):
                    raise CompileError(f"column {j} row {r}: unknown tag {name!r}")
                r += 1
            if j > 0 and self.needs_clean_phase(j) and self.column_type(j - 1) != "Z":
                raise CompileError(
                    f"column {j}: X and non-diagonal two-qubit columns must follow a Z column"
                )

    @classmethod
    def from_dict(cls, d: dict) -> "LogicalCircuit":
        return cls(int(d["n"]), [list(c) for c in d.get("columns", [])])

    @classmethod
    def from_json(cls, text: str) -> "LogicalCircuit":
        return cls.from_dict(json.loads(text))

    def to_dict(self) -> dict:
        return {"n": self.n_qubits, "columns": [[list(t) for t in c] for c in self.columns]}


def code_block(thetas=(0.1, 0.2, 0.3, 0.4), n_qubits: int = 4,
               native: str = "CPHASE") -> LogicalCircuit:
    """Six-step block Z, X, Z, Z, X, native on every row."""
    t1, t2, t3, t4 = thetas
    zc = lambda th: [("Z", th)] * n_qubits
    nat = []
    while len(nat) + 2 <= n_qubits:
        nat += [(native, t4), ("PAIR", None)]
    nat += [("I", None)] * (n_qubits - len(nat))
    xs = [("X", None)] * n_qubits
    return LogicalCircuit(n_qubits, [zc(t1), xs, zc(t2), zc(t3), xs, nat])


def random_circuit(n_qubits: int, depth: int, rng: np.random.Generator) -> LogicalCircuit:
    """Random valid circuit of exactly ``depth`` columns."""
    cols: list[list] = []
    while len(cols) < depth:
        kind = rng.choice(["Z", "X", "NATIVE"], p=[0.4, 0.3, 0.3])
        if kind == "NATIVE" and n_qubits < 2:
            kind = "Z"
        if kind == "Z":
            cols.append([("Z", float(rng.uniform(-np.pi, np.pi))) if rng.random() < 0.8
                         else ("I", None) for _ in range(n_qubits)])
            continue
        if kind == "X":
            col = [("X", None)] * n_qubits
        else:
            col = []
            while len(col) < n_qubits:
                if len(col) + 2 <= n_qubits and rng.random() < 0.7:
                    k = str(rng.choice(NATIVE_KINDS))
                    col += [(k, _random_angle(k, rng)), ("PAIR", None)]
                else:
                    col.append(("I", None))
        nondiag = kind == "X" or any(t[0] in NON_DIAGONAL for t in col)
        prev_z = not cols or all(t[0] in ("Z", "I") for t in cols[-1])
        if nondiag and not prev_z:
            if len(cols) + 2 > depth:
                continue
            cols.append([("Z", float(rng.uniform(-np.pi, np.pi))) for _ in range(n_qubits)])
        cols.append(col)
    return LogicalCircuit(n_qubits, cols)


def _random_angle(kind: str, rng) -> float:
    if kind == "GIVENS_LIKE":
        return float(rng.uniform(0.1, 1.45))
    if kind == "ISING":
        return float(rng.choice([-1, 1]) * rng.uniform(0.1, 3.0))
    return float(rng.uniform(0.1, 2 * np.pi - 0.1))


# statevector helpers ----------------------------------------------------------

def basis_state(n: int, index: int = 0) -> np.ndarray:
    psi = np.zeros(2**n, dtype=complex)
    psi[index] = 1.0
    return psi


def apply_1q(psi: np.ndarray, U: np.ndarray, row: int, n: int) -> np.ndarray:
    t = psi.reshape((2,) * n)
    t = np.tensordot(U, t, axes=([1], [row]))
    return np.moveaxis(t, 0, row).reshape(-1)


def apply_2q(psi: np.ndarray, U: np.ndarray, row: int, n: int) -> np.ndarray:
    """Apply a 4x4 gate on rows ``row`` (first factor) and ``row + 1``."""
    t = psi.reshape((2,) * n)
    t = np.tensordot(U.reshape(2, 2, 2, 2), t, axes=([2, 3], [row, row + 1]))
    return np.moveaxis(t, (0, 1), (row, row + 1)).reshape(-1)


def logical_gate(kind: str, angle: float) -> np.ndarray:
    if kind == "CPHASE":
        return reference_gate(GateKind.CPHASE, angle)
    if kind == "ISING":
        return reference_gate(GateKind.ISING, angle)
    if kind == "SWAP_ROTATION":
        return reference_gate(GateKind.SWAP_THETA, angle)
    raise CompileError(f"{kind} has no hardware-independent unitary")


def simulate(c: LogicalCircuit, psi: np.ndarray | None = None,
             resolved: dict | None = None) -> np.ndarray:
    """Direct statevector evolution.

    ``resolved`` maps ``(column, row)`` to the unitary of gates whose exact
    form depends on the hardware (Givens-like gates).
    """
    n = c.n_qubits
    if n > MAX_QUBITS:
        raise DimensionError(f"statevector limited to {MAX_QUBITS} qubits")
    psi = basis_state(n) if psi is None else np.asarray(psi, dtype=complex).copy()
    if psi.shape != (2**n,):
        raise DimensionError("state has the wrong dimension")
    resolved = resolved or {}
    x90 = X(np.pi / 2)
    for j, col in enumerate(c.columns):
        for r, (name, param) in enumerate(col):
            if name == "Z":
                psi = apply_1q(psi, Z(param), r, n)
            elif name == "X":
                psi = apply_1q(psi, x90, r, n)
            elif name in NATIVE_KINDS:
                U = resolved.get((j, r))
                if U is None:
                    U = logical_gate(name, param)
                psi = apply_2q(psi, U, r, n)
    return psi


def overlap(a: np.ndarray, b: np.ndarray) -> float:
    return float(abs(np.vdot(a, b)) ** 2)


def entanglement_entropy(psi: np.ndarray, n: int, cut: int) -> float:
    """Von Neumann entropy (bits) of rows ``0..cut-1``."""
    s = np.linalg.svd(psi.reshape(2**cut, 2 ** (n - cut)), compute_uv=False)
    p = s**2
    p = p[p > 1e-15]
    return float(-(p * np.log2(p)).sum())
