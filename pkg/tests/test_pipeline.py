import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spinpipe.errors import CompileError, DimensionError, SchedulingError
from spinpipe.pipeline import (
    CompileConfig,
    GateTimes,
    LogicalCircuit,
    SiteTable,
    code_block,
    compile,
    control_footprints,
    footprint,
    gate_time_table,
    random_circuit,
    run_statevector,
    schedule,
    simulate,
    vqe_runtime,
)
from spinpipe.pipeline.circuit import basis_state, entanglement_entropy, overlap
from spinpipe.pipeline.runtime import PRESETS, endpoints, simulate_stream


# runtime and footprint arithmetic --------------------------------------------

def test_gate_time_table_presets():
    t = gate_time_table()
    assert t.tau_2P == pytest.approx(2.03e-6, rel=1e-12)
    assert t.tau_2S == pytest.approx(5.12e-6, rel=1e-12)
    assert t.tau_1X == pytest.approx(3.08e-6, rel=1e-12)
    fast = PRESETS["paper-0.1us"]
    assert gate_time_table(fast.tau1Q, fast.tau2Q, fast.tau_s).tau_2S == pytest.approx(
        0.62e-6, rel=1e-12)


def test_vqe_runtime_closed_form():
    est = vqe_runtime()
    t1, t2 = 1e-6 + 30e-9, 5.12e-6 + 30e-9
    seq = (1174 * t1 + 2196 * t2) * 1.25e5
    pipe = (1174 + 2.5e5) * t1 + (2196 + 2.5e5) * t2
    assert est.tau_config_seq == pytest.approx(seq, rel=1e-12)
    assert est.tau_config == pytest.approx(pipe, rel=1e-12)
    assert est.speedup == pytest.approx(seq / pipe, rel=1e-12)
    assert est.tau_run == pytest.approx(3.9e5 * pipe, rel=1e-12)
    with pytest.raises(ValueError):
        vqe_runtime(n_reps=0)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 60), st.integers(1, 40))
def test_event_makespan_matches_formula(depth, reps):
    tl = simulate_stream(depth, reps)
    assert tl.makespan_ticks == depth + 2 * reps
    assert tl.min_site_gap() >= 3 or reps == 1


def test_schedule_matches_closed_form():
    r = schedule(30, 45, 20)
    assert r.makespan == pytest.approx(r.formula, rel=1e-12)
    assert r.sequential > r.makespan
    with pytest.raises(SchedulingError):
        schedule(3, 3, 3, filling=0)


def test_footprints():
    w, l = footprint(25, 3370)
    assert w == pytest.approx(8.5e-6, rel=1e-12)
    assert l == pytest.approx(640.3e-6, rel=1e-12)
    cf = control_footprints()
    assert cf.resistor_length == pytest.approx(5e-6, rel=1e-12)
    assert cf.capacitance == pytest.approx(159.15e-12, rel=1e-4)
    assert cf.capacitor_side == pytest.approx(12.62e-6, rel=1e-3)
    assert cf.cutoff == pytest.approx(100e3, rel=1e-12)
    with pytest.raises(ValueError):
        footprint(0, 10)


def test_endpoints():
    ep = endpoints()
    assert ep.init_fidelity == pytest.approx(0.999899, abs=1e-6)
    assert ep.spam_fidelity == pytest.approx(ep.init_fidelity * 0.993)
    with pytest.raises(ValueError):
        GateTimes(tau1Q=0.0)


# circuits --------------------------------------------------------------------

def test_circuit_validation():
    with pytest.raises(CompileError, match="every row"):
        LogicalCircuit(2, [[("X", None), ("I", None)]])
    with pytest.raises(CompileError, match="PAIR"):
        LogicalCircuit(2, [[("CPHASE", 1.0), ("I", None)]])
    with pytest.raises(CompileError, match="share"):
        LogicalCircuit(3, [[("CPHASE", 1.0), ("PAIR", None), ("Z", 1.0)]])
    with pytest.raises(CompileError, match="follow a Z"):
        LogicalCircuit(2, [[("X", None)] * 2, [("X", None)] * 2])
    with pytest.raises(CompileError, match="unknown"):
        LogicalCircuit(1, [[("H", None)]])
    with pytest.raises(DimensionError):
        LogicalCircuit(0)


def test_json_round_trip():
    c = code_block()
    d = json.loads(json.dumps(c.to_dict()))
    assert LogicalCircuit.from_dict(d).to_dict() == c.to_dict()


def test_random_circuits_have_requested_depth():
    rng = np.random.default_rng(1)
    for _ in range(20):
        c = random_circuit(5, 17, rng)
        assert c.depth == 17


# compilation -----------------------------------------------------------------

def _check_equivalent(c, seed=0, psi=None):
    prog = compile(c, SiteTable(seed))
    psi = basis_state(c.n_qubits) if psi is None else psi
    out = run_statevector(prog, psi)
    ref = simulate(c, psi, prog.resolved)
    assert np.linalg.norm(out) == pytest.approx(1.0, abs=1e-12)
    assert overlap(ref, out) >= 1 - 1e-8
    return prog, out


def test_empty_circuit_compiles_to_one_z_column():
    prog, out = _check_equivalent(LogicalCircuit(3, []))
    assert prog.kinds() == ["Z"]


def test_single_z_pi():
    psi = np.full(2, 1 / np.sqrt(2), dtype=complex)
    _check_equivalent(LogicalCircuit(1, [[("Z", np.pi)]]), psi=psi)


def test_code_block_layout():
    prog, _ = _check_equivalent(code_block())
    assert prog.kinds() == ["Z", "X", "Z", "Z", "X", "NATIVE", "Z"]
    lay = prog.layout()
    assert lay[:5] == ["Z", "S", "S", "S", "X"]


def test_bell_state_has_one_bit():
    c = LogicalCircuit(2, [
        [("X", None)] * 2,
        [("Z", 0.0), ("Z", np.pi)],
        [("X", None)] * 2,
        [("Z", 0.0), ("Z", 0.0)],
        [("GIVENS_LIKE", np.pi / 4), ("PAIR", None)],
    ])
    _, out = _check_equivalent(c)
    assert entanglement_entropy(out, 2, 1) == pytest.approx(1.0, abs=1e-8)


def test_swap_rotation_in_first_column_gets_lead_column():
    c = LogicalCircuit(2, [[("SWAP_ROTATION", 0.7), ("PAIR", None)]])
    prog, _ = _check_equivalent(c, psi=np.array([0, 1, 0, 0], dtype=complex))
    assert prog.columns[0].role == "lead"
    assert prog.kinds().count("NATIVE") == 3


@pytest.mark.parametrize("seed", range(6))
def test_random_circuits_are_equivalent(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 6))
    c = random_circuit(n, int(rng.integers(1, 12)), rng)
    psi = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
    _check_equivalent(c, seed=seed, psi=psi / np.linalg.norm(psi))


def test_compile_is_deterministic():
    c = code_block(native="ISING")
    a = compile(c, SiteTable(4)).to_dict()
    b = compile(c, SiteTable(4)).to_dict()
    assert json.dumps(a) == json.dumps(b)


def test_compile_error_names_the_gate():
    c = LogicalCircuit(2, [[("ISING", np.pi), ("PAIR", None)]])
    with pytest.raises(CompileError, match="logical column 0 row 0"):
        compile(c)


def test_wrong_state_dimension():
    prog = compile(code_block())
    with pytest.raises(DimensionError):
        run_statevector(prog, np.ones(3))
