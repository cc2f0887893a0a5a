"""Command-line entry point.

Every subcommand writes a CSV or JSON document stamped with the tool version
and a hash of the resolved configuration.  Output goes to ``--out``, to
``$SPINPIPE_OUT_DIR/<command>.<format>`` when that variable is set, or to
stdout.  A ``--config`` JSON file overrides command-line flags.  Any
package error prints a JSON error record to stderr and exits with status 2.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .core import CONST
from .electrostatics import (
    LeverArmMatrix,
    SheetGeometry,
    field_profile,
    mu_compensation,
    path_labels,
    stability_map,
)
from .engineer import GateTarget, TargetKind, solve_ensemble, solve_native_gate
from .errors import SpinPipeError
from .io import csv_text, json_text, write_text
from .noisefid import (
    NoiseModel,
    two_qubit_fidelity_map,
    x90_fidelity_map,
    z_gate_fidelity_map,
)
from .pipeline import (
    CompileConfig,
    GateTimes,
    LogicalCircuit,
    SiteTable,
    compile,
    control_footprints,
    footprint,
    run_statevector,
    schedule,
    simulate,
    vqe_runtime,
)
from .pipeline.circuit import basis_state, overlap
from .pipeline.runtime import PRESETS, endpoints
from .shuttle import ShuttleSpec, lz_probability, min_shuttle_time, waveform_schedule

OUT_ENV = "SPINPIPE_OUT_DIR"
EV = CONST.e_charge

PRESET_VALUES = {
    name: {"tau1Q": t.tau1Q, "tau2Q": t.tau2Q, "tau_s": t.tau_s} for name, t in PRESETS.items()
}


def _floats(text: str) -> list[float]:
    """Comma list ``a,b,c`` or range ``start:stop:num``."""
    if ":" in text:
        a, b, n = text.split(":")
        return np.linspace(float(a), float(b), int(n)).tolist()
    return [float(x) for x in text.split(",") if x]


def _common(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("run configuration")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--B0", type=float, default=1.0, help="field in tesla")
    g.add_argument("--g-si", type=float, default=CONST.g_Si)
    g.add_argument("--tau1q", type=float, default=1e-6)
    g.add_argument("--tau2q", type=float, default=1e-6)
    g.add_argument("--tau-s", type=float, default=10e-9)
    g.add_argument("--dK", type=float, default=1e-3, help="charging-energy gap in eV")
    g.add_argument("--sigma-g", type=float, default=None,
                   help="g-factor spread (default 1e-3 g_si)")
    g.add_argument("--samples", type=int, default=1000)
    g.add_argument("--preset", choices=sorted(PRESETS))
    g.add_argument("--config", help="JSON file whose keys override flags")
    g.add_argument("--out", help="output path")
    g.add_argument("--format", choices=("csv", "json"), default=None)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="spinpipe", description=__doc__.split("\n")[0])
    ap.add_argument("--version", action="version", version=f"spinpipe {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("zmap", help="Stark-shift Z(phi) fidelity vs timing and voltage noise")
    p.add_argument("--sigma-tau", default="0,0.02e-9,0.04e-9,0.06e-9,0.08e-9,0.1e-9")
    p.add_argument("--sigma-v", default="0,20e-6,40e-6,60e-6,80e-6,100e-6")
    p.add_argument("--phi", type=float, default=np.pi)
    p.add_argument("--volts-per-g", type=float, default=615.0)
    _common(p)

    p = sub.add_parser("twoqmap", help="two-qubit composite fidelity vs angle and t_ij noise")
    p.add_argument("--kind", choices=("ISING", "GIVENS_SWAP", "SWAP_ROTATION"), default="ISING")
    p.add_argument("--angles", default="0.2:1.4:7")
    p.add_argument("--sigma-tij", default="0,1e-5,1e-4,3e-4,1e-3")
    _common(p)

    p = sub.add_parser("x90map", help="binned sqrt(X) fidelity vs B1 and timing noise")
    p.add_argument("--bin", type=int, default=10)
    p.add_argument("--sigma-b1", default="0,0.05e-6,0.1e-6,0.2e-6")
    p.add_argument("--sigma-tau", default="0,0.1e-9,0.2e-9,0.4e-9")
    _common(p)

    p = sub.add_parser("solve-gate", help="solve exchange parameters for a target gate")
    p.add_argument("kind", choices=("cphase", "ising", "givens"))
    p.add_argument("--angle", type=float, help="CPhase or Ising angle")
    p.add_argument("--chi", type=float, help="Givens-like chi")
    p.add_argument("--tau", type=float, default=None, help="gate slot (default tau2q)")
    p.add_argument("--pairs", type=int, default=1000, help="ensemble size")
    p.add_argument("--gi", type=float, help="single solve: G of qubit i")
    p.add_argument("--gj", type=float, help="single solve: G of qubit j")
    _common(p)

    p = sub.add_parser("shuttle", help="Landau-Zener shuttle times and waveform schedule")
    p.add_argument("--t-hz", default="5e9,10e9,20e9,40e9")
    p.add_argument("--alpha", type=float, default=0.1)
    p.add_argument("--dv", type=float, default=25e-3)
    p.add_argument("--pmax", type=float, default=1e-4)
    p.add_argument("--columns", type=int, default=0,
                   help="also emit the occupancy timeline for this many columns")
    p.add_argument("--filling", default="maximal")
    _common(p)

    p = sub.add_parser("field", help="gate-field derivative profiles")
    p.add_argument("--xs", default="-100e-9:100e-9:41")
    p.add_argument("--offset", type=float, default=0.5e-9)
    _common(p)

    p = sub.add_parser("stability", help="triple-dot charge stability map")
    p.add_argument("--v1", default="-0.2:0.2:41", help="sweep of the q-1 gate (V)")
    p.add_argument("--v2", default="-0.2:0.2:41", help="sweep of the q+1 gate (V)")
    p.add_argument("--vq", type=float, default=0.05, help="base plunger voltage")
    p.add_argument("--dvq", type=float, default=0.0, help="g-tuning plunger shift (V)")
    p.add_argument("--compensate", action="store_true")
    _common(p)

    for name, hlp in (("compile", "compile a circuit JSON file"),
                      ("run", "compile and simulate a circuit JSON file")):
        p = sub.add_parser(name, help=hlp)
        p.add_argument("circuit", help="path to circuit JSON")
        p.add_argument("--input", type=int, default=0, help="computational basis input index")
        _common(p)

    p = sub.add_parser("runtime", help="gate-time table, eigensolver run time, makespan check")
    p.add_argument("--d1q", type=int, default=1174)
    p.add_argument("--d2q", type=int, default=2196)
    p.add_argument("--n-reps", type=float, default=1.25e5)
    p.add_argument("--n-configs", type=int, default=3900)
    p.add_argument("--n-iters", type=int, default=100)
    p.add_argument("--check-reps", type=int, default=50,
                   help="repetitions for the discrete-event makespan check")
    _common(p)

    p = sub.add_parser("footprint", help="grid and control-electronics footprint")
    p.add_argument("--n", type=int, default=25)
    p.add_argument("--depth", type=int, default=3370)
    p.add_argument("--R", type=float, default=10e3)
    p.add_argument("--rho", type=float, default=100.0)
    p.add_argument("--trace-width", type=float, default=50e-9)
    p.add_argument("--f-cutoff", type=float, default=100e3)
    p.add_argument("--cap-density", type=float, default=1.0, help="F/m^2")
    p.add_argument("--column-qubits", type=int, default=50)
    _common(p)
    return ap


def resolve_config(args: argparse.Namespace) -> dict:
    cfg = {k: v for k, v in vars(args).items() if k not in ("config", "out")}
    if args.preset:
        cfg.update({"tau1q": PRESET_VALUES[args.preset]["tau1Q"],
                    "tau2q": PRESET_VALUES[args.preset]["tau2Q"],
                    "tau_s": PRESET_VALUES[args.preset]["tau_s"]})
    if args.config:
        override = json.loads(Path(args.config).read_text())
        unknown = set(override) - set(cfg)
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        cfg.update(override)
    if cfg["sigma_g"] is None:
        cfg["sigma_g"] = 1e-3 * cfg["g_si"]
    for k in ("tau1q", "tau2q", "dK", "B0", "g_si"):
        if not cfg[k] > 0:
            raise ValueError(f"{k} must be positive")
    if cfg["tau_s"] < 0 or cfg["sigma_g"] < 0 or cfg["samples"] < 1:
        raise ValueError("tau_s and sigma_g must be non-negative, samples positive")
    return cfg


def _const(cfg):
    return CONST.with_overrides({"g_si": cfg["g_si"], "B0_tesla": cfg["B0"]})


def _noise(cfg, **kw) -> NoiseModel:
    return NoiseModel(sigma_G=cfg["sigma_g"], n_samples=cfg["samples"], seed=cfg["seed"], **kw)


def cmd_zmap(cfg):
    m = z_gate_fidelity_map(_floats(cfg["sigma_tau"]), _floats(cfg["sigma_v"]), _noise(cfg),
                            phi=cfg["phi"], tau1Q=cfg["tau1q"], B0=cfg["B0"],
                            k_volts_per_g=cfg["volts_per_g"], const=_const(cfg))
    return m.to_csv(cfg), m.to_json(cfg)


def cmd_twoqmap(cfg):
    m = two_qubit_fidelity_map(cfg["kind"], _floats(cfg["angles"]), _floats(cfg["sigma_tij"]),
                               _noise(cfg), tau2Q=cfg["tau2q"], B0=cfg["B0"],
                               dK=cfg["dK"] * EV, const=_const(cfg))
    return m.to_csv(cfg), m.to_json(cfg)


def cmd_x90map(cfg):
    m = x90_fidelity_map(_floats(cfg["sigma_b1"]), _floats(cfg["sigma_tau"]), cfg["bin"],
                         _noise(cfg), B0=cfg["B0"], tau1Q=cfg["tau1q"], const=_const(cfg))
    return m.to_csv(cfg), m.to_json(cfg)


def cmd_solve_gate(cfg):
    kind = {"cphase": TargetKind.CPHASE, "ising": TargetKind.ISING,
            "givens": TargetKind.GIVENS_LIKE}[cfg["kind"]]
    angle = cfg["chi"] if kind is TargetKind.GIVENS_LIKE else cfg["angle"]
    if angle is None:
        raise ValueError("--chi is required for givens, --angle otherwise")
    tau = cfg["tau"] or cfg["tau2q"]
    const = _const(cfg)
    if cfg["gi"] is not None or cfg["gj"] is not None:
        s = solve_native_gate(GateTarget(kind, angle, tau, cfg["B0"], cfg["dK"] * EV, 0.0,
                                         cfg["gi"] or 0.0, cfg["gj"] or 0.0), const=const)
        row = {"n": s.n, "k": s.k, "x": s.x, "chi": s.chi, "J_hz": s.J_ij / const.h,
               "t_hz": s.t_ij / const.h, "delta_g": s.delta_g, "tau_realized": s.tau_realized,
               "delta_tau": s.delta_tau, "fidelity": s.composite(const=const).fidelity}
        cols = list(row)
        return csv_text(cols, [[row[c] for c in cols]], cfg), json_text({"solve": row}, cfg)
    ens = solve_ensemble(kind, angle, cfg["pairs"], cfg["sigma_g"], cfg["seed"], tau,
                         cfg["B0"], cfg["dK"] * EV, const=const)
    summ = ens.summary(const)
    cols = sorted(summ)
    return (csv_text(cols, [[summ[c] for c in cols]], cfg),
            json_text({"summary": summ, "errors": ens.errors}, cfg))


def cmd_shuttle(cfg):
    const = _const(cfg)
    rows = []
    for t in _floats(cfg["t_hz"]):
        s = ShuttleSpec.from_lever(t, cfg["alpha"], cfg["dv"], 1.0, const)
        st = min_shuttle_time(s.t_ij, s.A, cfg["pmax"], const=const)
        P = lz_probability(ShuttleSpec(s.t_ij, s.A, st.omega), const) if st.omega > 0 else 0.0
        rows.append((t, st.time, st.freq_hz, P))
    cols = ["t_hz", "min_time_s", "drive_hz", "P_LZ"]
    payload = {"lz": [dict(zip(cols, r)) for r in rows]}
    csv = csv_text(cols, rows, cfg)
    if cfg["columns"] > 0:
        fill = cfg["filling"] if cfg["filling"] == "maximal" else int(cfg["filling"])
        sch = waveform_schedule(cfg["columns"], cfg["tau_s"], fill)
        payload["schedule"] = {"spacing": sch.spacing, "occupied": sch.steady_occupied(),
                               "phases": sch.phases, "min_gap": sch.min_gap()}
        csv = sch.to_csv(cfg)
    return csv, json_text(payload, cfg)


def cmd_field(cfg):
    g = SheetGeometry(eval_offset=cfg["offset"])
    rows = field_profile(_floats(cfg["xs"]), g, _const(cfg))
    cols = ["x_m", "dEx_dVq", "dEx_dVmu", "dEz_dVq", "dEz_dVmu"]
    return csv_text(cols, rows, cfg), json_text({"profile": [dict(zip(cols, r)) for r in rows]},
                                                cfg)


def cmd_stability(cfg):
    lam = LeverArmMatrix.default()
    dv = [0.0, cfg["dvq"], 0.0, mu_compensation(lam, cfg["dvq"]) if cfg["compensate"] else 0.0]
    m = stability_map(lam, (0.0, 0.0, 0.0), _floats(cfg["v1"]), _floats(cfg["v2"]),
                      base=(0.0, cfg["vq"], 0.0, 0.0), dV=dv, const=_const(cfg))
    path = path_labels(lam, (0.0, 0.0, 0.0), (-0.1, cfg["vq"], 0.1, 0.0),
                       (0.1, cfg["vq"], -0.1, 0.0), dV=dv)
    labels = [[m.label(i, j) for j in range(len(m.v2))] for i in range(len(m.v1))]
    return m.to_csv(cfg), json_text({"v1": m.v1, "v2": m.v2, "labels": labels,
                                     "shuttle_path": path, "dV": dv}, cfg)


def _compile(cfg):
    circ = LogicalCircuit.from_json(Path(cfg["circuit"]).read_text())
    cc = CompileConfig(cfg["B0"], cfg["tau1q"], cfg["tau2q"], cfg["tau_s"], cfg["dK"] * EV)
    prog = compile(circ, SiteTable(cfg["seed"], cfg["sigma_g"]), cc, _const(cfg))
    return circ, prog


def cmd_compile(cfg):
    _, prog = _compile(cfg)
    d = prog.to_dict()
    rows = [(c["index"], c["kind"], c["logical"], c["role"], len(c["ops"])) for c in d["columns"]]
    return (csv_text(["column", "kind", "logical", "role", "n_ops"], rows, cfg),
            json_text({"program": d, "layout": prog.layout()}, cfg))


def cmd_run(cfg):
    circ, prog = _compile(cfg)
    psi0 = basis_state(circ.n_qubits, cfg["input"])
    out = run_statevector(prog, psi0)
    ref = simulate(circ, psi0, prog.resolved)
    ov = overlap(ref, out)
    rows = [(i, float(a.real), float(a.imag)) for i, a in enumerate(out)]
    return (csv_text(["index", "re", "im"], rows, cfg),
            json_text({"state_re": out.real, "state_im": out.imag, "overlap_direct": ov}, cfg))


def cmd_runtime(cfg):
    times = GateTimes(cfg["tau1q"], cfg["tau2q"], cfg["tau_s"])
    est = vqe_runtime(cfg["d1q"], cfg["d2q"], cfg["n_reps"], cfg["n_configs"], cfg["n_iters"],
                      times)
    sch = schedule(cfg["d1q"], cfg["d2q"], cfg["check_reps"], times)
    ep = endpoints()
    d = est.as_dict()
    d.update({"des_makespan": sch.makespan, "des_formula": sch.formula,
              "des_reps": cfg["check_reps"], "init_fidelity": ep.init_fidelity,
              "readout_fidelity": ep.readout_fidelity})
    cols = sorted(d)
    return csv_text(["quantity", "value"], [(k, d[k]) for k in cols], cfg), json_text(
        {"runtime": d}, cfg)


def cmd_footprint(cfg):
    w, length = footprint(cfg["n"], cfg["depth"])
    cf = control_footprints(cfg["R"], cfg["rho"], cfg["trace_width"], cfg["f_cutoff"],
                            cfg["cap_density"], cfg["column_qubits"])
    d = {"grid_width_m": w, "grid_length_m": length, **{k: float(v) for k, v in
                                                        cf.__dict__.items()}}
    return csv_text(["quantity", "value"], sorted(d.items()), cfg), json_text(
        {"footprint": d}, cfg)


COMMANDS = {
    "zmap": cmd_zmap, "twoqmap": cmd_twoqmap, "x90map": cmd_x90map,
    "solve-gate": cmd_solve_gate, "shuttle": cmd_shuttle, "field": cmd_field,
    "stability": cmd_stability, "compile": cmd_compile, "run": cmd_run,
    "runtime": cmd_runtime, "footprint": cmd_footprint,
}
DEFAULT_FORMAT = {"compile": "json", "run": "json", "solve-gate": "json", "runtime": "json"}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
        fmt = cfg["format"] or DEFAULT_FORMAT.get(args.command, "csv")
        cfg["format"] = fmt
        csv, js = COMMANDS[args.command](cfg)
        text = csv if fmt == "csv" else js
        dest = args.out
        if dest is None and os.environ.get(OUT_ENV):
            dest = str(Path(os.environ[OUT_ENV]) / f"{args.command}.{fmt}")
        if dest:
            write_text(dest, text)
        else:
            sys.stdout.write(text)
        return 0
    except (SpinPipeError, ValueError, OSError, KeyError) as exc:
        rec = exc.to_dict() if isinstance(exc, SpinPipeError) else {
            "error": "invalid_input", "type": type(exc).__name__, "message": str(exc)}
        sys.stderr.write(json.dumps(rec) + "\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
