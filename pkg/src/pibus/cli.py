"""Command-line front end: sweeps and reports as CSV or JSON tables.

    pibus sweep-coupling|gate-fidelity|flux-sweep|switch|crosstalk [--config FILE] ...

Every command resolves a configuration (defaults, then the JSON file, then
flags), validates it against the bundled schema and emits one row per grid
point. A failing grid point is flagged in its ``status``/``message`` columns
instead of aborting the run; the exit code is 0 only if every row succeeded.
"""
from __future__ import annotations

import argparse
import copy
import csv
import hashlib
import io
import json
import math
import sys
import warnings
from concurrent.futures import ProcessPoolExecutor
from importlib import resources
from importlib.metadata import PackageNotFoundError, version

import jsonschema

from . import fluxqubit, gates, network, spectral
from .bus import BusParams, ModelVariant
from .dynamics import DecoherenceParams
from .errors import InvalidArgumentError, NumericalError
from .units import to_ghz

COMMANDS = ("sweep-coupling", "gate-fidelity", "flux-sweep", "switch", "crosstalk")

DEFAULTS = {
    "omega_q_ghz": 4.0,
    "bus": {"omega_c": 3.0, "lam": 0.05, "n_ph": 3, "data_levels": 2, "anharm_ratio": 0.8,
            "auto_fock": False},
    "decoherence": {"enabled": True, "data_t1_us": 70.0, "data_tphi_us": 92.0,
                    "flux_t1_us": 20.0, "flux_tphi_us": 10.0, "resonator_q": 5e5,
                    "rate_convention": "ordinary", "truncation": 60},
    "flux": {"E_C": 27.1, "E_J_over_E_C": 35.0, "alpha": 0.8, "f_off": 0.522,
             "f_grid": [0.5, 0.505, 0.51, 0.515, 0.52, 0.522, 0.525, 0.53],
             "basis_size": 12, "kinetic": "derived"},
    "network": {"N": [2, 3, 7, 12, 100], "lambda_s_over_omega_c": 0.3},
    "output": {"path": "-", "format": "csv"},
    "jobs": 1,
}

DEFAULT_GRIDS = {
    "sweep-coupling": [0.1, 0.15, 0.2, 0.25, 0.3, 0.35],
    "gate-fidelity": [0.2, 0.25, 0.3, 0.32],
    "switch": [0.3],
}

UNITS = ("frequencies and couplings in units of omega_q; *_ghz columns are ordinary "
         "frequencies in GHz with omega_q = 2 pi x omega_q_ghz; t_gate in 1/omega_q, "
         "*_ns in ns; flux-qubit energies in GHz")


def load_schema() -> dict:
    text = resources.files("pibus").joinpath("config_schema.json").read_text()
    return json.loads(text)


def _merge(base: dict, extra: dict) -> dict:
    out = copy.deepcopy(base)
    for key, value in extra.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], value)
        else:
            out[key] = copy.deepcopy(value)
    return out


def resolve_config(command: str, file_config: dict | None = None, overrides: dict | None = None) -> dict:
    """Defaults <- file <- flags, validated against the schema."""
    schema = load_schema()
    file_config = file_config or {}
    jsonschema.validate(file_config, schema)
    if file_config.get("command", command) != command:
        raise InvalidArgumentError(
            f"config is for {file_config['command']!r}, command line asks for {command!r}")
    cfg = _merge(DEFAULTS, file_config)
    cfg = _merge(cfg, overrides or {})
    cfg["command"] = command
    cfg.setdefault("lambda_s_over_omega_c", DEFAULT_GRIDS.get(command, [0.3]))
    jsonschema.validate(cfg, schema)
    for name, grid in (("lambda_s_over_omega_c", cfg["lambda_s_over_omega_c"]),
                       ("flux.f_grid", cfg["flux"]["f_grid"]), ("network.N", cfg["network"]["N"])):
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise InvalidArgumentError(f"grid {name} must be strictly ascending")
    return cfg


def config_hash(cfg: dict) -> str:
    blob = json.dumps(cfg, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


# ---------------------------------------------------------------------------
# builders

def bus_params(cfg: dict, ratio: float) -> BusParams:
    b = {k: v for k, v in cfg["bus"].items() if k != "auto_fock"}
    p = BusParams.at(ratio, **b)
    if cfg["bus"].get("auto_fock"):
        p = spectral.converge_fock(p)
    return p


def decoherence(cfg: dict) -> DecoherenceParams | None:
    d = cfg["decoherence"]
    if not d["enabled"]:
        return None
    keys = ("data_t1_us", "data_tphi_us", "flux_t1_us", "flux_tphi_us", "resonator_q", "rate_convention")
    return DecoherenceParams(omega_q_ghz=cfg["omega_q_ghz"], **{k: d[k] for k in keys})


def flux_params(cfg: dict, f: float | None = None) -> fluxqubit.FluxQubitParams:
    fc = cfg["flux"]
    return fluxqubit.FluxQubitParams(E_C=fc["E_C"], E_J=fc["E_J_over_E_C"] * fc["E_C"], alpha=fc["alpha"],
                                     f=fc["f_off"] if f is None else f, kinetic=fc["kinetic"])


# ---------------------------------------------------------------------------
# one row per grid point; module-level so a process pool can pickle them

def _row_sweep_coupling(cfg: dict, ratio: float) -> dict:
    p = bus_params(cfg, ratio)
    ec = spectral.effective_coupling(p)
    rwa = spectral.effective_coupling_split(p, ModelVariant.BUS_RWA).lambda_eff_split
    nxt = abs(spectral.effective_coupling_sum(p.replace(n_ph=p.n_ph + 1)).lambda_eff_sum)
    cur = abs(ec.lambda_eff_sum)
    drift = abs(nxt - cur) / max(nxt, cur) if max(nxt, cur) > 0 else 0.0
    return {"lambda_s": p.lambda_s1, "lambda_eff_sum": cur, "lambda_eff_split_full": ec.lambda_eff_split,
            "lambda_eff_split_rwa": rwa, "lambda_eff_sw": abs(ec.lambda_eff_sw),
            "n_ph": p.n_ph, "fock_drift": drift}


def _row_gate_fidelity(cfg: dict, ratio: float) -> dict:
    p = bus_params(cfg, ratio)
    dec = decoherence(cfg)
    M = cfg["decoherence"]["truncation"]
    ghz = cfg["omega_q_ghz"]
    bus = gates.gate_pipeline(p, dec, M=M, omega_q_ghz=ghz)
    direct = gates.direct_pipeline(bus.lambda_eff, dec, omega_q=p.omega_q, omega_q_ghz=ghz)
    return {"lambda_eff": abs(bus.lambda_eff), "t_gate": bus.t_gate, "t_gate_ns": bus.t_gate_ns,
            "f_avg_bus": bus.f_avg, "f_avg_direct": direct.f_avg, "leakage": bus.leakage,
            "theta_a": bus.theta_a, "theta_b": bus.theta_b}


def _row_flux_sweep(cfg: dict, f: float) -> dict:
    fq = flux_params(cfg, f)
    on = fluxqubit.flux_spectrum(fq.at_flux(fluxqubit.F_ON), cfg["flux"]["basis_size"])
    s = fluxqubit.flux_spectrum(fq, cfg["flux"]["basis_size"])
    ratio = s.omega_f / on.omega_f
    return {"omega_f_ghz": s.omega_f, "omega_f_over_omega_q": ratio * cfg["bus"]["omega_c"],
            "freq_ratio": ratio, "dipole": s.dipole, "dipole_ratio": s.dipole / on.dipole}


def _row_switch(cfg: dict, ratio: float) -> dict:
    p = bus_params(cfg, ratio)
    a = fluxqubit.switch_analysis(flux_params(cfg), p, basis_size=cfg["flux"]["basis_size"])
    return {"f_off": a.f_off, "freq_ratio": a.freq_ratio, "dipole_ratio": a.dipole_ratio,
            "omega_f_on_ghz": a.omega_f_on_ghz, "omega_f_off_ghz": a.omega_f_off_ghz,
            "lambda_eff_on": abs(a.lambda_eff_on), "lambda_eff_off": abs(a.lambda_eff_off),
            "on_off_ratio": a.on_off_ratio, "lambda_eff_single": abs(a.lambda_eff_single),
            "on_off_ratio_single": a.on_off_ratio_single, "partner_shift": a.partner_shift}


def _row_crosstalk(cfg: dict, N: int) -> dict:
    ratio = cfg["network"]["lambda_s_over_omega_c"]
    a = fluxqubit.switch_analysis(flux_params(cfg), bus_params(cfg, ratio),
                                  basis_size=cfg["flux"]["basis_size"])
    lam_on, lam_off = abs(a.lambda_eff_on), abs(a.lambda_eff_off)
    residual = network.residual_on_last_qubit(N, lam_off)
    explicit = (network.residual_from_hamiltonian(N, lam_off)
                if N <= network.MAX_EXPLICIT_N else math.nan)
    return {"lambda_s_over_omega_c": ratio, "lambda_eff_on": lam_on, "lambda_eff_off": lam_off,
            "residual": residual, "residual_explicit": explicit,
            "on_off_ratio": network.network_on_off_ratio(N, lam_on, lam_off),
            "pairwise_ratio": network.network_on_off_ratio(2, lam_on, lam_off)}


COMMAND_TABLE = {
    # command: (row function, grid key, grid column, frequency columns that get a *_ghz twin)
    "sweep-coupling": (_row_sweep_coupling, "lambda_s_over_omega_c", "lambda_s_over_omega_c",
                       ("lambda_s", "lambda_eff_sum", "lambda_eff_split_full", "lambda_eff_split_rwa",
                        "lambda_eff_sw")),
    "gate-fidelity": (_row_gate_fidelity, "lambda_s_over_omega_c", "lambda_s_over_omega_c",
                      ("lambda_eff",)),
    "flux-sweep": (_row_flux_sweep, "flux.f_grid", "f", ()),
    "switch": (_row_switch, "lambda_s_over_omega_c", "lambda_s_over_omega_c",
               ("lambda_eff_on", "lambda_eff_off", "lambda_eff_single", "partner_shift")),
    "crosstalk": (_row_crosstalk, "network.N", "N",
                  ("lambda_eff_on", "lambda_eff_off", "residual", "residual_explicit")),
}


def _grid(cfg: dict, key: str) -> list:
    node = cfg
    for part in key.split("."):
        node = node[part]
    return list(node)


def _run_point(args) -> tuple[dict | None, str, str]:
    command, cfg, x = args
    fn = COMMAND_TABLE[command][0]
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        try:
            row = fn(cfg, x)
        except (NumericalError, InvalidArgumentError) as exc:
            return None, "error", f"{type(exc).__name__}: {exc}"
    note = "; ".join(sorted({str(w.message) for w in caught}))
    return row, "ok", note


def run(cfg: dict) -> tuple[list[str], list[dict]]:
    """Evaluate every grid point; rows keep grid order whatever the pool does."""
    command = cfg["command"]
    _, grid_key, grid_col, freq_cols = COMMAND_TABLE[command]
    grid = _grid(cfg, grid_key)
    tasks = [(command, cfg, x) for x in grid]
    if cfg["jobs"] > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=cfg["jobs"]) as pool:
            results = list(pool.map(_run_point, tasks))
    else:
        results = [_run_point(t) for t in tasks]
    value_cols: list[str] = []
    for row, _, _ in results:
        for c in row or {}:
            if c not in value_cols and c != grid_col:
                value_cols.append(c)
    columns = [grid_col]
    for c in value_cols:
        columns.append(c)
        if c in freq_cols:
            columns.append(c + "_ghz")
    columns += ["status", "message"]
    rows = []
    for x, (row, status, note) in zip(grid, results):
        out = {grid_col: x}
        for c in value_cols:
            v = math.nan if row is None else row.get(c, math.nan)
            out[c] = v
            if c in freq_cols:
                out[c + "_ghz"] = to_ghz(v, cfg["omega_q_ghz"]) if isinstance(v, float) else v
        out["status"], out["message"] = status, note
        rows.append(out)
    return columns, rows


# ---------------------------------------------------------------------------
# output

def format_number(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, int):
        return str(x)
    if isinstance(x, float):
        if math.isnan(x):
            return ""
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        if x != 0 and abs(x) < 1e-3:
            return f"{x:.10e}"
        return f"{x:.12g}"
    return str(x)


def _json_value(x):
    if isinstance(x, float):
        if math.isnan(x):
            return None
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
    return x


def _package_version() -> str:
    try:
        return version("artifact")
    except PackageNotFoundError:
        return "unknown"


def _physics_config(cfg: dict) -> dict:
    # where the table is written does not change its content
    out = copy.deepcopy(cfg)
    out["output"].pop("path", None)
    return out


def metadata(cfg: dict) -> dict:
    cfg = _physics_config(cfg)
    return {"tool": "pibus", "version": _package_version(), "command": cfg["command"],
            "config_sha256": config_hash(cfg), "units": UNITS,
            "config": json.dumps(cfg, sort_keys=True, separators=(",", ":"))}


def render(cfg: dict, columns: list[str], rows: list[dict], fmt: str) -> str:
    meta = metadata(cfg)
    if fmt == "json":
        doc = {"metadata": {**meta, "config": _physics_config(cfg)}, "columns": columns,
               "rows": [{c: _json_value(r[c]) for c in columns} for r in rows]}
        return json.dumps(doc, indent=2, allow_nan=False) + "\n"
    buf = io.StringIO()
    for key, value in meta.items():
        buf.write(f"# {key}: {value}\n")
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(columns)
    for r in rows:
        writer.writerow([format_number(r[c]) for c in columns])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# argument parsing

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pibus", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON run configuration")
        p.add_argument("--lambda-s", type=float, nargs="+", dest="lambda_s",
                       help="lambda_s grid in units of omega_c")
        p.add_argument("--omega-q-ghz", type=float, dest="omega_q_ghz")
        p.add_argument("--fock", type=int, help="photon cutoff per resonator")
        p.add_argument("--levels", type=int, choices=(2, 3), help="data-qubit levels")
        p.add_argument("--no-dissipation", action="store_true")
        p.add_argument("--jobs", type=int, help="worker processes for the sweep")
        p.add_argument("--out", help="output path, '-' for stdout")
        p.add_argument("--format", choices=("csv", "json"), dest="fmt")
    return parser


def _overrides(args) -> dict:
    out: dict = {}
    if args.lambda_s is not None:
        out["lambda_s_over_omega_c"] = args.lambda_s
    if args.omega_q_ghz is not None:
        out["omega_q_ghz"] = args.omega_q_ghz
    bus = {}
    if args.fock is not None:
        bus["n_ph"] = args.fock
    if args.levels is not None:
        bus["data_levels"] = args.levels
    if bus:
        out["bus"] = bus
    if args.no_dissipation:
        out["decoherence"] = {"enabled": False}
    if args.jobs is not None:
        out["jobs"] = args.jobs
    output = {}
    if args.out is not None:
        output["path"] = args.out
    if args.fmt is not None:
        output["format"] = args.fmt
    if output:
        out["output"] = output
    return out


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        file_cfg = None
        if args.config:
            with open(args.config) as fh:
                file_cfg = json.load(fh)
        cfg = resolve_config(args.command, file_cfg, _overrides(args))
    except (OSError, json.JSONDecodeError, jsonschema.ValidationError, InvalidArgumentError) as exc:
        msg = exc.message if isinstance(exc, jsonschema.ValidationError) else str(exc)
        print(f"pibus: invalid configuration: {msg}", file=sys.stderr)
        return 2
    columns, rows = run(cfg)
    text = render(cfg, columns, rows, cfg["output"]["format"])
    path = cfg["output"]["path"]
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    return 0 if all(r["status"] == "ok" for r in rows) else 1


if __name__ == "__main__":
    sys.exit(main())
