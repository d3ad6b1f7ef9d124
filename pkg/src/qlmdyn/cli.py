"""Command-line front end: every command writes CSV tables plus a JSON manifest.

Settings come from a flat ``key=value`` file (``--config``) and flag
overrides; flags win. The output directory is ``--out``, else the
``QLMDYN_OUTPUT_DIR`` environment variable, else the working directory.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import os
import platform
import sys
import time
from importlib import resources

import numpy as np
import scipy

from . import __version__, kernels
from .lattice import ConfigurationError

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3

# per-command defaults; None means "required"
DEFAULTS = {
    "basis": {},
    "quench": {"n": 4, "m": 1.0, "J": 1.0, "t_max": 10.0, "n_t": 801},
    "loschmidt-scan": {"n": 2, "j_min": 1.0, "j_max": 2.0, "n_j": 400, "t_max": 10.0, "n_t": 800},
    "order-scan": {"n": 2, "m": 1.0, "J": 2.0, "n_k": 201, "t_max": 10.0, "n_t": 801},
    "vortices": {},
    "oracle": {"m": 1.0, "J": None, "n_max": 4},
    "circuit": {"params": None, "t_max": 100.0, "n_t": 401, "n_levels": 4, "g_r": 20.0,
                "delta": 1.0, "span": 1500.0, "step": 2.0, "target_ratio": -2.0,
                "n_starts": 8, "max_evals": 400},
}
COMMON = {"workers": 1, "seed": 0}


class CliError(Exception):
    """Configuration problem detected before or during argument resolution."""


def read_config(path):
    """Parse a flat key=value file; '#' starts a comment."""
    out = {}
    try:
        with open(path) as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise CliError(f"cannot read config {path}: {exc}") from None
    for no, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise CliError(f"{path}:{no}: expected key=value, got {line!r}")
        key, val = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = val
    return out


def _global_options(p, default):
    p.add_argument("--config", default=default, help="flat key=value settings file")
    p.add_argument("--out", default=default, help="output directory")
    p.add_argument("--workers", type=int, default=default)
    p.add_argument("--seed", type=int, default=default)


def _parser():
    p = argparse.ArgumentParser(prog="qlmdyn", description=__doc__.splitlines()[0])
    _global_options(p, None)
    # the same options are accepted after the subcommand as well
    common = argparse.ArgumentParser(add_help=False)
    _global_options(common, argparse.SUPPRESS)
    sub = p.add_subparsers(dest="command", required=True)
    _add = sub.add_parser
    sub.add_parser = lambda *a, **kw: _add(*a, parents=[common], **kw)

    b = sub.add_parser("basis", help="enumerate the gauge-invariant basis")
    b.add_argument("N", type=int)

    q = sub.add_parser("quench", help="Loschmidt amplitude and rate of one quench")
    for name, typ in (("n", int), ("m", float), ("J", float), ("t_max", float), ("n_t", int)):
        q.add_argument("--" + name.replace("_", "-"), dest=name, type=typ, default=None)

    ls = sub.add_parser("loschmidt-scan", help="G over (J/m, t*m)")
    for name, typ in (("n", int), ("j_min", float), ("j_max", float), ("n_j", int),
                      ("t_max", float), ("n_t", int)):
        ls.add_argument("--" + name.replace("_", "-"), dest=name, type=typ, default=None)

    o = sub.add_parser("order-scan", help="string order parameter g over (k, t*m)")
    for name, typ in (("n", int), ("m", float), ("J", float), ("n_k", int), ("t_max", float),
                      ("n_t", int)):
        o.add_argument("--" + name.replace("_", "-"), dest=name, type=typ, default=None)

    v = sub.add_parser("vortices", help="plaquette windings of a grid CSV")
    v.add_argument("grid", nargs="?", default=None,
                   help="grid CSV (x, y, re, im, ...); default: bundled single-vortex example")

    orc = sub.add_parser("oracle", help="closed-form N=2 / N=4 results")
    orc.add_argument("which", choices=["n2", "n4"])
    orc.add_argument("--m", dest="m", type=float, default=None)
    orc.add_argument("--J", dest="J", type=float, default=None)
    orc.add_argument("--n-max", dest="n_max", type=int, default=None)
    orc.add_argument("--list-zeros", action="store_true")

    c = sub.add_parser("circuit", help="circuit compiler, tuner, effective model, fidelity, readout")
    c.add_argument("action", choices=["compile", "tune", "effective", "fidelity", "readout"])
    for name, typ in (("params", str), ("t_max", float), ("n_t", int), ("n_levels", int),
                      ("g_r", float), ("delta", float), ("span", float), ("step", float),
                      ("target_ratio", float), ("n_starts", int), ("max_evals", int)):
        c.add_argument("--" + name.replace("_", "-"), dest=name, type=typ, default=None)
    return p


def _resolve(args):
    """Fill unset options from the config file, then from defaults."""
    cfg = read_config(args.config) if args.config else {}
    known = dict(COMMON)
    known.update(DEFAULTS[args.command])
    unknown = sorted(set(cfg) - set(known))
    if unknown:
        raise CliError(f"unknown config keys for '{args.command}': {', '.join(unknown)}")
    for key, default in known.items():
        if getattr(args, key, None) is not None:
            continue
        if key in cfg:
            typ = type(default) if default is not None else (str if key == "params" else float)
            try:
                val = typ(cfg[key])
            except ValueError:
                raise CliError(f"config key {key}: cannot parse {cfg[key]!r}") from None
        else:
            val = default
        setattr(args, key, val)
    if args.workers < 1:
        raise CliError("workers must be >= 1")
    return args


def _outdir(args):
    out = args.out or os.environ.get("QLMDYN_OUTPUT_DIR") or "."
    os.makedirs(out, exist_ok=True)
    return out


def _write_rows(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for r in rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in r])


def _axis(lo, hi, n):
    if n < 2:
        raise CliError("grid sizes must be >= 2")
    return np.linspace(lo, hi, n)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj) if math.isfinite(obj) else str(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


# command implementations return (files, results)

def cmd_basis(args, out):
    from .lattice import enumerate_gauge_basis

    basis = enumerate_gauge_basis(args.N)
    path = os.path.join(out, f"basis_N{args.N}.csv")
    n = args.N
    header = ["encoding"] + [f"link_z{i}" for i in range(n)] + [f"matter_z{i}" for i in range(n)]
    rows = [[r["encoding"], *r["link_z"], *r["matter_z"]] for r in basis.to_records()]
    _write_rows(path, header, rows)
    return [path], {"n_sites": n, "dimension": basis.dim}


def cmd_quench(args, out):
    from .dynamics import loschmidt_trace
    from .lattice import LatticeConfig

    cfg = LatticeConfig(args.n, args.m, args.J)
    times = _axis(0.0, args.t_max, args.n_t)
    res = loschmidt_trace(cfg, times)
    path = os.path.join(out, "quench.csv")
    _write_rows(path, ["t_m", "re_G", "im_G", "L", "lambda", "sigma0_z"],
                zip(res.times, res.amplitude.real, res.amplitude.imag, res.echo, res.rate,
                    res.sigma0_z))
    return [path], {"min_echo": float(res.echo.min()), "max_rate": float(res.rate.max())}


def cmd_loschmidt_scan(args, out):
    from .dynamics import loschmidt_scan, write_loschmidt_csv
    from .vortex import boundary_winding, plaquette_windings

    grid = loschmidt_scan(args.n, _axis(args.j_min, args.j_max, args.n_j),
                          _axis(0.0, args.t_max, args.n_t), workers=args.workers)
    path = os.path.join(out, "loschmidt.csv")
    write_loschmidt_csv(grid, args.n, path)
    vl = plaquette_windings(grid)
    vpath = os.path.join(out, "loschmidt_vortices.csv")
    vl.to_csv(vpath, (grid.x_label, grid.y_label))
    return [path, vpath], vl.summary(boundary_winding(grid))


def cmd_order_scan(args, out):
    from .lattice import LatticeConfig
    from .string_order import order_param_scan, write_order_csv
    from .vortex import boundary_winding, plaquette_windings

    cfg = LatticeConfig(args.n, args.m, args.J)
    grid = order_param_scan(cfg, _axis(0.0, math.pi, args.n_k), _axis(0.0, args.t_max, args.n_t),
                            workers=args.workers)
    path = os.path.join(out, "order.csv")
    write_order_csv(grid, path)
    vl = plaquette_windings(grid)
    vpath = os.path.join(out, "order_vortices.csv")
    vl.to_csv(vpath, (grid.x_label, grid.y_label))
    return [path, vpath], vl.summary(boundary_winding(grid))


def bundled_grid_path():
    return str(resources.files("qlmdyn") / "data" / "single_vortex.csv")


def cmd_vortices(args, out):
    from .grid import ScanGrid
    from .vortex import boundary_winding, plaquette_windings

    src = args.grid or bundled_grid_path()
    if not os.path.exists(src):
        raise CliError(f"grid file not found: {src}")
    grid = ScanGrid.from_csv(src)
    vl = plaquette_windings(grid)
    path = os.path.join(out, "vortices.csv")
    vl.to_csv(path, (grid.x_label, grid.y_label))
    summary = vl.summary(boundary_winding(grid))
    summary["input"] = os.path.abspath(src)
    return [path], summary


def cmd_oracle(args, out):
    from . import oracles

    if not args.m > 0:
        raise CliError("oracle needs m > 0")
    files = []
    res = {"which": args.which, "m": args.m}
    if args.which == "n2":
        if args.J is not None:
            sol = oracles.n2_solution(args.m, args.J)
            res["energies"] = dict(sol.energies)
        if args.list_zeros:
            zeros = oracles.n2_loschmidt_zeros(args.m, args.n_max)
            path = os.path.join(out, "n2_loschmidt_zeros.csv")
            _write_rows(path, ["J_over_m", "t"], zeros)
            files.append(path)
            res["loschmidt_zeros"] = zeros
            if args.J is not None:
                oz = oracles.n2_order_zeros(args.m, args.J, 10.0 / args.m)
                path = os.path.join(out, "n2_order_zeros.csv")
                _write_rows(path, ["k_c", "t", "family"], oz)
                files.append(path)
                res["order_zeros"] = oz
    else:
        if args.J is None:
            raise CliError("oracle n4 needs --J")
        sol = oracles.n4_solution(args.m, args.J)
        res["energies"] = dict(sol.energies)
        res["discriminant"] = oracles.n4_discriminant(args.J / args.m)
    if "energies" in res:
        path = os.path.join(out, f"oracle_{args.which}_energies.csv")
        _write_rows(path, ["state", "energy"], list(res["energies"].items()))
        files.append(path)
    path = os.path.join(out, f"oracle_{args.which}.json")
    with open(path, "w") as fh:
        json.dump(_jsonable(res), fh, indent=1)
    files.append(path)
    return files, res


def _load_params(args):
    from .circuit import CircuitParams

    if not args.params:
        raise CliError("circuit commands need --params (a JSON file as written by 'circuit tune')")
    try:
        return CircuitParams.load_json(args.params)
    except (OSError, KeyError, TypeError, json.JSONDecodeError) as exc:
        raise CliError(f"cannot load circuit params {args.params}: {exc}") from None


def cmd_circuit(args, out):
    from . import circuit as cm
    from . import circuit_dynamics as cd

    act = args.action
    if act == "tune":
        from .tuner import TuneSpec, tune

        spec = TuneSpec(target_ratio=args.target_ratio, seed=args.seed, n_starts=args.n_starts,
                        max_evals=args.max_evals, n_levels=args.n_levels)
        p, eff, report = tune(spec)
        ppath = os.path.join(out, "tuned_params.json")
        p.dump_json(ppath)
        rpath = os.path.join(out, "tune_report.json")
        with open(rpath, "w") as fh:
            json.dump(_jsonable(report.to_dict()), fh, indent=1)
        tpath = os.path.join(out, "tune_traces.csv")
        _write_rows(tpath, ["start", "evaluation", "objective"],
                    [(s["index"], k, v) for s in report.starts for k, v in enumerate(s["objective_trace"])])
        return [ppath, rpath, tpath], {"feasible": report.feasible, **eff.to_dict()}

    p = _load_params(args)
    sp = cm.spin_params(p)
    if act == "compile":
        path = os.path.join(out, "spin_params.csv")
        rows = [(k.replace("_2piGHz", ""), v * 1e3) for k, v in sorted(sp.to_dict().items())]
        _write_rows(path, ["name", "value_2piMHz"], rows)
        rz, rx = cm.hierarchy_ratios(sp)
        return [path], {"spin_params_2piMHz": dict(rows), "hierarchy": [rz, rx]}
    if act == "effective":
        eff = cd.extract_effective_params(p, args.n_levels)
        h0 = cd.extract_h0_eff(p, args.n_levels)
        path = os.path.join(out, "h0_eff.csv")
        _write_rows(path, ["state", "energy_2piMHz", "r_squared", "min_survival"],
                    [(i, e / cm.mhz(1), r, s) for i, (e, r, s) in
                     enumerate(zip(h0.energies, h0.r_squared, h0.min_survival))])
        return [path], {**eff.to_dict(), "h0_eff_2piMHz": h0.energies / cm.mhz(1)}
    if act == "fidelity":
        eff = cd.extract_effective_params(p, args.n_levels)
        h0 = cd.extract_h0_eff(p, args.n_levels)
        tr = cd.average_fidelity(p, eff, h0, _axis(0.0, args.t_max, args.n_t), args.n_levels)
        path = os.path.join(out, "fidelity.csv")
        tr.write_csv(path)
        return [path], {"min_avg_fidelity": float(tr.avg_fidelity.min()),
                        "max_leakage": float(tr.leakage.max()), **eff.to_dict(),
                        "h0_eff_2piMHz": h0.energies / cm.mhz(1)}
    # readout
    from .readout import ReadoutConfig, default_detunings, dispersive_shifts, distinguishability_windows

    d = default_detunings(args.span, args.step)
    cfgs = [ReadoutConfig(sp, cm.mhz(args.g_r), k, d, cm.mhz(args.delta)) for k in (0, 1)]
    files = []
    for k, cfg in enumerate(cfgs):
        path = os.path.join(out, f"readout_probe{k}.csv")
        dispersive_shifts(cfg).write_csv(path)
        files.append(path)
    w = distinguishability_windows(*cfgs)
    return files, w.summary()


COMMANDS = {
    "basis": cmd_basis,
    "quench": cmd_quench,
    "loschmidt-scan": cmd_loschmidt_scan,
    "order-scan": cmd_order_scan,
    "vortices": cmd_vortices,
    "oracle": cmd_oracle,
    "circuit": cmd_circuit,
}


def _numeric_errors():
    from .circuit_dynamics import FitError
    from .dynamics import NumericalError

    return (NumericalError, FitError, np.linalg.LinAlgError, ArithmeticError)


def main(argv=None):
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    t0 = time.perf_counter()
    try:
        args = _resolve(args)
        out = _outdir(args)
        files, results = COMMANDS[args.command](args, out)
    except _numeric_errors() as exc:
        print(f"qlmdyn: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (CliError, ConfigurationError, ValueError) as exc:
        print(f"qlmdyn: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    inputs = {k: v for k, v in vars(args).items() if k not in ("out",)}
    manifest = {
        "command": args.command,
        "inputs": inputs,
        "outputs": [os.path.basename(f) for f in files],
        "results": results,
        "versions": {"qlmdyn": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
                     "python": platform.python_version(), "kernel_backend": kernels.BACKEND},
        "timings": {"total_s": time.perf_counter() - t0},
    }
    name = args.command.replace("-", "_")
    if args.command in ("circuit", "oracle"):
        name += "_" + (args.action if args.command == "circuit" else args.which)
    with open(os.path.join(out, f"{name}_manifest.json"), "w") as fh:
        json.dump(_jsonable(manifest), fh, indent=1)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
