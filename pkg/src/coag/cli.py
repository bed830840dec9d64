"""Command-line entry point ``coag``.

Subcommands write CSV (field data) or JSON (root lists) plus one
``manifest.json`` per output directory.  Floats are written in shortest
round-trip form, so identical inputs give byte-identical files.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from . import kernels as kn
from . import lattice as lt
from . import reference as rf
from . import spectral as sp
from . import wavesim as ws
from .errors import ConfigError, NumericalFailure

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 2, 3


def fmt(x) -> str:
    return repr(float(x))


# -- output helpers -------------------------------------------------------------------


class Output:
    """Resolves ``--out``: a directory, a single file (suffix given) or stdout."""

    def __init__(self, out: str | None, default_name: str):
        if out is None:
            self.dir, self.file = None, None
        elif Path(out).suffix:
            self.file = Path(out)
            self.dir = self.file.parent
        else:
            self.dir = Path(out)
            self.file = self.dir / default_name
        if self.dir is not None:
            self.dir.mkdir(parents=True, exist_ok=True)

    def write_text(self, text: str, name: str | None = None) -> None:
        if self.dir is None:
            sys.stdout.write(text)
            return
        path = self.dir / name if name else self.file
        with open(path, "w", newline="") as fh:
            fh.write(text)

    def manifest(self, record: dict) -> None:
        if self.dir is None:
            return
        with open(self.dir / "manifest.json", "w") as fh:
            json.dump(record, fh, indent=2, sort_keys=True, default=_json_default)
            fh.write("\n")


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, complex):
        return [o.real, o.imag]
    if hasattr(o, "value"):
        return o.value
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def csv_text(header: list[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([c if isinstance(c, str) else fmt(c) for c in r])
    return buf.getvalue()


def threads(args) -> int:
    n = args.threads if args.threads is not None else os.environ.get("COAG_THREADS", "1")
    try:
        n = int(n)
    except ValueError as exc:
        raise ConfigError(f"thread count must be an integer, got {n!r}") from exc
    if n < 1:
        raise ConfigError("thread count must be at least 1")
    return n


def load_config(path: str | None) -> dict:
    if not path:
        return {}
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    return data


def overrides(args, names: dict[str, str]) -> dict:
    """Flag values that were given explicitly, keyed by config field."""
    return {field: getattr(args, dest) for dest, field in names.items() if getattr(args, dest) is not None}


# -- subcommands -----------------------------------------------------------------------


def cmd_spectrum(args, out: Output) -> dict:
    if args.kernel == "alpha":
        norm = args.norm or "aunit"
        ks = np.linspace(0.0, args.k_max, int(round(args.k_max / args.dk)) + 1)
        M = sp.m_alpha_closed(args.alpha, ks, norm)
        kern = kn.AlphaFamily(args.alpha, norm)
        rows = [(k, m.real, m.imag) for k, m in zip(ks, np.atleast_1d(M))]
        scan = sp.stability_scan(args.alpha, args.k_max, args.dk, norm)
        diag = {"max_re": scan.max_re, "argmax_k": scan.argmax_k, "verdict": scan.verdict}
    else:
        kern = kn.kernel_from_params(args.kernel, args.alpha, args.norm, args.kernel_eps, args.eta)
        ks = np.linspace(0.0, args.k_max, int(round(args.k_max / args.dk)) + 1)
        rows = []
        for k in ks:
            m = sp.m_of(kern, k).M
            rows.append((k, m.real, m.imag))
        diag = {"max_re": max(r[1] for r in rows)}
    out.write_text(csv_text(["k", "reM", "imM"], rows))
    return {"kernel": kn.describe(kern), "diagnostics": diag}


def cmd_roots(args, out: Output) -> dict:
    search = sp.RootSearch(spacing=args.spacing, workers=threads(args))
    roots = sp.dispersion_roots(args.alpha, search)
    payload = {
        "alpha": args.alpha,
        "norm": "aunit",
        "roots": [
            {"re": r.k.real, "im": r.k.imag, "residual": r.residual, "dominant": r.dominant} for r in roots
        ],
    }
    out.write_text(json.dumps(payload, indent=2) + "\n")
    dom = sp.dominant_roots(roots)
    return {
        "kernel": kn.describe(kn.AlphaFamily(args.alpha, "aunit")),
        "diagnostics": {
            "n_roots": len(roots),
            "max_residual": max(r.residual for r in roots),
            "dominant_oscillatory": any(r.oscillatory for r in dom),
        },
    }


def cmd_reference(args, out: Output) -> dict:
    x = np.linspace(args.x_min, args.x_max, args.n)
    if args.profile == "g1":
        vals = rf.additive_g1(x)
        extra = {"b": 2.0}
    elif args.profile == "grho":
        if args.rho is None:
            raise ConfigError("--profile grho needs --rho")
        prof = rf.AdditiveProfile(args.rho)
        vals = prof(x)
        extra = {"b": prof.b, "x_switch": prof.x_switch}
    else:
        vals = rf.nwave(x, args.mass)
        extra = {"mass": args.mass}
    out.write_text(csv_text(["x", "value"], zip(x, np.atleast_1d(vals))))
    return {"diagnostics": extra}


_SIM_FLAGS = {
    "alpha": "alpha",
    "eps": "eps",
    "L": "L",
    "R": "R",
    "tau": "tau",
    "t_end": "T_end",
    "snap": "snap",
}


def sim_config(args) -> ws.SimConfig:
    data = load_config(args.config)
    data.update(overrides(args, _SIM_FLAGS))
    init = dict(data.get("init") or {})
    if args.init is not None:
        init["kind"] = args.init
    for dest, key in (("c_minus", "c_minus"), ("mass", "mass"), ("init_file", "path")):
        if getattr(args, dest) is not None:
            init[key] = getattr(args, dest)
    data["init"] = init
    if "alpha" not in data:
        raise ConfigError("simulate needs --alpha or a config with alpha")
    return ws.SimConfig.from_dict(data)


def cmd_simulate(args, out: Output) -> dict:
    cfg = sim_config(args)
    res = ws.simulate(cfg)
    rows = []
    for s in res.snapshots:
        for X, u in zip(s.X, s.u):
            rows.append((s.T, X, u))
    out.write_text(csv_text(["T", "X", "u"], rows))
    diag = {
        "steps": res.steps,
        "tau_used": res.tau,
        "tau_max": cfg.tau_max,
        "mass_series": [{"T": T, "mass": m} for T, m in res.mass],
    }
    if cfg.init.left_constant == 0:
        diag["mass_drift_rate"] = res.mass_drift_rate
    return {"config": cfg.to_dict(), "kernel": kn.describe(cfg.kernel), "diagnostics": diag}


def lattice_initial(args) -> lt.LatticeState:
    if args.init == "box":
        return lt.box(args.mass, args.width)
    if args.init == "riemann":
        return lt.riemann(args.c_left)
    if not args.init_file:
        raise ConfigError("--init file needs --init-file")
    with open(args.init_file, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows or "j" not in rows[0] or "u" not in rows[0]:
        raise ConfigError(f"{args.init_file}: expected CSV columns j,u")
    j = [int(r["j"]) for r in rows]
    if j != list(range(j[0], j[0] + len(j))):
        raise ConfigError("lattice file must list consecutive sites")
    u = np.array([float(r["u"]) for r in rows])
    return lt.LatticeState(j[0], np.concatenate([u, np.zeros(64)]), c=args.c_left or 0.0)


def cmd_lattice(args, out: Output) -> dict:
    s = lattice_initial(args)
    w0 = lt.initial_slope_sup(s)
    m0 = s.mass
    snap = args.snap or args.t_end
    n = max(1, int(round(args.t_end / snap)))
    times = [args.t_end * (i + 1) / n for i in range(n)]
    states = [s] + lt.lattice_trajectory(s, times, args.tol)
    rows = [(st.t, j, u) for st in states for j, u in zip(st.j, st.u)]
    out.write_text(csv_text(["t", "j", "u"], rows))
    diag = {
        "mass_drift": max(abs(st.mass - m0) for st in states) if s.c == 0 else None,
        "max_entropy_gap": max(lt.entropy_gap(st, w0) for st in states) if w0 > 0 else None,
        "decay_ratio": [lt.decay_ratio(st) for st in states if st.t > 0],
    }
    return {"kernel": {"variant": "diagonal"}, "diagnostics": diag}


def read_snapshots(run: Path):
    """``(time, grid spacing, x, u)`` per snapshot of a lattice or simulate run."""
    path = run / "snapshots.csv"
    if not path.exists():
        raise ConfigError(f"{path} not found")
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [tuple(float(v) for v in r) for r in reader]
    if header not in (["t", "j", "u"], ["T", "X", "u"]):
        raise ConfigError(f"{path}: unexpected header {header}")
    groups: dict[float, list] = {}
    for t, x, u in rows:
        groups.setdefault(t, []).append((x, u))
    out = []
    for t in sorted(groups):
        x, u = map(np.array, zip(*groups[t]))
        h = 1.0 if header[0] == "t" else float(x[1] - x[0])
        out.append((t, h, x, u))
    return header[0], out


def cmd_compare(args, out: Output) -> dict:
    run = Path(args.run)
    kind, snaps = read_snapshots(run)
    scale = 1.0
    if kind == "T":
        with open(run / "manifest.json") as fh:
            alpha = json.load(fh)["config"]["alpha"]
        # Burgers time of the simulator: u_T + A2 (u^2)_X = 0
        scale = ws.simulator_burgers_coefficient(alpha)
    rows = []
    for t, h, x, u in snaps:
        if t <= 0:
            continue
        tb = scale * t
        err = h * math.fsum(np.abs(u - rf.nwave(x / math.sqrt(tb), args.nwave_mass) / math.sqrt(tb)))
        rows.append((t, err))
    text = csv_text(["t", "nwave_error"], rows)
    sys.stdout.write(text)
    if out.dir is not None:
        out.write_text(text)
    return {"diagnostics": {"run": str(run), "nwave_mass": args.nwave_mass}}


# -- parser ---------------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="output directory (or file for single-output commands)")
    common.add_argument("--threads", type=int, help="worker threads (fallback: COAG_THREADS)")
    common.add_argument("--config", help="JSON config; flags override its values")

    p = argparse.ArgumentParser(prog="coag", description="Coagulation numerics laboratory")
    p.add_argument("--version", action="version", version=f"coag {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("spectrum", parents=[common], help="sample M(k) on [0, k_max]")
    s.add_argument("--kernel", default="alpha", choices=["alpha", "diagonal", "near-diagonal"])
    s.add_argument("--alpha", type=float)
    s.add_argument("--norm", choices=["simplex", "aunit"])
    s.add_argument("--kernel-eps", type=float, help="near-diagonal support half width")
    s.add_argument("--eta", choices=["uniform", "atoms"])
    s.add_argument("--k-max", type=float, default=40.0)
    s.add_argument("--dk", type=float, default=0.01)

    r = sub.add_parser("roots", parents=[common], help="dispersion roots of M(k) + ik")
    r.add_argument("--alpha", type=float, required=True)
    r.add_argument("--spacing", type=float, default=0.5)

    f = sub.add_parser("reference", parents=[common], help="sample a closed-form profile")
    f.add_argument("--profile", choices=["g1", "grho", "nwave"], required=True)
    f.add_argument("--rho", type=float)
    f.add_argument("--mass", type=float, default=1.0)
    f.add_argument("--x-min", type=float, default=-10.0)
    f.add_argument("--x-max", type=float, default=10.0)
    f.add_argument("--n", type=int, default=201)

    m = sub.add_parser("simulate", parents=[common], help="run the exponential-variable scheme")
    m.add_argument("--alpha", type=float)
    m.add_argument("--eps", type=float)
    m.add_argument("--L", type=float)
    m.add_argument("--R", type=float)
    m.add_argument("--tau", type=float)
    m.add_argument("--t-end", type=float)
    m.add_argument("--snap", type=float)
    m.add_argument("--init", choices=["riemann", "bump", "file"])
    m.add_argument("--c-minus", type=float)
    m.add_argument("--mass", type=float)
    m.add_argument("--init-file")

    la = sub.add_parser("lattice", parents=[common], help="integrate the diagonal-kernel lattice")
    la.add_argument("--init", choices=["box", "riemann", "file"], default="box")
    la.add_argument("--mass", type=float, default=1.0)
    la.add_argument("--width", type=int, default=5)
    la.add_argument("--c-left", type=float, default=1.0)
    la.add_argument("--init-file")
    la.add_argument("--t-end", type=float, required=True)
    la.add_argument("--snap", type=float)
    la.add_argument("--tol", type=float, default=1e-10)

    c = sub.add_parser("compare", parents=[common], help="N-wave error per snapshot of a run")
    c.add_argument("--run", required=True)
    c.add_argument("--nwave-mass", type=float, default=1.0)
    return p


_COMMANDS = {
    "spectrum": (cmd_spectrum, "spectrum.csv"),
    "roots": (cmd_roots, "roots.json"),
    "reference": (cmd_reference, "profile.csv"),
    "simulate": (cmd_simulate, "snapshots.csv"),
    "lattice": (cmd_lattice, "snapshots.csv"),
    "compare": (cmd_compare, "nwave_error.csv"),
}


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    fn, default_name = _COMMANDS[args.command]
    params = {k: v for k, v in vars(args).items() if k != "command"}
    record = {"subcommand": args.command, "parameters": params, "version": __version__}
    t0 = time.perf_counter()
    out = None
    try:
        out = Output(args.out, default_name)
        if args.command == "spectrum" and args.kernel == "alpha" and args.alpha is None:
            raise ConfigError("spectrum needs --alpha")
        record.update(fn(args, out))
        code = EXIT_OK
    except ConfigError as exc:
        record["error"] = {"kind": "config", "type": type(exc).__name__, "message": str(exc)}
        code = EXIT_CONFIG
    except NumericalFailure as exc:
        record["error"] = {"kind": "numerical", "type": type(exc).__name__, "message": str(exc)}
        code = EXIT_NUMERICAL
    record["wall_time"] = time.perf_counter() - t0
    record["exit_code"] = code
    if code:
        print(f"coag {args.command}: {record['error']['type']}: {record['error']['message']}", file=sys.stderr)
    if out is not None:
        out.manifest(record)
    return code


def main() -> None:
    try:
        code = run()
    except BrokenPipeError:
        # downstream reader closed early (e.g. piped into head)
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        code = EXIT_OK
    sys.exit(code)
