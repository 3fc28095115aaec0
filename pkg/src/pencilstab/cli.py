"""Command-line front end: profiles, stability reports, speed scans, time evolution and plot data."""

import argparse
import csv
import io
import json
import sys
from pathlib import Path

import numpy as np

from .evolve import linearized_evolve, random_init
from .pencil import verdict
from .profiles import ConvergenceError, Model, default_grid, make_profile
from .spectral import Tolerances
from .verify import dumps, fmt, model_instance, model_verdict, threshold_scan

EXIT_OK = 0
EXIT_ARGS = 2
EXIT_ASSUMPTION = 3
EXIT_ANOMALY = 4

# key -> type for values read from a config file
CONFIG_TYPES = {
    "model": str, "c": float, "p": float, "N": int, "L": float, "dc": float,
    "c_lo": float, "c_hi": float, "t_end": float, "omega": float,
    "zero_tol_rel": float, "gap_tol_rel": float, "b_tol": float,
    "jobs": int, "seed": int, "out": str, "format": str, "trace": bool,
}

DEFAULTS = {
    "model": "boussinesq", "c": 0.3, "p": None, "N": None, "L": None, "dc": 0.01,
    "c_lo": 0.05, "c_hi": 0.95, "t_end": None, "omega": None,
    "zero_tol_rel": Tolerances.zero_tol_rel, "gap_tol_rel": Tolerances.gap_tol_rel,
    "b_tol": Tolerances.b_tol, "jobs": 1, "seed": 0, "out": None, "format": None,
    "trace": False,
}


class UsageError(Exception):
    pass


def read_config(path) -> dict:
    """Flat key = value file; '#' starts a comment, blank lines are ignored."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key = value")
        key, val = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in CONFIG_TYPES:
            raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
        typ = CONFIG_TYPES[key]
        try:
            if typ is bool:
                out[key] = val.lower() in ("1", "true", "yes", "on")
            else:
                out[key] = typ(val)
        except ValueError:
            raise UsageError(f"{path}:{lineno}: bad value for {key}: {val!r}")
    return out


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key = value file (flags take precedence)")
    common.add_argument("--model", choices=[m.value for m in Model], default=None)
    common.add_argument("--c", type=float, default=None, help="wave speed")
    common.add_argument("--p", type=float, default=None, help="nonlinearity power")
    common.add_argument("--N", type=int, default=None, help="grid points (per component)")
    common.add_argument("--L", type=float, default=None, help="half-length of the domain")
    common.add_argument("--tol-zero-rel", dest="zero_tol_rel", type=float, default=None)
    common.add_argument("--tol-gap-rel", dest="gap_tol_rel", type=float, default=None)
    common.add_argument("--tol-b", dest="b_tol", type=float, default=None)
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--out", default=None, help="output directory")
    common.add_argument("--format", choices=["csv", "json"], default=None)

    ap = argparse.ArgumentParser(prog="pencilstab", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    sub.add_parser("profile", parents=[common], help="compute and write a wave profile")

    sp = sub.add_parser("index", parents=[common], help="stability index and verdict")
    sp.add_argument("--omega", type=float, default=None, help="override omega (default |c|)")
    sp.add_argument("--trace", action="store_true", default=None, help="include the G(lambda) samples")

    sp = sub.add_parser("scan", parents=[common], help="verdicts over a range of speeds")
    sp.add_argument("--c-lo", dest="c_lo", type=float, default=None)
    sp.add_argument("--c-hi", dest="c_hi", type=float, default=None)
    sp.add_argument("--dc", type=float, default=None)
    sp.add_argument("--jobs", type=int, default=None)

    sp = sub.add_parser("evolve", parents=[common], help="integrate the linearized equation")
    sp.add_argument("--t-end", dest="t_end", type=float, default=None)

    sp = sub.add_parser("gplot", help="convert JSON reports to gnuplot data files")
    sp.add_argument("reports", nargs="+", help="JSON files from index or scan")
    sp.add_argument("--out", default=None, help="output directory")
    return ap


def resolve(args) -> argparse.Namespace:
    """Merge flags over config-file values over defaults."""
    cfg = read_config(args.config) if getattr(args, "config", None) else {}
    merged = dict(DEFAULTS)
    merged.update(cfg)
    for key, val in vars(args).items():
        if val is not None:
            merged[key] = val
    ns = argparse.Namespace(**merged)
    if ns.p is None:
        ns.p = 2.0 if ns.model == "boussinesq" else 3.0
    return ns


def tolerances(ns) -> Tolerances:
    return Tolerances(ns.zero_tol_rel, ns.gap_tol_rel, ns.b_tol)


def emit(ns, name: str, text: str):
    """Write to OUT/name when --out is given, else to stdout."""
    if ns.out:
        d = Path(ns.out)
        d.mkdir(parents=True, exist_ok=True)
        with open(d / name, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def cmd_profile(ns) -> int:
    grid = default_grid(ns.model, ns.c, ns.p, n_points=ns.N, half_length=ns.L)
    prof = make_profile(ns.model, ns.c, ns.p, grid=grid)
    x = grid.nodes
    if prof.companion is not None:
        rows = [(fmt(a), fmt(b), fmt(s)) for a, b, s in zip(x, prof.values, prof.companion)]
        text = _csv(("x", "phi", "psi"), rows)
    else:
        text = _csv(("x", "phi"), [(fmt(a), fmt(b)) for a, b in zip(x, prof.values)])
    meta = {"model": ns.model, "c": ns.c, "p": ns.p, "residual": prof.residual,
            "N": grid.n_points, "L": grid.half_length, "bc": grid.bc,
            "peak": float(np.max(prof.values))}
    if ns.out:
        emit(ns, "profile.csv", text)
        emit(ns, "profile.json", dumps(meta))
    else:
        emit(ns, "", dumps(meta) if ns.format == "json" else text)
    return EXIT_OK


def index_report(ns):
    inst = model_instance(ns.model, ns.c, ns.p, n_points=ns.N, half_length=ns.L, tol=tolerances(ns))
    rep, grid = inst.report, inst.H.grid
    out = {
        "model": ns.model, "c": ns.c, "p": ns.p,
        "grid": {"N": grid.n_points, "L": grid.half_length, "bc": grid.bc},
        "assumptions": {"A": rep.assumption_A, "B": rep.assumption_B, "delta_sq": rep.delta_sq,
                        "sigma_sq": rep.sigma_sq, "b_pairing": rep.b_pairing,
                        "n_negative": rep.n_negative, "kernel_dim": rep.kernel_dim},
        "q_index": None, "omega_star": None, "stable": None, "lambda0": None,
        "residuals": {"profile": inst.profile.residual, "pencil": None},
        "anomalies": [],
    }
    if not inst.ok:
        return out, EXIT_ASSUMPTION, None
    omega = abs(ns.c) if ns.omega is None else ns.omega
    v = verdict(inst.H, rep, omega)
    out.update(omega=omega, q_index=v.q_index, omega_star=v.omega_star, stable=v.stable,
               lambda0=v.lambda0, anomalies=v.anomalies)
    out["residuals"]["pencil"] = v.pencil_residual
    if ns.trace:
        out["g_trace"] = [[lam, g] for kind, lam, g in v.trace if kind == "scan"]
    return out, (EXIT_ANOMALY if v.anomalies else EXIT_OK), v


def cmd_index(ns) -> int:
    out, code, _ = index_report(ns)
    emit(ns, "index.json", dumps(out))
    return code


def cmd_scan(ns) -> int:
    table = threshold_scan(ns.model, ns.p, ns.c_lo, ns.c_hi, ns.dc, n_points=ns.N,
                           tol=tolerances(ns), jobs=ns.jobs)
    if ns.out:
        emit(ns, "scan.csv", table.to_csv())
        emit(ns, "scan.json", table.to_json())
    else:
        emit(ns, "", table.to_json() if ns.format == "json" else table.to_csv())
    if any(r.stable is None for r in table.rows):
        return EXIT_ASSUMPTION
    if any(f != "marginal" for r in table.rows for f in r.flags):
        return EXIT_ANOMALY
    return EXIT_OK


def cmd_evolve(ns) -> int:
    n_points = ns.N or 256
    inst = model_instance(ns.model, ns.c, ns.p, n_points=n_points, half_length=ns.L, tol=tolerances(ns))
    if not inst.ok:
        emit(ns, "evolve.json", dumps({"error": "assumptions (A)/(B) fail"}))
        return EXIT_ASSUMPTION
    v = model_verdict(inst)
    omega = abs(ns.c)
    t_end = ns.t_end or (20.0 / v.lambda0 if v.lambda0 else 200.0)
    traj = linearized_evolve(inst.H, omega, random_init(inst.H, ns.seed), t_end=t_end)
    rel = abs(traj.fitted_rate - v.lambda0) / v.lambda0 if v.lambda0 else None
    summary = {"model": ns.model, "c": ns.c, "p": ns.p, "N": n_points, "seed": ns.seed,
               "t_end": t_end, "dt": traj.dt, "fitted_rate": traj.fitted_rate,
               "fit_quality": traj.fit_quality, "lambda0": v.lambda0, "stable": v.stable,
               "relative_error": rel, "grows": traj.grows}
    text = _csv(("t", "norm"), [(fmt(t), fmt(n)) for t, n in zip(traj.times, traj.norms)])
    if ns.out:
        emit(ns, "trajectory.csv", text)
        emit(ns, "evolve.json", dumps(summary))
    else:
        emit(ns, "", dumps(summary) if ns.format == "json" else text)
    return EXIT_OK


def cmd_gplot(ns) -> int:
    """G(lambda) traces and omega*(c) vs |c| curves as whitespace-separated columns."""
    outdir = Path(ns.out or ".")
    outdir.mkdir(parents=True, exist_ok=True)
    for path in ns.reports:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        stem = Path(path).stem
        lines = []
        if "rows" in data:
            lines.append("# c omega_star abs_c stable")
            for r in data["rows"]:
                st = {True: 1, False: 0}.get(r["stable"], -1)
                lines.append(f"{fmt(r['c'])} {fmt(float(r['omega_star']))} {fmt(abs(r['c']))} {st}")
            name = f"{stem}_scan.dat"
        elif "g_trace" in data:
            lines.append("# lambda G")
            lines.extend(f"{fmt(a)} {fmt(b)}" for a, b in data["g_trace"])
            name = f"{stem}_G.dat"
        else:
            raise UsageError(f"{path}: neither a scan report nor an index report with --trace")
        (outdir / name).write_text("\n".join(lines) + "\n", encoding="utf-8")
    return EXIT_OK


COMMANDS = {"profile": cmd_profile, "index": cmd_index, "scan": cmd_scan,
            "evolve": cmd_evolve, "gplot": cmd_gplot}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        ns = resolve(args) if args.command != "gplot" else args
        return COMMANDS[args.command](ns)
    except (UsageError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ARGS
    except ConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ANOMALY
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ARGS


if __name__ == "__main__":
    sys.exit(main())
