"""Closed-form stability indices and threshold scans over the wave speed."""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import List, Optional
import csv
import io
import json
import math

import numpy as np

from .grid import diff_matrix, norm
from .operators import OperatorH, build_operator
from .pencil import StabilityVerdict, is_marginal, stability_index, verdict
from .profiles import Model, SolverOpts, WaveProfile, beam_profile, default_grid, make_profile
from .spectral import SpectralReport, Spectrum, Tolerances, analyze


def boussinesq_closed_form_index(c: float, p: float) -> float:
    if not abs(c) < 1:
        raise ValueError(f"|c| must be < 1, got {c}")
    if p < 2:
        raise ValueError(f"p must be >= 2, got {p}")
    if p >= 5:
        return math.inf
    return math.sqrt((p - 1.0) * (1.0 - c * c)) / math.sqrt(5.0 - p)


def boussinesq_threshold(p: float) -> Optional[float]:
    """Speed above which the Boussinesq wave is stable; None when unstable for every speed."""
    return math.sqrt(p - 1.0) / 2.0 if p < 5 else None


def kgz_closed_form_index(c: float) -> float:
    if not abs(c) < 1:
        raise ValueError(f"|c| must be < 1, got {c}")
    return math.sqrt(1.0 - c * c)


KGZ_THRESHOLD = math.sqrt(0.5)


def beam_closed_form_index(c: float, norm_dphi: float, d_c_norm_dphi: float) -> float:
    """||phi'|| / (-2 d_c ||phi'||), or +inf when ||phi'|| is nondecreasing in c."""
    if not norm_dphi > 0:
        raise ValueError("norm_dphi must be positive")
    if d_c_norm_dphi >= 0:
        return math.inf
    return norm_dphi / (-2.0 * d_c_norm_dphi)


def beam_norm_dphi(c: float, p: int = 3, grid=None, delta_c: float = 1e-3,
                   opts: Optional[SolverOpts] = None):
    """(||phi_c'||, d/dc ||phi_c'||) by central differences on one fixed grid."""
    grid = grid or default_grid(Model.BEAM, c, p)
    d1 = diff_matrix(grid, 1)

    def nd(cc):
        return norm(grid, d1 @ beam_profile(cc, p, grid, opts).values)

    return nd(c), (nd(c + delta_c) - nd(c - delta_c)) / (2.0 * delta_c)


@dataclass(eq=False)
class Instance:
    profile: WaveProfile
    H: OperatorH
    spectrum: Spectrum
    report: SpectralReport

    @property
    def ok(self) -> bool:
        return self.report.assumption_A and self.report.assumption_B


def model_instance(model, c: float, p: float = 2, n_points: Optional[int] = None,
                   half_length: Optional[float] = None, tol: Tolerances = Tolerances(),
                   opts: Optional[SolverOpts] = None) -> Instance:
    model = Model(model)
    grid = default_grid(model, c, p, n_points=n_points, half_length=half_length)
    prof = make_profile(model, c, p, grid=grid, opts=opts)
    H = build_operator(prof)
    spec, report = analyze(H, tol)
    return Instance(prof, H, spec, report)


def model_verdict(inst: Instance) -> StabilityVerdict:
    """Verdict at omega = |c|."""
    return verdict(inst.H, inst.report, abs(inst.profile.c))


@dataclass
class ScanRow:
    c: float
    q_index: float = math.nan
    omega_star: float = math.nan
    stable: Optional[bool] = None
    lambda0: Optional[float] = None
    residual: Optional[float] = None
    flags: List[str] = field(default_factory=list)


@dataclass
class ScanTable:
    model: str
    p: float
    rows: List[ScanRow]
    threshold: Optional[float] = None
    refined_threshold: Optional[float] = None

    COLUMNS = ("c", "q_index", "omega_star", "stable", "lambda0", "residual", "flags")

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.COLUMNS)
        for r in self.rows:
            w.writerow([fmt(r.c), fmt(r.q_index), fmt(r.omega_star),
                        "" if r.stable is None else str(r.stable).lower(),
                        fmt(r.lambda0), fmt(r.residual), ";".join(r.flags)])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "model": self.model,
            "p": self.p,
            "threshold": self.threshold,
            "refined_threshold": self.refined_threshold,
            "rows": [asdict(r) for r in self.rows],
        }

    def to_json(self) -> str:
        return dumps(self.to_dict())


def fmt(x) -> str:
    """12 significant digits; inf and nan spelled out; None as empty."""
    if x is None:
        return ""
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if math.isnan(x):
        return "nan"
    return f"{x:.12g}"


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isfinite(x):
            return float(f"{x:.12g}")
        return fmt(x)
    return obj


def dumps(obj) -> str:
    """Deterministic JSON: 12 significant digits, sorted keys, non-finite floats as strings."""
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n"


def scan_row(model, c: float, p: float, n_points=None, tol: Tolerances = Tolerances(),
             root_search: bool = True) -> ScanRow:
    row = ScanRow(c=float(c))
    try:
        inst = model_instance(model, c, p, n_points=n_points, tol=tol)
    except Exception as exc:  # profile failures become row flags
        row.flags.append(f"profile: {exc}")
        return row
    rep = inst.report
    if not rep.assumption_A:
        row.flags.append(f"assumption A failed (n_negative={rep.n_negative}, kernel_dim={rep.kernel_dim})")
    if not rep.assumption_B:
        row.flags.append("assumption B failed")
    if not inst.ok:
        return row
    try:
        if root_search:
            v = model_verdict(inst)
            row.q_index, row.omega_star, row.stable = v.q_index, v.omega_star, v.stable
            row.lambda0, row.residual = v.lambda0, v.pencil_residual
            row.flags.extend(v.anomalies)
        else:
            row.q_index, row.omega_star = stability_index(inst.H, rep)
            row.stable = bool(abs(c) >= row.omega_star or is_marginal(abs(c), row.omega_star))
    except Exception as exc:
        row.flags.append(f"pencil: {exc}")
        row.stable = None
        return row
    if is_marginal(abs(c), row.omega_star):
        row.flags.append("marginal")
    return row


def _scan_row_args(args):
    return scan_row(*args)


def speed_grid(c_lo: float, c_hi: float, dc: float) -> np.ndarray:
    if not dc > 0:
        raise ValueError("dc must be positive")
    if c_hi < c_lo:
        raise ValueError("c_hi must be >= c_lo")
    n = int(math.floor((c_hi - c_lo) / dc + 1e-9)) + 1
    return np.round(c_lo + dc * np.arange(n), 12)


def threshold_scan(model, p: float, c_lo: float, c_hi: float, dc: float, n_points=None,
                   tol: Tolerances = Tolerances(), jobs: int = 1, root_search: bool = True,
                   refine: bool = True, refine_tol: float = 1e-4) -> ScanTable:
    """Verdicts over a uniform speed grid; the threshold is the first stable speed.

    With refine, the threshold is then pinned down by bisection on |c| - omega*(c).
    """
    model = Model(model)
    cs = speed_grid(c_lo, c_hi, dc)
    args = [(model, float(c), p, n_points, tol, root_search) for c in cs]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_scan_row_args, args))
    else:
        rows = [scan_row(*a) for a in args]
    table = ScanTable(model.value, p, rows)
    for i, r in enumerate(rows):
        if r.stable:
            table.threshold = r.c
            if refine and i > 0 and rows[i - 1].stable is False:
                table.refined_threshold = locate_threshold(
                    model, p, rows[i - 1].c, r.c, tol=refine_tol, n_points=n_points, tols=tol)
            break
    return table


def _stable_at(model, c, p, n_points, tols) -> bool:
    inst = model_instance(model, c, p, n_points=n_points, tol=tols)
    if not inst.ok:
        raise RuntimeError(f"assumptions fail at c={c}")
    _, wstar = stability_index(inst.H, inst.report)
    return bool(abs(c) >= wstar or is_marginal(abs(c), wstar))


def locate_threshold(model, p: float, c_unstable: float, c_stable: float, tol: float = 1e-4,
                     n_points=None, tols: Tolerances = Tolerances()) -> float:
    """Bisection on the sign of |c| - omega*(c) between an unstable and a stable speed."""
    a, b = float(c_unstable), float(c_stable)
    if _stable_at(model, a, p, n_points, tols):
        raise ValueError(f"c={a} is not unstable")
    if not _stable_at(model, b, p, n_points, tols):
        raise ValueError(f"c={b} is not stable")
    while abs(b - a) > tol:
        m = 0.5 * (a + b)
        if _stable_at(model, m, p, n_points, tols):
            b = m
        else:
            a = m
    return 0.5 * (a + b)
