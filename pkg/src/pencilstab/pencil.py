"""The quadratic pencil lambda^2 + 2 omega lambda d/dx + H and its stability index.

G(omega, lam) = <[H + lam^2 + 2 omega lam P0 d P0]^{-1} phi', phi'> + (lam^2 - delta^2)/(4 omega^2 lam^2)

vanishes at lam > 0 exactly when lam is a real unstable eigenvalue of the pencil.
"""

from dataclasses import dataclass, field
from typing import List, Optional
import math
import weakref

import numpy as np
from scipy.linalg import LinAlgError, eigvals, lu_factor, lu_solve
from scipy.optimize import brentq

from .operators import OperatorH
from .spectral import SpectralReport, kernel_pseudo_solve, project_P0

Q_ZERO_TOL = 1e-8        # q_index above -Q_ZERO_TOL * ||psi0'||^2 is treated as >= 0
MARGINAL_REL = 1e-6      # |omega| within this relative distance of omega* counts as stable
TANGENCY_TOL = 1e-10
SCAN_POINTS = 48


@dataclass(frozen=True)
class PencilEval:
    omega: float
    lam: float
    g_value: float
    solve_residual: float


@dataclass(frozen=True)
class LaurentCoeffs:
    d_minus2: float
    d_minus1: float
    a_coef: float
    b_coef: float
    n_value: float = float("nan")


@dataclass(eq=False)
class StabilityVerdict:
    omega: float
    q_index: float
    omega_star: float
    stable: bool
    lambda0: Optional[float] = None
    eigvec: Optional[np.ndarray] = field(default=None, repr=False)
    pencil_residual: Optional[float] = None
    anomalies: List[str] = field(default_factory=list)
    trace: List[tuple] = field(default_factory=list, repr=False)

    def trace_lines(self) -> List[str]:
        """Line-oriented dump of every G sample and bracket taken during the search."""
        out = ["# kind lambda G"]
        for kind, lam, g in self.trace:
            out.append(f"{kind} {lam:.12e} {g:.12e}")
        return out


class _System:
    """Dense pieces of the restricted pencil, shared by all (omega, lam) for one report."""

    def __init__(self, H: OperatorH, report: SpectralReport):
        if not (report.assumption_A and report.assumption_B):
            raise ValueError("assumptions (A) and (B) must both hold for pencil computations")
        h = H.grid.spacing
        n = H.size
        phi = report.phi
        self.H = H
        self.h = h
        self.phi = phi
        self.dphi = H.apply_dx(phi)
        self.delta_sq = report.delta_sq
        self.P0 = np.eye(n) - h * np.outer(phi, phi)
        self.A = self.P0 @ H.matrix @ self.P0
        self.B = self.P0 @ H.dx @ self.P0
        stiffness = np.trace(np.abs(H.matrix)) / n
        self.pin = stiffness * h * np.outer(phi, phi)
        self.rhs = project_P0(report, self.dphi)

    def matrix(self, omega: float, lam: float) -> np.ndarray:
        return self.A + lam * lam * self.P0 + (2.0 * omega * lam) * self.B + self.pin

    def solve(self, omega: float, lam: float, g: Optional[np.ndarray] = None):
        m = self.matrix(omega, lam)
        rhs = self.rhs if g is None else g
        try:
            x = lu_solve(lu_factor(m, check_finite=False), rhs, check_finite=False)
        except (LinAlgError, ValueError) as exc:
            raise RuntimeError(f"restricted pencil solve failed at lambda={lam}: {exc}") from exc
        rn = np.linalg.norm(rhs)
        res = np.linalg.norm(m @ x - rhs) / rn if rn > 0 else 0.0
        return x, float(res)


_CACHE: "weakref.WeakKeyDictionary" = weakref.WeakKeyDictionary()


def _system(H: OperatorH, report: SpectralReport) -> _System:
    sys_ = _CACHE.get(report)
    if sys_ is None or sys_.H is not H:
        sys_ = _System(H, report)
        _CACHE[report] = sys_
    return sys_


def _check_args(omega, lam):
    if not omega > 0:
        raise ValueError(f"omega must be positive, got {omega}")
    if not lam > 0:
        raise ValueError(f"lambda must be positive, got {lam}")


def restricted_solve(H: OperatorH, report: SpectralReport, omega: float, lam: float,
                     g: np.ndarray) -> np.ndarray:
    """x in {phi}^perp with (H + lam^2 + 2 omega lam P0 d P0) x = g, for g orthogonal to phi."""
    if lam <= 0:
        raise ValueError("lambda must be positive")
    x, _ = _system(H, report).solve(omega, lam, project_P0(report, g))
    return x


def eval_G(H: OperatorH, report: SpectralReport, omega: float, lam: float) -> PencilEval:
    _check_args(omega, lam)
    s = _system(H, report)
    x, res = s.solve(omega, lam)
    quad = s.h * float(np.dot(x, s.dphi))
    g = quad + (lam * lam - s.delta_sq) / (4.0 * omega * omega * lam * lam)
    return PencilEval(float(omega), float(lam), float(g), res)


def stability_index(H: OperatorH, report: SpectralReport, grid=None):
    """Return (q, omega*) with q = <H^{-1} psi0', psi0'> and omega* = 1/(2 sqrt(-q))."""
    grid = grid or H.grid
    h = grid.spacing
    dpsi = H.apply_dx(report.psi0)
    nrm2 = h * float(np.dot(dpsi, dpsi))
    overlap = h * float(np.dot(dpsi, report.psi0))
    if abs(overlap) > 1e-6 * math.sqrt(nrm2):
        raise ValueError(f"psi0' is not orthogonal to psi0 (overlap {overlap:.3e})")
    dpsi = dpsi - overlap * report.psi0
    x = kernel_pseudo_solve(H, report, dpsi)
    q = h * float(np.dot(x, dpsi))
    if q >= -Q_ZERO_TOL * max(1.0, nrm2):
        return q, math.inf
    return q, 1.0 / (2.0 * math.sqrt(-q))


def pencil_residual(H: OperatorH, omega: float, lam: float, psi, grid=None) -> float:
    psi = np.asarray(psi, dtype=float)
    r = lam * lam * psi + 2.0 * omega * lam * H.apply_dx(psi) + H.matrix @ psi
    return float(np.linalg.norm(r) / np.linalg.norm(psi))


def _reconstruct(s: _System, omega: float, lam: float) -> np.ndarray:
    x, _ = s.solve(omega, lam)
    return s.phi - 2.0 * omega * lam * x


def _scan(H, report, omega, lo, hi, npts, trace):
    lams = np.geomspace(lo, hi, npts)
    vals = np.array([eval_G(H, report, omega, lam).g_value for lam in lams])
    trace.extend(("scan", float(a), float(b)) for a, b in zip(lams, vals))
    return lams, vals


def _sign_changes(vals):
    sg = np.sign(vals)
    return [i for i in range(len(vals) - 1) if sg[i] * sg[i + 1] < 0]


def find_unstable_lambda(H: OperatorH, report: SpectralReport, omega: float, grid=None,
                         anomalies: Optional[list] = None, trace: Optional[list] = None,
                         expect_root: Optional[bool] = None):
    """Locate the positive root of G(omega, .), returning (lambda0, psi, residual) or None.

    With expect_root=True the lower end of the bracket is pushed toward zero
    until the small-lambda sign is captured.
    """
    anomalies = anomalies if anomalies is not None else []
    trace = trace if trace is not None else []
    delta = math.sqrt(report.delta_sq)
    if omega == 0:
        psi = report.phi.copy()
        return delta, psi, pencil_residual(H, 0.0, delta, psi)
    if omega < 0:
        raise ValueError("omega must be nonnegative; pass |c|")

    lo = 1e-3 * min(1.0, delta)
    hi = 10.0 * (delta + omega + 1.0)
    lams, vals = _scan(H, report, omega, lo, hi, SCAN_POINTS, trace)
    if vals[-1] <= 0:
        hi *= 10.0
        extra_l, extra_v = _scan(H, report, omega, lams[-1], hi, 12, trace)
        lams, vals = np.concatenate([lams, extra_l[1:]]), np.concatenate([vals, extra_v[1:]])
    if expect_root:
        for _ in range(4):
            if vals[0] < 0:
                break
            lo_l, lo_v = _scan(H, report, omega, lams[0] * 1e-2, lams[0], 8, trace)
            lams, vals = np.concatenate([lo_l[:-1], lams]), np.concatenate([lo_v[:-1], vals])

    changes = _sign_changes(vals)
    if not changes:
        tiny = np.flatnonzero(np.abs(vals) < TANGENCY_TOL)
        if tiny.size:
            anomalies.append(f"tangency: |G| < {TANGENCY_TOL:g} at lambda={lams[tiny[0]]:.6g} "
                             "without a sign change")
        return None
    if len(changes) > 1:
        anomalies.append(f"G has {len(changes)} sign changes on (0, inf); at most one expected")

    i = changes[0]
    a, b = float(lams[i]), float(lams[i + 1])
    trace.append(("bracket", a, float(vals[i])))
    trace.append(("bracket", b, float(vals[i + 1])))
    lam0 = brentq(lambda t: eval_G(H, report, omega, t).g_value, a, b,
                  xtol=1e-10 * min(1.0, a), rtol=4 * np.finfo(float).eps, maxiter=200)

    s = _system(H, report)
    psi = _reconstruct(s, omega, lam0)
    res = pencil_residual(H, omega, lam0, psi)
    # one Rayleigh-quotient update: <psi', psi> = 0, so lam^2 = -<H psi, psi>/<psi, psi>
    rq = -float(psi @ (H.matrix @ psi)) / float(psi @ psi)
    if rq > 0:
        lam_r = math.sqrt(rq)
        psi_r = _reconstruct(s, omega, lam_r)
        res_r = pencil_residual(H, omega, lam_r, psi_r)
        if res_r < res:
            lam0, psi, res = lam_r, psi_r, res_r
    trace.append(("root", float(lam0), 0.0))
    return float(lam0), psi, float(res)


def _h1_inverse(report: SpectralReport, g: np.ndarray) -> np.ndarray:
    """Inverse of P1 H P1 on the complement of phi and ker H."""
    spec = report.spectrum
    w, v = spec.eigenvalues, spec.eigenvectors
    keep = np.abs(w) > report.zero_tol
    keep[report.negative_index] = False
    keep[report.kernel_index] = False
    coeffs = spec.spacing * (v[:, keep].T @ g)
    return v[:, keep] @ (coeffs / w[keep])


def laurent_coeffs(H: OperatorH, report: SpectralReport, omega: float, grid=None) -> LaurentCoeffs:
    """Coefficients of G(omega, lam) = D_{-2}/lam^2 + D_{-1}/lam + O(1) near lam = 0."""
    if not omega > 0:
        raise ValueError("omega must be positive")
    if not (report.assumption_A and report.assumption_B):
        raise ValueError("assumptions (A) and (B) must both hold")
    h = H.grid.spacing
    phi, psi0 = report.phi, report.psi0
    dphi = H.apply_dx(phi)
    dpsi = H.apply_dx(psi0)
    b = h * float(np.dot(dphi, psi0))
    p0_dpsi = project_P0(report, dpsi)
    h1_dpsi = _h1_inverse(report, p0_dpsi)
    n = h * float(np.dot(h1_dpsi, p0_dpsi))
    denom = 1.0 + 4.0 * omega * omega * n
    d2 = b * b / denom - report.delta_sq / (4.0 * omega * omega)
    a_coef = b / denom
    p1_dphi = dphi - h * np.dot(dphi, phi) * phi - h * np.dot(dphi, psi0) * psi0
    b_coef = 2.0 * omega * h * float(np.dot(_h1_inverse(report, p1_dphi), dpsi)) / denom
    d1 = b_coef * b - 2.0 * a_coef * omega * h * float(np.dot(h1_dpsi, dphi))
    return LaurentCoeffs(float(d2), float(d1), float(a_coef), float(b_coef), n)


def is_marginal(omega: float, omega_star: float) -> bool:
    return math.isfinite(omega_star) and abs(abs(omega) - omega_star) <= MARGINAL_REL * omega_star


def verdict(H: OperatorH, report: SpectralReport, omega: float, grid=None) -> StabilityVerdict:
    """Stability decision at speed parameter omega, cross-checked by the root search."""
    q, wstar = stability_index(H, report, grid)
    w = abs(omega)
    marginal = is_marginal(w, wstar)
    stable = bool(w >= wstar or marginal)
    out = StabilityVerdict(omega=float(omega), q_index=q, omega_star=wstar, stable=stable)
    found = find_unstable_lambda(H, report, w, anomalies=out.anomalies, trace=out.trace,
                                 expect_root=not stable)
    if found is not None and not stable:
        out.lambda0, out.eigvec, out.pencil_residual = found
        if out.pencil_residual > 1e-6:
            out.anomalies.append(f"pencil residual {out.pencil_residual:.3e} exceeds 1e-6")
    elif found is not None and stable and not marginal:
        out.anomalies.append(
            f"index says stable (|omega|={w:.6g} >= omega*={wstar:.6g}) "
            f"but G has a root at lambda={found[0]:.6g}")
    elif found is None and not stable:
        out.anomalies.append(
            f"index says unstable (|omega|={w:.6g} < omega*={wstar:.6g}) but no root of G was bracketed")
    return out


def companion_matrix(H: OperatorH, omega: float) -> np.ndarray:
    n = H.size
    top = np.hstack([np.zeros((n, n)), np.eye(n)])
    bottom = np.hstack([-H.matrix, -2.0 * omega * H.dx])
    return np.vstack([top, bottom])


def companion_spectrum(H: OperatorH, omega: float, grid=None) -> np.ndarray:
    """All eigenvalues of [[0, I], [-H, -2 omega d/dx]]."""
    try:
        return eigvals(companion_matrix(H, omega), check_finite=False)
    except LinAlgError as exc:
        raise RuntimeError(f"companion eigensolve failed: {exc}") from exc


def companion_tol(H: OperatorH) -> float:
    """Real-part threshold separating genuine growth from eigensolver noise.

    A defective zero eigenvalue of the companion matrix splits by about
    sqrt(eps * ||T||), so the threshold scales with sqrt(||H||).
    """
    return 1e-6 * math.sqrt(max(1.0, float(np.max(np.abs(H.matrix).sum(axis=1)))))


def companion_unstable(eigs, tol: float) -> np.ndarray:
    """Eigenvalues with real part above tol, sorted by real part."""
    eigs = np.asarray(eigs)
    sel = eigs[eigs.real > tol]
    return sel[np.argsort(sel.real)]
