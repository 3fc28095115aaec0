"""Eigendecomposition of H and the structural checks on its spectrum."""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.linalg import eigh

from .grid import Grid, diff_matrix, inner_product
from .operators import OperatorH, analytic_kernel


@dataclass(frozen=True)
class Tolerances:
    # relative to max |eigenvalue|; fourth-order operators reach ~1e5 at N=512
    zero_tol_rel: float = 1e-12
    gap_tol_rel: float = 1e-10
    b_tol: float = 1e-6


@dataclass(frozen=True, eq=False)
class Spectrum:
    eigenvalues: np.ndarray
    eigenvectors: Optional[np.ndarray] = None
    operator: Optional[OperatorH] = None
    spacing: float = 1.0

    def residual(self) -> float:
        """Largest ||H v - lambda v|| / ||H|| over all eigenpairs (2-norms)."""
        m = self.operator.matrix
        r = m @ self.eigenvectors - self.eigenvectors * self.eigenvalues
        return float(np.max(np.linalg.norm(r, axis=0)) * np.sqrt(self.spacing)
                     / np.linalg.norm(m, 2))

    def orthonormality_defect(self) -> float:
        v = self.eigenvectors
        gram = self.spacing * v.T @ v
        return float(np.max(np.abs(gram - np.eye(gram.shape[0]))))


@dataclass(eq=False)
class SpectralReport:
    delta_sq: float
    phi: np.ndarray
    psi0: np.ndarray
    sigma_sq: float
    n_negative: int
    kernel_dim: int
    assumption_A: bool
    zero_tol: float
    gap_tol: float
    b_tol: float
    spectrum: Spectrum = field(repr=False)
    kernel_index: int = -1
    negative_index: int = -1
    b_pairing: float = float("nan")
    assumption_B: bool = False
    notes: list = field(default_factory=lambda: ["assumption (E): finite-dimensional: automatic"])

    @property
    def grid(self) -> Optional[Grid]:
        op = self.spectrum.operator
        return op.grid if op is not None else None

    @property
    def delta(self) -> float:
        return float(np.sqrt(self.delta_sq))


def eigendecompose(H, grid: Optional[Grid] = None) -> Spectrum:
    """Full symmetric eigendecomposition, eigenvectors orthonormal in the grid pairing."""
    op = H if isinstance(H, OperatorH) else None
    m = np.asarray(H.matrix if op is not None else H, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    scale = np.max(np.abs(m)) if m.size else 0.0
    if np.max(np.abs(m - m.T), initial=0.0) > 1e-12 * scale:
        raise ValueError("matrix is not symmetric")
    if grid is None and op is not None:
        grid = op.grid
    h = grid.spacing if grid is not None else 1.0
    try:
        w, v = eigh(m)
    except np.linalg.LinAlgError as exc:
        raise RuntimeError(f"symmetric eigensolver failed: {exc}") from exc
    return Spectrum(w, v / np.sqrt(h), op, h)


def check_assumption_A(spec: Spectrum, tol: Tolerances = Tolerances()) -> SpectralReport:
    """Classify the spectrum and extract -delta^2, phi, psi0 and the gap sigma^2.

    Failures are reported through flags.  psi0 is oriented to pair positively
    with the analytic kernel vector when the operator is known.
    """
    w = np.asarray(spec.eigenvalues)
    scale = float(np.max(np.abs(w))) if w.size else 1.0
    zero_tol = tol.zero_tol_rel * scale
    gap_tol = tol.gap_tol_rel * scale
    neg = np.flatnonzero(w < -zero_tol)
    ker = np.flatnonzero(np.abs(w) <= zero_tol)
    pos = np.flatnonzero(w > zero_tol)

    neg_idx = int(neg[0]) if neg.size else -1
    ker_idx = int(ker[0]) if ker.size else int(np.argmin(np.abs(w)))
    sigma_sq = float(w[pos[0]]) if pos.size else float("nan")
    ok = neg.size == 1 and ker.size == 1 and pos.size > 0 and sigma_sq > gap_tol

    phi = psi0 = None
    if spec.eigenvectors is not None:
        phi = spec.eigenvectors[:, neg_idx].copy() if neg_idx >= 0 else None
        psi0 = spec.eigenvectors[:, ker_idx].copy()
        if spec.operator is not None:
            k = analytic_kernel(spec.operator)
            if np.dot(psi0, k) < 0:
                psi0 = -psi0
    return SpectralReport(
        delta_sq=float(-w[neg_idx]) if neg_idx >= 0 else float("nan"),
        phi=phi,
        psi0=psi0,
        sigma_sq=sigma_sq,
        n_negative=int(neg.size),
        kernel_dim=int(ker.size),
        assumption_A=bool(ok),
        zero_tol=zero_tol,
        gap_tol=gap_tol,
        b_tol=tol.b_tol,
        spectrum=spec,
        kernel_index=ker_idx,
        negative_index=neg_idx,
    )


def _dx(grid: Grid, v: np.ndarray) -> np.ndarray:
    d1 = diff_matrix(grid, 1)
    return (d1 @ v.reshape(-1, grid.n_points).T).T.reshape(-1)


def check_assumption_B(report: SpectralReport, grid: Grid) -> float:
    """Return <phi', psi0> and set the (B) flag; phi is flipped so the pairing is >= 0."""
    if report.phi is None or report.psi0 is None:
        report.b_pairing = float("nan")
        report.assumption_B = False
        return report.b_pairing
    b = inner_product(grid, _dx(grid, report.phi), report.psi0)
    if b < 0:
        report.phi = -report.phi
        b = -b
    report.b_pairing = b
    report.assumption_B = bool(abs(b) > report.b_tol)
    return b


def analyze(H: OperatorH, tol: Tolerances = Tolerances()):
    """Eigendecompose H and run both structural checks."""
    spec = eigendecompose(H)
    report = check_assumption_A(spec, tol)
    check_assumption_B(report, H.grid)
    return spec, report


def _kernel_columns(report: SpectralReport):
    w = report.spectrum.eigenvalues
    ker = np.flatnonzero(np.abs(w) <= report.zero_tol)
    if ker.size == 0:
        ker = np.array([report.kernel_index])
    return ker


def kernel_pseudo_solve(H: OperatorH, report: SpectralReport, rhs) -> np.ndarray:
    """Solve H x = rhs with x orthogonal to ker(H); rhs must be kernel-orthogonal."""
    spec = report.spectrum
    h = spec.spacing
    rhs = np.asarray(rhs, dtype=float)
    v = spec.eigenvectors
    coeffs = h * (v.T @ rhs)
    ker = _kernel_columns(report)
    rnorm = np.sqrt(h * np.dot(rhs, rhs))
    if np.max(np.abs(coeffs[ker])) > 1e-8 * rnorm:
        raise ValueError(
            f"right-hand side is not orthogonal to ker(H): "
            f"|<rhs, psi0>| = {np.max(np.abs(coeffs[ker])):.3e}, ||rhs|| = {rnorm:.3e}"
        )
    keep = np.ones(coeffs.size, dtype=bool)
    keep[ker] = False
    return v[:, keep] @ (coeffs[keep] / spec.eigenvalues[keep])


def project_P0(report: SpectralReport, v) -> np.ndarray:
    """h - <h, phi> phi."""
    h = report.spectrum.spacing
    v = np.asarray(v, dtype=float)
    return v - h * np.dot(v, report.phi) * report.phi


def project_P1(report: SpectralReport, v) -> np.ndarray:
    """h - <h, phi> phi - <h, psi0> psi0."""
    h = report.spectrum.spacing
    v = project_P0(report, v)
    return v - h * np.dot(v, report.psi0) * report.psi0
