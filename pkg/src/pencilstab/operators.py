"""Dense symmetric realizations of the linearized operators H."""

from dataclasses import dataclass

import numpy as np

from .grid import Grid, diff_matrix
from .profiles import Model, WaveProfile


@dataclass(frozen=True, eq=False)
class OperatorH:
    matrix: np.ndarray
    model: Model
    c: float
    p: float
    grid: Grid
    block: bool = False
    profile: WaveProfile = None

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    @property
    def dx(self) -> np.ndarray:
        """First derivative acting componentwise on (block) vectors."""
        d1 = diff_matrix(self.grid, 1)
        if self.block:
            return np.kron(np.eye(2), d1)
        return d1

    def apply_dx(self, v: np.ndarray) -> np.ndarray:
        d1 = diff_matrix(self.grid, 1)
        return (d1 @ np.asarray(v).reshape(-1, self.grid.n_points).T).T.reshape(-1)

    def symmetry_defect(self) -> float:
        m = self.matrix
        return float(np.max(np.abs(m - m.T)) / np.max(np.abs(m)))


def _require(profile: WaveProfile, model: Model):
    if profile.model is not model:
        raise ValueError(f"expected a {model.value} profile, got {profile.model.value}")


def _gauge_shift(grid: Grid, matrix: np.ndarray, blocks, scale: float) -> np.ndarray:
    """Lift exact zero modes that come from the antiderivative variable.

    On a periodic grid, constants (and the Nyquist mode, which D1 annihilates)
    decouple from the pencil and sit in ker(H).  Moving them to eigenvalue
    ``scale`` keeps the physical kernel simple without touching the rest.
    Antiperiodic grids have no such modes.
    """
    if grid.bc != "periodic":
        return matrix
    n = grid.n_points
    nblocks = matrix.shape[0] // n
    out = matrix.copy()
    for b in blocks:
        for mode in (np.ones(n), (-1.0) ** np.arange(n)):
            e = np.zeros(nblocks * n)
            e[b * n:(b + 1) * n] = mode / np.sqrt(n)
            if np.linalg.norm(matrix @ e) <= 1e-9 * scale:
                out += scale * np.outer(e, e)
    return out


def build_hill_L(profile: WaveProfile) -> OperatorH:
    """L = -d^2/dx^2 + (1 - c^2) - p phi^(p-1)."""
    _require(profile, Model.BOUSSINESQ)
    g = profile.grid
    c, p = profile.c, profile.p
    pot = p * profile.values ** (p - 1)
    mat = -diff_matrix(g, 2) + (1.0 - c * c) * np.eye(g.n_points) - np.diag(pot)
    return OperatorH(mat, Model.BOUSSINESQ, c, p, g, profile=profile)


def boussinesq_H_direct(profile: WaveProfile) -> np.ndarray:
    """D4 - (1 - c^2) D2 + D1 diag(p phi^(p-1)) D1 (cross-check assembly)."""
    _require(profile, Model.BOUSSINESQ)
    g = profile.grid
    c, p = profile.c, profile.p
    d1 = diff_matrix(g, 1)
    pot = p * profile.values ** (p - 1)
    return diff_matrix(g, 4) - (1.0 - c * c) * diff_matrix(g, 2) + d1 @ (pot[:, None] * d1)


def build_boussinesq_H(profile: WaveProfile) -> OperatorH:
    """H z = z'''' - (1 - c^2) z'' + p (phi^(p-1) z')', assembled as -D1 L D1."""
    _require(profile, Model.BOUSSINESQ)
    g = profile.grid
    d1 = diff_matrix(g, 1)
    hill = build_hill_L(profile).matrix
    mat = -d1 @ hill @ d1
    mat = 0.5 * (mat + mat.T)
    mat = _gauge_shift(g, mat, [0], _scale(mat))
    return OperatorH(mat, Model.BOUSSINESQ, profile.c, profile.p, g, profile=profile)


def build_kgz_H(profile: WaveProfile) -> OperatorH:
    """Block operator [[H1, A], [A^T, H2]] acting on (v, z) with w = z_x.

    H1 = -mu^2 d_xx + 1 - phi^2/(2 mu^2), H2 = -mu^2 d_xx, A = diag(phi) D1.
    """
    _require(profile, Model.KGZ)
    if profile.companion is None:
        raise ValueError("kgz operator needs the companion field psi")
    g = profile.grid
    n = g.n_points
    mu2 = 1.0 - profile.c**2
    phi = profile.values
    d2 = diff_matrix(g, 2)
    h1 = -mu2 * d2 + np.eye(n) - np.diag(phi**2 / (2.0 * mu2))
    h2 = -mu2 * d2
    a = phi[:, None] * diff_matrix(g, 1)
    mat = np.block([[h1, a], [a.T, h2]])
    mat = _gauge_shift(g, mat, [1], _scale(mat))
    return OperatorH(mat, Model.KGZ, profile.c, profile.p, g, block=True, profile=profile)


def build_beam_H(profile: WaveProfile) -> OperatorH:
    """H = d^4 + c^2 d^2 + 1 - p phi^(p-1)."""
    _require(profile, Model.BEAM)
    g = profile.grid
    c, p = profile.c, profile.p
    pot = p * np.abs(profile.values) ** (p - 1)
    mat = diff_matrix(g, 4) + c * c * diff_matrix(g, 2) + np.eye(g.n_points) - np.diag(pot)
    return OperatorH(mat, Model.BEAM, c, p, g, profile=profile)


def build_operator(profile: WaveProfile) -> OperatorH:
    builders = {
        Model.BOUSSINESQ: build_boussinesq_H,
        Model.KGZ: build_kgz_H,
        Model.BEAM: build_beam_H,
    }
    return builders[profile.model](profile)


def analytic_kernel(op: OperatorH) -> np.ndarray:
    """Translation-generated kernel vector of H (unnormalized).

    On periodic grids the gauge shift moves constants out of the kernel, so
    the z-variable components are taken with their mean removed.
    """
    prof = op.profile
    phi = prof.values
    d1 = diff_matrix(op.grid, 1)
    periodic = op.grid.bc == "periodic"
    if op.model is Model.BOUSSINESQ:
        return phi - phi.mean() if periodic else phi.copy()
    if op.model is Model.KGZ:
        mu2 = 1.0 - prof.c**2
        z = -phi**2 / (2.0 * mu2)
        if periodic:
            z = z - z.mean()
        return np.concatenate([d1 @ phi, z])
    return d1 @ phi


def _scale(mat: np.ndarray) -> float:
    return float(np.trace(np.abs(mat)) / mat.shape[0])
