"""Traveling-wave profiles for the Boussinesq, KGZ and beam models."""

from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from .grid import Grid, apply_multiplier, diff_matrix, inner_product, make_grid

DEFAULT_N = {"boussinesq": 512, "kgz": 384, "beam": 512}
MIN_HALF_LENGTH = 30.0
# exp(-30) ~ 1e-13 leaves the tails below 1e-12 of the peak
DECAY_LENGTHS = 30.0
TAIL_TOL = 1e-12


class Model(str, Enum):
    BOUSSINESQ = "boussinesq"
    KGZ = "kgz"
    BEAM = "beam"


class ConvergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class SolverOpts:
    max_iter: int = 500
    tol: float = 1e-12
    gamma: Optional[float] = None
    amplitude: float = 2.0


@dataclass(frozen=True, eq=False)
class WaveProfile:
    model: Model
    c: float
    p: float
    values: np.ndarray
    grid: Grid
    companion: Optional[np.ndarray] = None
    residual: float = float("nan")

    @property
    def mu(self) -> float:
        return float(np.sqrt(1.0 - self.c**2))


def speed_limit(model) -> float:
    return np.sqrt(2.0) if Model(model) is Model.BEAM else 1.0


def _check_speed(model, c):
    lim = speed_limit(model)
    if not abs(c) < lim:
        raise ValueError(f"{Model(model).value}: speed |c|={abs(c)} must be below {lim:.6g}")


def _check_power(model, p):
    model = Model(model)
    if model is Model.BOUSSINESQ and not p >= 2:
        raise ValueError(f"boussinesq: power p={p} must be >= 2")
    if model is Model.BEAM and (p != int(p) or int(p) < 3 or int(p) % 2 == 0):
        raise ValueError(f"beam: power p={p} must be an odd integer >= 3")


def decay_rate(model, c: float, p: float = 2) -> float:
    """Exponential decay rate of the profile tails."""
    model = Model(model)
    if model is Model.BOUSSINESQ:
        return float(np.sqrt(1.0 - c * c))
    if model is Model.KGZ:
        return float(1.0 / np.sqrt(1.0 - c * c))
    # roots of s^4 + c^2 s^2 + 1 = 0 have real part sqrt(2 - c^2)/2
    return float(np.sqrt(2.0 - c * c) / 2.0)


def default_half_length(model, c: float, p: float = 2) -> float:
    lengths = DECAY_LENGTHS
    if Model(model) is Model.KGZ:
        # width mu profiles: a fixed 30 would waste resolution as c -> 1
        return lengths / decay_rate(model, c, p)
    if Model(model) is Model.BEAM:
        # oscillatory tails carry a larger prefactor near c -> sqrt(2)
        lengths += 6.0
    return max(MIN_HALF_LENGTH, lengths / decay_rate(model, c, p))


def default_grid(model, c: float, p: float = 2, n_points=None, half_length=None) -> Grid:
    model = Model(model)
    _check_speed(model, c)
    if n_points is None:
        n_points = DEFAULT_N[model.value]
    if half_length is None:
        half_length = default_half_length(model, c, p)
    return make_grid(half_length, n_points, bc="antiperiodic")


def _check_tails(values, grid, what):
    peak = np.max(np.abs(values))
    ends = max(abs(values[0]), abs(values[-1]), abs(values[1]))
    if ends > TAIL_TOL * peak:
        raise ValueError(
            f"{what}: grid half-length {grid.half_length:g} too short, "
            f"tail/peak = {ends / peak:.2e}"
        )


def boussinesq_profile(c: float, p: float, grid: Grid) -> WaveProfile:
    """Explicit sech-power solitary wave of phi'' - (1 - c^2) phi + phi^p = 0."""
    _check_speed(Model.BOUSSINESQ, c)
    _check_power(Model.BOUSSINESQ, p)
    a2 = 1.0 - c * c
    amp = ((p + 1) / 2 * a2) ** (1.0 / (p - 1))
    arg = np.sqrt(a2) * (p - 1) / 2 * grid.nodes
    values = amp / np.cosh(arg) ** (2.0 / (p - 1))
    _check_tails(values, grid, "boussinesq profile")
    prof = WaveProfile(Model.BOUSSINESQ, float(c), float(p), values, grid)
    return _with_residual(prof)


def kgz_profile(c: float, grid: Grid) -> WaveProfile:
    """KGZ traveling wave (phi, psi) with psi = -phi^2 / (2 mu^2)."""
    _check_speed(Model.KGZ, c)
    mu = np.sqrt(1.0 - c * c)
    s = 1.0 / np.cosh(grid.nodes / mu)
    phi = 2.0 * mu * s
    psi = -2.0 * s**2
    _check_tails(phi, grid, "kgz profile")
    prof = WaveProfile(Model.KGZ, float(c), 3.0, phi, grid, companion=psi)
    return _with_residual(prof)


def beam_profile(c: float, p: int, grid: Grid, opts: Optional[SolverOpts] = None) -> WaveProfile:
    """Ground state of c^2 phi'' + phi'''' + phi - |phi|^(p-1) phi = 0.

    Petviashvili iteration with the stabilizing factor
    S = <M phi, phi> / <N(phi), phi>, where M has symbol k^4 - c^2 k^2 + 1,
    and an even-symmetry projection at every step to pin translations.
    """
    _check_speed(Model.BEAM, c)
    _check_power(Model.BEAM, p)
    opts = opts or SolverOpts()
    p = int(p)
    gamma = opts.gamma if opts.gamma is not None else p / (p - 1.0)
    k = grid.wavenumbers
    symbol = k**4 - c * c * k**2 + 1.0
    inv_symbol = 1.0 / symbol

    phi = opts.amplitude / np.cosh(grid.nodes)
    for it in range(opts.max_iter):
        nl = np.abs(phi) ** (p - 1) * phi
        num = inner_product(grid, apply_multiplier(grid, symbol, phi), phi)
        den = inner_product(grid, nl, phi)
        if not den > 0:
            raise ConvergenceError(f"beam profile collapsed at iteration {it}")
        stab = num / den
        new = stab**gamma * apply_multiplier(grid, inv_symbol, nl)
        new = 0.5 * (new + grid.reflect(new))
        peak = np.max(np.abs(new))
        if peak < 0.1:
            raise ConvergenceError(f"beam profile collapsed to zero at iteration {it}")
        step = np.max(np.abs(new - phi))
        phi = new
        if step <= opts.tol * peak and abs(stab - 1.0) <= 1e3 * opts.tol:
            break
    else:
        raise ConvergenceError(
            f"beam profile did not converge in {opts.max_iter} iterations "
            f"(last step {step:.2e}, factor {stab:.12f})"
        )
    _check_tails(phi, grid, "beam profile")
    prof = WaveProfile(Model.BEAM, float(c), float(p), phi, grid)
    return _with_residual(prof)


def make_profile(model, c: float, p: float = 2, grid: Optional[Grid] = None,
                 opts: Optional[SolverOpts] = None) -> WaveProfile:
    model = Model(model)
    if grid is None:
        grid = default_grid(model, c, p)
    if model is Model.BOUSSINESQ:
        return boussinesq_profile(c, p, grid)
    if model is Model.KGZ:
        return kgz_profile(c, grid)
    return beam_profile(c, int(p), grid, opts)


def _with_residual(prof: WaveProfile) -> WaveProfile:
    object.__setattr__(prof, "residual", profile_residual(prof))
    return prof


def profile_residual(profile: WaveProfile) -> float:
    """Max-norm of the model's traveling-wave ODE on the sampled profile."""
    g = profile.grid
    phi = profile.values
    c, p = profile.c, profile.p
    d2 = diff_matrix(g, 2) @ phi
    nl = np.abs(phi) ** (p - 1) * phi
    if profile.model is Model.BOUSSINESQ:
        res = d2 - (1.0 - c * c) * phi + nl
    elif profile.model is Model.KGZ:
        mu2 = 1.0 - c * c
        res = -mu2 * d2 + phi - phi**3 / (2.0 * mu2)
        if profile.companion is not None:
            res = np.concatenate([res, mu2 * profile.companion + phi**2 / 2.0])
    else:
        d4 = diff_matrix(g, 4) @ phi
        res = c * c * d2 + d4 + phi - nl
    return float(np.max(np.abs(res)))


def boussinesq_dc_exact(c: float, p: float, grid: Grid) -> np.ndarray:
    """Closed-form derivative of the Boussinesq profile with respect to c."""
    a2 = 1.0 - c * c
    alpha = 2.0 / (p - 1)
    amp = ((p + 1) / 2 * a2) ** (1.0 / (p - 1))
    damp = amp / (p - 1) * (-2.0 * c / a2)
    kappa = np.sqrt(a2) * (p - 1) / 2
    dkappa = -c / np.sqrt(a2) * (p - 1) / 2
    x = grid.nodes
    sech = 1.0 / np.cosh(kappa * x)
    return damp * sech**alpha - amp * alpha * sech**alpha * np.tanh(kappa * x) * x * dkappa


def profile_c_derivative(model, c: float, p: float, grid: Grid, delta_c: float = 1e-3,
                         closed_form: bool = False,
                         opts: Optional[SolverOpts] = None) -> np.ndarray:
    """d(phi)/dc by central differences on a fixed grid.

    Profiles are even by construction (explicit formulas, or the symmetry
    projection in the beam solver), so no phase alignment is needed.
    """
    model = Model(model)
    if closed_form:
        if model is not Model.BOUSSINESQ:
            raise ValueError("closed-form speed derivative only available for boussinesq")
        _check_speed(model, c)
        return boussinesq_dc_exact(c, p, grid)
    lim = speed_limit(model)
    if not (abs(c + delta_c) < lim and abs(c - delta_c) < lim):
        raise ValueError(f"c +- delta_c leaves the admissible interval (-{lim:.6g}, {lim:.6g})")
    hi = make_profile(model, c + delta_c, p, grid, opts).values
    lo = make_profile(model, c - delta_c, p, grid, opts).values
    return (hi - lo) / (2.0 * delta_c)
