"""RK4 integration of u_tt + 2 omega u_tx + H u = 0 and growth-rate measurement."""

from dataclasses import dataclass, field
from typing import Optional
import csv
import math

import numpy as np
from scipy.linalg import eigvalsh

from .operators import OperatorH

RK4_IMAG_LIMIT = 2.0 * math.sqrt(2.0)   # stability interval of RK4 on the imaginary axis
NO_GROWTH_RATE = 1e-2


@dataclass(eq=False)
class Trajectory:
    times: np.ndarray
    norms: np.ndarray
    fitted_rate: float
    fit_quality: float
    dt: float
    energies: np.ndarray = field(repr=False, default=None)
    retried: bool = False

    @property
    def grows(self) -> bool:
        return self.fitted_rate > NO_GROWTH_RATE

    def to_csv(self, path):
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t", "norm"])
            for t, n in zip(self.times, self.norms):
                w.writerow([f"{t:.12g}", f"{n:.12g}"])


def _rowsum(H: OperatorH) -> float:
    return float(np.max(np.abs(H.matrix).sum(axis=1)))


def default_dt(H: OperatorH, omega: float) -> float:
    dt = 0.5 / math.sqrt(_rowsum(H))
    rho = spectral_radius_bound(H, omega)
    return min(dt, 1.0 / rho)


def spectral_radius_bound(H: OperatorH, omega: float) -> float:
    kmax = float(np.max(np.abs(H.grid.wavenumbers)))
    return math.sqrt(_rowsum(H)) + 2.0 * abs(omega) * kmax


def random_init(H: OperatorH, seed: int = 0):
    rng = np.random.default_rng(seed)
    u = rng.standard_normal(H.size)
    w = rng.standard_normal(H.size)
    return u / np.linalg.norm(u), w / np.linalg.norm(w)


def _fit(times, norms):
    half = len(times) // 2
    t, y = times[half:], np.log(norms[half:])
    slope, icpt = np.polyfit(t, y, 1)
    ss_res = float(np.sum((y - (slope * t + icpt)) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return float(slope), r2


def _integrate(T, hmat, shift, h, y0, dt, nsteps, every):
    n = hmat.shape[0]
    y = y0.copy()
    count = nsteps // every + 1
    norms = np.empty(count)
    energies = np.empty(count)

    def record(j):
        u, w = y[:n], y[n:]
        hu = float(u @ (hmat @ u))
        uu = float(u @ u)
        ww = float(w @ w)
        energies[j] = h * (ww + hu)
        norms[j] = math.sqrt(h * (ww + hu + shift * uu + uu))

    record(0)
    j = 1
    with np.errstate(over="raise", invalid="raise"):
        for step in range(1, nsteps + 1):
            k1 = T @ y
            k2 = T @ (y + 0.5 * dt * k1)
            k3 = T @ (y + 0.5 * dt * k2)
            k4 = T @ (y + dt * k3)
            y = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            if step % every == 0:
                record(j)
                j += 1
    if not np.all(np.isfinite(norms)):
        raise FloatingPointError("non-finite state")
    return norms, energies


def linearized_evolve(H: OperatorH, omega: float, init=None, dt: Optional[float] = None,
                      t_end: float = 100.0, seed: int = 0, samples: int = 2000) -> Trajectory:
    """Integrate the companion system from init = (u0, u_t0) and fit the growth rate.

    The monitored norm sqrt(|u_t|^2 + <H_+ u, u> + |u|^2) uses H shifted by
    its lowest eigenvalue so that every term is nonnegative.
    """
    if init is None:
        init = random_init(H, seed)
    u0, w0 = (np.asarray(a, dtype=float) for a in init)
    if u0.shape != (H.size,) or w0.shape != (H.size,):
        raise ValueError("init must be a pair of vectors matching the operator size")
    if dt is None:
        dt = default_dt(H, omega)
    if dt <= 0 or dt * spectral_radius_bound(H, omega) > RK4_IMAG_LIMIT:
        raise ValueError(f"dt={dt:g} exceeds the RK4 stability bound for this operator")
    if t_end < 50 * dt:
        raise ValueError("t_end must cover at least 50 steps")

    n = H.size
    T = np.zeros((2 * n, 2 * n))
    T[:n, n:] = np.eye(n)
    T[n:, :n] = -H.matrix
    T[n:, n:] = -2.0 * omega * H.dx
    lowest = float(eigvalsh(H.matrix, subset_by_index=[0, 0])[0])
    shift = max(0.0, -lowest)
    y0 = np.concatenate([u0, w0])

    retried = False
    for attempt in range(2):
        nsteps = int(math.ceil(t_end / dt))
        dt_eff = t_end / nsteps
        every = max(1, nsteps // samples)
        try:
            norms, energies = _integrate(T, H.matrix, shift, H.grid.spacing, y0, dt_eff, nsteps, every)
            break
        except FloatingPointError:
            if attempt == 1:
                raise RuntimeError("integration overflowed even after halving dt")
            dt *= 0.5
            retried = True
    times = dt_eff * every * np.arange(len(norms))
    rate, r2 = _fit(times, norms)
    return Trajectory(times, norms, rate, r2, dt_eff, energies, retried)
