"""Uniform Fourier collocation grids on [-L, L).

Two boundary conditions are supported.  ``periodic`` uses the integer
Fourier modes exp(i pi m x / L); ``antiperiodic`` uses the half-integer
modes exp(i pi (m + 1/2) x / L), i.e. f(x + 2L) = -f(x).  The antiperiodic
basis has no zero mode, which matters for operators written in an
antiderivative variable (z with z_x = v): there the whole-line solutions
tend to different constants at +-infinity, and only the antiperiodic box
represents such steps without an O(1/L) bias.
"""

from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np

BOUNDARY_CONDITIONS = ("periodic", "antiperiodic")


@dataclass(frozen=True)
class Grid:
    half_length: float
    n_points: int
    bc: str = "periodic"

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_length / self.n_points

    @cached_property
    def nodes(self) -> np.ndarray:
        x = -self.half_length + self.spacing * np.arange(self.n_points)
        x.flags.writeable = False
        return x

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        """Wavenumbers of the Fourier basis, ordered m = -N/2, ..., N/2 - 1."""
        m = np.arange(-self.n_points // 2, self.n_points // 2, dtype=float)
        if self.bc == "antiperiodic":
            m = m + 0.5
        k = np.pi * m / self.half_length
        k.flags.writeable = False
        return k

    @property
    def nyquist_index(self):
        """Index of the unpaired Nyquist mode in ``wavenumbers`` (periodic only)."""
        return 0 if self.bc == "periodic" else None

    def reflect(self, f: np.ndarray) -> np.ndarray:
        """Return samples of f(-x); works blockwise for stacked vectors."""
        f = np.asarray(f)
        n = self.n_points
        sign = 1.0 if self.bc == "periodic" else -1.0
        blocks = f.reshape(-1, n)
        out = np.empty_like(blocks)
        out[:, 0] = sign * blocks[:, 0]
        out[:, 1:] = blocks[:, :0:-1]
        return out.reshape(f.shape)


def make_grid(half_length: float, n_points: int, bc: str = "periodic") -> Grid:
    if not half_length > 0:
        raise ValueError(f"half_length must be positive, got {half_length}")
    if int(n_points) != n_points or n_points % 2:
        raise ValueError(f"n_points must be an even integer, got {n_points}")
    if n_points < 16:
        raise ValueError(f"n_points must be at least 16, got {n_points}")
    if bc not in BOUNDARY_CONDITIONS:
        raise ValueError(f"unknown boundary condition {bc!r}")
    return Grid(float(half_length), int(n_points), bc)


@lru_cache(maxsize=32)
def _basis(grid: Grid) -> np.ndarray:
    return np.exp(1j * np.outer(grid.nodes, grid.wavenumbers))


def fourier_multiplier(grid: Grid, symbol: np.ndarray) -> np.ndarray:
    """Real matrix of the Fourier multiplier with the given symbol values."""
    E = _basis(grid)
    M = (E * symbol) @ E.conj().T / grid.n_points
    return np.ascontiguousarray(M.real)


def apply_multiplier(grid: Grid, symbol: np.ndarray, f: np.ndarray) -> np.ndarray:
    """Apply a Fourier multiplier (symbol ordered like ``wavenumbers``) by FFT."""
    n = grid.n_points
    sym = np.fft.ifftshift(symbol)
    if grid.bc == "antiperiodic":
        twist = np.exp(1j * np.pi * np.arange(n) / n)
        return (twist * np.fft.ifft(sym * np.fft.fft(f / twist))).real
    return np.fft.ifft(sym * np.fft.fft(f)).real


@lru_cache(maxsize=32)
def _diff_matrix(grid: Grid, order: int) -> np.ndarray:
    symbol = (1j * grid.wavenumbers) ** order
    nyq = grid.nyquist_index
    if nyq is not None and order % 2:
        # an unpaired mode would make D1 complex
        symbol[nyq] = 0.0
    M = fourier_multiplier(grid, symbol)
    if order % 2:
        M = 0.5 * (M - M.T)
    else:
        M = 0.5 * (M + M.T)
    M.flags.writeable = False
    return M


def diff_matrix(grid: Grid, order: int) -> np.ndarray:
    """Spectral differentiation matrix of order 1, 2 or 4."""
    if order not in (1, 2, 4):
        raise ValueError(f"unsupported derivative order {order}")
    return _diff_matrix(grid, order)


def inner_product(grid: Grid, f, g) -> float:
    """Rectangle-rule L2 pairing h * sum(f * g); accepts stacked block vectors."""
    f = np.asarray(f)
    g = np.asarray(g)
    if f.shape != g.shape or f.ndim != 1 or f.size % grid.n_points:
        raise ValueError(
            f"vectors of shape {f.shape} and {g.shape} do not match grid with "
            f"{grid.n_points} points"
        )
    return float(grid.spacing * np.dot(f, g))


def norm(grid: Grid, f) -> float:
    return float(np.sqrt(inner_product(grid, f, f)))
