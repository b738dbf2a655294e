"""Uniform periodic grids, front states, and initial-data families."""

from dataclasses import dataclass

import numpy as np


class GridError(ValueError):
    pass


LAB = "lab"
MOVING = "moving"

# Normalisation of the vorticity jump for which the moving-frame equation
# takes its unit-coefficient form.
JUMP_DEFAULT = 1.0 / np.pi


@dataclass(frozen=True)
class UniformGrid:
    """N points on [-L, L) with frequencies xi_m = pi m / L."""

    n: int
    length: float

    def __post_init__(self):
        if self.n < 4 or (self.n & (self.n - 1)) != 0:
            raise GridError(f"grid size must be a power of two >= 4, got {self.n}")
        if not self.length > 0:
            raise GridError(f"half-length must be positive, got {self.length}")

    @property
    def dx(self):
        return 2.0 * self.length / self.n

    @property
    def dxi(self):
        return np.pi / self.length

    @property
    def x(self):
        return -self.length + self.dx * np.arange(self.n)

    @property
    def xi(self):
        return 2.0 * np.pi * np.fft.fftfreq(self.n, d=self.dx)

    def mode_index(self, xi_star):
        """Index of the grid frequency closest to xi_star."""
        m = int(np.rint(xi_star / self.dxi))
        if abs(m) > self.n // 2:
            raise GridError(f"frequency {xi_star} beyond grid Nyquist")
        return m % self.n


@dataclass
class FrontState:
    """Front samples at one instant, plus the frame they evolve in."""

    grid: UniformGrid
    values: np.ndarray
    time: float = 0.0
    frame: str = MOVING
    jump: float = JUMP_DEFAULT

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.grid.n,):
            raise GridError(
                f"values shape {self.values.shape} does not match grid size {self.grid.n}")
        if not np.all(np.isfinite(self.values)):
            raise GridError("front values must be finite")
        if self.frame not in (LAB, MOVING):
            raise GridError(f"frame must be '{LAB}' or '{MOVING}', got {self.frame!r}")

    def copy_with(self, **kw):
        base = dict(grid=self.grid, values=self.values.copy(), time=self.time,
                    frame=self.frame, jump=self.jump)
        base.update(kw)
        return FrontState(**base)


def _smooth01(u):
    """C^inf step: 0 for u <= 0, 1 for u >= 1."""
    u = np.clip(np.asarray(u, dtype=float), 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        a = np.where(u > 0.0, np.exp(-1.0 / np.maximum(u, 1e-300)), 0.0)
        b = np.where(u < 1.0, np.exp(-1.0 / np.maximum(1.0 - u, 1e-300)), 0.0)
    return a / (a + b)


def gaussian_front(grid, amplitude, width=1.0, center=0.0):
    x = grid.x
    return amplitude * np.exp(-((x - center) ** 2) / (2.0 * width ** 2))


def band_front(grid, amplitude, k_lo=1.0, k_hi=2.0, phases="zero", seed=0,
               rise=6.0, fall=1.5):
    """Real field with spectrum supported in k_lo <= |xi| <= k_hi.

    A smooth bump shapes the positive-frequency coefficients; `phases`
    either leaves them real ("zero") or randomises them ("random", seeded).
    The default bump rises steeply at k_lo and falls gently toward k_hi,
    which weights the packet toward the strongly dispersing low edge and
    brings the stationary-phase decay regime inside t ~ 100.
    """
    xi = grid.xi
    u = (np.abs(xi) - k_lo) / (k_hi - k_lo)
    shape = _smooth01(rise * u) * _smooth01(fall * (1.0 - u))
    coef = shape.astype(complex)
    if phases == "random":
        rng = np.random.default_rng(seed)
        theta = rng.uniform(0.0, 2.0 * np.pi, size=xi.shape)
        theta = np.where(xi > 0, theta, 0.0)
        full = np.zeros_like(coef)
        pos = xi > 0
        full[pos] = coef[pos] * np.exp(1j * theta[pos])
        # conjugate symmetry for a real field
        neg = xi < 0
        full[neg] = np.conj(full[(grid.n - np.arange(grid.n)) % grid.n][neg])
        coef = full
    elif phases != "zero":
        raise GridError(f"unknown phase mode {phases!r}")
    vals = np.fft.ifft(coef * grid.n).real
    m = np.max(np.abs(vals))
    if m == 0.0:
        raise GridError("band data vanished; band not resolved by grid")
    return amplitude * vals / m


def modes_front(grid, modes):
    """Sum of cosine modes [(k, amplitude, phase), ...]; k snapped to grid."""
    x = grid.x
    vals = np.zeros_like(x)
    for k, amp, phase in modes:
        m = grid.mode_index(k)
        k_snap = (m if m <= grid.n // 2 else m - grid.n) * grid.dxi
        vals += amp * np.cos(k_snap * x + phase)
    return vals


def make_initial(grid, family, params):
    """Build initial data by family name; see config schema for the knobs."""
    if family == "zero":
        return np.zeros(grid.n)
    if family == "gaussian":
        return gaussian_front(grid, params.get("amplitude", 1e-2),
                              params.get("width", 1.0), params.get("center", 0.0))
    if family == "band":
        return band_front(grid, params.get("amplitude", 1e-2),
                          params.get("k_lo", 1.0), params.get("k_hi", 2.0),
                          params.get("phases", "zero"), params.get("seed", 0),
                          params.get("rise", 6.0), params.get("fall", 1.5))
    if family == "modes":
        return modes_front(grid, params["modes"])
    if family == "file":
        data = np.loadtxt(params["path"])
        if data.shape[0] != grid.n:
            raise GridError(f"file data length {data.shape[0]} != grid size {grid.n}")
        return data[:, 1] if data.ndim == 2 else data
    raise GridError(f"unknown initial-data family {family!r}")
