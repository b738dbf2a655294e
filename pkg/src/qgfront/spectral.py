"""Fourier layer: transform convention, dyadic decomposition, norms,
dispersion relation, and the linearly-unwound profile.

Convention: f(x) = int fhat(xi) e^{i xi x} dxi with
fhat(xi) = (1/2pi) int f(x) e^{-i xi x} dx, discretised on [-L, L) with
xi_m = pi m / L.  Under it, Plancherel reads
int |fhat|^2 dxi = (1/2pi) int |f|^2 dx, and the Fourier transform of the
K0 kernel is pi / sqrt(1 + xi^2).
"""

import math
from dataclasses import dataclass

import numpy as np

from .grids import MOVING, UniformGrid


class ShapeError(ValueError):
    pass


class UnsupportedOrderError(ValueError):
    pass


@dataclass
class SpectralField:
    """Complex coefficients fhat(xi_m) in FFT frequency order."""

    grid: UniformGrid
    coefficients: np.ndarray

    def __post_init__(self):
        self.coefficients = np.asarray(self.coefficients, dtype=complex)
        if self.coefficients.shape != (self.grid.n,):
            raise ShapeError(
                f"coefficient shape {self.coefficients.shape} != grid size {self.grid.n}")

    @property
    def xi(self):
        return self.grid.xi

    def copy(self):
        return SpectralField(self.grid, self.coefficients.copy())


def transform(grid, values):
    """Physical samples -> SpectralField under the 1/(2pi) forward convention."""
    values = np.asarray(values)
    if values.shape != (grid.n,):
        raise ShapeError(f"values shape {values.shape} != grid size {grid.n}")
    # x_0 = -L puts a (-1)^m twist on the plain FFT
    phase = np.exp(1j * grid.xi * grid.length)
    coef = (grid.dx / (2.0 * np.pi)) * phase * np.fft.fft(values)
    return SpectralField(grid, coef)


def inverse(field):
    """SpectralField -> physical samples (complex; take .real for real fields)."""
    grid = field.grid
    phase = np.exp(-1j * grid.xi * grid.length)
    return grid.n * grid.dxi * np.fft.ifft(field.coefficients * phase)


def inverse_real(field):
    return inverse(field).real


def derivative_values(grid, values, order=1):
    """Spectral d^n/dx^n of real samples."""
    f = transform(grid, values)
    f.coefficients *= (1j * grid.xi) ** order
    return inverse_real(f)


def shifted_values(grid, coefficients, shifts):
    """Band-limited samples of f(x + shift) for many shifts at once.

    `coefficients` are transform() output; returns shape (len(shifts), n).
    """
    shifts = np.asarray(shifts, dtype=float)
    phase = np.exp(1j * np.outer(shifts, grid.xi))
    back = np.exp(-1j * grid.xi * grid.length)
    return (grid.n * grid.dxi) * np.fft.ifft(coefficients[None, :] * phase * back[None, :],
                                             axis=1).real


# ---------------------------------------------------------------------------
# dyadic Littlewood-Paley machinery
# ---------------------------------------------------------------------------

def psi_bump(xi):
    """Smooth bump: 1 on |xi| <= 5/4, 0 on |xi| >= 8/5, C^inf blend between."""
    a = np.abs(np.asarray(xi, dtype=float))
    u = (1.6 - a) / (1.6 - 1.25)
    u = np.clip(u, 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        fa = np.where(u > 0.0, np.exp(-1.0 / np.maximum(u, 1e-300)), 0.0)
        fb = np.where(u < 1.0, np.exp(-1.0 / np.maximum(1.0 - u, 1e-300)), 0.0)
    return fa / (fa + fb)


def dyadic_cutoff(k, xi):
    """psi_k(xi) = psi(xi/2^k) - psi(xi/2^{k-1}); supported in the annulus

    (5/8) 2^{k-1} <= |xi| <= (8/5) 2^k.
    """
    s = 2.0 ** (-k)
    return psi_bump(np.asarray(xi) * s) - psi_bump(np.asarray(xi) * (2.0 * s))


def dyadic_low(k, xi):
    """psi_{<=k}(xi) = psi(xi/2^k)."""
    return psi_bump(np.asarray(xi) * 2.0 ** (-k))


def project(k, f):
    """Littlewood-Paley block P_k f as a new SpectralField."""
    return SpectralField(f.grid, f.coefficients * dyadic_cutoff(k, f.grid.xi))


def dyadic_range(grid):
    """Block indices whose annuli intersect the nonzero grid frequencies."""
    lo = int(math.floor(math.log2(grid.dxi))) - 1
    hi = int(math.ceil(math.log2(grid.dxi * grid.n / 2))) + 1
    return range(lo, hi + 1)


# ---------------------------------------------------------------------------
# norms
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NormSpec:
    """Which norm: "sobolev" (order s), "z" (weights r, w) or "bab" (a, b)."""

    kind: str
    s: float = 8.0
    r: float = 0.4
    w: float = 11.0
    a: float = 1.0
    b: float = 6.0

    def __post_init__(self):
        if self.kind not in ("sobolev", "z", "bab"):
            raise ValueError(f"unknown norm kind {self.kind!r}")
        if self.kind == "bab" and not self.a < self.b:
            raise ValueError("bab norm requires a < b")


def sup_norm(grid, values, pad=1):
    """Grid sup of |f|, optionally refined on a pad-times-finer band-limited grid."""
    if pad <= 1:
        return float(np.max(np.abs(values)))
    f = transform(grid, values)
    n2 = grid.n * pad
    big = np.zeros(n2, dtype=complex)
    half = grid.n // 2
    coef = f.coefficients * np.exp(-1j * grid.xi * grid.length)
    big[:half] = coef[:half]
    big[-half:] = coef[-half:]
    vals = np.fft.ifft(big).real * (grid.n * grid.dxi)
    return float(np.max(np.abs(vals)))


def norm(grid, values, spec, pad=1):
    """Evaluate a NormSpec on real physical samples.

    sobolev is normalised so that s = 0 recovers the physical L^2 norm:
    [2 pi * sum (1+xi^2)^s |fhat|^2 dxi]^{1/2}.  z takes the max of
    (|xi|^r + |xi|^w)|fhat| over grid frequencies; bab sums dyadic-block
    sup norms with weights 2^{aj} + 2^{bj}.
    """
    values = np.asarray(values, dtype=float)
    if spec.kind == "sobolev":
        f = transform(grid, values)
        w = (1.0 + grid.xi ** 2) ** spec.s * np.abs(f.coefficients) ** 2
        return float(np.sqrt(2.0 * np.pi * np.sum(w) * grid.dxi))
    if spec.kind == "z":
        f = transform(grid, values)
        a = np.abs(grid.xi)
        weight = a ** spec.r + a ** spec.w
        weight[0] = 0.0  # zero mode carries no |xi|^r weight
        return float(np.max(weight * np.abs(f.coefficients)))
    f = transform(grid, values)
    total = 0.0
    for j in dyadic_range(grid):
        block = SpectralField(grid, f.coefficients * dyadic_cutoff(j, grid.xi))
        bsup = sup_norm(grid, inverse_real(block), pad=pad)
        total += (2.0 ** (spec.a * j) + 2.0 ** (spec.b * j)) * bsup
    return float(total)


def l2_norm(grid, values):
    return float(np.sqrt(np.sum(np.asarray(values) ** 2) * grid.dx))


# ---------------------------------------------------------------------------
# dispersion relation and profile
# ---------------------------------------------------------------------------

FRAME_SHIFT = 2.0 * np.pi  # transport speed removed by the moving frame


def dispersion(xi, order=0):
    """p(xi) = -xi (1+xi^2)^{-1/2} and its first three derivatives."""
    xi = np.asarray(xi, dtype=float)
    s = 1.0 + xi * xi
    if order == 0:
        out = -xi / np.sqrt(s)
    elif order == 1:
        out = -s ** -1.5
    elif order == 2:
        out = 3.0 * xi * s ** -2.5
    elif order == 3:
        out = 3.0 * (1.0 - 4.0 * xi * xi) * s ** -3.5
    else:
        raise UnsupportedOrderError(f"dispersion derivatives go up to 3, got {order}")
    return out if out.shape else float(out)


@dataclass(frozen=True)
class DispersionSpec:
    frame_shift: float = FRAME_SHIFT

    def p(self, xi):
        return dispersion(xi, 0)

    def p1(self, xi):
        return dispersion(xi, 1)

    def p2(self, xi):
        return dispersion(xi, 2)

    def p3(self, xi):
        return dispersion(xi, 3)


def to_profile(state):
    """Profile hhat(t, xi) = e^{-i t p(xi)} phihat(t, xi) (moving frame).

    Constant in time under the pure linear flow.
    """
    if state.frame != MOVING:
        raise ValueError("profile is defined in the moving frame")
    f = transform(state.grid, state.values)
    f.coefficients *= np.exp(-1j * state.time * dispersion(state.grid.xi))
    return f


def from_profile(grid, h_coefficients, time):
    """Invert to_profile: phihat = e^{+i t p} hhat, returned as samples."""
    coef = h_coefficients * np.exp(1j * time * dispersion(grid.xi))
    return inverse_real(SpectralField(grid, coef))
