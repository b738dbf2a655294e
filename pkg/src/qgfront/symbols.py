"""Multilinear symbols of the front nonlinearity, resonance-phase geometry,
S-infinity estimation on dyadic blocks, and the slow phase correction.

The degree-(2 mu + 1) term of the nonlinearity acts in Fourier space
through

    T_mu(eta_1, .., eta_m) = 2 int prod_j (1 - e^{i eta_j z}) D_mu(z) dz,

with D_mu the kernel-difference Taylor coefficient (specfun).  For mu = 1
the integral has a closed form.  Writing g(a) = 2 int (1 - cos a z) D_1 dz
and using the cosine transforms of K0, g(a) = pi (1 - sqrt(1 + a^2)), and
the subset expansion of the product gives

    T_1(e1, e2, e3) = pi [ 1 - sum_j sqrt(1 + e_j^2)
                           + sum_{i<j} sqrt(1 + (e_i + e_j)^2)
                           - sqrt(1 + (e1 + e2 + e3)^2) ].

The quadrature route `t_symbol` is kept as the generic evaluator (any mu)
and is cross-checked against the closed form in the tests.

T_mu is symmetric under permutations and under the joint sign flip
eta -> -eta (it is real).  It is NOT even in each argument separately:
T_1(-e1, e2, e3) - T_1(e1, e2, e3) is O(1) away from the diagonal, as the
closed form shows.
"""

import csv
import math
import threading
from dataclasses import dataclass

import numpy as np

from . import specfun, spectral
from .kernel import QuadratureSpec


class ResolutionError(ValueError):
    pass


class AccuracyError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# T symbols
# ---------------------------------------------------------------------------

def t1_exact(e1, e2, e3):
    """Closed form of the cubic symbol T_1."""
    s = e1 + e2 + e3
    return math.pi * (
        1.0
        - math.sqrt(1.0 + e1 * e1) - math.sqrt(1.0 + e2 * e2) - math.sqrt(1.0 + e3 * e3)
        + math.sqrt(1.0 + (e1 + e2) ** 2)
        + math.sqrt(1.0 + (e1 + e3) ** 2)
        + math.sqrt(1.0 + (e2 + e3) ** 2)
        - math.sqrt(1.0 + s * s)
    )


def t1_exact_array(e1, e2, e3):
    """Vectorised t1_exact (broadcasts)."""
    s = e1 + e2 + e3
    return np.pi * (
        1.0
        - np.sqrt(1.0 + e1 ** 2) - np.sqrt(1.0 + e2 ** 2) - np.sqrt(1.0 + e3 ** 2)
        + np.sqrt(1.0 + (e1 + e2) ** 2)
        + np.sqrt(1.0 + (e1 + e3) ** 2)
        + np.sqrt(1.0 + (e2 + e3) ** 2)
        - np.sqrt(1.0 + s ** 2)
    )


def _t_nodes(etas, quad):
    """Node/weight layout for the T_mu integral, oscillation-aware.

    Inner region graded toward 0 (the product kills the z^{-2 mu}
    singularity, leaving z^2-type behaviour with log corrections); outer
    panels capped at pi/(4 max|eta|) so each Gauss-Legendre panel sees a
    bounded phase.
    """
    eta_max = max(1.0, max(abs(e) for e in etas))
    gx, gw = np.polynomial.legendre.leggauss(quad.inner_nodes)
    zs, ws = [], []
    edges = np.linspace(0.0, quad.inner_smax, quad.inner_panels + 1)
    for a, b in zip(edges[:-1], edges[1:]):
        s = 0.5 * (b - a) * gx + 0.5 * (a + b)
        w = 0.5 * (b - a) * gw
        z = quad.inner_cutoff * np.exp(-s)
        zs.append(z)
        ws.append(w * z)
    width = min(quad.outer_panel, max(np.pi / (4.0 * eta_max), 1e-3))
    gx, gw = np.polynomial.legendre.leggauss(quad.outer_nodes)
    n_panels = max(1, int(np.ceil((quad.z_max - quad.inner_cutoff) / width)))
    edges = np.linspace(quad.inner_cutoff, quad.z_max, n_panels + 1)
    for a, b in zip(edges[:-1], edges[1:]):
        zs.append(0.5 * (b - a) * gx + 0.5 * (a + b))
        ws.append(0.5 * (b - a) * gw * np.ones_like(gx))
    z = np.concatenate(zs)
    w = np.concatenate(ws)
    return np.concatenate([z, -z]), np.concatenate([w, w])


def t_symbol(mu, etas, quad=None, imag_tol=1e-10):
    """T_mu by quadrature; `etas` holds the 2 mu + 1 frequencies.

    The output is real; the symmetric-node imaginary residue is asserted
    below `imag_tol` (relative) and discarded.
    """
    etas = [float(e) for e in etas]
    if len(etas) != 2 * mu + 1:
        raise ValueError(f"T_{mu} takes {2 * mu + 1} arguments, got {len(etas)}")
    if any(e == 0.0 for e in etas):
        return 0.0  # a factor (1 - e^{i*0*z}) vanishes identically
    quad = quad or QuadratureSpec()
    z, w = _t_nodes(etas, quad)
    d = specfun.kernel_diff_coeff_array(np.abs(z), mu)[:, mu - 1]
    prod = np.ones_like(z, dtype=complex)
    for e in etas:
        prod *= 1.0 - np.exp(1j * e * z)
    val = 2.0 * np.sum(w * prod * d)
    scale = max(abs(val), 1e-30)
    if abs(val.imag) > imag_tol * scale:
        raise AccuracyError(f"imaginary residue {val.imag:.3e} exceeds tolerance")
    return float(val.real)


# ---------------------------------------------------------------------------
# resonance phase
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PhasePoint:
    eta1: float
    eta2: float
    xi: float
    value: float
    grad: tuple  # (d/d eta1, d/d eta2, d/d xi)


def phase_phi(eta1, eta2, xi):
    """Cubic interaction phase and its analytic gradient.

    Phi = p(eta1) + p(eta2) + p(xi - eta1 - eta2) - p(xi) with the front
    dispersion relation p.
    """
    p = spectral.dispersion
    e3 = xi - eta1 - eta2
    value = p(eta1) + p(eta2) + p(e3) - p(xi)
    g1 = p(eta1, 1) - p(e3, 1)
    g2 = p(eta2, 1) - p(e3, 1)
    g3 = p(e3, 1) - p(xi, 1)
    return PhasePoint(eta1, eta2, xi, float(value), (float(g1), float(g2), float(g3)))


def frak_a(xi):
    """Curvature coefficient 3 xi (1 + xi^2)^{-5/2} = p''(xi) at the
    co-directional space-time resonance."""
    return spectral.dispersion(xi, 2)


# Cubic-remainder constant of the quadratic resonance model, fitted once
# over xi in [0.05, 4], |zeta| <= 0.5 (measured sup of the ratio is ~1.49).
PHI_EXPANSION_CONSTANT = 2.0


def phi_expansion_error(xi, zeta1, zeta2):
    """Residual of the quadratic resonance model of Phi near (xi, xi).

    Phi(xi + z1, xi + z2, xi) = -p''(xi) z1 z2 + O(|z1|^3 + |z2|^3); the
    returned residual Phi + frak_a(xi) z1 z2 is cubically small.  (The
    resonant oscillation is e^{i t Phi} ~ e^{-i t frak_a z1 z2}.)
    """
    if abs(zeta1) > 0.5 or abs(zeta2) > 0.5:
        raise ValueError("expansion offsets must satisfy |zeta| <= 0.5")
    val = phase_phi(xi + zeta1, xi + zeta2, xi).value
    return val + frak_a(xi) * zeta1 * zeta2


# ---------------------------------------------------------------------------
# S-infinity estimation
# ---------------------------------------------------------------------------

@dataclass
class SymbolSample:
    """Values of a symbol restricted to a dyadic block.

    axes[i] is the 1-D sample grid of the i-th frequency argument; values
    has shape (len(axes[0]), ...).  blocks names the dyadic indices.
    """

    blocks: tuple
    axes: list
    values: np.ndarray
    name: str = ""

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.shape != tuple(len(a) for a in self.axes):
            raise ResolutionError("sample values do not match axes")
        if not np.all(np.isfinite(self.values)):
            raise ResolutionError("sample contains non-finite values")


def sample_block_t1(j1, j2, j3, resolution=128, cover=1.05):
    """Sample psi_{j1} psi_{j2} psi_{j3} T_1 on its supporting box."""
    axes = []
    for j in (j1, j2, j3):
        r = 1.6 * (2.0 ** j) * cover
        axes.append(np.linspace(-r, r, resolution, endpoint=False))
    e1 = axes[0][:, None, None]
    e2 = axes[1][None, :, None]
    e3 = axes[2][None, None, :]
    vals = (spectral.dyadic_cutoff(j1, e1)
            * spectral.dyadic_cutoff(j2, e2)
            * spectral.dyadic_cutoff(j3, e3)
            * t1_exact_array(e1, e2, e3))
    return SymbolSample((j1, j2, j3), axes, vals, name="t1")


def sample_block_cutoffs(j1, j2, j3, resolution=128, cover=1.05):
    """Sample the bare cutoff product psi_{j1} psi_{j2} psi_{j3}."""
    axes = []
    for j in (j1, j2, j3):
        r = 1.6 * (2.0 ** j) * cover
        axes.append(np.linspace(-r, r, resolution, endpoint=False))
    vals = (spectral.dyadic_cutoff(j1, axes[0])[:, None, None]
            * spectral.dyadic_cutoff(j2, axes[1])[None, :, None]
            * spectral.dyadic_cutoff(j3, axes[2])[None, None, :])
    return SymbolSample((j1, j2, j3), axes, vals, name="cutoffs")


def s_infinity_estimate(sample, min_resolution=64):
    """Discrete L^1 norm of the inverse transform of a block-local symbol.

    With F^{-1}m(x) = (2 pi)^{-d} int m e^{i x.eta} d eta the estimate is
    exactly submultiplicative under pointwise symbol products (shared
    grid), and reduces to sum |ifftn(values)| on the sample — invariant
    under joint dyadic rescaling of symbol and block.
    """
    d = sample.values.ndim
    if d >= 3 and any(len(a) < min_resolution for a in sample.axes):
        raise ResolutionError(
            f"3-argument samples need >= {min_resolution} points per axis")
    return float(np.sum(np.abs(np.fft.ifftn(sample.values))))


def t1_block_bound(j1, j2, j3):
    """Dyadic-block bound 2^{j1+j2+j3} (1+2^{j1})^{-1} (1+2^{2 j2})
    (1+2^{j2}) (1+2^{j3}) the T_1 block estimates are compared against
    (ordered blocks j1 >= j2 >= j3)."""
    return (2.0 ** (j1 + j2 + j3) / (1.0 + 2.0 ** j1)
            * (1.0 + 2.0 ** (2 * j2)) * (1.0 + 2.0 ** j2) * (1.0 + 2.0 ** j3))


def ordered_blocks(j_min, j_max):
    """All (j1, j2, j3) with j_max >= j1 >= j2 >= j3 >= j_min."""
    out = []
    for j1 in range(j_max, j_min - 1, -1):
        for j2 in range(j1, j_min - 1, -1):
            for j3 in range(j2, j_min - 1, -1):
                out.append((j1, j2, j3))
    return out


def dump_symbol_table(samples, path):
    """Tabular dump (block indices, grid coordinates, value) for inspection."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["j1", "j2", "j3", "eta1", "eta2", "eta3", "re", "im"])
        for s in samples:
            j1, j2, j3 = s.blocks
            a0, a1, a2 = s.axes
            for i0 in range(len(a0)):
                for i1 in range(len(a1)):
                    for i2 in range(len(a2)):
                        v = s.values[i0, i1, i2]
                        writer.writerow([j1, j2, j3, a0[i0], a1[i1], a2[i2],
                                         v.real, v.imag])


# ---------------------------------------------------------------------------
# modified-scattering phase
# ---------------------------------------------------------------------------

_COEFF_CACHE: dict = {}
_COEFF_LOCK = threading.Lock()


def theta_coefficient(xi):
    """Coefficient -(pi xi / 3 A) [T_1(xi,xi,-xi) + T_1(xi,-xi,xi)
    + T_1(-xi,xi,xi)] of the slow-phase integral; 0 at xi = 0 where
    T_1(0,0,0) = 0 cancels the 1/A pole."""
    key = float(xi)
    with _COEFF_LOCK:
        if key in _COEFF_CACHE:
            return _COEFF_CACHE[key]
    if xi == 0.0:
        val = 0.0
    else:
        a = frak_a(xi)
        tsum = (t1_exact(xi, xi, -xi) + t1_exact(xi, -xi, xi)
                + t1_exact(-xi, xi, xi))
        val = -np.pi * xi / (3.0 * a) * tsum
    with _COEFF_LOCK:
        _COEFF_CACHE[key] = val
    return val


def theta_phase(times, h_sq, xi, t):
    """Slow phase Theta(t, xi) = coeff(xi) * int_0^t |hhat(tau, xi)|^2 / (tau+1) dtau.

    `times`/`h_sq` sample |hhat(tau, xi)|^2 on [0, t]; trapezoidal
    accumulation.
    """
    times = np.asarray(times, dtype=float)
    h_sq = np.asarray(h_sq, dtype=float)
    if times.size == 0 or times[0] > 0.0 or times[-1] < t - 1e-12:
        raise ValueError("history must cover [0, t]")
    mask = times <= t + 1e-12
    tt = times[mask]
    hh = h_sq[mask]
    integral = float(np.trapezoid(hh / (tt + 1.0), tt))
    return theta_coefficient(xi) * integral


def theta_series(times, h_sq, xi):
    """Cumulative Theta along a sampled history (trapezoid)."""
    times = np.asarray(times, dtype=float)
    h_sq = np.asarray(h_sq, dtype=float)
    integrand = h_sq / (times + 1.0)
    cum = np.concatenate([[0.0], np.cumsum(
        0.5 * (integrand[1:] + integrand[:-1]) * np.diff(times))])
    return theta_coefficient(xi) * cum
