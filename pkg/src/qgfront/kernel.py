"""Physical-space evaluation of the nonlocal front dynamics.

The front height phi on y = phi(t, x) separating two constant potential
vorticities q+/q- (jump [[q]] = q+ - q-) evolves, in the lab frame and at
the working normalisation s = pi [[q]],

    phi_t = s [ 2 pi phi_x - D_x (1 - D_x^2)^{-1/2} phi ]  +  dN(phi),
    dN    = 2 pi [[q]] * int (phi_x(x) - phi_x(x+z))
                        [K0(sqrt(z^2 + (phi(x)-phi(x+z))^2)) - K0(|z|)] dz.

At [[q]] = 1/pi (s = 1) this is the unit-coefficient front equation whose
moving frame drops the 2 pi transport.  The linear part is applied
spectrally (the kernel form of the linear operator is an identity checked
in the tests); the nonlinear part is quadrature over z with a log-graded
inner rule (integrand ~ z log|z| near 0) and Gauss-Legendre panels out to
z_max, beyond which the kernel tail is below e^{-z_max}.
"""

from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

from . import backends, specfun, spectral
from .grids import LAB, MOVING


class QuadratureError(RuntimeError):
    """Quadrature failed to reach its accuracy target."""


class NearSingularityError(ValueError):
    """Evaluation point too close to the front curve."""


class FrameError(ValueError):
    pass


def green(r):
    """Green's-function trace 2 pi K0(r) of the stream-function operator."""
    if not r > 0.0:
        raise specfun.DomainError(f"green requires r > 0, got {r!r}")
    return 2.0 * np.pi * specfun.k0(r)


def steady_velocity(y, jump):
    """Horizontal velocity -(1/2) [[q]] e^{-|y|} of the flat-front steady state."""
    return -0.5 * jump * np.exp(-np.abs(y))


@dataclass(frozen=True)
class QuadratureSpec:
    """Node layout for the z-integrals.

    inner (|z| < inner_cutoff): substitution z = cutoff * e^{-s} turns the
    z log z integrand into an exponentially decaying one; `inner_panels`
    Gauss-Legendre panels on s in [0, inner_smax] with `inner_nodes` each.
    outer (inner_cutoff < |z| < z_max): panels of width `outer_panel` with
    `outer_nodes` Gauss-Legendre nodes; oscillation in z is resolved when
    panel_width * (max front frequency) stays below ~0.7 * outer_nodes.
    """

    inner_cutoff: float = 1.0
    inner_panels: int = 3
    inner_nodes: int = 20
    inner_smax: float = 18.0
    z_max: float = 40.0
    outer_panel: float = 2.0
    outer_nodes: int = 16

    def __post_init__(self):
        if self.z_max < 10.0:
            raise ValueError("z_max must be >= 10 (kernel tail below e^-10)")
        if self.inner_panels * self.inner_nodes < 16 or self.outer_nodes < 16:
            raise ValueError("node counts must be >= 16")

    def refine(self, factor=2):
        """Denser spec for convergence studies."""
        return replace(self, inner_nodes=self.inner_nodes * factor,
                       outer_panel=self.outer_panel / factor)


@lru_cache(maxsize=32)
def _nodes(spec):
    """Symmetric node/weight arrays (+/- z) for a QuadratureSpec."""
    gx, gw = np.polynomial.legendre.leggauss(spec.inner_nodes)
    zs = []
    ws = []
    edges = np.linspace(0.0, spec.inner_smax, spec.inner_panels + 1)
    for a, b in zip(edges[:-1], edges[1:]):
        s = 0.5 * (b - a) * gx + 0.5 * (a + b)
        w = 0.5 * (b - a) * gw
        z = spec.inner_cutoff * np.exp(-s)
        zs.append(z)
        ws.append(w * z)  # dz = -z ds, orientation absorbed
    gx, gw = np.polynomial.legendre.leggauss(spec.outer_nodes)
    n_panels = max(1, int(np.ceil((spec.z_max - spec.inner_cutoff) / spec.outer_panel)))
    edges = np.linspace(spec.inner_cutoff, spec.z_max, n_panels + 1)
    for a, b in zip(edges[:-1], edges[1:]):
        zs.append(0.5 * (b - a) * gx + 0.5 * (a + b))
        ws.append(0.5 * (b - a) * gw * np.ones_like(gx))
    z = np.concatenate(zs)
    w = np.concatenate(ws)
    z = np.concatenate([z, -z])
    w = np.concatenate([w, w])
    return z, w


@lru_cache(maxsize=32)
def _node_k0(spec):
    z, w = _nodes(spec)
    return backends.k0v(np.abs(z))


@lru_cache(maxsize=32)
def _node_dcoeff(spec, mu_max):
    """Quadrature-weighted kernel-difference coefficients D_mu at the nodes."""
    z, w = _nodes(spec)
    d = specfun.kernel_diff_coeff_array(np.abs(z), mu_max)
    return d * w[:, None]


_SHIFT_CACHE = {}


def _shift_phase(grid, spec):
    key = (grid.n, grid.length, spec)
    cached = _SHIFT_CACHE.get(key)
    if cached is None:
        z, _ = _nodes(spec)
        phase = np.exp(1j * np.outer(z, grid.xi))
        back = np.exp(-1j * grid.xi * grid.length)
        cached = phase * back[None, :]
        _SHIFT_CACHE[key] = cached
    return cached


def _shifted_fields(state, spec):
    """phi and phi_x sampled at x + z_q for every node, shapes (Q, N)."""
    grid = state.grid
    f = spectral.transform(grid, state.values)
    fx = f.coefficients * (1j * grid.xi)
    mult = _shift_phase(grid, spec)
    scale = grid.n * grid.dxi
    phi_s = scale * np.fft.ifft(f.coefficients[None, :] * mult, axis=1).real
    phix_s = scale * np.fft.ifft(fx[None, :] * mult, axis=1).real
    phix = scale * np.fft.ifft(fx * np.exp(-1j * grid.xi * grid.length)).real
    return phix, phi_s, phix_s


def rhs_nonlinear(state, quad=None, mode="direct", mu_max=specfun.MU_MAX_DEFAULT):
    """Nonlinear right-hand side dN(phi) in the moving frame.

    mode "direct" evaluates the kernel difference exactly at every node;
    "series" uses the precomputed order-mu Taylor coefficients of the
    kernel difference (error O(|phi|^{2 mu_max + 2})).  Both carry the
    2 pi [[q]] prefactor.
    """
    if state.frame != MOVING:
        raise FrameError("rhs_nonlinear expects a moving-frame state")
    return _nonlinear(state, quad or QuadratureSpec(), mode, mu_max)


def _nonlinear(state, spec, mode, mu_max):
    z, w = _nodes(spec)
    phix, phi_s, phix_s = _shifted_fields(state, spec)
    out = np.zeros(state.grid.n)
    if mode == "direct":
        backends.accumulate_direct(np.abs(z), w, _node_k0(spec), state.values,
                                   phix, phi_s, phix_s, out)
    elif mode == "series":
        backends.accumulate_series(z, _node_dcoeff(spec, mu_max), state.values,
                                   phix, phi_s, phix_s, out)
    else:
        raise ValueError(f"unknown nonlinearity mode {mode!r}")
    return 2.0 * np.pi * state.jump * out


def linear_multiplier(grid, frame, jump):
    """Spectral symbol of the linear part: s*(2 pi i xi + i p(xi)) in the lab
    frame, s * i p(xi) in the moving frame, s = pi [[q]]."""
    scale = np.pi * jump
    p = spectral.dispersion(grid.xi)
    if frame == LAB:
        return scale * 1j * (2.0 * np.pi * grid.xi + p)
    return scale * 1j * p


def apply_linear(state):
    """L(phi) evaluated spectrally for the state's frame and jump."""
    f = spectral.transform(state.grid, state.values)
    f.coefficients *= linear_multiplier(state.grid, state.frame, state.jump)
    return spectral.inverse_real(f)


def rhs_full(state, quad=None):
    """Lab-frame d(phi)/dt: spectral linear transport/dispersion plus the
    nonlinear kernel quadrature."""
    if state.frame != LAB:
        raise FrameError("rhs_full expects a lab-frame state")
    moving = state.copy_with(frame=MOVING)
    return apply_linear(state) + rhs_nonlinear(moving, quad)


def check_quadrature_convergence(state, quad=None, mode="direct", rtol=1e-7):
    """Compare a rule against its refinement; raise if they disagree."""
    spec = quad or QuadratureSpec()
    coarse = _nonlinear(state, spec, mode, specfun.MU_MAX_DEFAULT)
    fine = _nonlinear(state, spec.refine(), mode, specfun.MU_MAX_DEFAULT)
    err = float(np.max(np.abs(coarse - fine)))
    scale = max(float(np.max(np.abs(fine))), 1e-300)
    if err > rtol * scale + 1e-14:
        raise QuadratureError(f"quadrature disagreement {err:.3e} (scale {scale:.3e})")
    return err


def velocity_field(state, points, quad=None):
    """Fluid velocity induced by the vorticity front at off-front points.

    u(x, y) = -[[q]] int G(x - x', y - phi(x')) (1, phi_x')^T dx' with the
    unit-normalised Green's function G = K0(r) / (2 pi), evaluated by the
    (spectrally accurate) trapezoid rule over the periodic grid.
    """
    grid = state.grid
    phi = state.values
    phix = spectral.derivative_values(grid, phi)
    out = []
    for (px, py) in points:
        dx = px - grid.x
        # nearest periodic image
        dx = (dx + grid.length) % (2.0 * grid.length) - grid.length
        dy = py - phi
        r = np.hypot(dx, dy)
        if np.min(r) <= grid.dx:
            raise NearSingularityError(
                f"point ({px}, {py}) closer to the front than one grid spacing")
        kern = backends.k0v(r) / (2.0 * np.pi)
        u1 = -state.jump * np.sum(kern) * grid.dx
        u2 = -state.jump * np.sum(kern * phix) * grid.dx
        out.append((u1, u2))
    return out
