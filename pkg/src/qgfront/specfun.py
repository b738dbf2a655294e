"""Modified Bessel kernel K0, its derivatives, I0, and the expansion
coefficients of the front nonlinearity.

The kernel difference K0(sqrt(z^2 + d^2)) - K0(|z|), expanded in powers of
d^2, has mu-th Taylor coefficient

    D_mu(z) = sum over partitions of mu with parts l and multiplicities i_l:
              [ prod_l C(1/2, l)^{i_l} / i_l! ] * K0^(k)(|z|) |z|^{k - 2 mu},
              k = total number of parts,

which is the same object whether |z| is large (where each term decays like
e^{-|z|}) or small (where the leading singularity is |z|^{-2 mu}).
`a_coeff` and `b_coeff` expose it on the two ranges; `b_closed_form` keeps
the log-series shape of the small-|z| expansion as an independent
cross-check.
"""

import math
import threading
from dataclasses import dataclass, field

import numpy as np

from . import backends

_EULER_GAMMA = 0.5772156649015328606


class DomainError(ValueError):
    """Argument outside the mathematical domain of an operation."""


class UnsupportedOrderError(ValueError):
    """Derivative or expansion order above the configured maximum."""


MAX_DERIVATIVE_ORDER = 8
MU_MAX_DEFAULT = 3

# Test hook: adds perturbation*e^{-x} to k0 so the self-verification suite
# can prove it catches a corrupted kernel.  Never set outside tests.
_K0_PERTURBATION = 0.0


def k0(x):
    """K0(x) for scalar x > 0.

    Power series in double-double arithmetic below x=15, asymptotic series
    above; relative error ~1e-13 over the whole range.
    """
    if not x > 0.0:
        raise DomainError(f"k0 requires x > 0, got {x!r}")
    val = float(backends.k0v(np.array([x], dtype=float))[0])
    if _K0_PERTURBATION:
        val += _K0_PERTURBATION * math.exp(-x)
    return val


def i0(x, max_arg=50.0):
    """I0(x) by its power series; |x| <= max_arg guards overflow."""
    if abs(x) > max_arg:
        raise DomainError(f"i0 argument {x!r} exceeds configured max {max_arg}")
    return float(backends.i0v(np.array([x], dtype=float))[0])


def k0_derivative(n, x, max_order=MAX_DERIVATIVE_ORDER):
    """n-th derivative of K0 at x > 0.

    Orders 0 and 1 come from the series/asymptotic kernels; higher orders
    use the recurrence x y^{(n+2)} = -(n+1) y^{(n+1)} + x y^{(n)} + n y^{(n-1)}
    obtained by differentiating the defining ODE x y'' + y' - x y = 0.
    """
    if n < 0 or n > max_order:
        raise UnsupportedOrderError(f"derivative order {n} outside [0, {max_order}]")
    if not x > 0.0:
        raise DomainError(f"k0_derivative requires x > 0, got {x!r}")
    derivs = k0_derivatives(x, n)
    return derivs[n]


def k0_derivatives(x, n_max):
    """K0^(0..n_max)(x) as a list (scalar x > 0)."""
    arr = k0_derivatives_array(np.array([x], dtype=float), n_max)
    return [float(arr[k, 0]) for k in range(n_max + 1)]


def k0_derivatives_array(x, n_max):
    """K0 derivatives 0..n_max on an array of positive x, shape (n_max+1, len)."""
    x = np.asarray(x, dtype=float)
    out = np.empty((n_max + 1, x.size), dtype=float)
    y0, y1 = backends.k0_k0p(x)
    if _K0_PERTURBATION:
        y0 = y0 + _K0_PERTURBATION * np.exp(-x)
    out[0] = y0
    if n_max >= 1:
        out[1] = y1
    if n_max >= 2:
        out[2] = out[0] - out[1] / x
    for n in range(1, n_max - 1):
        # x y^{(n+2)} = -(n+1) y^{(n+1)} + x y^{(n)} + n y^{(n-1)}
        out[n + 2] = (-(n + 1) * out[n + 1] + x * out[n] + n * out[n - 1]) / x
    return out


def binom_half(l):
    """C(1/2, l) = (-1)^{l-1} (2l-3)!! / (2^l l!), in [-1/8, 1/2] for l >= 1."""
    if l == 0:
        return 1.0
    num = 1.0
    for j in range(1, l):
        num *= 2 * j - 1  # (2l-3)!! built up to l-1 factors
    return ((-1.0) ** (l - 1)) * num / (2.0 ** l * math.factorial(l))


def b_k(k):
    """Coefficient H_k / ((k!)^2 4^k) of the K0 power series' polynomial part."""
    h = sum(1.0 / i for i in range(1, k + 1))
    return h / (math.factorial(k) ** 2 * 4.0 ** k)


def _partitions(mu):
    """Partitions of mu as multiplicity dicts {part: count}."""
    result = []

    def rec(remaining, max_part, current):
        if remaining == 0:
            result.append(dict(current))
            return
        for part in range(min(remaining, max_part), 0, -1):
            current[part] = current.get(part, 0) + 1
            rec(remaining - part, part, current)
            current[part] -= 1
            if current[part] == 0:
                del current[part]

    rec(mu, mu, {})
    return result


@dataclass
class SeriesCoeffTable:
    """Cached combinatorics for the order-mu kernel-difference coefficient.

    For each partition of mu stores (k = number of parts, weight =
    prod C(1/2,l)^{i_l} / i_l!), so that

        D_mu(z) = sum weight * K0^(k)(z) * z^{k - 2 mu}.
    """

    mu: int
    terms: list = field(default_factory=list)

    def __post_init__(self):
        if self.mu < 1:
            raise DomainError("expansion order mu must be >= 1")
        if not self.terms:
            for part in _partitions(self.mu):
                k = sum(part.values())
                w = 1.0
                for l, il in part.items():
                    w *= binom_half(l) ** il / math.factorial(il)
                self.terms.append((k, w))

    @property
    def max_k(self):
        return max(k for k, _ in self.terms)


_TABLE_CACHE: dict = {}
_TABLE_LOCK = threading.Lock()


def coeff_table(mu):
    with _TABLE_LOCK:
        table = _TABLE_CACHE.get(mu)
        if table is None:
            table = SeriesCoeffTable(mu)
            _TABLE_CACHE[mu] = table
        return table


def kernel_diff_coeff_array(zeta, mu_max):
    """D_mu(zeta) for mu = 1..mu_max on an array of nonzero zeta.

    Returns shape (len(zeta), mu_max); column mu-1 holds D_mu.  Evaluated at
    |zeta| (the parent kernel is even in zeta).
    """
    z = np.abs(np.asarray(zeta, dtype=float))
    if np.any(z == 0.0):
        raise DomainError("kernel-difference coefficients are singular at zeta = 0")
    kmax = max(coeff_table(mu).max_k for mu in range(1, mu_max + 1))
    derivs = k0_derivatives_array(z, kmax)
    out = np.zeros((z.size, mu_max), dtype=float)
    for mu in range(1, mu_max + 1):
        acc = np.zeros_like(z)
        for k, w in coeff_table(mu).terms:
            acc += w * derivs[k] * z ** (k - 2 * mu)
        out[:, mu - 1] = acc
    return out


def a_coeff(mu, zeta):
    """Long-range expansion coefficient A_mu(zeta), |zeta| > 1.

    Decays like e^{-|zeta|}; even in zeta.
    """
    if abs(zeta) <= 1.0:
        raise DomainError(f"a_coeff is reserved for |zeta| > 1, got {zeta!r}")
    return float(kernel_diff_coeff_array(np.array([zeta]), mu)[0, mu - 1])


def b_coeff(mu, zeta):
    """Short-range expansion coefficient B_mu(zeta), 0 < |zeta| < 1.

    Defined operationally as the mu-th Taylor coefficient (in d^2) of
    K0(sqrt(zeta^2 + d^2)) - K0(|zeta|); most singular behaviour is
    |zeta|^{-2 mu} (zeta^2 B_1 -> -1/2 as zeta -> 0).
    """
    if zeta == 0.0:
        raise DomainError("b_coeff is singular at zeta = 0")
    if abs(zeta) >= 1.0:
        raise DomainError(f"b_coeff is reserved for 0 < |zeta| < 1, got {zeta!r}")
    return float(kernel_diff_coeff_array(np.array([zeta]), mu)[0, mu - 1])


def b_closed_form(mu, zeta, kmax=60):
    """Log-series form of B_mu, kept as an independent cross-check.

    Derived by expanding the K0 power series of K0(sqrt(zeta^2+d^2)):

        B_mu = -[g + ln(|z|/2)] sum_{k>=mu} e_k C(k,mu) z^{2k-2mu}
               - 1/2 sum_{k=1}^{mu-1} ((-1)^{k-1}/k)
                     sum_{j>=mu-k} e_j C(j,mu-k) z^{2j-2mu}
               - 1/2 I0(z) ((-1)^{mu-1}/mu) z^{-2mu}
               + sum_{k>=mu} b_k C(k,mu) z^{2k-2mu},

    with e_k = ((k!)^2 4^k)^{-1}.  Note the middle sum stops at mu-1: its
    k=mu term would duplicate the singular I0 z^{-2mu} term.
    """
    z = abs(zeta)
    if z == 0.0:
        raise DomainError("b_closed_form is singular at zeta = 0")
    log_term = 0.0
    poly_term = 0.0
    for k in range(mu, kmax):
        e_k = 1.0 / (math.factorial(k) ** 2 * 4.0 ** k)
        c = math.comb(k, mu)
        log_term += e_k * c * z ** (2 * k - 2 * mu)
        poly_term += b_k(k) * c * z ** (2 * k - 2 * mu)
    cross = 0.0
    for k in range(1, mu):
        inner = 0.0
        for j in range(mu - k, kmax):
            e_j = 1.0 / (math.factorial(j) ** 2 * 4.0 ** j)
            inner += e_j * math.comb(j, mu - k) * z ** (2 * j - 2 * mu)
        cross += ((-1.0) ** (k - 1) / k) * inner
    singular = i0(z) * ((-1.0) ** (mu - 1) / mu) * z ** (-2 * mu)
    return (
        -(_EULER_GAMMA + math.log(z / 2.0)) * log_term
        - 0.5 * cross
        - 0.5 * singular
        + poly_term
    )
