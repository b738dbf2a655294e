"""Pure-NumPy kernel backend.

Implements the hot numerical kernels — K0, K0', I0 on arrays and the
quadrature accumulation loops of the nonlocal right-hand sides — using
vectorised double-double (DD) arithmetic where cancellation demands it.

K0 evaluation strategy:
  * x < 15:  merged power series  K0(x) = sum_k (H_k - g - ln(x/2)) e_k x^{2k}
             with e_k = ((k!)^2 4^k)^{-1}, run in DD because the partial sums
             reach ~e^x/(2 pi x) while the result is ~e^{-x}.
  * x >= 15: alternating asymptotic series sqrt(pi/2x) e^{-x} sum a_k x^{-k};
             25 terms leave a relative error below ~2e-14 at the switch.

Both branches overlap to ~1e-13 on [14, 16]; the compiled backend mirrors
the same algorithm scalar-wise.
"""

import numpy as np

from ..constants import (
    ASYM_TERMS,
    GAMMA_DD,
    HARMONIC_HI,
    HARMONIC_LO,
    K0_UNDERFLOW,
    LN2_DD,
    SERIES_ASYM_SWITCH,
    SERIES_MAX_TERMS,
)

IMPL = "reference"

_SPLITTER = 134217729.0  # 2^27 + 1, Dekker splitting constant


# ---------------------------------------------------------------------------
# double-double primitives on arrays
# ---------------------------------------------------------------------------

def _two_sum(a, b):
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def _quick_two_sum(a, b):
    s = a + b
    return s, b - (s - a)


def _two_prod(a, b):
    p = a * b
    ca = _SPLITTER * a
    ahi = ca - (ca - a)
    alo = a - ahi
    cb = _SPLITTER * b
    bhi = cb - (cb - b)
    blo = b - bhi
    err = ((ahi * bhi - p) + ahi * blo + alo * bhi) + alo * blo
    return p, err


def _dd_add(xh, xl, yh, yl):
    s1, s2 = _two_sum(xh, yh)
    t1, t2 = _two_sum(xl, yl)
    s2 = s2 + t1
    s1, s2 = _quick_two_sum(s1, s2)
    s2 = s2 + t2
    return _quick_two_sum(s1, s2)


def _dd_mul(xh, xl, yh, yl):
    ph, pl = _two_prod(xh, yh)
    pl = pl + (xh * yl + xl * yh)
    return _quick_two_sum(ph, pl)


def _dd_div_scalar(xh, xl, d):
    """Divide a DD pair by a double scalar or array, elementwise."""
    qh = xh / d
    rh, rl = _two_prod(qh, d)
    sh, sl = _dd_add(xh, xl, -rh, -rl)
    return _quick_two_sum(qh, (sh + sl) / d)


def _exp_dd_of_double(a):
    """e^a as a DD pair for double array a (|a| up to a few)."""
    k = np.rint(a / LN2_DD[0])
    mh, ml = _dd_mul(k, np.zeros_like(k), LN2_DD[0], LN2_DD[1])
    rh, rl = _dd_add(a, np.zeros_like(a), -mh, -ml)
    sh = np.ones_like(a)
    sl = np.zeros_like(a)
    th = np.ones_like(a)
    tl = np.zeros_like(a)
    for n in range(1, 30):
        th, tl = _dd_mul(th, tl, rh, rl)
        th, tl = _dd_div_scalar(th, tl, float(n))
        sh, sl = _dd_add(sh, sl, th, tl)
    scale = np.ldexp(1.0, k.astype(np.int64))
    return sh * scale, sl * scale


def _ln_half_dd(x):
    """ln(x/2) as a DD pair: float log plus a DD Newton correction."""
    u = np.log(0.5 * x)
    eh, el = _exp_dd_of_double(-u)
    wh, wl = _dd_mul(0.5 * x, np.zeros_like(x), eh, el)
    dh, dl = _dd_add(wh, wl, -np.ones_like(x), np.zeros_like(x))
    qh, ql = _dd_mul(dh, dl, dh, dl)
    ch, cl = _dd_add(dh, dl, -0.5 * qh, -0.5 * ql)
    return _dd_add(u, np.zeros_like(x), ch, cl)


# ---------------------------------------------------------------------------
# K0 / K0' / I0
# ---------------------------------------------------------------------------

def _series_terms_needed(xmax):
    """Terms after which the tail is below 1e-36 e^{-xmax} (sum scale)."""
    term = 1.0
    x2 = xmax * xmax
    floor_val = 1e-36 * np.exp(-xmax)
    for k in range(1, SERIES_MAX_TERMS + 1):
        term *= x2 / (4.0 * k * k)
        if term < floor_val and k > 4:
            return k
    return SERIES_MAX_TERMS


def _k0_k0p_series(x):
    """K0 and K0' on 0 < x < SERIES_ASYM_SWITCH via the DD power series."""
    z = np.zeros_like(x)
    lh, ll = _ln_half_dd(x)
    ch, cl = _dd_add(np.full_like(x, -GAMMA_DD[0]), np.full_like(x, -GAMMA_DD[1]), -lh, -ll)

    x2h, x2l = _two_prod(x, x)
    # K0: term e_k x^{2k}, weight (H_k + c); K0': term e_k x^{2k-1}, weight 2k(H_k+c)-1
    th, tl = np.ones_like(x), z.copy()
    wh, wl = _dd_add(np.full_like(x, HARMONIC_HI[0]), np.full_like(x, HARMONIC_LO[0]), ch, cl)
    s0h, s0l = _dd_mul(th, tl, wh, wl)
    # derivative k=0 term is -1/x; u tracks the running e_k x^{2k-1}
    uh, ul = _dd_div_scalar(np.ones_like(x), z, x)
    d0h, d0l = -uh, -ul
    for k in range(1, _series_terms_needed(float(np.max(x))) + 1):
        th, tl = _dd_mul(th, tl, x2h, x2l)
        th, tl = _dd_div_scalar(th, tl, 4.0 * k * k)
        uh, ul = _dd_mul(uh, ul, x2h, x2l)
        uh, ul = _dd_div_scalar(uh, ul, 4.0 * k * k)
        wh, wl = _dd_add(np.full_like(x, HARMONIC_HI[k]), np.full_like(x, HARMONIC_LO[k]), ch, cl)
        ah, al = _dd_mul(th, tl, wh, wl)
        s0h, s0l = _dd_add(s0h, s0l, ah, al)
        vh, vl = _dd_mul(np.full_like(x, 2.0 * k), z, wh, wl)
        vh, vl = _dd_add(vh, vl, -np.ones_like(x), z)
        bh, bl = _dd_mul(uh, ul, vh, vl)
        d0h, d0l = _dd_add(d0h, d0l, bh, bl)
    return s0h + s0l, d0h + d0l


def _k0_k0p_asym(x):
    """K0 and K0' = -K1 for x >= SERIES_ASYM_SWITCH via asymptotic series."""
    s0 = np.ones_like(x)
    s1 = np.ones_like(x)
    t0 = np.ones_like(x)
    t1 = np.ones_like(x)
    for k in range(1, ASYM_TERMS):
        q = 2 * k - 1
        t0 = t0 * (-(q * q) / (8.0 * k)) / x
        t1 = t1 * ((4.0 - q * q) / (8.0 * k)) / x
        s0 = s0 + t0
        s1 = s1 + t1
    pref = np.sqrt(np.pi / (2.0 * x)) * np.exp(-x)
    return pref * s0, -pref * s1


def k0_k0p(x):
    """K0(x) and K0'(x) for arrays of positive x."""
    x = np.asarray(x, dtype=float)
    k0 = np.empty_like(x)
    k0p = np.empty_like(x)
    small = x < SERIES_ASYM_SWITCH
    if np.any(small):
        a, b = _k0_k0p_series(x[small])
        k0[small] = a
        k0p[small] = b
    large = ~small
    if np.any(large):
        xl = x[large]
        a = np.zeros_like(xl)
        b = np.zeros_like(xl)
        ok = xl < K0_UNDERFLOW
        if np.any(ok):
            a[ok], b[ok] = _k0_k0p_asym(xl[ok])
        k0[large] = a
        k0p[large] = b
    return k0, k0p


def k0v(x):
    return k0_k0p(x)[0]


def k0pv(x):
    return k0_k0p(x)[1]


def i0v(x):
    """I0 by its even power series (all-positive terms, plain doubles)."""
    x = np.asarray(x, dtype=float)
    x2 = x * x
    s = np.ones_like(x)
    t = np.ones_like(x)
    for k in range(1, 90):
        t = t * x2 / (4.0 * k * k)
        s = s + t
        if np.all(t <= 1e-17 * s):
            break
    return s


# ---------------------------------------------------------------------------
# quadrature accumulation for the nonlocal right-hand sides
# ---------------------------------------------------------------------------

def accumulate_direct(zeta, weight, k0_at_nodes, phi, phix, phi_s, phix_s, out):
    """out += sum_q w_q (phix - phix_s[q]) [K0(sqrt(z_q^2+d^2)) - K0(|z_q|)].

    d = phi - phi_s[q].  `phi_s`/`phix_s` hold the field shifted by each
    quadrature node, shape (Q, N).
    """
    for q in range(zeta.shape[0]):
        d = phi - phi_s[q]
        r = np.hypot(zeta[q], d)
        out += (weight[q] * (phix - phix_s[q])) * (k0v(r) - k0_at_nodes[q])
    return out


def accumulate_series(zeta, wd, phi, phix, phi_s, phix_s, out):
    """out += sum_q (phix - phix_s[q]) sum_mu wd[q, mu] d^{2(mu+1)}.

    `wd[q, mu]` carries quadrature weight times the Taylor coefficient of
    the kernel difference at node q and order mu+1.
    """
    mu_max = wd.shape[1]
    for q in range(zeta.shape[0]):
        d2 = (phi - phi_s[q]) ** 2
        acc = wd[q, mu_max - 1] * d2
        for m in range(mu_max - 2, -1, -1):
            acc = (acc + wd[q, m]) * d2
        out += (phix - phix_s[q]) * acc
    return out
