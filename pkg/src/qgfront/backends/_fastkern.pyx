# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled kernel backend.

The double-double K0/K0' series runs in blocked form: the term recursion is
the outer loop and grid points the inner one, so iterations are independent
and the compiler can vectorise (a per-point evaluation is one long
dependency chain and runs an order of magnitude slower).  The series length
adapts to the largest argument in the block.  Mirrors
backends/reference.py; both must agree to ~1e-13 (asserted in tests).
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, fabs, hypot, ldexp, log, sqrt
from libc.stdlib cimport free, malloc

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

IMPL = "fastkern"

cdef double SPLITTER = 134217729.0
cdef double GAMMA_HI = GAMMA_DD[0]
cdef double GAMMA_LO = GAMMA_DD[1]
cdef double LN2_HI = LN2_DD[0]
cdef double LN2_LO = LN2_DD[1]
cdef double SWITCH = SERIES_ASYM_SWITCH
cdef double UNDERFLOW = K0_UNDERFLOW
cdef int NTERMS = SERIES_MAX_TERMS
cdef int NASYM = ASYM_TERMS
cdef double PI_C = 3.141592653589793

cdef double[::1] H_HI = np.asarray(HARMONIC_HI, dtype=np.float64)
cdef double[::1] H_LO = np.asarray(HARMONIC_LO, dtype=np.float64)


cdef struct dd:
    double hi
    double lo


cdef inline dd two_sum(double a, double b) noexcept nogil:
    cdef dd r
    cdef double s = a + b
    cdef double bb = s - a
    r.hi = s
    r.lo = (a - (s - bb)) + (b - bb)
    return r


cdef inline dd quick_two_sum(double a, double b) noexcept nogil:
    cdef dd r
    r.hi = a + b
    r.lo = b - (r.hi - a)
    return r


cdef inline dd two_prod(double a, double b) noexcept nogil:
    cdef dd r
    cdef double p = a * b
    cdef double ca = SPLITTER * a
    cdef double ahi = ca - (ca - a)
    cdef double alo = a - ahi
    cdef double cb = SPLITTER * b
    cdef double bhi = cb - (cb - b)
    cdef double blo = b - bhi
    r.hi = p
    r.lo = ((ahi * bhi - p) + ahi * blo + alo * bhi) + alo * blo
    return r


cdef inline dd dd_add(dd x, dd y) noexcept nogil:
    cdef dd s = two_sum(x.hi, y.hi)
    cdef dd t = two_sum(x.lo, y.lo)
    s.lo += t.hi
    s = quick_two_sum(s.hi, s.lo)
    s.lo += t.lo
    return quick_two_sum(s.hi, s.lo)


cdef inline dd dd_mul(dd x, dd y) noexcept nogil:
    cdef dd p = two_prod(x.hi, y.hi)
    p.lo += x.hi * y.lo + x.lo * y.hi
    return quick_two_sum(p.hi, p.lo)


cdef inline dd dd_div_d(dd x, double d) noexcept nogil:
    cdef double qh = x.hi / d
    cdef dd r = two_prod(qh, d)
    r.hi = -r.hi
    r.lo = -r.lo
    cdef dd s = dd_add(x, r)
    return quick_two_sum(qh, (s.hi + s.lo) / d)


cdef inline dd mk_dd(double hi, double lo) noexcept nogil:
    cdef dd r
    r.hi = hi
    r.lo = lo
    return r


cdef struct Work:
    dd *t     # running K0 term e_k x^{2k}
    dd *u     # running K0' term e_k x^{2k-1}
    dd *s0    # K0 accumulator
    dd *d0    # K0' accumulator
    dd *x2    # x^2
    dd *c     # -gamma - ln(x/2)
    Py_ssize_t size


cdef int work_alloc(Work *w, Py_ssize_t n) noexcept nogil:
    w.t = <dd *> malloc(6 * n * sizeof(dd))
    if w.t == NULL:
        return -1
    w.u = w.t + n
    w.s0 = w.t + 2 * n
    w.d0 = w.t + 3 * n
    w.x2 = w.t + 4 * n
    w.c = w.t + 5 * n
    w.size = n
    return 0


cdef void work_free(Work *w) noexcept nogil:
    if w.t != NULL:
        free(w.t)
        w.t = NULL


cdef inline dd ln_half_dd(double x) noexcept nogil:
    """ln(x/2) to double-double accuracy (float log + DD Newton step)."""
    cdef double u = log(0.5 * x)
    cdef long k = <long> ((-u) / LN2_HI + (0.5 if u <= 0.0 else -0.5))
    cdef dd m = dd_mul(mk_dd(<double> k, 0.0), mk_dd(LN2_HI, LN2_LO))
    m.hi = -m.hi
    m.lo = -m.lo
    cdef dd r = dd_add(mk_dd(-u, 0.0), m)
    cdef dd e = mk_dd(1.0, 0.0)
    cdef dd v = mk_dd(1.0, 0.0)
    cdef int n
    for n in range(1, 27):
        v = dd_mul(v, r)
        v = dd_div_d(v, <double> n)
        e = dd_add(e, v)
    e.hi = ldexp(e.hi, <int> k)
    e.lo = ldexp(e.lo, <int> k)
    cdef dd wv = dd_mul(mk_dd(0.5 * x, 0.0), e)   # = 1 + delta
    cdef dd d = dd_add(wv, mk_dd(-1.0, 0.0))
    cdef dd q = dd_mul(d, d)
    q.hi *= -0.5
    q.lo *= -0.5
    return dd_add(mk_dd(u, 0.0), dd_add(d, q))


cdef int series_terms_needed(double xmax) noexcept nogil:
    """Terms after which the tail is below 1e-36 e^{-xmax} (sum scale)."""
    cdef double term = 1.0
    cdef double x2 = xmax * xmax
    cdef double floor_val = 1e-36 * exp(-xmax)
    cdef int k
    for k in range(1, NTERMS + 1):
        term *= x2 / (4.0 * k * k)
        if term < floor_val and k > 4:
            return k
    return NTERMS


cdef void k0_series_block(const double *x, Py_ssize_t n, Work *w,
                          double *out0, double *out1) noexcept nogil:
    """Blocked DD evaluation of K0 and K0' for 0 < x[i] < SWITCH."""
    cdef Py_ssize_t i
    cdef int k, kmax
    cdef double xmax = 0.0, dk
    cdef dd hk, wgt, v, tmp
    for i in range(n):
        if x[i] > xmax:
            xmax = x[i]
        w.c[i] = dd_add(mk_dd(-GAMMA_HI, -GAMMA_LO), _neg(ln_half_dd(x[i])))
        w.x2[i] = two_prod(x[i], x[i])
        w.t[i] = mk_dd(1.0, 0.0)
        w.u[i] = dd_div_d(mk_dd(1.0, 0.0), x[i])
        w.s0[i] = w.c[i]                      # k = 0 term of K0 (H_0 = 0)
        w.d0[i] = _neg(w.u[i])                # k = 0 term of K0' is -1/x
    kmax = series_terms_needed(xmax)
    for k in range(1, kmax + 1):
        hk = mk_dd(H_HI[k], H_LO[k])
        dk = 4.0 * <double> k * <double> k
        for i in range(n):
            w.t[i] = dd_div_d(dd_mul(w.t[i], w.x2[i]), dk)
            w.u[i] = dd_div_d(dd_mul(w.u[i], w.x2[i]), dk)
            wgt = dd_add(hk, w.c[i])
            w.s0[i] = dd_add(w.s0[i], dd_mul(w.t[i], wgt))
            v = dd_mul(mk_dd(2.0 * k, 0.0), wgt)
            v = dd_add(v, mk_dd(-1.0, 0.0))
            w.d0[i] = dd_add(w.d0[i], dd_mul(w.u[i], v))
    for i in range(n):
        out0[i] = w.s0[i].hi + w.s0[i].lo
        out1[i] = w.d0[i].hi + w.d0[i].lo


cdef inline dd _neg(dd a) noexcept nogil:
    cdef dd r
    r.hi = -a.hi
    r.lo = -a.lo
    return r


cdef void k0_asym_scalar(double x, double *out0, double *out1) noexcept nogil:
    cdef double s_a = 1.0, s_b = 1.0, t_a = 1.0, t_b = 1.0, q, pref
    cdef int k
    if x >= UNDERFLOW:
        out0[0] = 0.0
        out1[0] = 0.0
        return
    for k in range(1, NASYM):
        q = <double> (2 * k - 1)
        t_a *= -(q * q) / (8.0 * k) / x
        t_b *= (4.0 - q * q) / (8.0 * k) / x
        s_a += t_a
        s_b += t_b
    pref = sqrt(PI_C / (2.0 * x)) * exp(-x)
    out0[0] = pref * s_a
    out1[0] = -pref * s_b


def k0_k0p(x):
    """K0 and K0' on arrays of positive x."""
    xa = np.ascontiguousarray(np.asarray(x, dtype=np.float64).ravel())
    cdef double[::1] xv = xa
    cdef Py_ssize_t n = xv.shape[0]
    out0a = np.empty(n)
    out1a = np.empty(n)
    packed = np.empty(max(n, 1))
    p0 = np.empty(max(n, 1))
    p1 = np.empty(max(n, 1))
    cdef double[::1] out0 = out0a
    cdef double[::1] out1 = out1a
    cdef double[::1] pk = packed
    cdef double[::1] pv0 = p0
    cdef double[::1] pv1 = p1
    cdef Work w
    cdef Py_ssize_t i, m = 0
    cdef double a, b
    shape = np.asarray(x, dtype=np.float64).shape
    if n == 0:
        return out0a.reshape(shape), out1a.reshape(shape)
    if work_alloc(&w, n) != 0:
        raise MemoryError
    with nogil:
        for i in range(n):
            if xv[i] >= SWITCH:
                k0_asym_scalar(xv[i], &a, &b)
                out0[i] = a
                out1[i] = b
            else:
                pk[m] = xv[i]
                m += 1
        if m > 0:
            k0_series_block(&pk[0], m, &w, &pv0[0], &pv1[0])
        m = 0
        for i in range(n):
            if xv[i] < SWITCH:
                out0[i] = pv0[m]
                out1[i] = pv1[m]
                m += 1
    work_free(&w)
    return out0a.reshape(shape), out1a.reshape(shape)


def k0v(x):
    return k0_k0p(x)[0]


def k0pv(x):
    return k0_k0p(x)[1]


def i0v(x):
    xa = np.ascontiguousarray(np.asarray(x, dtype=np.float64).ravel())
    cdef double[::1] xv = xa
    cdef Py_ssize_t n = xv.shape[0]
    outa = np.empty(n)
    cdef double[::1] out = outa
    cdef Py_ssize_t i
    cdef double x2, s, t
    cdef int k
    with nogil:
        for i in range(n):
            x2 = xv[i] * xv[i]
            s = 1.0
            t = 1.0
            for k in range(1, 90):
                t *= x2 / (4.0 * k * k)
                s += t
                if t <= 1e-17 * s:
                    break
            out[i] = s
    shape = np.asarray(x, dtype=np.float64).shape
    return outa.reshape(shape)


def accumulate_direct(zeta, weight, k0_at_nodes, phi, phix, phi_s, phix_s, out):
    """out += sum_q w_q (phix - phix_s[q]) [K0(sqrt(z_q^2+d^2)) - K0(|z_q|)].

    Row-blocked: each node's radii go through the blocked series, whose
    term count adapts to the row's largest argument (small |z| rows
    terminate after a handful of terms).
    """
    cdef double[::1] zv = np.ascontiguousarray(zeta, dtype=np.float64)
    cdef double[::1] wv = np.ascontiguousarray(weight, dtype=np.float64)
    cdef double[::1] kv = np.ascontiguousarray(k0_at_nodes, dtype=np.float64)
    cdef double[::1] pv = np.ascontiguousarray(phi, dtype=np.float64)
    cdef double[::1] pxv = np.ascontiguousarray(phix, dtype=np.float64)
    cdef double[:, ::1] ps = np.ascontiguousarray(phi_s, dtype=np.float64)
    cdef double[:, ::1] pxs = np.ascontiguousarray(phix_s, dtype=np.float64)
    cdef double[::1] ov = out
    cdef Py_ssize_t nq = zv.shape[0]
    cdef Py_ssize_t nx = pv.shape[0]
    rbuf = np.empty(nx)
    b0 = np.empty(nx)
    b1 = np.empty(nx)
    cdef double[::1] rv = rbuf
    cdef double[::1] bv0 = b0
    cdef double[::1] bv1 = b1
    cdef Work w
    cdef Py_ssize_t q, i
    cdef double d, a, b2
    if work_alloc(&w, nx) != 0:
        raise MemoryError
    with nogil:
        for q in range(nq):
            for i in range(nx):
                d = pv[i] - ps[q, i]
                rv[i] = hypot(zv[q], d)
            if zv[q] >= SWITCH:
                # radius >= |zeta|, so the whole row is asymptotic
                for i in range(nx):
                    k0_asym_scalar(rv[i], &a, &b2)
                    ov[i] += wv[q] * (pxv[i] - pxs[q, i]) * (a - kv[q])
            else:
                k0_series_block(&rv[0], nx, &w, &bv0[0], &bv1[0])
                for i in range(nx):
                    ov[i] += wv[q] * (pxv[i] - pxs[q, i]) * (bv0[i] - kv[q])
    work_free(&w)
    return out


def accumulate_series(zeta, wd, phi, phix, phi_s, phix_s, out):
    """out += sum_q (phix - phix_s[q]) sum_mu wd[q, mu] d^{2(mu+1)}."""
    cdef double[::1] zv = np.ascontiguousarray(zeta, dtype=np.float64)
    cdef double[:, ::1] wdv = np.ascontiguousarray(wd, dtype=np.float64)
    cdef double[::1] pv = np.ascontiguousarray(phi, dtype=np.float64)
    cdef double[::1] pxv = np.ascontiguousarray(phix, dtype=np.float64)
    cdef double[:, ::1] ps = np.ascontiguousarray(phi_s, dtype=np.float64)
    cdef double[:, ::1] pxs = np.ascontiguousarray(phix_s, dtype=np.float64)
    cdef double[::1] ov = out
    cdef Py_ssize_t nq = zv.shape[0]
    cdef Py_ssize_t nx = pv.shape[0]
    cdef Py_ssize_t nmu = wdv.shape[1]
    cdef Py_ssize_t q, i, m
    cdef double d2, acc
    with nogil:
        for q in range(nq):
            for i in range(nx):
                d2 = pv[i] - ps[q, i]
                d2 *= d2
                acc = wdv[q, nmu - 1] * d2
                for m in range(nmu - 2, -1, -1):
                    acc = (acc + wdv[q, m]) * d2
                ov[i] += (pxv[i] - pxs[q, i]) * acc
    return out
