"""Shared numerical constants for the kernel backends.

The modified-Bessel series around zero cancels catastrophically for
moderate arguments (partial sums grow like e^x while K0 decays like e^-x),
so both backends run it in double-double arithmetic.  That only helps if
the series coefficients themselves carry ~32 digits, hence everything here
is stored as (hi, lo) float pairs with hi + lo accurate to ~1e-32.
"""

from fractions import Fraction

# Euler-Mascheroni constant, ln 2 and pi as double-double pairs.
GAMMA_DD = (0.5772156649015329, -4.942915152430645e-18)
LN2_DD = (0.6931471805599453, 2.3190468138462996e-17)
PI_DD = (3.141592653589793, 1.2246467991473532e-16)

# Series/asymptotic switch and term counts for K0 and K0'.
SERIES_ASYM_SWITCH = 15.0
SERIES_MAX_TERMS = 64
ASYM_TERMS = 25

# Arguments beyond this underflow e^-x to zero anyway.
K0_UNDERFLOW = 746.0


def _harmonic_pairs(n):
    """Exact (hi, lo) splittings of the harmonic numbers H_0..H_{n-1}."""
    pairs = []
    h = Fraction(0)
    for k in range(n):
        if k:
            h += Fraction(1, k)
        hi = float(h)
        lo = float(h - Fraction(hi))
        pairs.append((hi, lo))
    return pairs


_HPAIRS = _harmonic_pairs(SERIES_MAX_TERMS + 1)
HARMONIC_HI = tuple(p[0] for p in _HPAIRS)
HARMONIC_LO = tuple(p[1] for p in _HPAIRS)
