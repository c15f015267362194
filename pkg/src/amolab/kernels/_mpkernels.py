"""Arbitrary-precision transfer-matrix kernels (mpmath).

Scalar loops, exact-rational phase bookkeeping.  These back the bigfloat /
extended precision modes and the certified escalation paths; they are slow
and meant for single points or short sweeps, not grids.
"""

from __future__ import annotations

from fractions import Fraction

import mpmath

def _frac(x):
    if isinstance(x, Fraction):
        return x
    return Fraction(x)


def _mpf_of(x):
    if isinstance(x, Fraction):
        return mpmath.mpf(x.numerator) / x.denominator
    return mpmath.mpf(x)


def _coeff(E, lam, alpha_f: Fraction, theta_f: Fraction, j, inverse):
    """Transfer coefficient E - 2 lam cos(2 pi (theta +/- j alpha))."""
    if inverse:
        phase = theta_f - (j + 1) * alpha_f
    else:
        phase = theta_f + j * alpha_f
    phase -= phase.__floor__()
    return E - 2 * lam * mpmath.cospi(2 * _mpf_of(phase))


def mp_product(E, lam, alpha, theta, k, dps=50):
    """Plain 2x2 product at dps digits; mpf exponents never overflow.

    Returns ((a11, a12, a21, a22), logdet_residual).
    """
    alpha_f, theta_f = _frac(alpha), _frac(theta)
    with mpmath.workdps(dps):
        Em, lm = _mpf_of(_frac(E)), _mpf_of(_frac(lam))
        a11, a12, a21, a22 = mpmath.mpf(1), mpmath.mpf(0), mpmath.mpf(0), mpmath.mpf(1)
        inverse = k < 0
        n = -k if inverse else k
        for j in range(n):
            c = _coeff(Em, lm, alpha_f, theta_f, j, inverse)
            if inverse:
                # S^-1 = [[0, 1], [-1, c]] on the left
                a11, a12, a21, a22 = a21, a22, c * a21 - a11, c * a22 - a12
            else:
                a11, a12, a21, a22 = c * a11 - a21, c * a12 - a22, a11, a12
        det = a11 * a22 - a12 * a21
        residual = mpmath.log(abs(det)) if det != 0 else mpmath.mpf("-inf")
        return (a11, a12, a21, a22), residual


def mp_gram(E, lam, alpha, theta, N, dps=60):
    """Window-mass form and its smallest eigenvalue at dps digits."""
    alpha_f, theta_f = _frac(alpha), _frac(theta)
    with mpmath.workdps(dps):
        Em, lm = _mpf_of(_frac(E)), _mpf_of(_frac(lam))
        one, zero = mpmath.mpf(1), mpmath.mpf(0)
        g11, g12, g22 = zero, zero, one
        if N >= 1:
            rx_prev, ry_prev = zero, one
            rx, ry = one, zero
            g11 += 1
            for j in range(1, N):
                c = _coeff(Em, lm, alpha_f, theta_f, j - 1, False)
                rx, rx_prev = c * rx - rx_prev, rx
                ry, ry_prev = c * ry - ry_prev, ry
                g11 += rx * rx
                g12 += rx * ry
                g22 += ry * ry
            c = Em - 2 * lm * mpmath.cospi(2 * _mpf_of(_mod1(theta_f - alpha_f)))
            bx_prev, by_prev = zero, one
            bx, by = -one, c
            g11 += bx * bx
            g12 += bx * by
            g22 += by * by
            for j in range(2, N + 1):
                c = Em - 2 * lm * mpmath.cospi(2 * _mpf_of(_mod1(theta_f - j * alpha_f)))
                bx, bx_prev = c * bx - bx_prev, bx
                by, by_prev = c * by - by_prev, by
                g11 += bx * bx
                g12 += bx * by
                g22 += by * by
        tr = g11 + g22
        det = g11 * g22 - g12 * g12
        disc = mpmath.sqrt(max(tr * tr - 4 * det, mpmath.mpf(0)))
        lmax = (tr + disc) / 2
        lmin = det / lmax if lmax > 0 else mpmath.mpf(0)
        return g11, g12, g22, lmin, lmax


def _mod1(x: Fraction):
    return x - x.__floor__()


def iv_gram(E, lam, alpha, theta, N, dps=80):
    """Interval-certified bounds on the smallest eigenvalue of the form.

    All inputs are taken exactly (rationals); every operation runs in
    mpmath interval arithmetic, so (lmin_lo, lmin_hi) rigorously bracket
    the true smallest eigenvalue for these exact parameters.
    """
    alpha_f, theta_f = _frac(alpha), _frac(theta)
    E_f, lam_f = _frac(E), _frac(lam)
    iv = mpmath.iv
    old = iv.dps
    iv.dps = dps
    try:
        def ivf(fr):
            return iv.mpf(fr.numerator) / fr.denominator

        Em, lm = ivf(E_f), ivf(lam_f)
        two_pi = 2 * iv.pi
        one, zero = iv.mpf(1), iv.mpf(0)

        def coeff(phase_f):
            return Em - 2 * lm * iv.cos(two_pi * ivf(_mod1(phase_f)))

        g11, g12, g22 = zero, zero, one
        if N >= 1:
            rx_prev, ry_prev = zero, one
            rx, ry = one, zero
            g11 += one
            for j in range(1, N):
                c = coeff(theta_f + (j - 1) * alpha_f)
                rx, rx_prev = c * rx - rx_prev, rx
                ry, ry_prev = c * ry - ry_prev, ry
                g11 += rx * rx
                g12 += rx * ry
                g22 += ry * ry
            c = coeff(theta_f - alpha_f)
            bx_prev, by_prev = zero, one
            bx, by = -one, c
            g11 += bx * bx
            g12 += bx * by
            g22 += by * by
            for j in range(2, N + 1):
                c = coeff(theta_f - j * alpha_f)
                bx, bx_prev = c * bx - bx_prev, bx
                by, by_prev = c * by - by_prev, by
                g11 += bx * bx
                g12 += bx * by
                g22 += by * by
        tr = g11 + g22
        det = g11 * g22 - g12 * g12
        disc_sq = tr * tr - 4 * det
        lo = float(mpmath.mpf(disc_sq.a))
        disc = iv.sqrt(disc_sq) if lo >= 0 else iv.sqrt(iv.mpf([0, float(mpmath.mpf(disc_sq.b))]))
        lmax = (tr + disc) / 2
        lmin = det / lmax
        return float(mpmath.mpf(lmin.a)), float(mpmath.mpf(lmin.b))
    finally:
        iv.dps = old


def mp_lyap(E, lam, alpha, theta, n, dps=40):
    """(1/n) ln ||A_n||_F at dps digits (single theta)."""
    (a11, a12, a21, a22), _ = mp_product(E, lam, alpha, theta, n, dps)
    with mpmath.workdps(dps):
        nrm = mpmath.sqrt(a11**2 + a12**2 + a21**2 + a22**2)
        return float(mpmath.log(nrm) / n)


def mp_telescope(E, lam, alpha, q_n, thetas, dps=60):
    """Per-theta sup gaps ||A_{+-q}(theta + q alpha) - A_{+-q}(theta)||_F.

    The shift q_n * alpha is carried exactly as a rational, so gaps far
    below double resolution are still measured honestly.
    """
    alpha_f = _frac(alpha)
    shift = _mod1(q_n * alpha_f)
    gaps_plus, gaps_minus = [], []
    for theta in thetas:
        theta_f = _frac(theta)
        for inverse, out in ((False, gaps_plus), (True, gaps_minus)):
            (a11, a12, a21, a22), _ = mp_product(E, lam, alpha_f, theta_f + shift, -q_n if inverse else q_n, dps)
            (b11, b12, b21, b22), _ = mp_product(E, lam, alpha_f, theta_f, -q_n if inverse else q_n, dps)
            with mpmath.workdps(dps):
                d = mpmath.sqrt((a11 - b11) ** 2 + (a12 - b12) ** 2
                                + (a21 - b21) ** 2 + (a22 - b22) ** 2)
                out.append(float(d))
    return gaps_plus, gaps_minus


def mp_gordon(E, lam, alpha, theta, q_n, u0, u1, dps=60):
    """Gordon norms and trace at dps digits."""
    alpha_f, theta_f = _frac(alpha), _frac(theta)
    with mpmath.workdps(dps):
        u0m, u1m = mpmath.mpf(u0), mpmath.mpf(u1)
        out = []
        for k in (q_n, -q_n, 2 * q_n):
            (a11, a12, a21, a22), _ = mp_product(E, lam, alpha_f, theta_f, k, dps)
            x = a11 * u0m + a12 * u1m
            y = a21 * u0m + a22 * u1m
            out.append(float(mpmath.sqrt(x * x + y * y)))
            if k == q_n:
                tr = float(a11 + a22)
        return out[0], out[1], out[2], tr
