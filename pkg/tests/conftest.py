"""Shared fixtures and independent oracle helpers.

The oracle helpers intentionally avoid the library's kernel code paths:
products multiply matrices directly, window masses run the second-order
difference recursion, and enclosures come from integer arithmetic.
"""

import math
from fractions import Fraction

import numpy as np
import pytest

from amolab import cf


@pytest.fixture
def golden():
    return cf.golden_mean()


def golden_fraction(digits=60):
    """Certified rational enclosure midpoint of (sqrt(5)-1)/2."""
    scale = 10 ** (2 * digits)
    lo = math.isqrt(5 * scale)  # floor(sqrt(5) * 10^digits)
    s = Fraction(lo, 10**digits)
    return (s - 1) / 2, Fraction(1, 10 ** (digits - 1))


def brute_product(E, lam, alpha, theta, k):
    """Direct ordered matrix product, no renormalization."""
    A = np.eye(2)
    if k >= 0:
        for j in range(k):
            c = E - 2 * lam * math.cos(2 * math.pi * math.fmod(theta + j * alpha, 1.0))
            A = np.array([[c, -1.0], [1.0, 0.0]]) @ A
    else:
        for j in range(1, -k + 1):
            c = E - 2 * lam * math.cos(2 * math.pi * math.fmod(theta - j * alpha, 1.0))
            A = np.array([[0.0, 1.0], [-1.0, c]]) @ A
    return A


def window_mass(phis, lam, alpha, E, theta, N):
    """sum_{|k|<=N} u(k)^2 for initial pairs (u(1), u(0)) = (cos, sin)(phi),
    by the plain difference-equation recursion."""
    phis = np.atleast_1d(np.asarray(phis, dtype=float))
    u1 = np.cos(phis)
    u0 = np.sin(phis)
    total = u0**2 + u1**2
    prev, cur = u0.copy(), u1.copy()
    for k in range(1, N):
        c = E - 2 * lam * math.cos(2 * math.pi * math.fmod(theta + (k - 1) * alpha, 1.0))
        cur, prev = c * cur - prev, cur
        total += cur**2
    prev, cur = u1.copy(), u0.copy()
    for k in range(1, N + 1):
        c = E - 2 * lam * math.cos(2 * math.pi * math.fmod(theta - k * alpha, 1.0))
        cur, prev = c * cur - prev, cur
        total += cur**2
    return total


def brute_window_min(lam, alpha, E, theta, N, n_samples=10000, rng=None, polish=60):
    """Brute-force minimum of the window mass over random unit pairs,
    then a golden-section polish around the best sample."""
    rng = rng or np.random.default_rng(0)
    angles = rng.random(n_samples) * 2 * math.pi
    vals = window_mass(angles, lam, alpha, E, theta, N)
    i = int(np.argmin(vals))
    best, phi = float(vals[i]), float(angles[i])
    span = 4 * 2 * math.pi / n_samples
    a, b = phi - span, phi + span
    gr = (math.sqrt(5) - 1) / 2
    c, d = b - gr * (b - a), a + gr * (b - a)
    for _ in range(polish):
        fc = float(window_mass(c, lam, alpha, E, theta, N)[0])
        fd = float(window_mass(d, lam, alpha, E, theta, N)[0])
        if fc < fd:
            b, d = d, c
            c = b - gr * (b - a)
        else:
            a, c = c, d
            d = a + gr * (b - a)
    mid = 0.5 * (a + b)
    return min(best, float(window_mass(mid, lam, alpha, E, theta, N)[0]))


def exact_distances(cf_obj, k_max, depth_q=10**7):
    """Certified ||k alpha|| for 1 <= k <= k_max by integer arithmetic.

    Uses a convergent p/q with q large and the exact error bound
    |alpha - p/q| <= 1/(q q'), so each distance is min(r, q-r)/q with a
    rigorous +- k/(q q') slack.  Returns (dist_lo, dist_hi) Fraction lists.
    """
    k = 1
    prev = None
    while True:
        c = cf_obj.convergent(k)
        if c.q > depth_q and prev is not None:
            p1, q1 = prev
            p2, q2 = c.p, c.q
            break
        prev = (c.p, c.q)
        k += 1
    slack_den = q1 * q2
    out = []
    for kk in range(1, k_max + 1):
        r = (kk * p1) % q1
        d = min(r, q1 - r)
        width = Fraction(kk, slack_den)
        out.append((Fraction(d, q1) - width, Fraction(d, q1) + width))
    return out
