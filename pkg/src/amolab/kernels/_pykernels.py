"""Pure-Python transfer-matrix kernels.

Reference implementation of the hot loops; the compiled module in _core.pyx
mirrors these signatures.  Grid sweeps vectorize across the sweep axis with
numpy, single long products run as scalar loops.

Products are kept in QR-split form A = Q R with R = [[e^s1, e^s1 w], [0,
e^s2]] and Q orthogonal (det tracked separately), so the two log scales stay
finite for arbitrarily long hyperbolic products and the unit-determinant
drift |s1 + s2| remains measurable at any magnitude.
"""

from __future__ import annotations

import math

import numpy as np

TWO_PI = 2.0 * math.pi
_REORTH_EVERY = 1024


# -- scalar QR product ---------------------------------------------------------


def qr_product(E, lam, alpha, theta, k, snapshot_at=0):
    """Ordered transfer-matrix product over k steps (k < 0 takes inverses).

    Returns (m11, m12, m21, m22, log_scale, logdet_drift[, snapshot]) where
    the actual product is e^log_scale * M.  ``snapshot_at`` > 0 additionally
    returns the split at that intermediate step (same tuple layout).
    """
    if k == 0:
        return (1.0, 0.0, 0.0, 1.0, 0.0, 0.0)
    inverse = k < 0
    n = -k if inverse else k
    q11, q12, q21, q22 = 1.0, 0.0, 0.0, 1.0
    s1 = s2 = 0.0
    w = 0.0
    qdet = 1.0
    drift = 0.0
    drift_c = 0.0  # Kahan compensation
    snap = None

    for j in range(n):
        if inverse:
            c = E - 2.0 * lam * math.cos(TWO_PI * math.fmod(theta - (j + 1) * alpha, 1.0))
            # S^-1 = [[0, 1], [-1, c]]
            b11, b12 = q21, q22
            b21, b22 = c * q21 - q11, c * q22 - q12
        else:
            c = E - 2.0 * lam * math.cos(TWO_PI * math.fmod(theta + j * alpha, 1.0))
            # S = [[c, -1], [1, 0]]
            b11, b12 = c * q11 - q21, c * q12 - q22
            b21, b22 = q11, q12
        r = math.hypot(b11, b21)
        cg, sg = b11 / r, b21 / r
        t11 = r
        t12 = cg * b12 + sg * b22
        t22 = cg * b22 - sg * b12
        nq11, nq21 = cg, sg
        nq12, nq22 = -sg, cg
        if t22 < 0.0:
            t22 = -t22
            nq12, nq22 = sg, -cg
            qdet = -qdet
        w = w + (t12 / t11) * math.exp(min(s2 - s1, 700.0))
        s1 += math.log(t11)
        s2 += math.log(t22)
        d = t11 * t22 - 1.0
        y = math.log1p(d) - drift_c
        t = drift + y
        drift_c = (t - drift) - y
        drift = t
        q11, q12, q21, q22 = nq11, nq12, nq21, nq22
        if (j + 1) % _REORTH_EVERY == 0:
            q11, q12, q21, q22 = _reorth(q11, q12, q21, q22)
        if snapshot_at and (j + 1) == snapshot_at:
            snap = _assemble(q11, q12, q21, q22, s1, s2, w, drift)
    out = _assemble(q11, q12, q21, q22, s1, s2, w, drift)
    if snapshot_at:
        return out + (snap,)
    return out


def _reorth(q11, q12, q21, q22):
    n1 = math.hypot(q11, q21)
    q11, q21 = q11 / n1, q21 / n1
    dot = q11 * q12 + q21 * q22
    q12, q22 = q12 - dot * q11, q22 - dot * q21
    n2 = math.hypot(q12, q22)
    return q11, q12 / n2, q21, q22 / n2


def _assemble(q11, q12, q21, q22, s1, s2, w, drift):
    """Split matrix M = Q [[1, w], [0, e^(s2-s1)]], scale e^s1."""
    ed = math.exp(min(s2 - s1, 700.0))
    m11 = q11
    m12 = q11 * w + q12 * ed
    m21 = q21
    m22 = q21 * w + q22 * ed
    return (m11, m12, m21, m22, s1, drift)


# -- vectorized QR sweep state --------------------------------------------------


class _QRState:
    """QR-split product state vectorized over a sweep axis."""

    __slots__ = ("q11", "q12", "q21", "q22", "s1", "s2", "w", "drift", "steps")

    def __init__(self, m):
        self.q11 = np.ones(m)
        self.q12 = np.zeros(m)
        self.q21 = np.zeros(m)
        self.q22 = np.ones(m)
        self.s1 = np.zeros(m)
        self.s2 = np.zeros(m)
        self.w = np.zeros(m)
        self.drift = np.zeros(m)
        self.steps = 0

    def step(self, c, inverse=False):
        """Left-multiply by S(c) = [[c,-1],[1,0]] or its inverse [[0,1],[-1,c]]."""
        if inverse:
            b11, b12 = self.q21, self.q22
            b21 = c * self.q21 - self.q11
            b22 = c * self.q22 - self.q12
        else:
            b11 = c * self.q11 - self.q21
            b12 = c * self.q12 - self.q22
            b21, b22 = self.q11, self.q12
        r = np.hypot(b11, b21)
        cg, sg = b11 / r, b21 / r
        t12 = cg * b12 + sg * b22
        t22 = cg * b22 - sg * b12
        neg = t22 < 0.0
        t22 = np.abs(t22)
        q12 = np.where(neg, sg, -sg)
        q22 = np.where(neg, -cg, cg)
        self.w = self.w + (t12 / r) * np.exp(np.minimum(self.s2 - self.s1, 700.0))
        self.s1 = self.s1 + np.log(r)
        self.s2 = self.s2 + np.log(t22)
        self.drift = self.drift + np.log1p(r * t22 - 1.0)
        self.q11, self.q21 = cg, sg
        self.q12, self.q22 = q12, q22
        self.steps += 1
        if self.steps % _REORTH_EVERY == 0:
            self._reorth()

    def _reorth(self):
        n1 = np.hypot(self.q11, self.q21)
        self.q11 /= n1
        self.q21 /= n1
        dot = self.q11 * self.q12 + self.q21 * self.q22
        self.q12 -= dot * self.q11
        self.q22 -= dot * self.q21
        n2 = np.hypot(self.q12, self.q22)
        self.q12 /= n2
        self.q22 /= n2

    def log_norm2(self):
        """ln of the spectral norm, stable at any scale."""
        ed = np.exp(np.minimum(self.s2 - self.s1, 700.0))
        t = 1.0 + self.w**2 + ed**2
        det = ed**2
        sig2 = 0.5 * (t + np.sqrt(np.maximum(t * t - 4.0 * det, 0.0)))
        return self.s1 + 0.5 * np.log(sig2)

    def matrices(self):
        """(M entries, log_scale): product = e^log_scale * M."""
        ed = np.exp(np.minimum(self.s2 - self.s1, 700.0))
        m11 = self.q11
        m12 = self.q11 * self.w + self.q12 * ed
        m21 = self.q21
        m22 = self.q21 * self.w + self.q22 * ed
        return m11, m12, m21, m22, self.s1


def _phase(theta, j, alpha):
    return np.fmod(theta + j * alpha, 1.0)


def lyap_grid(E, lam, alpha, thetas, n):
    """(1/n) ln ||A_n(E, theta)||_2 for each theta."""
    thetas = np.asarray(thetas, dtype=float)
    st = _QRState(thetas.size)
    for j in range(n):
        c = E - 2.0 * lam * np.cos(TWO_PI * _phase(thetas, j, alpha))
        st.step(c)
    return st.log_norm2() / n


def det_drift_grid(E, lam, alpha, thetas, n):
    """Unit-determinant drift ln|det A_n| for each theta."""
    thetas = np.asarray(thetas, dtype=float)
    st = _QRState(thetas.size)
    for j in range(n):
        c = E - 2.0 * lam * np.cos(TWO_PI * _phase(thetas, j, alpha))
        st.step(c)
    return st.drift.copy()


def rotation_grid(E_grid, lam, alpha, theta, n, y0=0.0):
    """Birkhoff rotation averages per energy.

    Returns (plain, weighted, half_disagreement).  Angle increments are
    branch-tracked in (-1/2, 1/2]; the weighted average uses a smooth bump
    window which converges much faster on Diophantine orbits.
    """
    E_grid = np.asarray(E_grid, dtype=float)
    m = E_grid.size
    v1 = np.full(m, math.cos(TWO_PI * y0))
    v2 = np.full(m, math.sin(TWO_PI * y0))
    total = np.zeros(m)
    half1 = np.zeros(m)
    wsum = np.zeros(m)
    wtot = 0.0
    half_n = n // 2
    for j in range(n):
        c = E_grid - 2.0 * lam * math.cos(TWO_PI * math.fmod(theta + j * alpha, 1.0))
        u1 = c * v1 - v2
        u2 = v1
        cross = v1 * u2 - v2 * u1
        dot = v1 * u1 + v2 * u2
        inc = np.arctan2(cross, dot) / TWO_PI
        # branch (-1/4, 3/4]: a reversal counts as a (consistent) half turn,
        # which keeps the lift continuous through negative-trace steps
        inc = np.where(inc <= -0.25, inc + 1.0, inc)
        total += inc
        if j < half_n:
            half1 += inc
        t = (j + 0.5) / n
        wj = math.exp(-1.0 / (t * (1.0 - t)))
        wsum += wj * inc
        wtot += wj
        norm = np.hypot(u1, u2)
        v1, v2 = u1 / norm, u2 / norm
    plain = np.mod(total / n, 1.0)
    weighted = np.mod(wsum / wtot, 1.0)
    plain = np.where(plain >= 1.0, plain - 1.0, plain)
    weighted = np.where(weighted >= 1.0, weighted - 1.0, weighted)
    rho_a = half1 / half_n
    rho_b = (total - half1) / (n - half_n)
    disagreement = np.abs(_circ_diff(rho_a, rho_b))
    return plain, weighted, disagreement


def _circ_diff(a, b):
    d = np.mod(a - b, 1.0)
    return np.where(d > 0.5, d - 1.0, d)


def gram_pairs(E_flat, theta_flat, lam, alpha, N):
    """Window-mass quadratic form G = sum_{|k|<=N} A_k^T e2 e2^T A_k per pair.

    Returns (g11, g12, g22, lmin, lmax).  Rows e2^T A_k follow the
    three-term recursion of the difference equation; the smallest eigenvalue
    uses a compensated determinant so it stays accurate relative to the
    accumulated G even when lmax is huge.
    """
    E = np.asarray(E_flat, dtype=float)
    th = np.asarray(theta_flat, dtype=float)
    m = E.size
    g11 = np.zeros(m)
    g12 = np.zeros(m)
    g22 = np.ones(m)  # k = 0 row is (0, 1)
    # overflow here is an escalation signal (lmin -> nan), not an error
    with np.errstate(over="ignore", invalid="ignore"):
        if N >= 1:
            # forward rows: r_{j+1} = c_{j-1} r_j - r_{j-1}, r_1 = (1, 0)
            rx_prev, ry_prev = np.zeros(m), np.ones(m)
            rx, ry = np.ones(m), np.zeros(m)
            g11 += rx * rx
            for j in range(1, N):
                c = E - 2.0 * lam * np.cos(TWO_PI * np.fmod(th + (j - 1) * alpha, 1.0))
                rx, rx_prev = c * rx - rx_prev, rx
                ry, ry_prev = c * ry - ry_prev, ry
                g11 += rx * rx
                g12 += rx * ry
                g22 += ry * ry
            # backward rows obey the same recursion with reflected phases:
            # r_{-(j+1)} = c(theta - (j+1) alpha) r_{-j} - r_{-(j-1)}
            bx_prev, by_prev = np.zeros(m), np.ones(m)
            c1 = E - 2.0 * lam * np.cos(TWO_PI * np.fmod(th - alpha, 1.0))
            bx, by = np.full(m, -1.0), c1
            g11 += bx * bx
            g12 += bx * by
            g22 += by * by
            for j in range(2, N + 1):
                c = E - 2.0 * lam * np.cos(TWO_PI * np.fmod(th - j * alpha, 1.0))
                bx, bx_prev = c * bx - bx_prev, bx
                by, by_prev = c * by - by_prev, by
                g11 += bx * bx
                g12 += bx * by
                g22 += by * by
    lmin, lmax = _sym2x2_eigs(g11, g12, g22)
    return g11, g12, g22, lmin, lmax


def _two_product(a, b):
    """Dekker exact product: a*b = p + err."""
    p = a * b
    split = 134217729.0  # 2^27 + 1
    a1 = a * split
    ah = a1 - (a1 - a)
    al = a - ah
    b1 = b * split
    bh = b1 - (b1 - b)
    bl = b - bh
    err = ((ah * bh - p) + ah * bl + al * bh) + al * bl
    return p, err


def _sym2x2_eigs(g11, g12, g22):
    """Eigenvalues of [[g11, g12], [g12, g22]], compensated determinant.

    Overflowed accumulations surface as lmin = nan (lmax = inf) so callers
    can escalate precision instead of trusting garbage.
    """
    with np.errstate(over="ignore", invalid="ignore"):
        p1, e1 = _two_product(g11, g22)
        p2, e2 = _two_product(g12, g12)
        det = (p1 - p2) + (e1 - e2)
        tr = g11 + g22
        disc = np.sqrt(np.maximum(tr * tr - 4.0 * det, 0.0))
        lmax = 0.5 * (tr + disc)
        lmin = np.where(lmax > 0, det / np.where(lmax > 0, lmax, 1.0), 0.0)
        lmin = np.maximum(lmin, 0.0)
        bad = ~(np.isfinite(tr) & np.isfinite(det))
        lmin = np.where(bad, np.nan, lmin)
        lmax = np.where(bad, np.inf, lmax)
    return lmin, lmax


def telescope_pairs(E, lam, alpha, q_n, thetas, shift):
    """Per-theta gaps ||A_{+-q_n}(E, theta + shift) - A_{+-q_n}(E, theta)||_2.

    ``shift`` is q_n * alpha reduced mod 1 by the caller (exactly, from the
    continued-fraction data, so tiny shifts survive).
    """
    thetas = np.asarray(thetas, dtype=float)
    gaps = []
    for inverse in (False, True):
        sa = _QRState(thetas.size)
        sb = _QRState(thetas.size)
        for j in range(q_n):
            if inverse:
                pa = np.fmod(thetas + shift - (j + 1) * alpha, 1.0)
                pb = np.fmod(thetas - (j + 1) * alpha, 1.0)
            else:
                pa = np.fmod(thetas + shift + j * alpha, 1.0)
                pb = np.fmod(thetas + j * alpha, 1.0)
            ca = E - 2.0 * lam * np.cos(TWO_PI * pa)
            cb = E - 2.0 * lam * np.cos(TWO_PI * pb)
            sa.step(ca, inverse=inverse)
            sb.step(cb, inverse=inverse)
        ma = sa.matrices()
        mb = sb.matrices()
        gaps.append(_split_diff_norm(ma, mb))
    return gaps[0], gaps[1]


def _split_diff_norm(ma, mb):
    """||e^sa Ma - e^sb Mb||_2 rescaled through the common max exponent."""
    a11, a12, a21, a22, sa = ma
    b11, b12, b21, b22, sb = mb
    s = np.maximum(sa, sb)
    fa = np.exp(sa - s)
    fb = np.exp(sb - s)
    d11 = a11 * fa - b11 * fb
    d12 = a12 * fa - b12 * fb
    d21 = a21 * fa - b21 * fb
    d22 = a22 * fa - b22 * fb
    return np.exp(s) * _norm2_2x2(d11, d12, d21, d22)


def _norm2_2x2(m11, m12, m21, m22):
    """Spectral norm of a 2x2 matrix (vectorized closed form)."""
    a = m11 * m11 + m12 * m12 + m21 * m21 + m22 * m22
    det = m11 * m22 - m12 * m21
    disc = np.sqrt(np.maximum(a * a - 4.0 * det * det, 0.0))
    return np.sqrt(np.maximum(0.5 * (a + disc), 0.0))


def gordon_norms(E, lam, alpha, theta, q_n, u0, u1):
    """Norms ||A_{q_n} u||, ||A_{-q_n} u||, ||A_{2 q_n} u|| and tr A_{q_n}.

    u = (u0, u1) should be normalized by the caller.  Norms may overflow to
    inf for strongly hyperbolic products, which is harmless for the lower
    bound these feed.
    """
    full = qr_product(E, lam, alpha, theta, 2 * q_n, snapshot_at=q_n)
    m2 = full[:6]
    mq = full[6]
    minv = qr_product(E, lam, alpha, theta, -q_n)
    n_pos = _apply_norm(mq, u0, u1)
    n_neg = _apply_norm(minv, u0, u1)
    n_two = _apply_norm(m2, u0, u1)
    tr = _split_trace(mq)
    return n_pos, n_neg, n_two, tr


def _apply_norm(split, u0, u1):
    m11, m12, m21, m22, s, _ = split
    x = m11 * u0 + m12 * u1
    y = m21 * u0 + m22 * u1
    v = math.hypot(x, y)
    if v == 0.0:
        return 0.0
    ln = s + math.log(v)
    return math.exp(ln) if ln < 709.0 else math.inf


def _split_trace(split):
    m11, _, _, m22, s, _ = split
    t = m11 + m22
    if t == 0.0:
        return 0.0
    ln = s + math.log(abs(t))
    val = math.exp(ln) if ln < 709.0 else math.inf
    return math.copysign(val, t)
