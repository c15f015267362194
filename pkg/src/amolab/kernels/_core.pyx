# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled transfer-matrix kernels (mirror of _pykernels)."""

from libc.math cimport atan2, cos, exp, fabs, fma, fmod, hypot, log, log1p, sin, sqrt, INFINITY, NAN

import numpy as np

DEF TWO_PI = 6.283185307179586476925286766559
DEF REORTH_EVERY = 1024


cdef struct QR:
    double q11, q12, q21, q22
    double s1, s2, w
    double qdet
    double drift, drift_c
    long steps


cdef inline void qr_init(QR *st) nogil:
    st.q11 = 1.0; st.q12 = 0.0; st.q21 = 0.0; st.q22 = 1.0
    st.s1 = 0.0; st.s2 = 0.0; st.w = 0.0
    st.qdet = 1.0
    st.drift = 0.0; st.drift_c = 0.0
    st.steps = 0


cdef inline void qr_step(QR *st, double c, bint inverse) nogil:
    cdef double b11, b12, b21, b22, r, cg, sg, t12, t22, d, y, t
    cdef double nq12, nq22
    if inverse:
        b11 = st.q21; b12 = st.q22
        b21 = c * st.q21 - st.q11
        b22 = c * st.q22 - st.q12
    else:
        b11 = c * st.q11 - st.q21
        b12 = c * st.q12 - st.q22
        b21 = st.q11; b22 = st.q12
    r = hypot(b11, b21)
    cg = b11 / r; sg = b21 / r
    t12 = cg * b12 + sg * b22
    t22 = cg * b22 - sg * b12
    nq12 = -sg; nq22 = cg
    if t22 < 0.0:
        t22 = -t22
        nq12 = sg; nq22 = -cg
        st.qdet = -st.qdet
    d = st.s2 - st.s1
    if d > 700.0:
        d = 700.0
    st.w = st.w + (t12 / r) * exp(d)
    st.s1 += log(r)
    st.s2 += log(t22)
    d = r * t22 - 1.0
    y = log1p(d) - st.drift_c
    t = st.drift + y
    st.drift_c = (t - st.drift) - y
    st.drift = t
    st.q11 = cg; st.q21 = sg
    st.q12 = nq12; st.q22 = nq22
    st.steps += 1
    if st.steps % REORTH_EVERY == 0:
        qr_reorth(st)


cdef inline void qr_reorth(QR *st) nogil:
    cdef double n1, dot, n2
    n1 = hypot(st.q11, st.q21)
    st.q11 /= n1; st.q21 /= n1
    dot = st.q11 * st.q12 + st.q21 * st.q22
    st.q12 -= dot * st.q11
    st.q22 -= dot * st.q21
    n2 = hypot(st.q12, st.q22)
    st.q12 /= n2; st.q22 /= n2


cdef inline double step_coeff(double E, double lam, double alpha, double theta,
                              long j, bint inverse) nogil:
    cdef double phase
    if inverse:
        phase = fmod(theta - (j + 1) * alpha, 1.0)
    else:
        phase = fmod(theta + j * alpha, 1.0)
    return E - 2.0 * lam * cos(TWO_PI * phase)


cdef inline void qr_assemble(QR *st, double *out) nogil:
    cdef double d = st.s2 - st.s1
    if d > 700.0:
        d = 700.0
    cdef double ed = exp(d)
    out[0] = st.q11
    out[1] = st.q11 * st.w + st.q12 * ed
    out[2] = st.q21
    out[3] = st.q21 * st.w + st.q22 * ed
    out[4] = st.s1
    out[5] = st.drift


cdef inline double qr_log_norm2(QR *st) nogil:
    cdef double d = st.s2 - st.s1
    if d > 700.0:
        d = 700.0
    cdef double ed = exp(d)
    cdef double t = 1.0 + st.w * st.w + ed * ed
    cdef double det = ed * ed
    cdef double disc = t * t - 4.0 * det
    if disc < 0.0:
        disc = 0.0
    return st.s1 + 0.5 * log(0.5 * (t + sqrt(disc)))


def qr_product(double E, double lam, double alpha, double theta, long k,
               long snapshot_at=0):
    """Ordered product over k steps in QR-split form; see _pykernels."""
    cdef QR st
    cdef bint inverse = k < 0
    cdef long n = -k if inverse else k
    cdef long j
    cdef double c
    cdef double out[6]
    cdef double snap[6]
    cdef bint have_snap = False
    if k == 0:
        return (1.0, 0.0, 0.0, 1.0, 0.0, 0.0)
    qr_init(&st)
    for j in range(n):
        c = step_coeff(E, lam, alpha, theta, j, inverse)
        qr_step(&st, c, inverse)
        if snapshot_at and (j + 1) == snapshot_at:
            qr_assemble(&st, snap)
            have_snap = True
    qr_assemble(&st, out)
    res = (out[0], out[1], out[2], out[3], out[4], out[5])
    if snapshot_at:
        snap_t = (snap[0], snap[1], snap[2], snap[3], snap[4], snap[5]) if have_snap else None
        return res + (snap_t,)
    return res


def lyap_grid(double E, double lam, double alpha, thetas, long n):
    cdef double[::1] th = np.ascontiguousarray(thetas, dtype=np.float64)
    cdef long m = th.shape[0]
    out_arr = np.empty(m, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef long i, j
    cdef QR st
    cdef double c
    with nogil:
        for i in range(m):
            qr_init(&st)
            for j in range(n):
                c = step_coeff(E, lam, alpha, th[i], j, False)
                qr_step(&st, c, False)
            out[i] = qr_log_norm2(&st) / n
    return out_arr


def det_drift_grid(double E, double lam, double alpha, thetas, long n):
    cdef double[::1] th = np.ascontiguousarray(thetas, dtype=np.float64)
    cdef long m = th.shape[0]
    out_arr = np.empty(m, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef long i, j
    cdef QR st
    cdef double c
    with nogil:
        for i in range(m):
            qr_init(&st)
            for j in range(n):
                c = step_coeff(E, lam, alpha, th[i], j, False)
                qr_step(&st, c, False)
            out[i] = st.drift
    return out_arr


def rotation_grid(E_grid, double lam, double alpha, double theta, long n, double y0=0.0):
    cdef double[::1] E = np.ascontiguousarray(E_grid, dtype=np.float64)
    cdef long m = E.shape[0]
    plain_arr = np.empty(m, dtype=np.float64)
    weighted_arr = np.empty(m, dtype=np.float64)
    dis_arr = np.empty(m, dtype=np.float64)
    cdef double[::1] plain = plain_arr
    cdef double[::1] weighted = weighted_arr
    cdef double[::1] dis = dis_arr
    cdef long i, j
    cdef long half_n = n // 2
    cdef double v1, v2, u1, u2, c, cross, dot, inc, norm, t, wj, cs, phase
    cdef double total, half1, wsum, wtot, rho_a, rho_b, d
    cs = cos(TWO_PI * y0)
    cdef double sn = sin(TWO_PI * y0)
    with nogil:
        for i in range(m):
            v1 = cs; v2 = sn
            total = 0.0; half1 = 0.0; wsum = 0.0; wtot = 0.0
            for j in range(n):
                phase = fmod(theta + j * alpha, 1.0)
                c = E[i] - 2.0 * lam * cos(TWO_PI * phase)
                u1 = c * v1 - v2
                u2 = v1
                cross = v1 * u2 - v2 * u1
                dot = v1 * u1 + v2 * u2
                inc = atan2(cross, dot) / TWO_PI
                if inc <= -0.25:
                    inc += 1.0
                total += inc
                if j < half_n:
                    half1 += inc
                t = (j + 0.5) / n
                wj = exp(-1.0 / (t * (1.0 - t)))
                wsum += wj * inc
                wtot += wj
                norm = hypot(u1, u2)
                v1 = u1 / norm; v2 = u2 / norm
            plain[i] = fmod(total / n, 1.0)
            if plain[i] < 0.0:
                plain[i] += 1.0
            if plain[i] >= 1.0:
                plain[i] -= 1.0
            weighted[i] = fmod(wsum / wtot, 1.0)
            if weighted[i] < 0.0:
                weighted[i] += 1.0
            if weighted[i] >= 1.0:
                weighted[i] -= 1.0
            rho_a = half1 / half_n
            rho_b = (total - half1) / (n - half_n)
            d = fmod(rho_a - rho_b, 1.0)
            if d < 0.0:
                d += 1.0
            if d > 0.5:
                d -= 1.0
            dis[i] = fabs(d)
    return plain_arr, weighted_arr, dis_arr


def gram_pairs(E_flat, theta_flat, double lam, double alpha, long N):
    cdef double[::1] E = np.ascontiguousarray(E_flat, dtype=np.float64)
    cdef double[::1] th = np.ascontiguousarray(theta_flat, dtype=np.float64)
    cdef long m = E.shape[0]
    g11_arr = np.empty(m, dtype=np.float64)
    g12_arr = np.empty(m, dtype=np.float64)
    g22_arr = np.empty(m, dtype=np.float64)
    lmin_arr = np.empty(m, dtype=np.float64)
    lmax_arr = np.empty(m, dtype=np.float64)
    cdef double[::1] g11v = g11_arr
    cdef double[::1] g12v = g12_arr
    cdef double[::1] g22v = g22_arr
    cdef double[::1] lminv = lmin_arr
    cdef double[::1] lmaxv = lmax_arr
    cdef long i, j
    cdef double g11, g12, g22, c
    cdef double rx, ry, rx_prev, ry_prev, tmp
    cdef double det, tr, disc, lmax, lmin, e1, e2
    with nogil:
        for i in range(m):
            g11 = 0.0; g12 = 0.0; g22 = 1.0
            if N >= 1:
                rx_prev = 0.0; ry_prev = 1.0
                rx = 1.0; ry = 0.0
                g11 += 1.0
                for j in range(1, N):
                    c = E[i] - 2.0 * lam * cos(TWO_PI * fmod(th[i] + (j - 1) * alpha, 1.0))
                    tmp = c * rx - rx_prev; rx_prev = rx; rx = tmp
                    tmp = c * ry - ry_prev; ry_prev = ry; ry = tmp
                    g11 += rx * rx
                    g12 += rx * ry
                    g22 += ry * ry
                rx_prev = 0.0; ry_prev = 1.0
                c = E[i] - 2.0 * lam * cos(TWO_PI * fmod(th[i] - alpha, 1.0))
                rx = -1.0; ry = c
                g11 += rx * rx
                g12 += rx * ry
                g22 += ry * ry
                for j in range(2, N + 1):
                    c = E[i] - 2.0 * lam * cos(TWO_PI * fmod(th[i] - j * alpha, 1.0))
                    tmp = c * rx - rx_prev; rx_prev = rx; rx = tmp
                    tmp = c * ry - ry_prev; ry_prev = ry; ry = tmp
                    g11 += rx * rx
                    g12 += rx * ry
                    g22 += ry * ry
            # compensated determinant via fused multiply-add; overflow
            # surfaces as lmin = nan so callers can escalate precision
            e1 = fma(g11, g22, -g11 * g22)
            e2 = fma(g12, g12, -g12 * g12)
            det = (g11 * g22 - g12 * g12) + (e1 - e2)
            tr = g11 + g22
            if tr != tr or det != det or tr == INFINITY:
                g11v[i] = g11; g12v[i] = g12; g22v[i] = g22
                lminv[i] = NAN; lmaxv[i] = INFINITY
                continue
            disc = tr * tr - 4.0 * det
            if disc < 0.0:
                disc = 0.0
            lmax = 0.5 * (tr + sqrt(disc))
            lmin = det / lmax if lmax > 0.0 else 0.0
            if lmin < 0.0:
                lmin = 0.0
            g11v[i] = g11; g12v[i] = g12; g22v[i] = g22
            lminv[i] = lmin; lmaxv[i] = lmax
    return g11_arr, g12_arr, g22_arr, lmin_arr, lmax_arr


cdef inline double norm2_2x2(double m11, double m12, double m21, double m22) nogil:
    cdef double a = m11 * m11 + m12 * m12 + m21 * m21 + m22 * m22
    cdef double det = m11 * m22 - m12 * m21
    cdef double disc = a * a - 4.0 * det * det
    if disc < 0.0:
        disc = 0.0
    cdef double v = 0.5 * (a + sqrt(disc))
    if v < 0.0:
        v = 0.0
    return sqrt(v)


def telescope_pairs(double E, double lam, double alpha, long q_n, thetas, double shift):
    cdef double[::1] th = np.ascontiguousarray(thetas, dtype=np.float64)
    cdef long m = th.shape[0]
    gp_arr = np.empty(m, dtype=np.float64)
    gm_arr = np.empty(m, dtype=np.float64)
    cdef double[::1] gp = gp_arr
    cdef double[::1] gm = gm_arr
    cdef long i, j, mode
    cdef QR sa, sb
    cdef double ca, cb, s, faa, fbb
    cdef double ma[6]
    cdef double mb[6]
    cdef bint inverse
    with nogil:
        for i in range(m):
            for mode in range(2):
                inverse = mode == 1
                qr_init(&sa)
                qr_init(&sb)
                for j in range(q_n):
                    ca = step_coeff(E, lam, alpha, th[i] + shift, j, inverse)
                    cb = step_coeff(E, lam, alpha, th[i], j, inverse)
                    qr_step(&sa, ca, inverse)
                    qr_step(&sb, cb, inverse)
                qr_assemble(&sa, ma)
                qr_assemble(&sb, mb)
                s = ma[4] if ma[4] > mb[4] else mb[4]
                faa = exp(ma[4] - s)
                fbb = exp(mb[4] - s)
                if inverse:
                    gm[i] = exp(s) * norm2_2x2(
                        ma[0] * faa - mb[0] * fbb, ma[1] * faa - mb[1] * fbb,
                        ma[2] * faa - mb[2] * fbb, ma[3] * faa - mb[3] * fbb)
                else:
                    gp[i] = exp(s) * norm2_2x2(
                        ma[0] * faa - mb[0] * fbb, ma[1] * faa - mb[1] * fbb,
                        ma[2] * faa - mb[2] * fbb, ma[3] * faa - mb[3] * fbb)
    return gp_arr, gm_arr


def gordon_norms(double E, double lam, double alpha, double theta, long q_n,
                 double u0, double u1):
    cdef QR st
    cdef double mq[6]
    cdef double m2[6]
    cdef double mi[6]
    cdef long j
    cdef double c
    qr_init(&st)
    for j in range(2 * q_n):
        c = step_coeff(E, lam, alpha, theta, j, False)
        qr_step(&st, c, False)
        if j + 1 == q_n:
            qr_assemble(&st, mq)
    qr_assemble(&st, m2)
    qr_init(&st)
    for j in range(q_n):
        c = step_coeff(E, lam, alpha, theta, j, True)
        qr_step(&st, c, True)
    qr_assemble(&st, mi)
    return (_apply_norm_c(mq, u0, u1), _apply_norm_c(mi, u0, u1),
            _apply_norm_c(m2, u0, u1), _trace_c(mq))


cdef double _apply_norm_c(double *sp, double u0, double u1):
    cdef double x = sp[0] * u0 + sp[1] * u1
    cdef double y = sp[2] * u0 + sp[3] * u1
    cdef double v = hypot(x, y)
    if v == 0.0:
        return 0.0
    cdef double ln = sp[4] + log(v)
    return exp(ln) if ln < 709.0 else INFINITY


cdef double _trace_c(double *sp):
    cdef double t = sp[0] + sp[3]
    if t == 0.0:
        return 0.0
    cdef double ln = sp[4] + log(fabs(t))
    cdef double val = exp(ln) if ln < 709.0 else INFINITY
    return val if t > 0.0 else -val
