"""Cocycle API: step matrices, products, Lyapunov, rotation, telescoping."""

import dataclasses
import math
from fractions import Fraction

import numpy as np
import pytest

from amolab import cocycle as co
from amolab.errors import PrecisionLoss


def _params(lam, alpha, E, theta):
    return co.CocycleParams.make(lam, alpha, E, theta)


def test_step_matrix_cosine_vanishes():
    p = _params(2.0, 0.0, 1.7, 0.25)  # theta + n alpha = 1/4
    m = co.step_matrix(p, 0).m
    assert m == pytest.approx(np.array([[1.7, -1.0], [1.0, 0.0]]), abs=1e-12)


def test_step_matrix_lam_zero_constant(golden):
    p = _params(0.0, golden, 0.9, 0.3)
    assert np.allclose(co.step_matrix(p, 0).m, co.step_matrix(p, 7).m)


def test_step_matrix_zero_corner():
    theta = 0.2
    lam = 1.3
    E = 2 * lam * math.cos(2 * math.pi * theta)
    p = _params(lam, 0.37, E, theta)
    m = co.step_matrix(p, 0).m
    assert m == pytest.approx(np.array([[0.0, -1.0], [1.0, 0.0]]), abs=1e-12)


def test_product_identity_cases(golden):
    p = _params(1.5, golden, 0.4, 0.13)
    assert np.allclose(co.product(p, 0).m, np.eye(2))
    # cocycle identity A_{m+n}(theta) = A_m(theta + n alpha) A_n(theta)
    rng = np.random.default_rng(42)
    for _ in range(12):
        m, n = int(rng.integers(1, 1000)), int(rng.integers(1, 1000))
        lam = float(rng.uniform(0.3, 2.0))
        E = float(rng.uniform(-2.5, 2.5))
        theta = float(rng.random())
        q = _params(lam, golden, E, theta)
        lhs = co.product(q, m + n)
        rhs_n = co.product(q, n)
        q_shift = dataclasses.replace(q, theta=math.fmod(q.theta + n * q.alpha, 1.0))
        rhs_m = co.product(q_shift, m)
        s = max(lhs.log_scale, rhs_m.log_scale + rhs_n.log_scale)
        L = math.exp(lhs.log_scale - s) * lhs.m
        R = math.exp(rhs_m.log_scale + rhs_n.log_scale - s) * (rhs_m.m @ rhs_n.m)
        rel = np.max(np.abs(L - R)) / max(np.max(np.abs(L)), 1e-300)
        assert rel < 1e-8


def test_product_inverse_identity(golden):
    # elliptic regime: A_{-k}(theta + k alpha) A_k(theta) = I tightly
    p = _params(0.3, golden, 0.4, 0.13)
    k = 200
    Ak = co.product(p, k)
    pk = dataclasses.replace(p, theta=math.fmod(p.theta + k * p.alpha, 1.0))
    Ainv = co.product(pk, -k)
    assert np.max(np.abs(Ainv.full() @ Ak.full() - np.eye(2))) < 1e-9


def test_product_det_and_norm(golden):
    p = _params(1.7, golden, 0.3, 0.41)
    prod = co.product(p, 5000)
    assert abs(prod.det_residual()) < 1e-11
    assert prod.det_ok(tol=1e-11)
    assert prod.norm2() >= 1.0  # unit determinant forces ||A|| >= 1
    assert prod.log_norm2() > 0


def test_product_full_overflow_raises(golden):
    p = _params(2.0, golden, 0.0, 0.2)
    big = co.product(p, 2000)
    with pytest.raises(PrecisionLoss):
        big.full()


def test_product_mp_matches_double(golden):
    p = _params(1.5, golden, 0.4, 0.13)
    a = co.product(p, 30)
    b = co.product(p, 30, co.Precision("bigfloat", 40))
    # the double-precision side carries the hyperbolic error amplification
    assert np.max(np.abs(a.full() - b.full())) / np.max(np.abs(b.full())) < 1e-7
    assert abs(b.logdet_drift) < 1e-25


def test_lyapunov_free_case(golden):
    est = co.lyapunov(0.0, golden, 0.7, 4000, 16)
    assert abs(est.value) < 1e-3
    # unit determinant keeps ||A_n|| >= 1, so the estimate is never negative
    assert est.value >= 0.0 and min(est.per_theta) >= 0.0


def test_lyapunov_large_energy_growth(golden):
    E = 12.0
    est = co.lyapunov(1.0, golden, E, 2000, 8)
    # hyperbolic regime: growth around ln of the large eigenvalue scale
    assert est.value > 0.8 * math.log(abs(E)) and est.value < 1.3 * math.log(abs(E))


def test_lyapunov_doubled_step_consistency(golden):
    n = 4000
    e1 = co.lyapunov(2.0, golden, 0.648, n, 8)
    e2 = co.lyapunov(2.0, golden, 0.648, 2 * n, 8)
    assert e1.value == pytest.approx(e2.value, abs=5e-3)


def test_rotation_constant_matrix():
    for phi in (0.3, 0.1, -0.2, 0.45):
        R = [[math.cos(2 * math.pi * phi), -math.sin(2 * math.pi * phi)],
             [math.sin(2 * math.pi * phi), math.cos(2 * math.pi * phi)]]
        rho = co.rotation_number_const(R)
        assert rho == pytest.approx(phi % 1.0, abs=1e-10)


def test_rotation_off_spectrum_locally_constant(golden):
    # below the spectrum bottom: rho = 1/2, locally constant
    r1 = co.rotation_number(0.3, golden, -2.9, n=20000)
    r2 = co.rotation_number(0.3, golden, -3.1, n=20000)
    assert r1.value == pytest.approx(0.5, abs=1e-4)
    assert r2.value == pytest.approx(0.5, abs=1e-4)
    assert r1.converged


def test_rotation_monotone_sweep(golden):
    E = np.linspace(-3.0, 3.0, 41)
    res = co.rotation_sweep(0.5, golden, E, n=12000)
    vals = np.array([r.value for r in res])
    vals = np.where(vals > 0.75, vals - 1.0, vals)
    bars = np.array([r.error_estimate for r in res])
    assert np.all(np.diff(vals) <= 3 * (bars[:-1] + bars[1:]) + 1e-12)


def test_rotation_weighted_beats_plain(golden):
    # mid-spectrum elliptic energy; weighted window converges much faster
    res_w = co.rotation_number(0.0, golden, 1.0, n=4000, averaging="weighted")
    res_p = co.rotation_number(0.0, golden, 1.0, n=4000, averaging="plain")
    exact = math.acos(0.5) / (2 * math.pi)  # rotation angle of S_E with E = 2 cos
    assert abs(res_w.value - exact) < 1e-8
    assert abs(res_w.value - exact) < abs(res_p.value - exact)


def test_telescoping_trivial_cases(golden):
    assert co.telescoping_gap(1.2, golden, 0.5, 0).sup_plus == 0.0
    tg = co.telescoping_gap(1.2, Fraction(34, 55), 0.5, 55, 32)
    assert tg.sup_plus == 0.0 and tg.sup_minus == 0.0


def test_telescoping_decays_with_quotient_insertion(golden):
    from amolab import freq

    spec = freq.construct_prime(golden, Fraction(1, 4), Fraction(2, 5), 10, stages=2)
    tg = co.telescoping_gap(math.exp(0.18), spec, 0.5, 55, 64)
    loose = co.telescoping_gap(math.exp(0.18), golden, 0.5, 55, 64)
    # the scheduled huge quotient makes ||q_n alpha|| tiny, collapsing the gap
    assert max(tg.sup_plus, tg.sup_minus) < 1e-3 * max(loose.sup_plus, loose.sup_minus)


def test_telescoping_mp_parity(golden):
    from amolab import freq, spectrum as sp

    spec = freq.construct_prime(golden, Fraction(1, 4), Fraction(2, 5), 10, stages=2)
    lam = math.exp(0.18)
    conv = spec.materialize(9)[0].convergent(9)
    E = sp.band_energies(sp.spectrum_approx(lam, conv.p, conv.q, 16), count=1)[0]
    td = co.telescoping_gap(lam, spec, E, 55, 8)
    tm = co.telescoping_gap(lam, spec, E, 55, 8, co.Precision("bigfloat", 50))
    # the double path carries hyperbolic roundoff amplification; the exact
    # path is the reference
    assert td.sup_plus == pytest.approx(tm.sup_plus, rel=2e-2)
    assert td.sup_minus == pytest.approx(tm.sup_minus, rel=2e-2)


def test_orbit_state_advance(golden):
    p = _params(1.1, golden, 0.3, 0.05)
    st = co.OrbitState(0, (1.0, 0.0))
    st2 = st.advance(p)
    expected = co.step_matrix(p, 0).m @ np.array([1.0, 0.0])
    assert st2.site == 1 and st2.v == pytest.approx(tuple(expected))
