"""Continued-fraction engine: expansions, convergents, metrics, phases."""

import math
import random
from fractions import Fraction

import pytest

from amolab import cf
from amolab.errors import (
    AmbiguousQuotient,
    InsufficientStages,
    NotInUnitInterval,
)

from conftest import golden_fraction


# -- expand ---------------------------------------------------------------------


def test_expand_rational_euclid():
    assert cf.expand(Fraction(7, 17), 10).quotients == (2, 2, 3)


def test_expand_golden_certified():
    val, rad = golden_fraction(60)
    e = cf.expand(val, 40, rad)
    assert e.quotients == (1,) * 40


def test_expand_silver_certified():
    # sqrt(2) - 1 = [2, 2, 2, ...]
    scale = 10**120
    lo = math.isqrt(2 * scale**2)
    val = Fraction(lo, scale) - 1
    e = cf.expand(val, 40, Fraction(1, scale // 100))
    assert e.quotients == (2,) * 40


def test_expand_rejects_outside_unit_interval():
    with pytest.raises(NotInUnitInterval):
        cf.expand(Fraction(3, 2), 5)
    with pytest.raises(NotInUnitInterval):
        cf.expand(Fraction(1, 2), 5, radius=Fraction(2, 3))


def test_expand_ambiguous_quotient_signals_index():
    # enclosure straddling 1/2 cannot decide a_1
    with pytest.raises(AmbiguousQuotient) as exc:
        cf.expand(Fraction(1, 2), 3, radius=Fraction(1, 100))
    assert exc.value.index == 1


def test_expand_convergent_error_bound():
    val, rad = golden_fraction(60)
    e = cf.expand(val, 30, rad)
    cs = e.convergents(21)
    p, q = cs[19].p, cs[19].q
    q_next = cs[20].q
    assert abs(val - Fraction(p, q)) <= Fraction(1, q * q_next)


# -- convergents ------------------------------------------------------------------


def test_convergents_fibonacci(golden):
    qs = [golden.convergent(k).q for k in range(0, 7)]
    assert qs == [1, 1, 2, 3, 5, 8, 13]


def test_convergents_seeds_and_223():
    c = cf.ContinuedFraction((2, 2, 3)).convergent(3)
    assert (c.p, c.q) == (7, 17)
    c1 = cf.ContinuedFraction((5,)).convergent(1)
    assert (c1.p, c1.q) == (1, 5)


def test_convergent_determinant_identity_random():
    rng = random.Random(11)
    for _ in range(200):
        n = rng.randint(1, 50)
        quotients = [rng.randint(1, 12) for _ in range(n)]
        e = cf.ContinuedFraction(quotients)
        cs = e.convergents(n)
        ps = [0] + [c.p for c in cs]
        qs = [1] + [c.q for c in cs]
        # p_{k-1} q_k - p_k q_{k-1} = (-1)^k with these seeds, exactly
        for k in range(1, n + 1):
            assert ps[k - 1] * qs[k] - ps[k] * qs[k - 1] == (-1) ** k
        for c in cs:
            assert math.gcd(c.p, c.q) == 1


def test_convergents_require_available_quotients():
    with pytest.raises(InsufficientStages):
        cf.ContinuedFraction((1, 2)).convergents(5)


# -- beta estimate ----------------------------------------------------------------


def test_beta_fibonacci_value(golden):
    est = cf.beta_estimate(golden, 20, depth=30)
    # oracle: exact Fibonacci denominators, q_k = F_{k+1}
    fib = [1, 1]
    while len(fib) < 40:
        fib.append(fib[-1] + fib[-2])
    expected = max(math.log(fib[k + 1]) / fib[k] for k in range(20, 30))
    assert est.value == pytest.approx(expected, rel=1e-12)
    assert est.value == pytest.approx(8.937e-4, rel=1e-3)
    assert est.rule_limit == 0.0


def test_beta_antitone_in_stage(golden):
    values = [cf.beta_estimate(golden, m, depth=40).value for m in (5, 10, 20, 30)]
    assert all(a >= b for a, b in zip(values, values[1:]))


def test_beta_bounded_quotients_tend_to_zero():
    e = cf.ContinuedFraction((), cf.TailRule("periodic", (3, 1, 2)))
    assert cf.beta_estimate(e, 25, depth=40).value < 1e-4


def test_beta_insufficient_stages(golden):
    with pytest.raises(InsufficientStages):
        cf.beta_estimate(cf.ContinuedFraction((1, 1, 1)), 5)


# -- torus distance ----------------------------------------------------------------


def test_torus_distance_golden_q3(golden):
    td = cf.torus_distance(3, golden)
    val, _ = golden_fraction(40)
    direct = min((3 * val) % 1, 1 - (3 * val) % 1)
    assert td.lo <= direct <= td.hi
    assert 0.1 <= td.value <= 0.2  # the sandwich window [1/(2 q_4), 1/q_4]


def test_torus_distance_k1(golden):
    td = cf.torus_distance(1, golden, depth=44, rel_tol=Fraction(1, 10**13))
    val, _ = golden_fraction(40)
    assert abs(td.value - min(val, 1 - val)) < 1e-12


def test_torus_distance_sandwich(golden):
    for n in range(2, 12):
        q_n = golden.convergent(n).q
        q_next = golden.convergent(n + 1).q
        td = cf.torus_distance(q_n, golden)
        assert Fraction(1, 2 * q_next) <= td.lo
        assert td.hi <= Fraction(1, q_next)


def test_torus_distance_rational_exact():
    e = cf.ContinuedFraction((2, 2, 3))  # 7/17
    td = cf.torus_distance(5, e)
    assert td.lo == td.hi == min(Fraction(35, 17) % 1, 1 - Fraction(35, 17) % 1)


def test_eventually_one_lower_bound():
    # prefix [2, 2] then ones: ||k alpha|| >= 1/(4|k|) from q_{p-1} on
    e = cf.ContinuedFraction((2, 2), cf.TAIL_ONES)
    q_p1 = e.convergent(1).q
    for k in range(q_p1, 60):
        td = cf.torus_distance(k, e)
        assert td.lo >= Fraction(1, 4 * k)


# -- expansion metric ----------------------------------------------------------------


def test_dh_basic(golden):
    other = cf.ContinuedFraction((1, 1, 2), cf.TAIL_ONES)
    r = cf.dh_metric(golden, other)
    assert r.value == Fraction(1, 4) and r.first_diff_index == 3


def test_dh_upper_bound(golden):
    r = cf.dh_metric(golden, cf.golden_mean(), depth=25)
    assert r.is_upper_bound and r.value == Fraction(1, 26)


def test_dh_ultrametric():
    rng = random.Random(5)
    for _ in range(60):
        seqs = [
            cf.ContinuedFraction(tuple(rng.randint(1, 3) for _ in range(12)), cf.TAIL_ONES)
            for _ in range(3)
        ]
        d = lambda x, y: cf.dh_metric(x, y, depth=60).value
        dab, dbc, dac = d(seqs[0], seqs[1]), d(seqs[1], seqs[2]), d(seqs[0], seqs[2])
        assert dac <= max(dab, dbc)
        assert dab == d(seqs[1], seqs[0])


def test_dh_value_gap_bound(golden):
    # first differing index n implies |alpha - alpha'| < 1/q_{n-1}(alpha)^2
    other = cf.ContinuedFraction((1, 1, 1, 1, 1, 7), cf.TAIL_ONES)
    r = cf.dh_metric(golden, other)
    n = r.first_diff_index
    q_prev = golden.convergent(n - 1).q
    lo1, hi1 = golden.value_bounds(30)
    lo2, hi2 = other.value_bounds(30)
    assert max(abs(hi1 - lo2), abs(hi2 - lo1)) < Fraction(1, q_prev**2)


# -- Diophantine phases ----------------------------------------------------------------


def test_dc_phase_zero_fails_at_zero(golden):
    cert = cf.dc_phase_check(0.0, golden, Fraction(1, 20), 2, 10)
    assert not cert.passed and cert.witness_m == 0
    assert cert.verdict == "fail-with-witness"


def test_dc_phase_half_alpha_fails_at_one(golden):
    val, _ = golden_fraction(50)
    cert = cf.dc_phase_check(val / 2, golden, Fraction(1, 20), 2, 10)
    assert not cert.passed and cert.witness_m == 1


def test_dc_phase_good_phase_passes(golden):
    cert = cf.dc_phase_check(Fraction(1, 5), golden, Fraction(1, 20), 2, 10**4)
    assert cert.passed and cert.verdict == "pass-up-to-cutoff"


def test_dc_phase_witness_reproducible(golden):
    c1 = cf.dc_phase_check(0.125, golden, Fraction(1, 4), 2, 100)
    c2 = cf.dc_phase_check(0.125, golden, Fraction(1, 4), 2, 100)
    assert (c1.passed, c1.witness_m) == (c2.passed, c2.witness_m)


# -- serialization -------------------------------------------------------------------


def test_finite_expansion_evaluates_exactly():
    e = cf.ContinuedFraction((2, 2, 3))
    lo, hi = e.value_bounds(3)
    assert lo == hi == Fraction(7, 17)  # zero-radius rational evaluation


def test_cf_json_roundtrip(golden):
    for e in (golden, cf.ContinuedFraction((2, 2, 3)),
              cf.ContinuedFraction((10**30, 2), cf.TailRule("periodic", (1, 5)))):
        assert cf.ContinuedFraction.loads(e.dumps()) == e
        assert all(isinstance(x, str) for x in e.to_json()["prefix"])
