"""Frequency constructions: schedules, distance conditions, serialization."""

import math
from fractions import Fraction

import mpmath
import pytest

from amolab import cf, freq
from amolab.errors import ConfigInvalid, ScheduleOverflow, StageBudgetExceeded


def _round_exp_oracle(x_frac, dps_extra=30):
    """Independent nearest-integer of e^x for exact rational x."""
    with mpmath.workdps(int(float(x_frac) / math.log(10)) + dps_extra):
        m = mpmath.exp(mpmath.mpf(x_frac.numerator) / x_frac.denominator)
        return max(1, int(mpmath.floor(m + mpmath.mpf(1) / 2)))


def test_construct_prime_worked_example(golden):
    spec = freq.construct_prime(golden, Fraction(3, 10), 1, 4, stages=2)
    first = spec.entries[0]
    assert first.index == 4
    assert first.q_prev == 3
    assert first.quotient == 20  # round(e^3)
    assert first.q_prev_base == 3  # base and self-consistent readings agree here
    assert spec.quotient(4) == 20
    assert spec.quotient(3) == 1 and spec.quotient(5) == 1


def test_construct_prime_prefix_and_dh(golden):
    base = cf.ContinuedFraction((3, 4, 5, 6, 7, 8), cf.TAIL_ONES)
    K = 5
    spec = freq.construct_prime(base, Fraction(1, 2), Fraction(1, 2), K, stages=1)
    for n in range(1, K - 1):
        assert spec.quotient(n) == base.quotient(n)
    mat, _ = spec.materialize(8)
    d = cf.dh_metric(base, mat, depth=8)
    assert d.value <= Fraction(1, K)


def test_construct_prime_preconditions(golden):
    with pytest.raises(ConfigInvalid):
        freq.construct_prime(golden, Fraction(1, 4), 1, 4)  # K <= 1/eps
    with pytest.raises(ConfigInvalid):
        freq.construct_prime(golden, Fraction(1, 2), 0, 4)  # beta' <= 0


def test_construct_prime_schedule_vs_oracle(golden):
    """Entry-for-entry match with a from-scratch re-derivation, 2 stages."""
    beta = Fraction(2, 5)
    K = 10
    spec = freq.construct_prime(golden, Fraction(1, 4), beta, K, stages=2)
    # oracle walk with plain integer recursion; entries past a few thousand
    # digits stay symbolic (only their (beta, q_prev) data is checked)
    q_pp, q_p = 0, 1
    quotients = {}
    for n in range(1, 41):
        if n < K - 1:
            a = 1
        elif n in (K, 4 * K):
            x = beta * q_p
            a = _round_exp_oracle(x) if x < 3000 else None
            quotients[n] = (a, q_p)
            a = a if a is not None else 1  # placeholder; no exact q needed past here
        else:
            a = 1
        q_pp, q_p = q_p, a * q_p + q_pp
    for e in spec.entries:
        a_expect, q_expect = quotients[e.index]
        assert e.q_prev == q_expect
        assert e.symbolic == (a_expect is None)
        if not e.symbolic:
            assert e.quotient == a_expect


def test_rounding_deviation_bound(golden):
    # |ln(round(e^{beta q}))/q - beta| <= 1/q at every exact insertion
    spec = freq.construct_prime(golden, Fraction(3, 10), Fraction(3, 4), 4, stages=2)
    for e in spec.entries:
        if e.symbolic:
            continue
        with mpmath.workdps(len(str(e.quotient)) + 20):
            dev = abs(float(mpmath.log(e.quotient) / e.q_prev) - e.beta)
        assert dev <= 1.0 / e.q_prev


def test_sc_ladder_worked_example(golden):
    # lam = e, stages at 4 and 9: a_4 = round(e^{1.5 q_3}) = 90
    lam = Fraction(math.e)
    spec = freq.sc_ladder(golden, lam, Fraction(1, 2), [4, 9], last_stage_harmonics=2)
    e1, e2 = spec.entries[0], spec.entries[1]
    assert (e1.index, e1.quotient) == (4, 90)
    assert e2.index == 9 and e2.q_prev == 1369
    # independent re-derivation of a_9 = round((ln lam + 1/4) * q_8)
    beta2 = spec._insertions[9]
    with mpmath.workdps(800):
        lm = mpmath.mpf(lam.numerator) / lam.denominator
        a9 = int(mpmath.floor(mpmath.exp((mpmath.log(lm) + mpmath.mpf(1) / 4) * 1369) + mpmath.mpf(1) / 2))
    assert e2.quotient == a9
    # consecutive-stage distance < eps / 2^k recorded exactly
    dh = spec.extras["consecutive_dh"]
    assert Fraction(dh[0]["dh"]) < Fraction(dh[0]["bound"])


def test_sc_ladder_stage_betas(golden):
    lam = Fraction(5, 2)
    spec = freq.sc_ladder(golden, lam, Fraction(1, 2), [4, 9, 20], last_stage_harmonics=1)
    lnlam = math.log(2.5)
    expect = [lnlam + 0.5, lnlam + 0.25, lnlam + 0.125]
    got = [e.beta for e in spec.entries[:3]]
    assert got == pytest.approx(expect, abs=1e-12)
    assert spec.rule_limit_beta == pytest.approx(lnlam, abs=1e-12)
    assert spec.extras["finite_stage_beta"] == pytest.approx(lnlam + 0.125, abs=1e-12)


def test_sc_ladder_validations(golden):
    lam = Fraction(2)
    with pytest.raises(StageBudgetExceeded):
        freq.sc_ladder(golden, lam, Fraction(1, 2), [4, 8])  # not more than double
    with pytest.raises(StageBudgetExceeded):
        freq.sc_ladder(golden, lam, Fraction(1, 2), [4, 18])  # overwritten-tail gap
    with pytest.raises(StageBudgetExceeded):
        freq.sc_ladder(golden, lam, Fraction(1, 100), [4, 9])  # eps too small
    with pytest.raises(ConfigInvalid):
        freq.sc_ladder(golden, Fraction(1, 2), Fraction(1, 2), [4, 9])  # lam <= 1


def test_pp_ladder_worked_example(golden):
    # beta = 1, delta0 = 1/5: stage-1 exponent 0.6 q_4 = 3 -> a_5 = 20
    lam = Fraction(math.e)
    spec = freq.pp_ladder(golden, lam, Fraction(1, 5), [3, 5, 8])
    e1, e2 = spec.entries
    assert (e1.index, e1.q_prev, e1.quotient) == (5, 5, 20)
    assert e1.beta == pytest.approx(1 - 2 * 0.2, abs=1e-12)
    assert e2.beta == pytest.approx(1 - 0.2, abs=1e-12)
    # filler is all ones between insertions
    assert [spec.quotient(n) for n in (4, 6, 7, 9, 10)] == [1, 1, 1, 1, 1]
    book = spec.extras["stage_bookkeeping"]
    assert [b["n_j"] for b in book] == [5, 8]


def test_pp_ladder_schedule_vs_oracle(golden):
    lam = Fraction(math.e)
    delta0 = Fraction(1, 5)
    spec = freq.pp_ladder(golden, lam, delta0, [3, 5, 8])
    q_pp, q_p = 0, 1
    with mpmath.workdps(300):
        lnlam = mpmath.log(mpmath.mpf(lam.numerator) / lam.denominator)
        for n in range(1, 9):
            if n <= 3:
                a = 1  # golden prefix
            elif n == 5:
                x = (lnlam - 2 * mpmath.mpf(delta0.numerator) / delta0.denominator) * q_p
                a = int(mpmath.floor(mpmath.exp(x) + mpmath.mpf(1) / 2))
                assert a == spec.entries[0].quotient
            elif n == 8:
                x = (lnlam - mpmath.mpf(delta0.numerator) / delta0.denominator) * q_p
                a = int(mpmath.floor(mpmath.exp(x) + mpmath.mpf(1) / 2))
                assert a == spec.entries[1].quotient
            else:
                a = 1
            q_pp, q_p = q_p, a * q_p + q_pp


def test_pp_ladder_validations(golden):
    with pytest.raises(ConfigInvalid):
        freq.pp_ladder(golden, Fraction(math.e), Fraction(3, 10), [3, 5])  # 4 d0 > beta
    with pytest.raises(ConfigInvalid):
        freq.pp_ladder(golden, Fraction(math.e), Fraction(1, 5), [5, 3])  # not increasing


def test_materialize_enclosures(golden):
    spec = freq.construct_prime(golden, Fraction(3, 10), 1, 4, stages=2)
    mat, (lo, hi) = spec.materialize(12)
    assert mat.quotients[3] == 20
    # enclosure brackets any continuation and is narrower than 1/q^2
    q12 = mat.convergent(12).q
    assert hi - lo <= Fraction(1, q12 * q12) * 4
    # tightened enclosure on request
    _, (lo2, hi2) = spec.materialize(12, precision=12)
    assert hi2 - lo2 <= Fraction(1, 10**12)


def test_materialize_overflow(golden):
    spec = freq.construct_prime(golden, Fraction(3, 10), 1, 4, stages=3,
                                digit_budget=100)
    with pytest.raises(ScheduleOverflow):
        spec.materialize(40)


def test_spec_beta_estimate_and_rule_limit(golden):
    spec = freq.construct_prime(golden, Fraction(3, 10), Fraction(1, 2), 4, stages=3)
    est = spec.beta_estimate(0)
    assert est.rule_limit == pytest.approx(0.5, abs=1e-12)
    # finite-stage values converge monotonically down toward the rule limit
    window = list(est.window)
    assert all(a >= b for a, b in zip(window, window[1:]))
    assert window[-1] == pytest.approx(0.5, rel=1e-2)


def test_symbolic_entries_carry_exact_exponent_data(golden):
    """Past the digit budget only (beta, q) data remains, with ratio = beta."""
    spec = freq.construct_prime(golden, Fraction(3, 10), Fraction(1, 2), 4, stages=3)
    symbolic = [e for e in spec.entries if e.symbolic]
    assert symbolic, "third stage should overflow the budget"
    for e in symbolic:
        assert e.quotient is None
        assert e.ratio == pytest.approx(0.5, rel=1e-9)
        with pytest.raises(ScheduleOverflow):
            spec.quotient(e.index)


def test_ladder_log_mode_survives_deep_stages(golden):
    """Stages beyond the float range keep building without exceptions."""
    lam = Fraction(3)
    spec = freq.sc_ladder(golden, lam, Fraction(1, 2), [4, 9, 20, 60],
                          last_stage_harmonics=2, digit_budget=500)
    stages = [e.stage for e in spec.entries]
    assert stages == sorted(stages)
    # once symbolic, every later entry is symbolic too
    flags = [e.symbolic for e in spec.entries]
    assert flags == sorted(flags)
    ratios = [e.ratio for e in spec.entries]
    assert all(r is not None and r > math.log(3) for r in ratios)


def test_spec_json_roundtrip(golden):
    lam = Fraction(math.e)
    for spec in (
        freq.construct_prime(golden, Fraction(3, 10), 1, 4, stages=2),
        freq.sc_ladder(golden, lam, Fraction(1, 2), [4, 9], last_stage_harmonics=2),
        freq.pp_ladder(golden, lam, Fraction(1, 5), [3, 5, 8]),
    ):
        back = freq.FrequencySpec.loads(spec.dumps())
        assert [e.index for e in back.entries] == [e.index for e in spec.entries]
        assert [e.quotient for e in back.entries] == [e.quotient for e in spec.entries]
        assert back.rule_limit_beta == spec.rule_limit_beta
        depth = spec.max_materializable_depth()
        assert [back.quotient(n) for n in range(1, depth)] == \
            [spec.quotient(n) for n in range(1, depth)]
