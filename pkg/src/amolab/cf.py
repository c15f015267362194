"""Exact continued-fraction arithmetic.

Expansions are stored as an explicit quotient prefix plus an optional tail
rule, so rule-generated frequencies (all ones, periodic blocks) can be read
to any depth without materializing them.  All certified quantities (torus
distances, convergent enclosures, phase conditions) are computed in exact
rational arithmetic on big integers; floats only appear in reported values.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import mpmath

from .errors import (
    AmbiguousQuotient,
    InsufficientStages,
    NotInUnitInterval,
    PrecisionExhausted,
)

__all__ = [
    "TailRule",
    "ContinuedFraction",
    "Convergent",
    "BetaEstimate",
    "DiophantinePhaseCertificate",
    "DhResult",
    "TorusDistance",
    "expand",
    "convergents",
    "beta_estimate",
    "torus_distance",
    "dh_metric",
    "dc_phase_check",
    "golden_mean",
    "as_fraction",
]


@dataclass(frozen=True)
class TailRule:
    """Rule generating quotients past the explicit prefix.

    kind "constant": every tail quotient equals ``values[0]``.
    kind "periodic": the tail cycles through ``values``.
    """

    kind: str
    values: tuple[int, ...] = (1,)

    def __post_init__(self):
        if self.kind not in ("constant", "periodic"):
            raise ValueError(f"unknown tail rule kind {self.kind!r}")
        if not self.values or any(v < 1 for v in self.values):
            raise ValueError("tail quotients must be positive")

    def quotient(self, offset):
        """Quotient at 0-based offset past the prefix."""
        if self.kind == "constant":
            return self.values[0]
        return self.values[offset % len(self.values)]


TAIL_ONES = TailRule("constant", (1,))


@dataclass(frozen=True)
class Convergent:
    k: int
    p: int
    q: int

    @property
    def value(self):
        return Fraction(self.p, self.q)


class ContinuedFraction:
    """A continued fraction [a_1, a_2, ...] of a real in (0, 1).

    ``quotients`` is the explicit prefix; ``tail`` optionally generates the
    rest.  Without a tail the expansion is finite (a rational number).
    """

    __slots__ = ("quotients", "tail")

    def __init__(self, quotients: Sequence[int] = (), tail: TailRule | None = None):
        qs = tuple(int(a) for a in quotients)
        if any(a < 1 for a in qs):
            raise ValueError("every quotient must be a positive integer")
        self.quotients = qs
        self.tail = tail

    # -- basic access ------------------------------------------------------

    @property
    def prefix_len(self):
        return len(self.quotients)

    @property
    def is_finite(self):
        return self.tail is None

    def available(self, k):
        """True when quotient a_k (1-based) can be produced."""
        return k <= len(self.quotients) or self.tail is not None

    def quotient(self, k):
        """Quotient a_k, 1-based."""
        if k < 1:
            raise IndexError("quotient indices are 1-based")
        if k <= len(self.quotients):
            return self.quotients[k - 1]
        if self.tail is None:
            raise InsufficientStages(f"finite expansion has {len(self.quotients)} quotients")
        return self.tail.quotient(k - 1 - len(self.quotients))

    def quotients_upto(self, n):
        return [self.quotient(k) for k in range(1, n + 1)]

    def depth_limit(self, requested):
        """Usable depth: min(requested, prefix length) for finite expansions."""
        if self.tail is not None:
            return requested
        return min(requested, len(self.quotients))

    # -- convergents and values --------------------------------------------

    def convergents(self, n):
        """Convergents 1..n with seeds p0=0, p1=1, q0=1, q1=a_1."""
        if n < 1:
            return []
        if not self.available(n):
            raise InsufficientStages(f"only {len(self.quotients)} quotients available")
        out = []
        p_prev, p = 0, 1
        q_prev, q = 1, self.quotient(1)
        out.append(Convergent(1, p, q))
        for k in range(2, n + 1):
            a = self.quotient(k)
            p, p_prev = a * p + p_prev, p
            q, q_prev = a * q + q_prev, q
            out.append(Convergent(k, p, q))
        return out

    def convergent(self, k):
        if k == 0:
            return Convergent(0, 0, 1)
        return self.convergents(k)[-1]

    def value_bounds(self, depth):
        """Exact enclosure (lo, hi) of the value from depth convergents.

        For a finite expansion read to the end this is a zero-width pair.
        Consecutive convergents bracket the value for any valid tail.
        """
        depth = self.depth_limit(depth)
        if depth < 1:
            raise PrecisionExhausted("need at least one quotient")
        if self.is_finite and depth == len(self.quotients):
            v = self.convergent(depth).value
            return v, v
        if self.is_finite and depth + 1 > len(self.quotients):
            depth = len(self.quotients) - 1
        cs = self.convergents(depth + 1)
        a = cs[depth - 1].value
        b = cs[depth].value
        return (a, b) if a <= b else (b, a)

    def value(self, depth=60):
        """Float value from the midpoint of the depth-enclosure."""
        lo, hi = self.value_bounds(depth)
        return float((lo + hi) / 2)

    # -- serialization -------------------------------------------------------

    def to_json(self):
        tail = None
        if self.tail is not None:
            tail = {"kind": self.tail.kind, "params": {"values": [str(v) for v in self.tail.values]}}
        return {"prefix": [str(a) for a in self.quotients], "tail_rule": tail}

    @classmethod
    def from_json(cls, obj):
        tail = None
        if obj.get("tail_rule"):
            tr = obj["tail_rule"]
            tail = TailRule(tr["kind"], tuple(int(v) for v in tr["params"]["values"]))
        return cls(tuple(int(a) for a in obj["prefix"]), tail)

    def dumps(self):
        return json.dumps(self.to_json(), sort_keys=True)

    @classmethod
    def loads(cls, text):
        return cls.from_json(json.loads(text))

    def __repr__(self):
        head = ",".join(str(a) for a in self.quotients[:8])
        more = ",..." if len(self.quotients) > 8 else ""
        tail = f";{self.tail.kind}{list(self.tail.values)}" if self.tail else ""
        return f"ContinuedFraction([{head}{more}]{tail})"

    def __eq__(self, other):
        if not isinstance(other, ContinuedFraction):
            return NotImplemented
        return self.quotients == other.quotients and self.tail == other.tail

    def __hash__(self):
        return hash((self.quotients, self.tail))


def golden_mean():
    """(sqrt(5)-1)/2 = [1, 1, 1, ...]."""
    return ContinuedFraction((), TAIL_ONES)


def as_fraction(x, max_depth=200):
    """Exact Fraction from assorted inputs (floats convert bit-exactly)."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x) if "/" in x else Fraction(*_decimal_to_pair(x))
    if isinstance(x, ContinuedFraction):
        lo, hi = x.value_bounds(x.depth_limit(max_depth))
        return (lo + hi) / 2
    raise TypeError(f"cannot convert {type(x).__name__} to Fraction")


def _decimal_to_pair(text):
    from decimal import Decimal

    d = Decimal(text)
    sign, digits, exp = d.as_tuple()
    num = int("".join(map(str, digits))) * (-1 if sign else 1)
    if exp >= 0:
        return num * 10**exp, 1
    return num, 10 ** (-exp)


# -- expansion ---------------------------------------------------------------


def expand(x, n_terms, radius=0):
    """Quotients of x in (0,1) by the certified Gauss map.

    ``x`` may be a Fraction, float, or decimal string; ``radius`` is an error
    radius around it.  Each quotient extraction checks that the whole
    enclosure yields the same integer part, otherwise AmbiguousQuotient asks
    the caller for a tighter input.  An exact rational input terminates in a
    finite expansion.
    """
    centre = as_fraction(x)
    rad = as_fraction(radius)
    if rad < 0:
        raise ValueError("radius must be nonnegative")
    lo, hi = centre - rad, centre + rad
    if lo <= 0 or hi >= 1:
        raise NotInUnitInterval(f"need 0 < x < 1, got enclosure [{float(lo)}, {float(hi)}]")

    if rad == 0:
        return _expand_exact(centre, n_terms)

    quotients = []
    for k in range(1, n_terms + 1):
        inv_lo, inv_hi = 1 / hi, 1 / lo
        a_min, a_max = inv_lo.__floor__(), inv_hi.__floor__()
        if a_max != a_min:
            raise AmbiguousQuotient(k, float(lo), float(hi))
        a = int(a_min)
        quotients.append(a)
        lo, hi = inv_lo - a, inv_hi - a
        if lo <= 0 and k < n_terms:
            # the enclosure now touches 0: the next quotient is undetermined
            raise AmbiguousQuotient(k + 1, float(lo), float(hi))
    return ContinuedFraction(tuple(quotients), None)


def _expand_exact(x: Fraction, n_terms):
    """Euclidean expansion of an exact rational in (0,1)."""
    quotients = []
    num, den = x.numerator, x.denominator
    # x = num/den; quotient = floor(den/num), remainder continues
    for _ in range(n_terms):
        if num == 0:
            break
        a, r = divmod(den, num)
        quotients.append(a)
        den, num = num, r
    return ContinuedFraction(tuple(quotients), None)


def convergents(cf: ContinuedFraction, n):
    """Module-level alias for ContinuedFraction.convergents."""
    return cf.convergents(n)


# -- Liouville exponent -------------------------------------------------------


@dataclass(frozen=True)
class BetaEstimate:
    """Finite-stage upper envelope of ln(q_{k+1})/q_k."""

    stage: int
    value: float
    window: tuple[float, ...]
    rule_limit: float | None

    def __iter__(self):
        yield from (self.stage, self.value, self.window, self.rule_limit)


def _log_big(n):
    """Natural log of a (possibly huge) positive integer."""
    if n.bit_length() <= 900:
        return math.log(n)
    with mpmath.workdps(30):
        return float(mpmath.log(n))


def _log_ratio(q_next, q):
    """ln(q_next)/q for big integers, safe against float overflow."""
    if q.bit_length() <= 900:
        return _log_big(q_next) / q
    with mpmath.workdps(30):
        return float(mpmath.log(q_next) / q)


def beta_estimate(cf: ContinuedFraction, stage, depth=None):
    """sup over available k >= stage of ln(q_{k+1})/q_k.

    ``depth`` caps the horizon for rule-generated tails (default stage + 40).
    Constant or periodic tails have bounded quotients, so the analytic rule
    limit is 0.  FrequencySpec inputs report their construction target; see
    freq.beta_estimate_for_spec.
    """
    if depth is None:
        depth = stage + 40
    depth = cf.depth_limit(depth)
    if depth < stage + 2:
        raise InsufficientStages(f"need at least {stage + 2} quotients, have {depth}")
    cs = cf.convergents(depth)
    qs = [1] + [c.q for c in cs]  # qs[k] = q_k with q_0 = 1
    window = [_log_ratio(qs[k + 1], qs[k]) for k in range(stage, depth)]
    rule_limit = 0.0 if cf.tail is not None else None
    return BetaEstimate(stage, max(window), tuple(window), rule_limit)


# -- torus distances ----------------------------------------------------------


@dataclass(frozen=True)
class TorusDistance:
    """Certified ||k alpha|| with exact rational bounds."""

    k: int
    lo: Fraction
    hi: Fraction

    @property
    def value(self):
        return float((self.lo + self.hi) / 2)

    @property
    def width(self):
        return self.hi - self.lo


def _frac_mod1(x: Fraction):
    return x - x.__floor__()


def _dist_interval(t_lo: Fraction, t_hi: Fraction):
    """Interval of ||t|| for t in [t_lo, t_hi] inside one period."""
    half = Fraction(1, 2)
    if t_hi <= half:
        return t_lo, t_hi
    if t_lo >= half:
        return 1 - t_hi, 1 - t_lo
    return min(t_lo, 1 - t_hi), half


def torus_distance(k, cf: ContinuedFraction, depth=30, rel_tol=Fraction(1, 1 << 20)):
    """Certified torus distance ||k alpha|| from convergent enclosures.

    Deepens the expansion until the exact interval is resolved to rel_tol
    (or exactly, for rational expansions).  PrecisionExhausted signals that
    the available quotients cannot certify the value.
    """
    k = int(k)
    if k == 0:
        return TorusDistance(0, Fraction(0), Fraction(0))
    k = abs(k)  # ||k a|| = ||-k a||
    if cf.is_finite:
        v = cf.convergent(len(cf.quotients)).value
        t = _frac_mod1(k * v)
        d = min(t, 1 - t)
        return TorusDistance(k, d, d)
    for d in range(min(depth, 8), depth + 1, 2):
        lo, hi = cf.value_bounds(d)
        t_lo, t_hi = k * lo, k * hi
        f = t_lo.__floor__()
        if t_hi.__floor__() != f:
            continue  # straddles an integer, deepen
        d_lo, d_hi = _dist_interval(t_lo - f, t_hi - f)
        if d_lo > 0 and (d_hi - d_lo) <= rel_tol * d_lo:
            return TorusDistance(k, d_lo, d_hi)
    raise PrecisionExhausted(f"cannot certify ||{k} alpha|| within depth {depth}")


# -- metric on expansions -------------------------------------------------------


@dataclass(frozen=True)
class DhResult:
    """Distance 1/(n+1) from the first differing index n."""

    value: Fraction
    first_diff_index: int | None
    is_upper_bound: bool


def dh_metric(a: ContinuedFraction, b: ContinuedFraction, depth=200):
    """First-differing-index metric between two expansions.

    Returns the exact value 1/(n+1) when the expansions differ at index
    n <= depth.  When they agree through the whole budget the result is the
    upper bound 1/(depth+1) with is_upper_bound set.
    """
    limit = min(a.depth_limit(depth), b.depth_limit(depth))
    for k in range(1, limit + 1):
        if a.quotient(k) != b.quotient(k):
            return DhResult(Fraction(1, k + 1), k, False)
    if limit < depth and (a.is_finite or b.is_finite):
        # one expansion ended; a finite expansion differs from any continuation
        k = limit + 1
        if a.is_finite != b.is_finite or a.prefix_len != b.prefix_len:
            return DhResult(Fraction(1, k + 1), k, False)
    return DhResult(Fraction(1, depth + 1), None, True)


# -- Diophantine phases ----------------------------------------------------------


@dataclass(frozen=True)
class DiophantinePhaseCertificate:
    phi: Fraction
    gamma: Fraction
    tau: float
    cutoff: int
    passed: bool
    witness_m: int | None
    witness_distance: float | None

    @property
    def verdict(self):
        return "pass-up-to-cutoff" if self.passed else "fail-with-witness"


def dc_phase_check(phi, cf: ContinuedFraction, gamma, tau, cutoff, depth=60):
    """Check ||2 phi - m alpha|| >= gamma/(|m|+1)^tau for all |m| <= cutoff.

    phi and gamma enter as exact rationals (floats convert bit-exactly), so a
    failure witness is reproducible.  The frequency is read from a convergent
    enclosure deep enough to separate every distance from its bound.
    """
    phi = as_fraction(phi)
    gamma = as_fraction(gamma)
    tau = float(tau)
    if gamma <= 0 or tau <= 1:
        raise ValueError("need gamma > 0 and tau > 1")
    two_phi = _frac_mod1(2 * phi)

    depth_now = min(depth, 12) if not cf.is_finite else depth
    while True:
        lo, hi = cf.value_bounds(cf.depth_limit(depth_now))
        need_deepening = False
        for m in range(-cutoff, cutoff + 1):
            t_lo, t_hi = sorted((two_phi - m * lo, two_phi - m * hi))
            f = t_lo.__floor__()
            if t_hi.__floor__() != f:
                # the shifted interval straddles an integer: distance can be 0
                d_lo = Fraction(0)
                d_hi = max(t_hi - t_hi.__floor__(), (f + 1) - t_lo)
            else:
                d_lo, d_hi = _dist_interval(t_lo - f, t_hi - f)
            b_under, b_over = _power_bound(gamma, abs(m) + 1, tau)
            if d_hi < b_under:
                return DiophantinePhaseCertificate(
                    phi, gamma, tau, cutoff, False, m, float(d_hi)
                )
            if d_lo < b_over:
                need_deepening = True
                break
        if not need_deepening:
            return DiophantinePhaseCertificate(phi, gamma, tau, cutoff, True, None, None)
        if cf.is_finite or depth_now >= 8 * depth:
            raise PrecisionExhausted("cannot separate phase distances from bounds")
        depth_now *= 2


def _power_bound(gamma: Fraction, base: int, tau: float):
    """Rational (under, over) estimates of gamma / base^tau."""
    if float(tau).is_integer():
        v = gamma / Fraction(base) ** int(tau)
        return v, v
    with mpmath.workdps(40):
        v = mpmath.mpf(gamma.numerator) / gamma.denominator / mpmath.power(base, tau)
        f = Fraction(*float(v).as_integer_ratio())
    margin = Fraction(1, 1 << 40)
    return f * (1 - margin), f * (1 + margin)
