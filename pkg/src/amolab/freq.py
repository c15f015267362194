"""Rule-generated frequencies with scheduled huge quotients.

Three constructions produce expansions whose Liouville exponent is pinned by
inserting quotients of size round(e^(beta * q)) at scheduled indices, with
ones in between.  Quotients are exact big integers while they fit the digit
budget; beyond it an insertion is kept symbolically as its (beta, q) data,
and only logarithms participate downstream.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath

from .cf import ContinuedFraction, BetaEstimate, as_fraction, _log_big
from .errors import ConfigInvalid, PrecisionExhausted, ScheduleOverflow, StageBudgetExceeded

__all__ = [
    "BetaExpr",
    "ScheduleEntry",
    "FrequencySpec",
    "construct_prime",
    "sc_ladder",
    "pp_ladder",
    "materialize",
    "DEFAULT_DIGIT_BUDGET",
]

DEFAULT_DIGIT_BUDGET = 10**6
_LN10 = math.log(10)


@dataclass(frozen=True)
class BetaExpr:
    """Exponent coefficient beta = ln(lam_factor) + addend, exact pieces.

    ``lam_factor`` is None for a purely rational beta.  Keeping the exact
    description lets quotient rounding run at any precision.
    """

    lam_factor: Fraction | None
    addend: Fraction

    @property
    def value(self):
        base = 0.0 if self.lam_factor is None else math.log(self.lam_factor)
        return base + float(self.addend)

    def mp(self):
        """Current-precision mpmath value (call inside mpmath.workdps)."""
        add = mpmath.mpf(self.addend.numerator) / self.addend.denominator
        if self.lam_factor is None:
            return add
        lf = mpmath.mpf(self.lam_factor.numerator) / self.lam_factor.denominator
        return mpmath.log(lf) + add

    def to_json(self):
        return {
            "lam_factor": None if self.lam_factor is None else str(self.lam_factor),
            "addend": str(self.addend),
        }

    @classmethod
    def from_json(cls, obj):
        lf = obj["lam_factor"]
        return cls(None if lf is None else Fraction(lf), Fraction(obj["addend"]))


def _round_exp(beta: BetaExpr, q: int, digit_budget):
    """Nearest integer to e^(beta*q), or None when past the digit budget.

    Returns (quotient, log_quotient, digits_estimate).  The rounding is
    certified: precision grows until the value is safely away from a
    half-integer.
    """
    logq = _log_big(q)
    bval = beta.value
    if bval <= 0:
        raise ConfigInvalid("insertion exponent must be positive")
    # digits of e^(beta q) ~ beta*q/ln10; decide the budget without big math
    log_digits = math.log(bval) + logq - math.log(_LN10)
    if log_digits > math.log(digit_budget):
        log_quot = bval * math.exp(logq) if logq < 700 else None
        return None, log_quot, math.inf
    digits = bval * math.exp(logq) / _LN10
    dps = int(digits) + 30
    for _ in range(6):
        with mpmath.workdps(dps):
            x = beta.mp() * q
            m = mpmath.exp(x)
            n = int(mpmath.floor(m + mpmath.mpf(1) / 2))
            frac_gap = abs(m - n)  # distance to the rounding target
            # certified unless the value sits within the error bar of .5
            err = m * (abs(x) + 2) * mpmath.mpf(10) ** (12 - dps)
            if abs(frac_gap - mpmath.mpf(1) / 2) > err:
                n = max(1, n)
                return n, _log_big(n), digits
        dps += 40
    raise PrecisionExhausted(f"cannot certify rounding of e^(beta*{q})")


@dataclass(frozen=True)
class ScheduleEntry:
    """One scheduled insertion: a_index = round(e^(beta * q_prev))."""

    index: int
    beta: float
    beta_expr: BetaExpr
    q_prev: int | None          # q_{index-1} of the partially built expansion
    log_q_prev: float | None    # ln q_{index-1}; None once past float range
    quotient: int | None        # None when symbolic (past the digit budget)
    log_quotient: float | None  # ln a_index; None when past float range
    symbolic: bool
    ratio: float | None         # finite-stage ln(q_index)/q_{index-1}
    q_prev_base: int | None     # same-index denominator of the base expansion
    stage: int

    def to_json(self):
        return {
            "index": self.index,
            "beta": repr(self.beta),
            "beta_expr": self.beta_expr.to_json(),
            "q_as_decimal_string": None if self.q_prev is None else str(self.q_prev),
            "log_q_prev": None if self.log_q_prev is None else repr(self.log_q_prev),
            "rounded_quotient_or_symbolic": (
                "symbolic" if self.symbolic else str(self.quotient)
            ),
            "log_quotient": None if self.log_quotient is None else repr(self.log_quotient),
            "ratio": None if self.ratio is None else repr(self.ratio),
            "q_prev_base": None if self.q_prev_base is None else str(self.q_prev_base),
            "stage": self.stage,
        }

    @classmethod
    def from_json(cls, obj):
        sym = obj["rounded_quotient_or_symbolic"] == "symbolic"
        return cls(
            index=int(obj["index"]),
            beta=float(obj["beta"]),
            beta_expr=BetaExpr.from_json(obj["beta_expr"]),
            q_prev=None if obj["q_as_decimal_string"] is None else int(obj["q_as_decimal_string"]),
            log_q_prev=None if obj["log_q_prev"] is None else float(obj["log_q_prev"]),
            quotient=None if sym else int(obj["rounded_quotient_or_symbolic"]),
            log_quotient=None if obj["log_quotient"] is None else float(obj["log_quotient"]),
            symbolic=sym,
            ratio=None if obj["ratio"] is None else float(obj["ratio"]),
            q_prev_base=None if obj["q_prev_base"] is None else int(obj["q_prev_base"]),
            stage=int(obj["stage"]),
        )


class FrequencySpec:
    """A rule-generated continued fraction with scheduled insertions.

    Quotients: base expansion below ``base_cutoff``, the scheduled value at
    each insertion index, and 1 everywhere else.  ``entries`` carry the
    resolved insertions; indices past the resolved horizon raise
    ScheduleOverflow when touched.
    """

    def __init__(self, construction, base, base_cutoff, insertions, entries,
                 rule_limit_beta, stage_indices=(), eps=None,
                 digit_budget=DEFAULT_DIGIT_BUDGET, extras=None):
        self.construction = construction
        self.base = base
        self.base_cutoff = int(base_cutoff)
        self._insertions = dict(insertions)       # index -> BetaExpr (full rule)
        self.entries = tuple(entries)             # resolved ScheduleEntry list
        self._entry_map = {e.index: e for e in self.entries}
        self.rule_limit_beta = float(rule_limit_beta)
        self.stage_indices = tuple(int(n) for n in stage_indices)
        self.eps = None if eps is None else as_fraction(eps)
        self.digit_budget = int(digit_budget)
        self.extras = dict(extras or {})

    # -- spec fields required by consumers ----------------------------------

    @property
    def target_beta(self):
        return self.rule_limit_beta

    @property
    def stage_count(self):
        return len(self.stage_indices) if self.stage_indices else len(self.entries)

    @property
    def schedule(self):
        return self.entries

    def insertion_indices(self):
        return sorted(self._insertions)

    # -- quotient rule -------------------------------------------------------

    def quotient(self, n):
        if n < 1:
            raise IndexError("quotient indices are 1-based")
        if n < self.base_cutoff:
            return self.base.quotient(n)
        entry = self._entry_map.get(n)
        if entry is not None:
            if entry.symbolic:
                raise ScheduleOverflow(
                    f"a_{n} exceeds the {self.digit_budget}-digit budget"
                )
            return entry.quotient
        if n in self._insertions:
            raise ScheduleOverflow(f"insertion at index {n} was not resolved")
        return 1

    def max_materializable_depth(self, margin=6):
        """Largest depth with every quotient explicitly available."""
        blocked = [e.index for e in self.entries if e.symbolic]
        blocked += [n for n in self._insertions if n not in self._entry_map]
        resolved = [e.index for e in self.entries if not e.symbolic]
        if blocked:
            return min(blocked) - 1
        return (max(resolved) if resolved else self.base_cutoff) + margin

    def materialize(self, depth, precision=None):
        """Explicit truncation plus a certified enclosure of the value.

        ``precision`` (decimal digits) optionally extends the depth until the
        enclosure is at least that tight.  The enclosure brackets the true
        value of the full rule, not just the truncation.
        """
        prefix = [self.quotient(n) for n in range(1, depth + 1)]
        cf = ContinuedFraction(tuple(prefix), None)
        lo, hi = _prefix_bounds(prefix)
        if precision is not None:
            target = Fraction(1, 10**precision)
            d = depth
            while hi - lo > target:
                d += 1
                try:
                    prefix.append(self.quotient(d))
                except ScheduleOverflow:
                    raise ScheduleOverflow(
                        f"enclosure 10^-{precision} unreachable before a symbolic insertion"
                    )
                lo, hi = _prefix_bounds(prefix)
        return cf, (lo, hi)

    def value_bounds(self, depth):
        return _prefix_bounds([self.quotient(n) for n in range(1, depth + 1)])

    def beta_estimate(self, stage):
        """Finite-stage sup of ln(q_{k+1})/q_k plus the rule's analytic limit.

        The sup over a schedule is attained at insertion indices; between
        them the ratios decay like ln(q)/q.  Insertions below ``stage`` are
        excluded, matching the plain-expansion convention.
        """
        ratios = [e.ratio for e in self.entries if e.index > stage and e.ratio is not None]
        if not ratios:
            raise ScheduleOverflow(f"no resolved insertions past stage {stage}")
        window = tuple(ratios)
        return BetaEstimate(stage, max(window), window, self.rule_limit_beta)

    # -- serialization --------------------------------------------------------

    def to_json(self):
        return {
            "construction": self.construction,
            "base": self.base.to_json(),
            "base_cutoff": self.base_cutoff,
            "insertion_indices": sorted(self._insertions),
            "insertion_betas": {str(k): v.to_json() for k, v in self._insertions.items()},
            "schedule": [e.to_json() for e in self.entries],
            "rule_limit_beta": repr(self.rule_limit_beta),
            "stage_indices": list(self.stage_indices),
            "eps": None if self.eps is None else str(self.eps),
            "digit_budget": self.digit_budget,
            "extras": self.extras,
        }

    @classmethod
    def from_json(cls, obj):
        return cls(
            construction=obj["construction"],
            base=ContinuedFraction.from_json(obj["base"]),
            base_cutoff=obj["base_cutoff"],
            insertions={int(k): BetaExpr.from_json(v) for k, v in obj["insertion_betas"].items()},
            entries=[ScheduleEntry.from_json(e) for e in obj["schedule"]],
            rule_limit_beta=float(obj["rule_limit_beta"]),
            stage_indices=obj["stage_indices"],
            eps=obj["eps"],
            digit_budget=obj["digit_budget"],
            extras=obj.get("extras", {}),
        )

    def dumps(self):
        return json.dumps(self.to_json(), sort_keys=True)

    @classmethod
    def loads(cls, text):
        return cls.from_json(json.loads(text))


def _prefix_bounds(prefix):
    """Enclosure of any expansion starting with ``prefix``."""
    if len(prefix) < 2:
        a1 = prefix[0]
        return Fraction(1, a1 + 1), Fraction(1, a1)
    p_prev, p = 0, 1
    q_prev, q = 1, prefix[0]
    for a in prefix[1:]:
        p, p_prev = a * p + p_prev, p
        q, q_prev = a * q + q_prev, q
    x, y = Fraction(p_prev, q_prev), Fraction(p, q)
    return (x, y) if x <= y else (y, x)


def _resolve_entries(base, base_cutoff, insertions, digit_budget, stage_of):
    """Walk the quotient rule, resolving insertions with exact big-int q.

    Denominators follow q_n = a_n q_{n-1} + q_{n-2} with seeds (q_{-1}, q_0)
    = (0, 1).  Once a quotient passes the digit budget (or q itself grows
    past twice the budget) tracking switches to log scale and later entries
    become symbolic; past the float range even the logs are dropped.
    """
    entries = []
    horizon = max(insertions) if insertions else 0
    exact = True
    q_pp, q_p = 0, 1             # q_{n-2}, q_{n-1} as exact ints
    l_pp, l_p = None, 0.0        # their natural logs once exact tracking stops

    for n in range(1, horizon + 1):
        a = None          # int quotient when known
        la = None         # ln(quotient) when the int is unavailable
        if n < base_cutoff:
            a = base.quotient(n)
        elif n in insertions:
            bexpr = insertions[n]
            if exact:
                was_exact = True
                a, la, _digits = _round_exp(bexpr, q_p, digit_budget)
                q_prev_rec = q_p
                lq_prev_rec = _log_big(q_p)
                if a is None:
                    # insertion too large: freeze the exact state into logs
                    l_pp = _log_big(q_pp) if q_pp > 0 else None
                    l_p = lq_prev_rec
                    exact = False
            else:
                was_exact = False
                la = None
                if l_p is not None and l_p < 700:
                    la = bexpr.value * math.exp(l_p)
                q_prev_rec, lq_prev_rec = None, l_p
            if was_exact and a is not None:
                ratio = _ratio_of(a * q_prev_rec + q_pp, q_prev_rec)
            elif was_exact and q_prev_rec.bit_length() <= 900:
                ratio = bexpr.value + lq_prev_rec / q_prev_rec
            else:
                ratio = bexpr.value
            base_q = base.convergent(n - 1).q if base.available(n - 1) else None
            entries.append(ScheduleEntry(
                index=n, beta=bexpr.value, beta_expr=bexpr,
                q_prev=q_prev_rec, log_q_prev=lq_prev_rec,
                quotient=a, log_quotient=la if a is None else _log_big(a),
                symbolic=a is None, ratio=ratio,
                q_prev_base=base_q, stage=stage_of.get(n, 0),
            ))
        else:
            a = 1

        # advance the recursion
        if exact:
            q_pp, q_p = q_p, a * q_p + q_pp
            if q_p.bit_length() > int(6.65 * digit_budget):
                l_pp, l_p = _log_big(q_pp), _log_big(q_p)
                exact = False
        else:
            if l_p is None:
                continue  # everything downstream stays unrepresentable
            if a is not None:
                la = math.log(a)
            if la is None:
                l_pp, l_p = l_p, None
                continue
            corr = 0.0
            if l_pp is not None:
                gap = l_pp - la - l_p
                if gap < 0:
                    corr = math.log1p(math.exp(gap))
            new_l = la + l_p + corr
            l_pp, l_p = l_p, new_l if new_l < 1e308 else None
    return entries


def _ratio_of(q_next, q):
    if q.bit_length() <= 900:
        return _log_big(q_next) / q
    with mpmath.workdps(30):
        return float(mpmath.log(q_next) / q)


# -- constructions -------------------------------------------------------------


def construct_prime(base, eps, beta_prime, K, stages=3, digit_budget=DEFAULT_DIGIT_BUDGET):
    """Single-exponent construction: quotients from the base below K-1,
    round(e^(beta' * q_{k^2 K - 1})) at indices k^2 K, ones elsewhere.

    The pinned exponent makes the rule-limit Liouville exponent equal
    beta' while the expansion stays within 1/K of the base in the
    first-differing-index metric.  Denominators in the exponents come from
    the partially built expansion; the base's own denominator at the same
    index is recorded alongside.
    """
    eps = as_fraction(eps)
    bp = as_fraction(beta_prime)
    K = int(K)
    if K < 2 or Fraction(K) * eps <= 1:
        raise ConfigInvalid("need K > 1/eps and K >= 2")
    if bp <= 0:
        raise ConfigInvalid("beta' must be positive")
    bexpr = BetaExpr(None, bp)
    insertions = {k * k * K: bexpr for k in range(1, stages + 1)}
    stage_of = {k * k * K: k for k in range(1, stages + 1)}
    entries = _resolve_entries(base, K - 1, insertions, digit_budget, stage_of)
    return FrequencySpec(
        construction="lemma-construct",
        base=base,
        base_cutoff=K - 1,
        insertions=insertions,
        entries=entries,
        rule_limit_beta=float(bp),
        stage_indices=tuple(k * k * K for k in range(1, stages + 1)),
        eps=eps,
        digit_budget=digit_budget,
        extras={"K": K, "kind_note": "quotient indices k^2*K"},
    )


def sc_ladder(base, lam, eps, stage_indices, badness_stage_data=None,
              last_stage_harmonics=3, digit_budget=DEFAULT_DIGIT_BUDGET):
    """Inductive ladder for the singular-continuous side.

    Stage k inserts round(e^((ln lam + 2^-k) q_{N^k - 1})) at the caller's
    index N^k; each stage keeps the previous stage's quotients below
    N^k - 1 and pads with ones.  Later stages overwrite the earlier stages'
    tail insertions, so the finite truncation carries exactly one insertion
    per stage plus the last stage's j^2 N^s harmonics (which pin its own
    finite-stage exponent).  Validation enforces the index window
    2 N^k < N^{k+1} <= 4 N^k + 1 and N^k + 1 > 2^k / eps so the recorded
    distance conditions d(stage k, stage k+1) < eps/2^k hold exactly.
    """
    lam = as_fraction(lam)
    eps = as_fraction(eps)
    if lam <= 1:
        raise ConfigInvalid("need lam > 1")
    stage_indices = [int(n) for n in stage_indices]
    if not stage_indices:
        raise ConfigInvalid("need at least one stage index")
    for k, nk in enumerate(stage_indices, start=1):
        if Fraction(nk + 1) * eps <= 2**k:
            raise StageBudgetExceeded(
                f"stage {k} index {nk} too small for eps={eps} (need N^k+1 > 2^k/eps)"
            )
    for k in range(1, len(stage_indices)):
        lo, hi = stage_indices[k - 1], stage_indices[k]
        if hi <= 2 * lo:
            raise StageBudgetExceeded(f"stage indices must more than double: {lo} -> {hi}")
        if hi > 4 * lo + 1:
            raise StageBudgetExceeded(
                f"stage index {hi} > 4*{lo}+1 would leave an overwritten-tail gap"
            )

    s = len(stage_indices)
    betas = [BetaExpr(lam, Fraction(1, 2**k)) for k in range(1, s + 1)]
    insertions = {}
    stage_of = {}
    for k, nk in enumerate(stage_indices, start=1):
        insertions[nk] = betas[k - 1]
        stage_of[nk] = k
    for j in range(2, last_stage_harmonics + 1):
        idx = j * j * stage_indices[-1]
        insertions[idx] = betas[-1]
        stage_of[idx] = s
    entries = _resolve_entries(base, stage_indices[0] - 1, insertions, digit_budget, stage_of)

    # exact consecutive-stage distances from the rule structure: stages k and
    # k+1 agree below N^{k+1}-1 and first differ at the earliest insertion of
    # either stage at or past that index
    dh_list = []
    for k in range(1, s):
        nk, nk1 = stage_indices[k - 1], stage_indices[k]
        stage_k_tail = [j * j * nk for j in range(1, 40) if j * j * nk >= nk1 - 1]
        first = min(stage_k_tail + [nk1])
        dh_list.append({"stage": k, "first_diff_index": first, "dh": str(Fraction(1, first + 1)),
                        "bound": str(eps / 2**k)})

    return FrequencySpec(
        construction="sc-ladder",
        base=base,
        base_cutoff=stage_indices[0] - 1,
        insertions=insertions,
        entries=entries,
        rule_limit_beta=float(mpmath.log(mpmath.mpf(lam.numerator) / lam.denominator)),
        stage_indices=tuple(stage_indices),
        eps=eps,
        digit_budget=digit_budget,
        extras={
            "stage_betas": [repr(b.value) for b in betas],
            "consecutive_dh": dh_list,
            "badness_stage_data": [list(map(float, cn)) for cn in (badness_stage_data or [])],
            "finite_stage_beta": betas[-1].value,
        },
    )


def pp_ladder(base, lam, delta0, stage_indices, digit_budget=DEFAULT_DIGIT_BUDGET):
    """Inductive ladder for the pure-point side.

    ``stage_indices[0]`` truncates the base (ones afterwards); stage j >= 1
    inserts round(e^((beta - 2 delta0 / 2^(j-1)) q_{n_j - 1})) at index n_j
    with ones in between, where beta = ln lam.  Requires beta > 4 delta0 > 0.
    The gap schedule n_j is caller-supplied and recorded per stage so other
    gap rules can be swapped in.
    """
    lam = as_fraction(lam)
    delta0 = as_fraction(delta0)
    if delta0 <= 0:
        raise ConfigInvalid("need delta0 > 0")
    with mpmath.workdps(30):
        beta_mp = mpmath.log(mpmath.mpf(lam.numerator) / lam.denominator)
        delta0_mp = mpmath.mpf(delta0.numerator) / delta0.denominator
        if 4 * delta0_mp >= beta_mp:
            raise ConfigInvalid("need ln(lam) > 4*delta0")
    stage_indices = [int(n) for n in stage_indices]
    if len(stage_indices) < 2:
        raise ConfigInvalid("need a truncation index n_0 and at least one stage n_1")
    if any(b <= a for a, b in zip(stage_indices, stage_indices[1:])):
        raise ConfigInvalid("stage indices must be strictly increasing")

    n0 = stage_indices[0]
    insertions = {}
    stage_of = {}
    betas = []
    for j, nj in enumerate(stage_indices[1:], start=1):
        b = BetaExpr(lam, -2 * delta0 / 2 ** (j - 1))
        insertions[nj] = b
        stage_of[nj] = j
        betas.append(b)
    entries = _resolve_entries(base, n0 + 1, insertions, digit_budget, stage_of)
    return FrequencySpec(
        construction="pp-ladder",
        base=base,
        base_cutoff=n0 + 1,
        insertions=insertions,
        entries=entries,
        rule_limit_beta=float(beta_mp),
        stage_indices=tuple(stage_indices),
        eps=None,
        digit_budget=digit_budget,
        extras={
            "delta0": str(delta0),
            "stage_betas": [repr(b.value) for b in betas],
            "stage_bookkeeping": [
                {"j": j, "n_j": nj, "beta_j": repr(b.value)}
                for j, (nj, b) in enumerate(zip(stage_indices[1:], betas), start=1)
            ],
        },
    )


def materialize(spec: FrequencySpec, depth, precision=None):
    """Module-level alias for FrequencySpec.materialize."""
    return spec.materialize(depth, precision)
