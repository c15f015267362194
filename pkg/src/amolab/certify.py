"""Verification kernels: window-mass certificates, Gordon trace tests,
eigenfunction decay fits, the cohomological solver, and the rotation-number
derivative bound.

The (C, N) window-mass check asks whether every normalized solution pair
keeps squared mass at least C^2 on the sites |k| <= N, uniformly over the
phase and over spectral energies.  On a finite grid that minimum is the
smallest eigenvalue of a 2x2 quadratic form; double-precision values carry
an explicit error estimate and borderline points escalate to arbitrary
precision (optionally interval-certified).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath
import numpy as np
import scipy.linalg

from . import kernels
from .cf import ContinuedFraction, dc_phase_check
from .cocycle import alpha_value, telescope_bound, telescoping_gap
from .errors import (
    DenominatorUnderflow,
    PhaseNotDiophantine,
    PrecisionLoss,
)
from .freq import FrequencySpec
from .kernels import _mpkernels
from .spectrum import SpectrumApprox, band_energies

__all__ = [
    "BadnessForm",
    "BadnessCertificate",
    "badness_form",
    "badness_scan",
    "verify_badness_point",
    "localized_candidates",
    "refine_eigenvalue_mp",
    "GordonReport",
    "gordon_test",
    "gordon_sweep",
    "cayley_hamilton_residual",
    "DecayFit",
    "decay_rate",
    "CohomSolution",
    "cohom_solve",
    "DerivativePoint",
    "DerivativeReport",
    "rotation_derivative_check",
    "DRHO_BOUND",
]

_EPS = float(np.finfo(float).eps)
DRHO_BOUND = -1.0 / (4.0 * math.pi)  # derivative ceiling for the dual cocycle


# -- window-mass quadratic form -------------------------------------------------


@dataclass(frozen=True)
class BadnessForm:
    """G = sum_{|k|<=N} A_k^T e2 e2^T A_k and its eigenvalue range."""

    g11: float
    g12: float
    g22: float
    lam_min: float
    lam_max: float
    err_estimate: float
    N: int

    @property
    def matrix(self):
        return np.array([[self.g11, self.g12], [self.g12, self.g22]])


def badness_form(lam, alpha, E, theta, N, precision_dps=None):
    """Window-mass form at one (theta, E); min over unit initial pairs of
    sum_{|k|<=N} u(k)^2 equals lam_min exactly.

    ``precision_dps`` switches to the arbitrary-precision path.  The
    double-precision error estimate scales with the accumulated lam_max.
    """
    af, ax = alpha_value(alpha)
    if precision_dps is not None:
        g11, g12, g22, lmin, lmax = _mpkernels.mp_gram(
            E, lam, ax, Fraction(float(theta)), int(N), precision_dps
        )
        return BadnessForm(float(g11), float(g12), float(g22), float(lmin),
                           float(lmax), 0.0, int(N))
    g11, g12, g22, lmin, lmax = kernels.gram_pairs(
        np.array([float(E)]), np.array([float(theta)]), float(lam), af, int(N)
    )
    err = _gram_err(lmax[0], N)
    return BadnessForm(float(g11[0]), float(g12[0]), float(g22[0]),
                       float(lmin[0]), float(lmax[0]), err, int(N))


def _gram_err(lmax, N):
    if not math.isfinite(lmax):
        return math.inf
    return 8.0 * (2 * N + 1) * _EPS * lmax


@dataclass
class BadnessCertificate:
    lam: float
    C: float
    N: int
    alpha_descriptor: dict
    theta_grid: tuple[float, ...]
    E_grid: tuple[float, ...]
    min_value: float
    witness: tuple[float, float] | None  # (theta*, E*)
    verdict: str                         # certified-on-grid | refuted-with-witness
    escalated_points: int = 0
    certified_interval: tuple[float, float] | None = None

    @property
    def refuted(self):
        return self.verdict == "refuted-with-witness"

    def to_json(self):
        return {
            "lam": repr(self.lam),
            "C": repr(self.C),
            "N": self.N,
            "alpha": self.alpha_descriptor,
            "theta_grid": [repr(t) for t in self.theta_grid],
            "E_grid": [repr(e) for e in self.E_grid],
            "min_value": repr(self.min_value),
            "witness": None if self.witness is None else [repr(self.witness[0]), repr(self.witness[1])],
            "verdict": self.verdict,
            "escalated_points": self.escalated_points,
            "certified_interval": None if self.certified_interval is None
            else [repr(self.certified_interval[0]), repr(self.certified_interval[1])],
        }


def _alpha_descriptor(alpha):
    if isinstance(alpha, FrequencySpec):
        return {"kind": "frequency-spec", "construction": alpha.construction,
                "stage_indices": list(alpha.stage_indices)}
    if isinstance(alpha, ContinuedFraction):
        return {"kind": "continued-fraction", "prefix_len": alpha.prefix_len}
    return {"kind": "value", "value": repr(float(alpha))}


def badness_scan(lam, alpha, C, N, spectrum: SpectrumApprox | None = None,
                 theta_grid=256, e_per_band=64, E_list=None,
                 escalate_dps="auto", map_fn=None):
    """Grid scan of the window-mass minimum against the threshold C^2.

    Energies come from spectrum bands unless ``E_list`` overrides them.
    Points whose double-precision value cannot be separated from C^2 within
    the error estimate re-run at high precision; an undecidable grid raises
    PrecisionLoss rather than guessing.  ``map_fn`` lets the CLI inject its
    worker pool (order-preserving map over chunks).
    """
    af, ax = alpha_value(alpha)
    lam = float(lam)
    C2 = float(C) ** 2
    if E_list is not None:
        energies = [float(e) for e in E_list]
    else:
        if spectrum is None:
            raise ValueError("need a SpectrumApprox or an explicit E_list")
        energies = band_energies(spectrum, per_band=e_per_band)
    if isinstance(theta_grid, int):
        thetas = [(i + 0.5) / theta_grid for i in range(theta_grid)]
    else:
        thetas = [float(t) for t in theta_grid]
    if not energies or not thetas:
        raise ValueError("scan grids must be nonempty")
    th_flat = np.repeat(thetas, len(energies))
    e_flat = np.tile(energies, len(thetas))

    def work(chunk):
        lo, hi = chunk
        return kernels.gram_pairs(e_flat[lo:hi], th_flat[lo:hi], lam, af, int(N))

    chunks = _chunks(len(e_flat), 8192)
    mapper = map_fn if map_fn is not None else map
    parts = list(mapper(work, chunks))
    lmin = np.concatenate([p[3] for p in parts])
    lmax = np.concatenate([p[4] for p in parts])
    err = 8.0 * (2 * N + 1) * _EPS * lmax
    err[~np.isfinite(lmax)] = math.inf

    decided_low = lmin + err < C2
    decided_high = lmin - err >= C2
    ambiguous = ~(decided_low | decided_high) | ~np.isfinite(lmin)

    escalated = 0
    values = lmin.copy()
    if np.any(ambiguous) and escalate_dps is not None:
        idx = np.flatnonzero(ambiguous)
        for i in idx:
            dps = _dps_for(lam, N) if escalate_dps == "auto" else int(escalate_dps)
            _, _, _, lm, _ = _mpkernels.mp_gram(
                e_flat[i], lam, ax, Fraction(float(th_flat[i])), int(N), dps
            )
            values[i] = float(lm)
            escalated += 1
        decided_low = values < C2
        decided_high = values >= C2
    elif np.any(ambiguous):
        raise PrecisionLoss(f"{int(np.sum(ambiguous))} grid points undecidable at double precision")

    i_min = int(np.argmin(values))
    min_value = float(values[i_min])
    witness = (float(th_flat[i_min]), float(e_flat[i_min]))
    refuted = bool(np.any(decided_low))
    if refuted:
        i_w = int(np.argmin(np.where(decided_low, values, np.inf)))
        witness = (float(th_flat[i_w]), float(e_flat[i_w]))
    return BadnessCertificate(
        lam=lam, C=float(C), N=int(N),
        alpha_descriptor=_alpha_descriptor(alpha),
        theta_grid=tuple(float(t) for t in thetas),
        E_grid=tuple(float(e) for e in energies),
        min_value=min_value,
        witness=witness,
        verdict="refuted-with-witness" if refuted else "certified-on-grid",
        escalated_points=escalated,
    )


def _chunks(total, size):
    return [(lo, min(lo + size, total)) for lo in range(0, total, size)]


def _dps_for(lam, N):
    growth = 2.0 * max(math.log(max(lam, 1.0)), 0.5) * N
    return int(growth / math.log(10)) + 40


def verify_badness_point(lam, alpha, E, theta, N, dps=None, certified=True):
    """High-precision (optionally interval-rigorous) lam_min at one point.

    ``alpha``, ``E``, ``theta`` are taken as exact rationals.  Returns
    (lmin_lo, lmin_hi); with certified=True these rigorously bracket the
    true value for the exact inputs.
    """
    _, ax = alpha_value(alpha)
    E_f = E if isinstance(E, Fraction) else Fraction(E)
    th_f = theta if isinstance(theta, Fraction) else Fraction(theta)
    if dps is None:
        dps = _dps_for(float(lam), N)
    if certified:
        return _mpkernels.iv_gram(E_f, Fraction(lam), ax, th_f, int(N), dps)
    _, _, _, lm, _ = _mpkernels.mp_gram(E_f, lam, ax, th_f, int(N), dps)
    return float(lm), float(lm)


# -- localization oracle ---------------------------------------------------------


def localized_candidates(lam, alpha, theta, half_width=300, count=12):
    """Eigenpairs of the [-M, M] truncation, most-centered first.

    Returns (E, center, mass_ratio, boundary_mass) tuples where mass_ratio
    is the total squared mass over u(0)^2 + u(1)^2, the quantity the
    window-mass form minimizes against.
    """
    af, _ = alpha_value(alpha)
    M = int(half_width)
    n = np.arange(-M, M + 1)
    v = 2.0 * lam * np.cos(2.0 * math.pi * np.mod(n * af + theta, 1.0))
    evals, evecs = scipy.linalg.eigh_tridiagonal(v, np.ones(2 * M))
    out = []
    for i in range(evals.size):
        u = evecs[:, i]
        c = int(np.argmax(np.abs(u))) - M
        m0 = u[M] ** 2 + u[M + 1] ** 2  # sites 0 and 1
        if m0 <= 0:
            continue
        edge = int(0.05 * (2 * M + 1)) + 1
        bmass = float(np.sum(u[:edge] ** 2) + np.sum(u[-edge:] ** 2))
        out.append((float(evals[i]), c, float(1.0 / m0), bmass))
    out.sort(key=lambda t: (abs(t[1]), t[2]))
    return out[:count]


def _mpf_to_fraction(x):
    sign, man, exp, _ = x._mpf_
    if man == 0:
        return Fraction(0)
    val = Fraction(man)
    val = val * Fraction(2) ** exp
    return -val if sign else val


def refine_eigenvalue_mp(lam, alpha, theta, E0, n_side=260, dps=160, steps=80):
    """Refine a truncation eigenvalue to an exact-arithmetic eigenvalue
    of the doubly-infinite operator, far beyond double resolution.

    Shooting method: grow the solution decaying to the left from -n_side
    and the one decaying to the right from +n_side, and drive the sine of
    the angle between the two solution pairs at the origin to zero by
    secant iteration.  Needs hyperbolic growth (lam > 1) so the boundary
    data washes out.  Returns an exact Fraction.
    """
    _, ax = alpha_value(alpha)
    th_f = Fraction(theta)
    lam_f = Fraction(lam)

    def mismatch(E_f):
        with mpmath.workdps(dps):
            lm = mpmath.mpf(lam_f.numerator) / lam_f.denominator
            Em = mpmath.mpf(E_f.numerator) / E_f.denominator

            def pot(site):
                ph = site * ax + th_f
                ph -= ph.__floor__()
                return 2 * lm * mpmath.cospi(2 * mpmath.mpf(ph.numerator) / ph.denominator)

            # left solution: forward recursion from -n_side
            u_prev, u = mpmath.mpf(0), mpmath.mpf(1)
            for site in range(-n_side, 1):
                u, u_prev = (Em - pot(site)) * u - u_prev, u
            la, lb = u_prev, u  # (u_L(0), u_L(1))
            # right solution: backward recursion from +n_side
            w_next, w = mpmath.mpf(0), mpmath.mpf(1)
            for site in range(n_side, 0, -1):
                w, w_next = (Em - pot(site)) * w - w_next, w
            ra, rb = w, w_next  # (u_R(0), u_R(1))
            cross = la * rb - lb * ra
            scale = mpmath.sqrt((la * la + lb * lb) * (ra * ra + rb * rb))
            return cross / scale

    h = Fraction(1, 10**7)
    a, b = Fraction(E0) - h, Fraction(E0) + h
    fa, fb = mismatch(a), mismatch(b)
    for _ in range(steps):
        if fb == fa:
            break
        with mpmath.workdps(dps):
            gap = b - a
            gap_mp = mpmath.mpf(gap.numerator) / gap.denominator
            step = _mpf_to_fraction(fb * gap_mp / (fb - fa))
        a, fa = b, fb
        b = b - step
        fb = mismatch(b)
        with mpmath.workdps(dps):
            if abs(fb) < mpmath.mpf(10) ** (-dps + 12):
                break
    return b


# -- Gordon trace test -----------------------------------------------------------


@dataclass(frozen=True)
class GordonReport:
    theta: float
    E: float
    q_n: int
    norm_plus: float     # ||A_{q_n} u||
    norm_minus: float    # ||A_{-q_n} u||
    norm_double: float   # ||A_{2 q_n} u||
    trace: float
    case_tag: str        # "|tr|>1" or "|tr|<1"
    max_norm: float
    hypothesis_ok: bool | None
    bound_ok: bool | None

    def to_row(self):
        return [self.theta, self.E, self.q_n, self.norm_plus, self.norm_minus,
                self.norm_double, self.trace, self.case_tag,
                self.hypothesis_ok, self.bound_ok]


def gordon_test(lam, alpha, E, theta, q_n, u_bar, gaps=None, gap_bound=None,
                slack=1e-6):
    """Three-norm report max{||A_{q} u||, ||A_{-q} u||, ||A_{2q} u||} >= 1/4.

    ``u_bar`` is the normalized solution pair (u(1), u(0)).  ``gaps`` may
    carry measured telescoping gaps (gap_plus, gap_minus); when both sit
    under ``gap_bound`` the 1/4 lower bound applies and bound_ok records it
    (with ``slack`` absorbing product roundoff).
    """
    af, _ = alpha_value(alpha)
    u0, u1 = float(u_bar[0]), float(u_bar[1])
    nrm = math.hypot(u0, u1)
    if not math.isclose(nrm, 1.0, rel_tol=1e-9):
        u0, u1 = u0 / nrm, u1 / nrm
    n_pos, n_neg, n_two, tr = kernels.gordon_norms(
        float(E), float(lam), af, float(theta), int(q_n), u0, u1
    )
    case = "|tr|>1" if abs(tr) >= 1.0 else "|tr|<1"
    mx = max(n_pos, n_neg, n_two)
    hyp = None
    bound_ok = None
    if gaps is not None and gap_bound is not None:
        hyp = bool(max(gaps) <= gap_bound)
        if hyp:
            bound_ok = bool(mx >= 0.25 - slack)
    return GordonReport(float(theta), float(E), int(q_n), n_pos, n_neg, n_two,
                        float(tr), case, mx, hyp, bound_ok)


def gordon_sweep(lam, alpha, q_n, energies, n_samples=1000, seed=20240501,
                 beta=None, eps=0.15, theta_grid_gap=64, adversarial=True):
    """Sampled (theta, E, u) sweep of the three-norm lower bound.

    Measures the telescoping gaps once per energy (the hypothesis of the
    bound), then samples phases and unit vectors.  With ``adversarial``
    every other sample uses the most-contracted singular direction of
    A_{q_n}, the vector that actually stresses the bound (a random vector
    almost surely rides the expanding direction).  Returns the report list
    and the minimal max-norm observed.
    """
    from .cocycle import CocycleParams, product

    rng = np.random.default_rng(seed)
    reports = []
    gap_cache = {}
    bound = None if beta is None else telescope_bound(beta, lam, eps, q_n)
    af, ax = alpha_value(alpha)
    for i in range(n_samples):
        E = float(rng.choice(energies))
        theta = float(rng.random())
        if adversarial and i % 2 == 1:
            params = CocycleParams(float(lam), af, E, theta, ax)
            m = product(params, q_n).m
            _, _, vt = np.linalg.svd(m)
            u = (float(vt[-1, 0]), float(vt[-1, 1]))
        else:
            ang = 2.0 * math.pi * rng.random()
            u = (math.cos(ang), math.sin(ang))
        if E not in gap_cache:
            tg = telescoping_gap(lam, alpha, E, q_n, theta_grid_gap)
            gap_cache[E] = (tg.sup_plus, tg.sup_minus)
        gaps = gap_cache[E]
        reports.append(gordon_test(lam, alpha, E, theta, q_n, u,
                                   gaps=gaps if bound is not None else None,
                                   gap_bound=bound))
    min_max = min(r.max_norm for r in reports)
    return reports, min_max


def cayley_hamilton_residual(mat):
    """|| M + M^-1 - tr(M) I ||_F with a numerically inverted M."""
    m = np.asarray(mat, dtype=float)
    return float(np.linalg.norm(m + np.linalg.inv(m) - np.trace(m) * np.eye(2)))


# -- eigenfunction decay rates ----------------------------------------------------


@dataclass(frozen=True)
class DecayFit:
    E: float
    rate: float
    residual: float
    center: int
    boundary_mass: float
    contaminated: bool
    window: tuple[int, int]


def decay_rate(lam, alpha, theta, half_width=1000, count=10,
               dio=(0.01, 2.0, 1000), boundary_tol=1e-6, rng_floor=1e-14):
    """Least-squares decay rates of the most localized truncation states.

    The phase must pass the frequency-relative Diophantine check at the
    caller's (gamma, tau, cutoff); localized states have their half-mass
    profile ln sqrt(u(n)^2 + u(n+1)^2) fitted against |n - center| over a
    boundary-insensitive core, and should slope toward -ln(lam).
    """
    if isinstance(alpha, ContinuedFraction):
        cf_for_check = alpha
    elif isinstance(alpha, FrequencySpec):
        cf_for_check, _ = alpha.materialize(alpha.max_materializable_depth())
    else:
        from .cf import expand

        cf_for_check = expand(Fraction(float(alpha)), 40)
    gamma, tau, cutoff = dio
    cert = dc_phase_check(theta, cf_for_check, gamma, tau, int(cutoff))
    if not cert.passed:
        raise PhaseNotDiophantine(cert.witness_m, cert.witness_distance or 0.0,
                                  gamma / (abs(cert.witness_m) + 1) ** tau)

    af, _ = alpha_value(alpha)
    M = int(half_width)
    sites = np.arange(-M, M + 1)
    v = 2.0 * lam * np.cos(2.0 * math.pi * np.mod(sites * af + theta, 1.0))
    evals, evecs = scipy.linalg.eigh_tridiagonal(v, np.ones(2 * M))
    # localization strength by inverse participation ratio
    ipr = np.sum(evecs**4, axis=0)
    order = np.argsort(-ipr)
    fits = []
    edge = max(int(0.05 * (2 * M + 1)), 2)
    for i in order[: 4 * count]:
        u = evecs[:, i]
        c_idx = int(np.argmax(np.abs(u)))
        bmass = float(np.sum(u[:edge] ** 2) + np.sum(u[-edge:] ** 2))
        contaminated = bmass > boundary_tol
        if contaminated:
            continue
        pair = u[:-1] ** 2 + u[1:] ** 2
        y = 0.5 * np.log(np.maximum(pair, 1e-300))
        x = np.abs(np.arange(-M, M) - (c_idx - M))
        core = min(M // 2, int(0.5 * (2 * M)) // 2)
        mask = (x >= 3) & (x <= core) & (y > math.log(rng_floor))
        if np.sum(mask) < 10:
            continue
        slope, intercept = np.polyfit(x[mask], y[mask], 1)
        resid = float(np.sqrt(np.mean((y[mask] - slope * x[mask] - intercept) ** 2)))
        fits.append(DecayFit(
            E=float(evals[i]), rate=float(slope), residual=resid,
            center=c_idx - M, boundary_mass=bmass, contaminated=contaminated,
            window=(3, int(core)),
        ))
        if len(fits) >= count:
            break
    return fits


# -- cohomological equation --------------------------------------------------------


@dataclass
class CohomSolution:
    psi_hat: dict[int, complex]
    residual_sup: float
    min_denominator: tuple[int, float]  # (k, |1 - e^{2 pi i k alpha}|)
    denominators: dict[int, float]
    convergent_denominators: tuple[int, ...]

    def to_json(self):
        return {
            "psi_hat": {str(k): [v.real, v.imag] for k, v in sorted(self.psi_hat.items())},
            "residual_sup": repr(self.residual_sup),
            "min_denominator": [self.min_denominator[0], repr(self.min_denominator[1])],
            "denominators": {str(k): repr(v) for k, v in sorted(self.denominators.items())},
            "convergent_denominators": list(self.convergent_denominators),
        }


def cohom_solve(phi_hat, alpha, grid=4096, underflow_tol=None):
    """Fourier-mode solve of psi(theta) - psi(theta + alpha) = phi - mean.

    psi_hat(k) = phi_hat(k) / (1 - e^{2 pi i k alpha}) for k != 0 and
    psi_hat(0) = 0.  Divisor magnitudes come from exact torus distances of
    the frequency (2 sin(pi ||k alpha||)), so scheduled huge quotients
    trigger DenominatorUnderflow at exactly k = q_{n-1} instead of passing
    float noise through.  The residual is the sup over a dense grid of
    psi(theta) - psi(theta + alpha) - (phi(theta) - phi_hat(0)).
    """
    if underflow_tol is None:
        underflow_tol = 64.0 * _EPS
    coeffs = dict(phi_hat) if isinstance(phi_hat, dict) else {
        k: c for k, c in zip(range(-(len(phi_hat) // 2), len(phi_hat) // 2 + 1), phi_hat)
    }
    cutoff = max(abs(k) for k in coeffs) if coeffs else 0
    if cutoff < 1:
        raise ValueError("need at least one nonzero mode (cutoff >= 1)")

    af, ax = alpha_value(alpha)
    qs = _convergent_qs(alpha, cutoff)

    denominators = {}
    psi = {}
    min_k, min_mag = 0, math.inf
    for k in sorted(coeffs, key=abs):
        if k == 0:
            continue
        dist = _exact_torus_distance(k, ax)
        mag = 2.0 * math.sin(math.pi * min(float(dist), 0.5))
        denominators[k] = mag
        if mag < min_mag:
            min_k, min_mag = k, mag
        if mag < underflow_tol:
            raise DenominatorUnderflow(k, mag)
        frac = float((k * ax) % 1)
        denom = 1.0 - complex(math.cos(2 * math.pi * frac), math.sin(2 * math.pi * frac))
        psi[k] = complex(coeffs[k]) / denom
    psi[0] = 0.0 + 0.0j

    # r(theta) = sum_{k != 0} [psi_k (1 - e^{2 pi i k alpha}) - phi_k] e^{2 pi i k theta}
    thetas = np.arange(grid) / grid
    res = np.zeros(grid, dtype=complex)
    for k in sorted(set(coeffs) | set(psi), key=abs):
        if k == 0:
            continue
        pk = complex(psi.get(k, 0.0))
        fk = complex(coeffs.get(k, 0.0))
        factor = 1.0 - np.exp(2j * math.pi * k * af)
        res += (pk * factor - fk) * np.exp(2j * math.pi * k * thetas)
    residual = float(np.max(np.abs(res)))
    return CohomSolution(psi, residual, (min_k, min_mag), denominators, qs)


def _convergent_qs(alpha, cutoff):
    if isinstance(alpha, ContinuedFraction):
        cf = alpha
    elif isinstance(alpha, FrequencySpec):
        cf, _ = alpha.materialize(alpha.max_materializable_depth())
    else:
        return ()
    qs = []
    k = 1
    while cf.available(k):
        c = cf.convergent(k)
        if c.q > cutoff:
            break
        qs.append(c.q)
        k += 1
        if k > 200:
            break
    return tuple(qs)


def _exact_torus_distance(k, alpha_f: Fraction):
    t = (k * alpha_f) % 1
    return min(t, 1 - t)


# -- rotation-number derivative bound -----------------------------------------------


@dataclass(frozen=True)
class DerivativePoint:
    E: float
    rho: float
    slope: float | None
    monotone: bool
    satisfies_bound: bool | None


@dataclass(frozen=True)
class DerivativeReport:
    points: tuple[DerivativePoint, ...]
    monotone_interior: int
    satisfied: int
    fraction: float
    nonincreasing_ok: bool
    slack: float

    def to_rows(self):
        return [[p.E, p.rho, p.slope, p.monotone, p.satisfies_bound] for p in self.points]


def rotation_derivative_check(lam, alpha, E_grid, n=30000, theta=0.0, slack=1e-2,
                              averaging="weighted"):
    """Finite-difference slopes of the dual-cocycle rotation number.

    Runs the coupling-inverted cocycle (coupling 1/lam for lam > 1) over the
    energy grid, checks global nonincreasing monotonicity against the error
    bars, and flags every strictly-monotone interior point whose centered
    slope exceeds -1/(4 pi) + slack (the full-measure derivative ceiling).
    """
    if lam <= 1:
        raise ValueError("the dual check needs lam > 1")
    from .cocycle import rotation_sweep

    E_grid = np.asarray(E_grid, dtype=float)
    res = rotation_sweep(1.0 / lam, alpha, E_grid, theta, n, averaging)
    rho = np.array([r.value for r in res])
    # values sit on the monotone branch [0, 1/2]; estimates just above the
    # spectrum top can wrap to 1 - tiny, so fold them back
    rho = np.where(rho > 0.75, rho - 1.0, rho)
    errs = np.maximum(np.array([r.error_estimate for r in res]), 1e-12)

    diffs = np.diff(rho)
    pair_bars = 3.0 * (errs[:-1] + errs[1:])
    nonincreasing_ok = bool(np.all(diffs <= pair_bars))

    points = []
    monotone = satisfied = 0
    for i in range(len(E_grid)):
        if i == 0 or i == len(E_grid) - 1:
            points.append(DerivativePoint(float(E_grid[i]), float(rho[i]), None, False, None))
            continue
        d_left = rho[i] - rho[i - 1]
        d_right = rho[i + 1] - rho[i]
        bar_l = 3.0 * (errs[i] + errs[i - 1])
        bar_r = 3.0 * (errs[i] + errs[i + 1])
        is_mono = (d_left < -bar_l) and (d_right < -bar_r)
        slope = float((rho[i + 1] - rho[i - 1]) / (E_grid[i + 1] - E_grid[i - 1]))
        ok = None
        if is_mono:
            monotone += 1
            ok = bool(slope <= DRHO_BOUND + slack)
            satisfied += int(ok)
        points.append(DerivativePoint(float(E_grid[i]), float(rho[i]), slope, is_mono, ok))
    frac = satisfied / monotone if monotone else 0.0
    return DerivativeReport(tuple(points), monotone, satisfied, frac,
                            nonincreasing_ok, slack)
