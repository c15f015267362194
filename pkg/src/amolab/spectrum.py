"""Spectra of rational approximants, Hausdorff distances, Holder scaling.

The spectrum at coupling lam and rational frequency p/q is the union over
the phase and the Floquet boundary condition of q-site eigenvalues; the two
Bloch phases 0 and pi give the band edges exactly.  An independent
trace-based check validates the eigensolver path: E belongs to the full
phase-union iff |tr A_q(E, theta0)| <= 2 + 2 lam^q at the quarter-period
phase theta0 (where the phase-dependent part of the trace vanishes).
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
import scipy.linalg

from . import kernels
from .cf import ContinuedFraction, expand, as_fraction
from .errors import (
    ConfigInvalid,
    DegenerateRegression,
    EigSolveFailure,
    EmptySpectrum,
)

__all__ = [
    "SpectrumApprox",
    "spectrum_approx",
    "hausdorff_distance",
    "holder_check",
    "trace_band_margin",
    "validate_bands",
    "band_energies",
    "HolderFit",
]


@dataclass(frozen=True)
class SpectrumApprox:
    lam: float
    p: int
    q: int
    bands: tuple[tuple[float, float], ...]
    theta_grid: int
    fatten: float
    approx_error: float = 0.0  # 1/q^2 scale toward irrational-frequency spectra
    cores: tuple[tuple[float, float], ...] = ()  # merged, unfattened intervals

    @property
    def lo(self):
        return self.bands[0][0]

    @property
    def hi(self):
        return self.bands[-1][1]

    def total_width(self):
        return sum(b - a for a, b in self.bands)

    def contains(self, E, slack=0.0):
        for a, b in self.bands:
            if a - slack <= E <= b + slack:
                return True
        return False

    def to_json(self):
        return {
            "lam": repr(self.lam),
            "p": self.p,
            "q": self.q,
            "bands": [[repr(a), repr(b)] for a, b in self.bands],
            "theta_grid": self.theta_grid,
            "fatten": repr(self.fatten),
        }


def _floquet_eigs(lam, p, q, theta, bloch_sign):
    """Eigenvalues of the q-site operator with +-1 Floquet corners."""
    n = np.arange(q)
    v = 2.0 * lam * np.cos(2.0 * math.pi * (n * p / q + theta))
    if q == 1:
        return np.array([v[0] + 2.0 * bloch_sign])
    if q == 2:
        off = 1.0 + bloch_sign  # double bond on the 2-cycle
        disc = math.hypot((v[0] - v[1]) / 2.0, off)
        mid = (v[0] + v[1]) / 2.0
        return np.array([mid - disc, mid + disc])
    h = np.zeros((q, q))
    np.fill_diagonal(h, v)
    idx = np.arange(q - 1)
    h[idx, idx + 1] = 1.0
    h[idx + 1, idx] = 1.0
    h[0, q - 1] = bloch_sign
    h[q - 1, 0] = bloch_sign
    try:
        return scipy.linalg.eigvalsh(h)
    except Exception as exc:  # pragma: no cover
        raise EigSolveFailure(str(exc)) from exc


def _merge(intervals):
    out = []
    for a, b in sorted(intervals):
        if out and a <= out[-1][1]:
            out[-1][1] = max(out[-1][1], b)
        else:
            out.append([a, b])
    return [tuple(iv) for iv in out]


def spectrum_approx(lam, p, q, theta_grid=64):
    """Band union of the rational-frequency operator over a phase grid.

    Bands pair the sorted Bloch-0 and Bloch-pi eigenvalues per phase.  The
    union is fattened by the observed per-edge movement between adjacent
    phase samples (the local eigenvalue-spacing estimate), which covers
    what the grid can miss of the full phase union; the 1/q^2 scale toward
    irrational-frequency spectra is reported separately as approx_error.
    """
    p, q = int(p), int(q)
    lam = float(lam)
    if q < 1 or math.gcd(abs(p), q) != 1:
        raise ConfigInvalid(f"need gcd(p, q) = 1 and q >= 1, got {p}/{q}")
    # spectra at theta and theta + m/q are translates of each other, so one
    # fundamental period [0, 1/q) covers the full phase union; sampling it
    # directly keeps the per-edge movement smooth and the fattening honest
    if theta_grid > 1:
        thetas = np.arange(theta_grid + 1) / (q * theta_grid)
    else:
        thetas = np.array([0.0])
    per_theta_edges = []
    intervals = []
    for theta in thetas:
        e0 = _floquet_eigs(lam, p, q, theta, +1.0)
        e1 = _floquet_eigs(lam, p, q, theta, -1.0)
        allv = np.sort(np.concatenate([e0, e1]))
        edges = allv.reshape(q, 2)
        per_theta_edges.append(edges)
        intervals.extend((row[0], row[1]) for row in edges)
    moves = 0.0
    if len(per_theta_edges) > 1:
        stack = np.stack(per_theta_edges)  # (grid, q, 2)
        moves = float(np.max(np.abs(np.diff(stack, axis=0))))
    fatten = moves + 256.0 * np.finfo(float).eps * (1.0 + 2.0 * lam + 2.0)
    fattened = [(a - fatten, b + fatten) for a, b in intervals]
    return SpectrumApprox(lam, p, q, tuple(_merge(fattened)), int(theta_grid),
                          float(fatten), 1.0 / q**2, tuple(_merge(intervals)))


def trace_band_margin(spec: SpectrumApprox, E):
    """ln|tr A_q(E, theta0)| - ln(2 + 2 lam^q) at the quarter-period phase.

    Negative inside the exact phase-union spectrum, positive outside; an
    independent check of the eigensolver path (different boundary-condition
    machinery, transfer products instead of eigensolves).
    """
    q, lam, p = spec.q, spec.lam, spec.p
    theta0 = 1.0 / (4.0 * q)
    m11, m12, m21, m22, s, _ = kernels.qr_product(float(E), lam, p / q, theta0, q)
    tr = m11 + m22
    log_tr = s + math.log(abs(tr)) if tr != 0.0 else -math.inf
    log_bound = np.logaddexp(math.log(2.0), math.log(2.0) + q * math.log(lam)) if lam > 0 \
        else math.log(2.0)
    return log_tr - log_bound


def validate_bands(spec: SpectrumApprox, samples_per_band=3, tol=1e-9):
    """Fraction of core interior points passing the trace check and of gap
    midpoints failing it (1.0 means full agreement between the two paths)."""
    hits = 0
    total = 0
    cores = spec.cores or spec.bands
    for a, b in cores:
        for t in np.linspace(0.25, 0.75, samples_per_band):
            total += 1
            if trace_band_margin(spec, a + t * (b - a)) <= tol:
                hits += 1
    for (a0, b0), (a1, b1) in zip(spec.bands, spec.bands[1:]):
        mid = 0.5 * (b0 + a1)
        if a1 - b0 > 4 * spec.fatten:
            total += 1
            if trace_band_margin(spec, mid) > -tol:
                hits += 1
    return hits / total if total else 1.0


def band_energies(spec: SpectrumApprox, per_band=1, count=None):
    """Deterministic interior energies, widest bands first when capped."""
    bands = sorted(spec.bands, key=lambda ab: ab[1] - ab[0], reverse=True)
    if count is not None:
        bands = bands[:count]
    out = []
    for a, b in bands:
        for t in np.linspace(0, 1, per_band + 2)[1:-1]:
            out.append(a + float(t) * (b - a))
    return out


# -- Hausdorff distance --------------------------------------------------------


def _dist_to_union(x, bands):
    """Distance from a point to a sorted disjoint band union."""
    lo = [a for a, _ in bands]
    i = bisect_right(lo, x) - 1
    best = math.inf
    for j in (i, i + 1):
        if 0 <= j < len(bands):
            a, b = bands[j]
            if a <= x <= b:
                return 0.0
            best = min(best, abs(x - a), abs(x - b))
    if i - 1 >= 0:
        a, b = bands[i - 1]
        best = min(best, abs(x - a), abs(x - b))
    return best


def _directed(A, B):
    best = 0.0
    gap_mids = [0.5 * (b0 + a1) for (_, b0), (a1, _) in zip(B, B[1:])]
    for a, b in A:
        candidates = [a, b]
        candidates.extend(m for m in gap_mids if a < m < b)
        for x in candidates:
            d = _dist_to_union(x, B)
            if d > best:
                best = d
    return best


def hausdorff_distance(s1, s2):
    """Exact Hausdorff distance between two finite band unions."""
    b1 = s1.bands if isinstance(s1, SpectrumApprox) else tuple(s1)
    b2 = s2.bands if isinstance(s2, SpectrumApprox) else tuple(s2)
    if not b1 or not b2:
        raise EmptySpectrum("need nonempty band unions")
    return max(_directed(b1, b2), _directed(b2, b1))


# -- Holder continuity check -----------------------------------------------------


@dataclass(frozen=True)
class HolderFit:
    slope: float
    constant: float
    points: tuple[tuple[float, float], ...]  # (|alpha - alpha'|, distance)
    q_used: tuple[int, ...]


def _rational_for(alpha_f: Fraction, q_cap):
    """Best convergent of alpha with denominator <= q_cap."""
    cf = expand(alpha_f, 60)
    best = None
    for c in cf.convergents(min(60, len(cf.quotients))):
        if c.q > q_cap:
            break
        best = c
    if best is None:
        raise ConfigInvalid(f"no convergent under q_cap={q_cap}")
    return best.p, best.q


def holder_check(lam, alpha, perturbations, q_cap=500, theta_grid=8):
    """Log-log fit of Hausdorff spectral distance against |alpha - alpha'|.

    ``perturbations`` lists the perturbed frequencies alpha'.  Each
    frequency is replaced by its best rational approximant under ``q_cap``
    before the eigensolves, so keep the smallest |alpha - alpha'| well
    above 1/q_cap^2.  Reports the fitted log-log slope and the constant
    max distance / sqrt(gap).
    """
    base_f = as_fraction(alpha) if not isinstance(alpha, ContinuedFraction) else \
        sum(alpha.value_bounds(40)) / 2
    p0, q0 = _rational_for(base_f, q_cap)
    s0 = spectrum_approx(lam, p0, q0, theta_grid)
    points = []
    qs = [q0]
    for pert in perturbations:
        target = as_fraction(pert) if not isinstance(pert, ContinuedFraction) else \
            sum(pert.value_bounds(40)) / 2
        gap = abs(target - base_f)
        if gap == 0:
            continue  # excluded: zero distance carries no scaling information
        p1, q1 = _rational_for(target, q_cap)
        if Fraction(p1, q1) == Fraction(p0, q0):
            continue
        s1 = spectrum_approx(lam, p1, q1, theta_grid)
        d = hausdorff_distance(s0, s1)
        if d <= 0:
            continue
        points.append((float(gap), float(d)))
        qs.append(q1)
    if len(points) < 3:
        raise DegenerateRegression(f"only {len(points)} usable perturbations")
    lx = np.log([g for g, _ in points])
    ly = np.log([d for _, d in points])
    slope, intercept = np.polyfit(lx, ly, 1)
    constant = max(d / math.sqrt(g) for g, d in points)
    return HolderFit(float(slope), float(constant), tuple(points), tuple(qs))
