"""Transfer-matrix products, Lyapunov exponents, rotation numbers.

The step matrix at site n is [[E - 2 lam cos 2 pi(theta + n alpha), -1],
[1, 0]] and ordered products propagate solution pairs (u(k+1), u(k)).
Heavy loops run on the selected kernel backend at double precision;
``precision`` switches to mpmath ("extended" is dps 19, "bigfloat" honors
``dps``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import kernels
from .cf import ContinuedFraction, as_fraction
from .errors import NonConvergence, PrecisionLoss
from .freq import FrequencySpec
from .kernels import _mpkernels

__all__ = [
    "CocycleParams",
    "SL2Matrix",
    "OrbitState",
    "Precision",
    "step_matrix",
    "product",
    "lyapunov",
    "rotation_number",
    "rotation_sweep",
    "rotation_number_const",
    "telescoping_gap",
    "telescope_bound",
    "LyapunovEstimate",
    "RotationNumber",
    "TelescopeGap",
    "alpha_value",
]

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class Precision:
    """double | extended | bigfloat; dps applies to bigfloat."""

    kind: str = "double"
    dps: int = 50

    def __post_init__(self):
        if self.kind not in ("double", "extended", "bigfloat"):
            raise ValueError(f"unknown precision kind {self.kind!r}")

    @property
    def mp_dps(self):
        return 19 if self.kind == "extended" else self.dps


DOUBLE = Precision("double")


def alpha_value(alpha, depth=60):
    """(float, Fraction) pair from assorted frequency inputs.

    Accepted: float, Fraction, ContinuedFraction, FrequencySpec.  The exact
    rational representative is a deep convergent; shifts like q_n * alpha
    mod 1 must be computed from it, not from the float.
    """
    if isinstance(alpha, FrequencySpec):
        usable = min(depth, alpha.max_materializable_depth())
        lo, hi = alpha.value_bounds(usable)
        mid = (lo + hi) / 2
        return float(mid), mid
    if isinstance(alpha, ContinuedFraction):
        lo, hi = alpha.value_bounds(alpha.depth_limit(depth))
        mid = (lo + hi) / 2
        return float(mid), mid
    f = as_fraction(alpha)
    return float(f), f


@dataclass(frozen=True)
class CocycleParams:
    """Parameters (lam, alpha, E, theta) of the almost Mathieu cocycle."""

    lam: float
    alpha: float
    E: float
    theta: float = 0.0
    alpha_exact: Fraction | None = None

    @classmethod
    def make(cls, lam, alpha, E, theta=0.0):
        af, ax = alpha_value(alpha)
        return cls(float(lam), af, float(E), float(theta), ax)

    def exact_alpha(self):
        return self.alpha_exact if self.alpha_exact is not None else Fraction(self.alpha)


class SL2Matrix:
    """A 2x2 unit-determinant matrix in split form e^log_scale * M.

    ``logdet_drift`` records the accumulated ln|det| numerical drift for
    products (0 for directly constructed matrices).
    """

    __slots__ = ("m", "log_scale", "logdet_drift")

    def __init__(self, entries, log_scale=0.0, logdet_drift=0.0):
        self.m = np.asarray(entries, dtype=float).reshape(2, 2)
        self.log_scale = float(log_scale)
        self.logdet_drift = float(logdet_drift)

    def full(self, max_exponent=700.0):
        """Dense entries e^log_scale * M; PrecisionLoss if they overflow."""
        if self.log_scale > max_exponent:
            raise PrecisionLoss(f"entries near e^{self.log_scale:.1f} overflow doubles")
        return math.exp(self.log_scale) * self.m

    def apply(self, v):
        """(w, log_scale): the image of v is e^log_scale * w."""
        return self.m @ np.asarray(v, dtype=float), self.log_scale

    def apply_norm(self, v):
        w, s = self.apply(v)
        n = float(np.hypot(w[0], w[1]))
        if n == 0.0:
            return 0.0
        ln = s + math.log(n)
        return math.exp(ln) if ln < 709.0 else math.inf

    def norm2(self):
        sv = np.linalg.svd(self.m, compute_uv=False)
        ln = self.log_scale + math.log(sv[0])
        return math.exp(ln) if ln < 709.0 else math.inf

    def log_norm2(self):
        sv = np.linalg.svd(self.m, compute_uv=False)
        return self.log_scale + math.log(sv[0])

    def trace(self):
        t = self.m[0, 0] + self.m[1, 1]
        if t == 0.0:
            return 0.0
        ln = self.log_scale + math.log(abs(t))
        return math.copysign(math.exp(ln) if ln < 709.0 else math.inf, t)

    def det_residual(self):
        """ln|det| of the represented matrix (should be ~0)."""
        if self.logdet_drift != 0.0:
            return self.logdet_drift
        d = float(np.linalg.det(self.m))
        return math.log(abs(d)) + 2 * self.log_scale if d != 0 else math.inf

    def det_ok(self, tol=None):
        # determinant within 10 ulps at working precision by default
        tol = 10 * np.finfo(float).eps if tol is None else tol
        return abs(self.det_residual()) <= tol

    def inv(self):
        # adjugate: exact inverse scale for unit-determinant matrices, and
        # immune to the determinant cancellation of strongly split products
        a, b, c, d = self.m.ravel()
        return SL2Matrix(np.array([[d, -b], [-c, a]]), self.log_scale)

    def __matmul__(self, other):
        return SL2Matrix(self.m @ other.m, self.log_scale + other.log_scale)

    def __repr__(self):
        return f"SL2Matrix({self.m.tolist()}, log_scale={self.log_scale:.6g})"


@dataclass
class OrbitState:
    """Solution pair v_n = (u(n+1), u(n)) at site n."""

    site: int
    v: tuple[float, float]

    def advance(self, params: CocycleParams):
        s = step_matrix(params, self.site).m
        w = s @ np.asarray(self.v)
        return OrbitState(self.site + 1, (float(w[0]), float(w[1])))


def step_matrix(params: CocycleParams, n=0):
    """One-step matrix [[E - 2 lam cos 2 pi(theta + n alpha), -1], [1, 0]]."""
    c = params.E - 2.0 * params.lam * math.cos(
        TWO_PI * math.fmod(params.theta + n * params.alpha, 1.0)
    )
    return SL2Matrix([[c, -1.0], [1.0, 0.0]])


def product(params: CocycleParams, k, precision=DOUBLE, max_enclosure_width=None):
    """Ordered product A_k (A_0 = I, negative k through inverses)."""
    if k == 0:
        return SL2Matrix(np.eye(2))
    if precision.kind == "double":
        m11, m12, m21, m22, s, drift = kernels.qr_product(
            params.E, params.lam, params.alpha, params.theta, int(k)
        )
        if not all(map(math.isfinite, (m11, m12, m21, m22))):
            raise PrecisionLoss("split representation degenerated (non-finite entries)")
        return SL2Matrix([[m11, m12], [m21, m22]], s, drift)
    dps = precision.mp_dps
    (a11, a12, a21, a22), residual = _mpkernels.mp_product(
        params.E, params.lam, params.exact_alpha(), Fraction(params.theta), int(k), dps
    )
    import mpmath

    with mpmath.workdps(dps):
        scale = mpmath.sqrt(a11**2 + a12**2 + a21**2 + a22**2)
        s = float(mpmath.log(scale))
        m = [[float(a11 / scale), float(a12 / scale)], [float(a21 / scale), float(a22 / scale)]]
    out = SL2Matrix(m, s, float(residual))
    if max_enclosure_width is not None and abs(float(residual)) > max_enclosure_width:
        raise PrecisionLoss(f"logdet residual {float(residual):.3e} over threshold")
    return out


@dataclass(frozen=True)
class LyapunovEstimate:
    value: float
    spread: float
    per_theta: tuple[float, ...]
    n: int
    theta_samples: int


def lyapunov(lam, alpha, E, n, theta_samples=32, precision=DOUBLE):
    """Average of (1/n) ln ||A_n(E, theta)|| over an equispaced theta grid.

    For energies in the spectrum at lam > 1 this estimates ln(lam).  The
    spread (max - min over samples) is reported alongside.
    """
    af, ax = alpha_value(alpha)
    thetas = (np.arange(theta_samples) + 0.31) / theta_samples
    if precision.kind == "double":
        vals = kernels.lyap_grid(float(E), float(lam), af, thetas, int(n))
    else:
        vals = np.array([
            _mpkernels.mp_lyap(E, lam, ax, Fraction(float(t)), int(n), precision.mp_dps)
            for t in thetas
        ])
    return LyapunovEstimate(
        value=float(np.mean(vals)),
        spread=float(np.max(vals) - np.min(vals)),
        per_theta=tuple(float(v) for v in vals),
        n=int(n),
        theta_samples=int(theta_samples),
    )


@dataclass(frozen=True)
class RotationNumber:
    value: float
    error_estimate: float
    converged: bool
    plain: float
    weighted: float
    averaging: str


def rotation_sweep(lam, alpha, E_grid, theta=0.0, n=20000, averaging="weighted",
                   tol=1e-3, y0=0.0):
    """Fibered rotation numbers over an energy grid (vectorized)."""
    af, _ = alpha_value(alpha)
    E_grid = np.asarray(E_grid, dtype=float)
    plain, weighted, dis = kernels.rotation_grid(E_grid, float(lam), af, float(theta), int(n), y0)
    out = []
    for p, w, d in zip(plain, weighted, dis):
        value = w if averaging == "weighted" else p
        out.append(RotationNumber(
            value=float(value),
            error_estimate=float(d),
            converged=bool(d < tol),
            plain=float(p),
            weighted=float(w),
            averaging=averaging,
        ))
    return out


def rotation_number(lam, alpha, E, theta=0.0, n=20000, averaging="weighted",
                    tol=1e-3, y0=0.0, strict=False):
    """Birkhoff rotation number of the almost Mathieu cocycle at one energy.

    Angle increments are branch-tracked so a full reversal counts as half a
    turn; the weighted mode uses a smooth bump window.  ``strict`` raises
    NonConvergence when the two half-orbit averages disagree beyond tol.
    """
    res = rotation_sweep(lam, alpha, [E], theta, n, averaging, tol, y0)[0]
    if strict and not res.converged:
        raise NonConvergence(f"half-orbit averages differ by {res.error_estimate:.2e}")
    return res


def rotation_number_const(mat, n=4096):
    """Rotation number of the constant cocycle theta -> theta (matrix fixed).

    Same increment convention as the sweep kernels; R_phi returns phi mod 1
    exactly up to roundoff.
    """
    m = np.asarray(mat, dtype=float)
    v = np.array([1.0, 0.0])
    total = 0.0
    for _ in range(n):
        u = m @ v
        inc = math.atan2(v[0] * u[1] - v[1] * u[0], v[0] * u[0] + v[1] * u[1]) / TWO_PI
        if inc <= -0.25:
            inc += 1.0
        total += inc
        v = u / np.hypot(u[0], u[1])
    return math.fmod(total / n, 1.0) % 1.0


@dataclass(frozen=True)
class TelescopeGap:
    q_n: int
    sup_plus: float
    sup_minus: float
    theta_grid: int
    shift: float


def telescoping_gap(lam, alpha, E, q_n, theta_grid=256, precision=DOUBLE):
    """sup over theta of ||A_{+-q_n}(E, theta + q_n alpha) - A_{+-q_n}(E, theta)||.

    The shift q_n alpha mod 1 comes from the exact rational representative,
    so it stays meaningful when far below the float resolution of alpha.
    Callers compare against exp(-(beta - ln lam - eps) q_n).
    """
    af, ax = alpha_value(alpha)
    q_n = int(q_n)
    if q_n == 0:
        return TelescopeGap(0, 0.0, 0.0, 0, 0.0)
    shift_frac = (q_n * ax) % 1
    if shift_frac > Fraction(1, 2):
        shift_frac -= 1  # nearest representative keeps tiny shifts in floats
    shift = float(shift_frac)
    if isinstance(theta_grid, int):
        thetas = (np.arange(theta_grid) + 0.17) / theta_grid
        grid_n = theta_grid
    else:
        thetas = np.asarray(theta_grid, dtype=float)
        grid_n = thetas.size
    if precision.kind == "double":
        gp, gm = kernels.telescope_pairs(float(E), float(lam), af, q_n, thetas, shift)
    else:
        gp, gm = _mpkernels.mp_telescope(E, lam, ax, q_n, [Fraction(float(t)) for t in thetas],
                                         precision.mp_dps)
        gp, gm = np.asarray(gp), np.asarray(gm)
    return TelescopeGap(q_n, float(np.max(gp)), float(np.max(gm)), grid_n, shift)


def telescope_bound(beta, lam, eps, q_n):
    """Reference decay bound exp(-(beta - ln lam - eps) q_n)."""
    return math.exp(-(beta - math.log(lam) - eps) * q_n)
