"""Exception types shared across the package."""


class AmolabError(Exception):
    """Base class for all package errors."""


class NotInUnitInterval(AmolabError):
    """Input real is not inside the open unit interval."""


class AmbiguousQuotient(AmolabError):
    """The certified enclosure straddles a quotient boundary.

    Callers should retry with a tighter input enclosure.
    """

    def __init__(self, index, lo, hi):
        self.index = index
        self.lo = lo
        self.hi = hi
        super().__init__(
            f"quotient a_{index} is not determined by the enclosure ({lo}, {hi})"
        )


class InsufficientStages(AmolabError):
    """Not enough quotients available for the requested stage."""


class PrecisionExhausted(AmolabError):
    """The available expansion depth cannot certify the requested quantity."""


class IndistinguishableWithinBudget(AmolabError):
    """Two expansions agree through the whole comparison budget.

    Raised only on request; the default path returns an upper bound instead.
    """

    def __init__(self, depth, upper_bound):
        self.depth = depth
        self.upper_bound = upper_bound
        super().__init__(f"no difference through depth {depth}; d <= {upper_bound}")


class ScheduleOverflow(AmolabError):
    """A scheduled quotient exceeds the configured digit budget."""


class StageBudgetExceeded(AmolabError):
    """A ladder stage request violates the configured stage constraints."""


class PrecisionLoss(AmolabError):
    """A floating-point product lost more accuracy than the caller allows."""


class NonConvergence(AmolabError):
    """Windowed orbit averages disagree beyond tolerance (strict mode only)."""


class EigSolveFailure(AmolabError):
    """The periodic-approximant eigensolver failed."""


class EmptySpectrum(AmolabError):
    """A spectrum approximation holds no bands."""


class DegenerateRegression(AmolabError):
    """Fewer than three usable points for a log-log fit."""


class BoundaryContamination(AmolabError):
    """Truncation eigenvector carries too much mass near the box edges."""


class DenominatorUnderflow(AmolabError):
    """A small divisor 1 - e^(2 pi i k alpha) fell below working precision."""

    def __init__(self, k, magnitude):
        self.k = k
        self.magnitude = magnitude
        super().__init__(f"small divisor at k={k}: |1 - e^(2 pi i k alpha)| ~ {magnitude:.3e}")


class PhaseNotDiophantine(AmolabError):
    """The phase fails the frequency-relative Diophantine check."""

    def __init__(self, m, distance, bound):
        self.m = m
        self.distance = distance
        self.bound = bound
        super().__init__(
            f"phase condition fails at m={m}: ||2 phi - m alpha|| = {distance:.3e} < {bound:.3e}"
        )


class ConfigInvalid(AmolabError):
    """A run configuration failed validation."""
