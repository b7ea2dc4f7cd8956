"""Exceptions shared across the package."""


class FrescolabError(Exception):
    """Base class for all package errors."""


class GuardExhausted(FrescolabError):
    """A degree-raising operation ran out of certified truncation degree."""


class RankUnstable(FrescolabError):
    """A rank or dimension disagreed between certification thresholds.

    Retry the computation at a higher truncation degree.
    """


class NotNormal(FrescolabError):
    """Quotient requested by a submodule that is not normal."""


class NotHomogeneous(FrescolabError):
    """Operator is not homogeneous in (a, b)."""


class NotMonic(FrescolabError):
    """Operator is not monic in a."""


class NonUnitSeries(FrescolabError):
    """Series inversion requested for a series with zero constant term."""


class EmptyKernel(FrescolabError):
    """No nonzero solution of P e = 0 in the given ambient space."""


class IndexOutOfRange(FrescolabError):
    """Filtration level outside [1, d]."""


class NoRoot(FrescolabError):
    """Required Bernstein root is absent."""


class NoAlphaPart(FrescolabError):
    """Module has no component in the requested exponent class."""


class SearchFailed(FrescolabError):
    """Structural search (rank-1 submodule scan) found nothing in budget."""


class SearchExhausted(FrescolabError):
    """Monomial-chain scan exhausted the certified degree range."""


class WitnessNotFound(FrescolabError):
    """Witness search budget exhausted; existence is not refuted."""


class RegistryMismatch(FrescolabError):
    """A registry check produced a value different from the recorded one."""

    def __init__(self, diff):
        self.diff = diff
        super().__init__("registry mismatch:\n" + diff)
