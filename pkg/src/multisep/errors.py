"""Exception hierarchy.

Every error raised on purpose by the library derives from :class:`MultisepError`
(itself a ``ValueError``), so callers can catch input problems in one place.
"""


class MultisepError(ValueError):
    """Base class for all library errors."""


class NonFinite(MultisepError):
    """An input contains NaN or Inf."""


class NotHermitian(MultisepError):
    """A matrix expected to be Hermitian is not, within tolerance."""


class DimOverflow(MultisepError):
    """The joint Hilbert-space dimension exceeds the supported guard."""


class DimMismatch(MultisepError):
    """Operands have incompatible party dimensions."""


class BadSubset(MultisepError):
    """A party subset is empty, out of range or not proper."""


class NotIsometry(MultisepError):
    """A local operator is not unitary / does not have orthonormal columns."""


class InvalidState(MultisepError):
    """A state or density matrix violates its invariants (norm, trace, positivity)."""


class NotDecomposable(MultisepError):
    """An operation needs a Schmidt-decomposable result but got a negative one."""


class EnsembleMismatch(MultisepError):
    """An ensemble does not realize the density matrix it is paired with."""


class BranchViolation(MultisepError):
    """A pair of ensemble members violates the partial-transpose minor condition."""


class InvariantFailure(MultisepError):
    """A constructed object could not be made to satisfy its invariants."""


class ZeroBranch(MultisepError):
    """A two-dimensional projection has zero probability."""


class BadSpec(MultisepError):
    """A fixture specification is invalid."""


class FormatError(MultisepError):
    """A state, ensemble or isometry file cannot be parsed."""
