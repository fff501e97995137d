"""Exception taxonomy shared by the whole package.

Three tiers, matching the CLI exit codes: bad inputs (1), numerical
failures (2), and verification failures (3).
"""


class GibbsgapError(Exception):
    """Base class for everything raised deliberately by this package."""

    exit_code = 2


class ParameterError(GibbsgapError):
    """Caller passed something structurally invalid. Exit code 1."""

    exit_code = 1


class RegionError(ParameterError):
    pass


class DimensionError(ParameterError):
    pass


class PartitionError(ParameterError):
    pass


class IntervalError(ParameterError):
    pass


class DomainError(ParameterError):
    pass


class GeometryError(ParameterError):
    pass


class HypothesisError(ParameterError):
    """A method's validity hypothesis is not met (wrong model class, etc.)."""


class CapabilityError(ParameterError):
    """Requested computation is undefined for this model class."""


class CapacityError(ParameterError):
    """Problem size exceeds the documented dense/iterative budget."""


class ModelError(ParameterError):
    pass


class GroupError(ParameterError):
    """Malformed finite-group data (tables, characters, element labels)."""


class NumericalError(GibbsgapError):
    """A solver failed to converge or a tolerance was blown. Exit code 2."""

    exit_code = 2


class RankError(NumericalError):
    """Density matrix is numerically rank-deficient."""


class ContractError(NumericalError):
    """An internal consistency identity failed beyond tolerance."""


class DivergenceError(NumericalError):
    """An infinite product or sum shows no summable tail."""


class VerificationError(GibbsgapError):
    """A verify-suite check failed. Exit code 3."""

    exit_code = 3
