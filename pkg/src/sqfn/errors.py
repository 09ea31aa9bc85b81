"""Error taxonomy shared by all modules, mapped to CLI exit codes."""


class SqfnError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class ConfigurationError(SqfnError):
    """Inconsistent grids, spacings, or invalid scenario parameters."""

    exit_code = 2


class ParameterError(ConfigurationError):
    """A numeric parameter is outside its admissible range."""


class DegenerateDomainError(ConfigurationError):
    """A mask or cube family came out empty."""


class CapacityError(SqfnError):
    """The requested evaluation exceeds the configured sample load cap."""

    exit_code = 3


class ContractError(SqfnError):
    """A caller-asserted precondition does not hold."""


class KernelError(SqfnError):
    """A kernel produced a non-finite value."""
