"""Exception taxonomy shared by the whole package.

The ``exit_code`` attribute maps each error class onto the CLI's exit
status: configuration problems exit with 2, numerical failures with 3,
domain violations with 4.
"""


class VaetsimError(Exception):
    exit_code = 1


class ConfigError(VaetsimError):
    """Malformed, incomplete, or invalid configuration input."""

    exit_code = 2


class NumericError(VaetsimError):
    """A numerical routine failed or exceeded its error budget."""

    exit_code = 3


class DomainError(VaetsimError):
    """Input outside an operation's physical or mathematical domain."""

    exit_code = 4


class SizingError(DomainError):
    """Requested operator dimensions exceed the configured maximum."""


class DecompositionError(NumericError):
    """Eigendecomposition failed or did not meet the residual bound."""


class IntegrationError(NumericError):
    """Time integration rejected by a step-size or stability check."""


class PhaseDomainError(DomainError):
    """Broken-phase parameters passed to an unbroken-phase-only quantity."""
