"""Exception types raised across the package."""


class MeanlabError(Exception):
    """Base class for every error raised by meanlab."""


class DomainError(MeanlabError, ValueError):
    """Parameters fall outside the domain a function or case is defined on."""


class UnknownCaseError(MeanlabError, KeyError):
    """No inequality case is registered under the requested id."""

    def __str__(self):
        return str(self.args[0]) if self.args else "unknown case"


class UnsupportedKindError(MeanlabError, ValueError):
    """The mean kind cannot be used in the requested composition."""


class DimensionMismatchError(MeanlabError, ValueError):
    """Matrix operands have incompatible shapes."""


class PreconditionError(MeanlabError, ValueError):
    """An order precondition of an operator inequality failed."""


class EscalationDisabledError(MeanlabError, ValueError):
    """A probe needs high-precision escalation but the policy forbids it."""
