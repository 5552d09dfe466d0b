"""Exception hierarchy shared by every fairdiv module."""


class FairDivError(Exception):
    """Base class for all fairdiv errors."""


class InputError(FairDivError):
    """Raised for malformed or out-of-range user input."""


class ParseError(InputError):
    pass


class InstanceTooSmall(InputError):
    pass


class InvalidValue(InputError):
    pass


class InvalidGood(InputError):
    pass


class InvalidParameter(InputError):
    pass


class TooLarge(FairDivError):
    """The brute-force oracle guard (n**m <= limit) failed."""


class ContractViolation(FairDivError):
    """An asserted postcondition failed; this indicates an implementation bug.

    ``diagnostics`` carries whatever the failing check collected
    (witness tuples, offending values).
    """

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class StepLimitExceeded(FairDivError):
    pass


class CharityOverflow(FairDivError):
    """Mode B terminated with ``|pool| >= n``.

    The allocation is still attached as ``result``; all other contract
    bullets hold for it.
    """

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result
