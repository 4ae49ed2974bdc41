"""Exception hierarchy. Each class carries the CLI exit code it maps to."""


class SmattrError(Exception):
    exit_code = 1


class InvalidConfigError(SmattrError, ValueError):
    exit_code = 1


class InvalidArgumentError(SmattrError, ValueError):
    exit_code = 1


class InvalidGeometryError(InvalidArgumentError):
    """Image, saliency map or patch grid dimensions do not line up."""


class BudgetExceededError(InvalidConfigError):
    """Exhaustive search would enumerate more subsets than allowed."""


class FormatError(SmattrError):
    exit_code = 2


class OracleError(SmattrError):
    exit_code = 3


class OracleInputError(OracleError, ValueError):
    """Input does not match the oracle's expected image shape."""


class OracleIOError(OracleError):
    """External oracle timed out, died, or violated the wire protocol."""


class SelfTestFailure(SmattrError):
    exit_code = 4
