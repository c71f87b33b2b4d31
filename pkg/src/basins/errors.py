"""Exception hierarchy shared by all modules."""


class BasinsError(Exception):
    """Base class for domain errors (CLI maps these to exit code 1)."""


class ParseError(BasinsError, ValueError):
    def __init__(self, message, offset, expected=()):
        self.offset = offset
        self.expected = frozenset(expected)
        detail = f"{message} at byte {offset}"
        if self.expected:
            detail += f" (expected one of: {', '.join(sorted(self.expected))})"
        super().__init__(detail)


class UnknownFunction(ParseError):
    pass


class UnboundParam(BasinsError, KeyError):
    def __str__(self):
        return f"unbound parameter {self.args[0]!r}"


class PoleOrOverflow(BasinsError, ArithmeticError):
    pass


class NoConvergence(BasinsError):
    pass


class DerivativeSingular(BasinsError):
    pass


class DegenerateBeyondOrder3(BasinsError):
    pass


class NoSignChange(BasinsError):
    pass


class TooManyIterations(BasinsError):
    pass


class NoZeroFound(BasinsError):
    pass


class OutOfRange(BasinsError):
    pass


class TooClosePole(BasinsError):
    pass


class TrapError(BasinsError):
    """Trap set failed disjointness or forward-invariance checks."""


class NoInterface(BasinsError):
    pass


class TooFewPoints(BasinsError):
    pass


class ConfigParse(BasinsError):
    def __init__(self, message, line):
        self.line = line
        super().__init__(f"line {line}: {message}")
