"""Exception hierarchy shared by every layer of the kernel."""


class IndigaError(Exception):
    """Base class; the session runner turns these into failed report records."""


class UniverseError(IndigaError):
    """Operands live over different variable sets, or a variable is unknown."""


class ResourceExceeded(IndigaError):
    """A configured computation cap (pairs, reductions, powers) was hit."""


class PresentationError(IndigaError):
    """A tower construction descriptor is malformed."""


class CompatibilityError(IndigaError):
    """Level representatives of an element disagree under a transition map."""

    def __init__(self, message, *, upper=None, lower=None):
        super().__init__(message)
        self.upper = upper
        self.lower = lower


class IllDefinedDerivation(IndigaError):
    """Generator images do not respect a relation of some level."""

    def __init__(self, message, *, relation=None, level=None):
        super().__init__(message)
        self.relation = relation
        self.level = level


class NotLocallyNilpotent(IndigaError):
    pass


class RequiresCertificate(IndigaError):
    """An exponential was requested for a derivation without a Certified verdict."""


class PreconditionError(IndigaError):
    def __init__(self, message, *, mode=None, witness=None):
        super().__init__(message)
        self.mode = mode
        self.witness = witness


class ZeroRing(IndigaError):
    """The localized ring vanishes at some level; slice data is degenerate there."""

    def __init__(self, message, *, level=None):
        super().__init__(message)
        self.level = level


class ParseError(IndigaError):
    def __init__(self, message, line=None, column=None):
        loc = f" at line {line}, column {column}" if line is not None else ""
        super().__init__(f"{message}{loc}")
        self.line = line
        self.column = column
        self.bare = message


class SessionNameError(IndigaError):
    """Reference to a binding that was not defined earlier in the script."""
