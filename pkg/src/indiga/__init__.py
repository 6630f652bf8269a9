"""Exact computations with complete topological rings presented as towers.

The package covers polynomial arithmetic and Gröbner bases over the
rationals, towers of quotient levels, restricted power series, continuous
derivations with an integrability check, restricted exponentials, local
slices, and a small scripting language with deterministic reports.
"""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    CompatibilityError,
    IllDefinedDerivation,
    IndigaError,
    NotLocallyNilpotent,
    ParseError,
    PreconditionError,
    PresentationError,
    RequiresCertificate,
    ResourceExceeded,
    SessionNameError,
    UniverseError,
    ZeroRing,
)
