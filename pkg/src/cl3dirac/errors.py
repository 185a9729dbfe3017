"""Exception types raised across the package."""


class Cl3Error(Exception):
    """Base class for all package errors."""


class NullElement(Cl3Error, ArithmeticError):
    """Element has (numerically) vanishing determinant and no inverse."""


class DegenerateFactor(Cl3Error, ArithmeticError):
    """Boost/rotation factorization failed because l l^dagger is singular."""


class InvalidLorentzFactor(Cl3Error, ValueError):
    """A Lorentz factor must satisfy l * bar(l) = 1."""


class NodalPoint(Cl3Error, ArithmeticError):
    """N = |det(phi)| vanishes; the unregularized equation is singular here."""


class InconsistentPair(Cl3Error, ValueError):
    """(N, J) violates det(J) = N**2."""


class DegenerateJ(Cl3Error, ValueError):
    """J^0 + N = 0 while J is nonzero."""


class BlowUp(Cl3Error, FloatingPointError):
    """A time step produced non-finite coefficients."""


class GrowthViolation(Cl3Error, ArithmeticError):
    """The L2 norm left the exp(2 m t) envelope."""


class InsufficientSnapshots(Cl3Error, ValueError):
    """Time-derivative diagnostics need at least three snapshots."""


class LeftDomain(Cl3Error, ArithmeticError):
    """A flowline entered a masked (low density) region."""


class ConfigError(Cl3Error, ValueError):
    """Invalid or unknown configuration entry."""
