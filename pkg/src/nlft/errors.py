"""Exception types raised across the package.

Input problems derive from ``ValueError`` and numerical breakdowns from
``ArithmeticError`` so callers can catch either family without importing
every name.
"""


class NLFTError(Exception):
    """Base class for all package errors."""


class InputError(NLFTError, ValueError):
    """The caller supplied data outside an operation's domain."""


class NumericalError(NLFTError, ArithmeticError):
    """An algorithm failed to reach its stated tolerance."""


# laurent_core
class PoleOnGrid(InputError):
    pass


class BandTooWide(InputError):
    pass


class DegenerateLeadingCoefficient(InputError):
    pass


# su11_pairs
class RepresentationMismatch(InputError):
    pass


class ModulusAtLeastOne(InputError):
    pass


# forward_nlft
class NonUnimodularModulation(InputError):
    pass


# spectral_factorization
class RootClassificationAmbiguous(NumericalError):
    pass


class OddPoleOrderOnT(InputError):
    pass


class NonFiniteSamples(InputError):
    pass


# inverse_nlft
class NotInImage(InputError):
    pass


class PeelDivergence(NumericalError):
    pass


class ModulusReachedOne(InputError):
    pass


class TruncationExhausted(NumericalError):
    pass


class NotInH(InputError):
    pass


# riemann_hilbert
class NotBounded(InputError):
    pass


class TruncationInsufficient(NumericalError):
    pass


class PoleClassificationAmbiguous(NumericalError):
    pass


class OrderMismatch(NumericalError):
    pass


class ExtrapolationDiverged(NumericalError):
    pass


# opuc_bridge / jacobi_bridge
class RankDeficient(NumericalError):
    pass


class DenominatorVanishes(NumericalError):
    pass


class NonRealInput(InputError):
    pass


class ValueOutOfRange(InputError):
    pass


class AsymmetricInput(InputError):
    pass


class SpectrumTooClose(InputError):
    pass
