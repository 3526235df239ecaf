class QesError(Exception):
    """ Base class for every error raised by qes_spectra. """


class NonConvergence(QesError):
    """ An iterative root finder stopped before reaching its residual target. """


class EigensolverFailure(QesError):
    """ The dense eigensolver failed or returned non-finite values. """


class RouteDisagreement(QesError):
    """ Two independent solution routes produced different spectra. """


class ZetaZero(QesError, ValueError):
    """ The requested construction is singular at zeta = 0. """


class NotAnEigenvalue(QesError, ValueError):
    """ An energy passed as an eigenvalue does not annihilate R_M. """


class VariantMismatch(QesError, ValueError):
    """ An operation only defined for one potential variant received the other. """


class UnsupportedM(QesError, ValueError):
    """ No closed form exists for the requested M. """


class DomainError(QesError, ValueError):
    """ Argument outside the domain of an analytic function. """
