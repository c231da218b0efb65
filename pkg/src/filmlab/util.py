from __future__ import annotations


class LabError(Exception):
    """Base class for every error the lab raises on purpose."""


class InvalidGrid(LabError):
    pass


class InvalidExponent(LabError):
    pass


class InvalidSchedule(LabError):
    pass


class NonFiniteIntegrand(LabError):

    def __init__(self):
        super().__init__('non-finite integrand')


class IndefiniteDenominator(LabError):

    def __init__(self, worst):
        self.worst = worst
        super().__init__('indefinite denominator (min D = {:.6g}); reduce dt'.format(worst))


class DivergedCoefficient(LabError):

    def __init__(self):
        super().__init__('diverged coefficient')


class DegenerateExponent(LabError):

    def __init__(self):
        super().__init__('degenerate exponent')


class ZeroField(LabError):

    def __init__(self):
        super().__init__('zero field')


class NoSignChange(LabError):

    def __init__(self, lower, upper):
        self.bracket = (lower, upper)
        super().__init__('no sign change on [{:.6g}, {:.6g}]'.format(lower, upper))


class NehariResidual(LabError):

    def __init__(self, mu, residual, tolerance):
        self.mu = mu
        self.residual = residual
        super().__init__('Nehari scaling mu* = {:.6g} leaves |I(mu* u)| = {:.3g} above {:.3g}'.format(
            mu, residual, tolerance))


class EmptyTrialSet(LabError):

    def __init__(self):
        super().__init__('empty trial set')


class HypothesisNotSatisfied(LabError):

    def __init__(self, bound, detail):
        self.bound = bound
        self.detail = detail
        super().__init__('{}: blow-up hypothesis not satisfied ({})'.format(bound, detail))


class MissingConstant(LabError):

    def __init__(self, names):
        self.names = tuple(names)
        super().__init__('missing constant(s): {}'.format(', '.join(self.names)))


class DegenerateImage(LabError):
    pass


class ImageFormatError(LabError):
    pass


class FilterDiverged(LabError):

    def __init__(self, name, t):
        self.name = name
        self.t = t
        super().__init__('{} diverged at t={:.6g}'.format(name, t))


class SharpeningDiverged(FilterDiverged):

    def __init__(self, t):
        self.name = 'sharpening'
        self.t = t
        LabError.__init__(self, 'sharpening diverged — reduce t_stop or k (blow-up at t={:.6g})'.format(t))


class ManifestError(LabError):

    def __init__(self, message, lineno=None, path=None):
        self.lineno = lineno
        self.path = path
        where = ''
        if path is not None:
            where += str(path)
        if lineno is not None:
            where += ':{}'.format(lineno)
        super().__init__('{}: {}'.format(where, message) if where else message)
