"""Exception hierarchy shared by all modules."""


class BellError(Exception):
    pass


class NotADistribution(BellError, ValueError):
    pass


class MismatchedScenario(BellError, ValueError):
    pass


class IncompatibleScenario(MismatchedScenario):
    pass


class AsymmetricScenario(BellError, ValueError):
    pass


class UnsupportedScenario(BellError, ValueError):
    pass


class WeightsNotNormalized(BellError, ValueError):
    pass


class IndexOutOfRange(BellError, IndexError):
    pass


class SignallingInput(BellError, ValueError):
    pass


class WrongInputCount(BellError, ValueError):
    pass


class NonPositiveOrder(BellError, ValueError):
    pass


class OrderNotAboveOne(BellError, ValueError):
    pass


class EmptyGenerators(BellError, ValueError):
    pass


class EpsOutOfRange(BellError, ValueError):
    pass


class ParseError(BellError, ValueError):
    pass


class UnknownTarget(BellError, KeyError):
    pass
