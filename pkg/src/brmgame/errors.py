"""Exception hierarchy shared by every module of the package."""


class BrmGameError(Exception):
    """Base class for all errors raised by brmgame."""


class InvalidStrategy(BrmGameError, ValueError):
    pass


class NegativeWeight(InvalidStrategy):
    pass


class SumNotOne(InvalidStrategy):
    pass


class AlphaNotUnitFraction(BrmGameError, ValueError):
    pass


class InvalidConfig(BrmGameError, ValueError):
    pass


class PartialRewardTooLarge(InvalidConfig):
    pass


class MissingFruitchainParams(InvalidConfig):
    pass


class EmptyPool(BrmGameError, ValueError):
    """A strategy allocates hash rate to a pool the system does not use."""


class ZeroPoolPower(BrmGameError, ValueError):
    pass


class CountExceedsRounds(BrmGameError, ValueError):
    pass


class DivergentSum(BrmGameError, ArithmeticError):
    pass


class AllCostsEqual(BrmGameError, ValueError):
    pass


class ZeroDMin(BrmGameError, ValueError):
    pass


class AssumptionViolated(BrmGameError, ValueError):
    """The joining miner is not small relative to the rest of the system."""


class MismatchedConfig(BrmGameError, ValueError):
    pass


class SchemaError(BrmGameError, ValueError):
    pass


class UnknownParam(BrmGameError, KeyError):
    pass


class ExperimentFailure(BrmGameError, RuntimeError):
    pass
