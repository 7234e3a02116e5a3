"""Exception taxonomy.

Every error carries an ``exit_code`` so the CLI can map failure classes to
stable process exit codes: config=2, io=3, data=4, internal=5.
"""


class CactusError(Exception):
    exit_code = 5


class ConfigInvalid(CactusError):
    exit_code = 2


class IoFailure(CactusError):
    exit_code = 3


class DataError(CactusError):
    """Base for errors caused by the content of the data itself."""

    exit_code = 4


# tabular
class MissingTarget(DataError):
    pass


class NonBinaryTarget(DataError):
    pass


class RaggedRow(DataError):
    pass


class EmptyDataset(DataError):
    pass


class UnknownColumn(DataError):
    pass


class NotCategorical(DataError):
    pass


class InfeasibleSplit(DataError):
    pass


# missingness
class InfeasibleFraction(DataError):
    pass


# abstraction / classifier
class DegenerateFeature(DataError):
    pass


class SingleClassTraining(DataError):
    pass


class UnknownFeature(DataError):
    pass


# importance reports
class KTooLarge(DataError):
    pass


class SchemaViolation(DataError):
    pass


class NonFiniteImportance(DataError):
    pass


class ZeroBaselineImportance(DataError):
    pass


class MissingLevelReport(DataError):
    pass


class FeatureMismatch(DataError):
    pass


# baselines
class AllMissingFeature(DataError):
    pass


# evaluation
class LengthMismatch(DataError):
    pass
