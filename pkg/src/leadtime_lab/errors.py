"""Exception hierarchy shared by all analysis modules."""


class LeadtimeError(Exception):
    """Base class for every error raised by leadtime_lab."""


# composition
class NegativeMass(LeadtimeError, ValueError):
    pass


class BadLength(LeadtimeError, ValueError):
    pass


class SumOutOfTolerance(LeadtimeError, ValueError):
    pass


class ThresholdOutOfRange(LeadtimeError, ValueError):
    pass


class EmptyInput(LeadtimeError, ValueError):
    pass


class MixedMetrics(LeadtimeError, ValueError):
    pass


class InputValidationError(LeadtimeError, ValueError):
    """Raised when an input panel fails validation.

    ``diagnostics`` holds one human-readable message per offending row.
    """

    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        head = "; ".join(self.diagnostics[:5])
        more = len(self.diagnostics) - 5
        if more > 0:
            head += f"; ... ({more} more)"
        super().__init__(head)


# divergence
class UnsortedDates(LeadtimeError, ValueError):
    pass


class DuplicateDates(LeadtimeError, ValueError):
    pass


class NonMonotoneCdf(LeadtimeError, ValueError):
    pass


# resampling / breaks
class SeriesTooShort(LeadtimeError, ValueError):
    pass


class InvalidConfig(LeadtimeError, ValueError):
    pass


# parametric
class DegenerateMass(LeadtimeError, ValueError):
    pass


class DegenerateInput(LeadtimeError, ValueError):
    pass


# gpd
class TooFewExceedances(LeadtimeError, ValueError):
    pass


class AllStagesFailed(LeadtimeError, RuntimeError):
    pass


# smoother
class BasisTooSmall(LeadtimeError, ValueError):
    pass


# synth / pipeline
class InvalidSpec(LeadtimeError, ValueError):
    pass


class MissingStageOutput(LeadtimeError, FileNotFoundError):
    pass


class StageFailure(LeadtimeError, RuntimeError):
    def __init__(self, stage, cause):
        self.stage = stage
        self.cause = cause
        super().__init__(f"stage {stage!r} failed: {cause}")
