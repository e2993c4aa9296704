"""Exception and warning types.

Every error carries a short machine-readable ``code`` so the CLI and the JSON
reports can surface failures without parsing messages.
"""


class CarlemanError(Exception):
    code = "error"

    def __init__(self, message=""):
        super().__init__(f"{self.code}: {message}" if message else self.code)
        self.detail = message


class InvalidSequence(CarlemanError):
    code = "invalid-sequence"


class PhiDivergent(CarlemanError):
    code = "phi-divergent"


class PhiRange(CarlemanError):
    code = "phi-range"


class SubsequenceHorizon(CarlemanError):
    """The subsequence recursion ran past the sequence horizon.

    ``achieved`` holds the indices found before the failure, so
    ``len(achieved) - 1`` is the largest reachable J.  Builders attach the
    partially built function as ``partial`` when they can.
    """

    code = "subsequence-horizon"

    def __init__(self, message, achieved):
        super().__init__(message)
        self.achieved = list(achieved)
        self.partial = None

    @property
    def max_j(self):
        return len(self.achieved) - 1


class PrecisionOverflow(CarlemanError):
    code = "precision-overflow"


class NotInvertible(CarlemanError):
    code = "not-invertible"


class CompositionConstantTerm(CarlemanError):
    code = "composition-constant-term"


class WrongPipeline(CarlemanError):
    code = "wrong-pipeline"


class ConfigInvalid(CarlemanError):
    code = "config-invalid"

    def __init__(self, field, reason):
        super().__init__(f"{field} ({reason})")
        self.field = field
        self.reason = reason

    def __str__(self):
        return f"config-invalid: {self.field}: {self.reason}"


class WideningDegenerate(UserWarning):
    """Widening input looks non-quasi-analytic (the mu partial sums stall)."""

    code = "widening-degenerate"
