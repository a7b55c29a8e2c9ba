"""Exception hierarchy for schmidt_forge."""


class SchmidtForgeError(Exception):
    """Base class for all library errors."""


class NormalizationError(SchmidtForgeError, ValueError):
    pass


class DimensionError(SchmidtForgeError, ValueError):
    pass


class ParameterError(SchmidtForgeError, ValueError):
    pass


class PreconditionError(SchmidtForgeError, ValueError):
    pass


class NoOpError(SchmidtForgeError, ValueError):
    """Raised when a reduction step is requested on a state that is already the target."""


class CapacityError(SchmidtForgeError, RuntimeError):
    pass


class ToleranceError(SchmidtForgeError, RuntimeError):
    pass


class StateMismatchError(SchmidtForgeError, ValueError):
    pass


class DegenerateOutcomeError(SchmidtForgeError, ValueError):
    """Both sides of a transferred measurement annihilate the state."""


class StateFormatError(SchmidtForgeError, ValueError):
    """Malformed JSON state document; ``field`` names the offending key."""

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field
        self.message = message
