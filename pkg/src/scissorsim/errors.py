"""Exception types raised by the simulator."""


class ScissorsimError(ValueError):
    """Base class for all simulator errors."""


class CutoffExceededError(ScissorsimError):
    """A creation operator pushed a component past the photon-number cutoff."""


class RegistryMismatchError(ScissorsimError):
    pass


class UnknownModeError(ScissorsimError, KeyError):
    pass


class NormalizationError(ScissorsimError):
    """Zero state where a norm was required, or amplitudes that are not unit norm."""


class NotUnitaryError(ScissorsimError):
    pass


class PermutationError(ScissorsimError):
    pass


class OverlappingDetectorsError(ScissorsimError):
    pass


class SubspaceViolationError(ScissorsimError):
    """State has weight outside the single-photon subspace of the mixer modes."""


class BasisTooLargeError(ScissorsimError):
    pass


class EmptyEnsembleError(ScissorsimError):
    pass
