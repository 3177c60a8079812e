"""Exception types shared across the toolkit."""


class GravitasError(Exception):
    """Base class for all toolkit errors."""


class ConfigShapeError(GravitasError):
    """A kinematic configuration has the wrong leg structure for an operation."""


class SuperluminalBoostError(GravitasError):
    """Requested boost velocity has |beta| >= 1."""


class BelowThresholdError(GravitasError):
    """Total invariant mass is below the final-state mass threshold."""


class PoleError(GravitasError):
    """An amplitude was evaluated too close to a propagator pole."""


class ContractMismatchError(GravitasError):
    """Closed-form numerator and tensor-contraction route disagree.

    Signals an implementation bug in the index algebra, not a physics
    condition.
    """


class SpectatorMismatchError(GravitasError):
    """Spectator momenta differ where a disconnected delta requires equality."""


class NoPoleCrossingError(GravitasError):
    """A kinematic path never crosses the mediator pole."""


class NonpositiveSeparationError(GravitasError):
    """Mean separation for the quadratized potential must be positive."""


class StepSizeError(GravitasError):
    """Stochastic integration step violates the accuracy guard."""
