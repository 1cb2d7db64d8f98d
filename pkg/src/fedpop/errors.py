"""Exception taxonomy shared by all protocol modules."""


class FedPopError(Exception):
    """Base class for every error raised by this package."""


class ParameterError(FedPopError, ValueError):
    """A caller-supplied parameter violates a precondition."""


class DeserializationError(FedPopError, ValueError):
    """A byte string does not decode to a valid object."""


class MembershipError(FedPopError):
    """A value claimed to be a group element or participant is not."""


class StateError(FedPopError):
    """An operation was invoked on a state machine in the wrong state."""


class SingleUseError(StateError):
    """A single-use object (nonce, blind state) was used twice."""


class ReconstructionError(FedPopError):
    """Secret reconstruction failed (too few shares or duplicates)."""


class EncodingError(ParameterError):
    """Fixed-point encoding parameters are inconsistent."""


class DecodeError(FedPopError):
    """A field element lies outside the decodable window; masks were not
    fully removed."""


class ThresholdError(FedPopError):
    """Fewer signers or partial signatures than the threshold requires."""


class InvalidPartialError(FedPopError):
    """A partial signature failed verification.  Carries the culprit index."""

    def __init__(self, index: int, message: str = ""):
        self.index = index
        super().__init__(message or f"invalid partial signature from signer {index}")


class UnmaskableRoundError(FedPopError):
    """Recovery shares are insufficient to remove every mask; the whole
    aggregation aborts with no partial output."""


class WitnessError(FedPopError):
    """Group-witness derivation is missing a required contribution."""


class RoundLookupError(FedPopError, KeyError):
    """A round id is unknown to the server's registry."""


class SimulatorError(FedPopError):
    """The in-process transport detected a deadlock or a protocol that
    cannot make progress."""
