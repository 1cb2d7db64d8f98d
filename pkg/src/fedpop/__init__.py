"""Federated learning rounds with masked aggregation, threshold-signature
participation proofs, and an OPRF-based anonymous Prove protocol."""

from .encoding import FixedPointParams, ModelVector, decode_fixed_point, encode_fixed_point
from .group import GROUP, GroupElement, GroupParams, hash_to_group
from .hashing import hash_to_digest, prg_expand
from .oprf import BlindState, OprfKey, oprf_blind, oprf_direct, oprf_evaluate, oprf_unblind
from .protocol import (
    ClientKeyMaterial,
    GlobalToken,
    ProofBundle,
    RevealPackage,
    RoundOutcome,
    ServerKeyMaterial,
    generate_phase,
    model_digest,
    prove_phase,
    reveal,
    setup_phase,
)
from .rng import Drbg
from .secagg import SAClientState, SAParams, SAServerState, sa_aggregate, sa_protect, sa_setup
from .shamir import ShamirShare, shamir_reconstruct, shamir_share
from .simulator import DropoutSchedule, Transcript, Transport, run_round, sample_dropout
from .threshold import (
    SignerKeys,
    SigningSession,
    ThresholdSignature,
    ts_keygen,
    ts_sign,
    ts_sign_agg,
    ts_verify,
)
from .trainer import TrainerSpec, local_train

__version__ = "0.1.0"

__all__ = [
    "BlindState",
    "ClientKeyMaterial",
    "Drbg",
    "DropoutSchedule",
    "FixedPointParams",
    "GROUP",
    "GlobalToken",
    "GroupElement",
    "GroupParams",
    "ModelVector",
    "OprfKey",
    "ProofBundle",
    "RevealPackage",
    "RoundOutcome",
    "SAClientState",
    "SAParams",
    "SAServerState",
    "ServerKeyMaterial",
    "ShamirShare",
    "SignerKeys",
    "SigningSession",
    "ThresholdSignature",
    "TrainerSpec",
    "Transcript",
    "Transport",
    "decode_fixed_point",
    "encode_fixed_point",
    "generate_phase",
    "hash_to_digest",
    "hash_to_group",
    "local_train",
    "model_digest",
    "oprf_blind",
    "oprf_direct",
    "oprf_evaluate",
    "oprf_unblind",
    "prg_expand",
    "prove_phase",
    "reveal",
    "run_round",
    "sa_aggregate",
    "sa_protect",
    "sa_setup",
    "sample_dropout",
    "setup_phase",
    "shamir_reconstruct",
    "shamir_share",
    "ts_keygen",
    "ts_sign",
    "ts_sign_agg",
    "ts_verify",
]
