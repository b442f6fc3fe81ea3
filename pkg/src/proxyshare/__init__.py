"""Encrypted social content sharing with proxy-mediated key distribution.

Layers, bottom up:

    groups      safe-prime subgroup arithmetic and message encoding
    elgamal     multi-recipient encryption, shares, re-randomization
    blinding    per-viewer server-side blinding and revocation
    proxykeys   distribution keys and per-holder wrapping
    quorum      key-to-member assignment and coverage thresholds
    content     public/private/circle items, hybrid sealing
    server      relay service (REST + append-log storage)
    client      wallet, workflows, CLI, local gateway
"""

from . import blinding, content, elgamal, groups, proxykeys, quorum
from .errors import (
    CorruptWrappedKey,
    DecodeFailure,
    InfeasibleQuorum,
    ProxyShareError,
    ShareSetMismatch,
)
from .groups import GroupParams, KeyPair, standard_params

__all__ = [
    "blinding",
    "content",
    "elgamal",
    "groups",
    "proxykeys",
    "quorum",
    "GroupParams",
    "KeyPair",
    "standard_params",
    "ProxyShareError",
    "ShareSetMismatch",
    "DecodeFailure",
    "CorruptWrappedKey",
    "InfeasibleQuorum",
]

__version__ = "0.1.0"
