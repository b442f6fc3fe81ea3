"""Distribution keys and their per-holder wrapping.

A distribution key is an ordinary key pair (x, g^x) that content can be
encrypted under. In the simplest case it is just a user's own key pair
(the user id doubles as the key id and no wrapping is needed). A generated
key is handed to holders by Elgamal-wrapping the scalar x for each one:

    w0 = g^(r_a),   w1 = (g^a)^(r_a) * x   (mod p)

where g^a is the holder's public key. The same x can be wrapped for any
number of holders, and anyone who has unwrapped x may wrap it again for
someone else — redistribution is a holder's deliberate act, never
automatic.

The wrapping multiplies the scalar x into Z_p*, so x is kept in [1, q-1]
and unwrap rejects out-of-range results as corrupt.
"""

from __future__ import annotations

import random
import uuid
from dataclasses import dataclass

from .errors import CorruptWrappedKey
from .groups import (
    GroupElement,
    GroupParams,
    KeyPair,
    Scalar,
    exp_neg,
    from_hex,
    random_scalar,
    to_hex,
)


@dataclass(frozen=True)
class ProxyKey:
    """A distribution key: id, private scalar, public element."""

    key_id: str
    private: Scalar
    public: GroupElement


@dataclass(frozen=True)
class WrappedProxyKey:
    """The scalar of a distribution key, Elgamal-wrapped for one holder."""

    key_id: str
    holder_id: str
    w0: GroupElement
    w1: int  # (holder pk)^r_a * x mod p; a masked scalar, not a subgroup member

    def to_dict(self) -> dict:
        return {
            "key_id": self.key_id,
            "holder_id": self.holder_id,
            "w0": to_hex(self.w0),
            "w1": to_hex(self.w1),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "WrappedProxyKey":
        return cls(
            key_id=d["key_id"],
            holder_id=d["holder_id"],
            w0=from_hex(d["w0"]),
            w1=from_hex(d["w1"]),
        )


def gen_proxy_key(
    params: GroupParams,
    rng: random.Random | None = None,
    *,
    key_id: str | None = None,
    x: Scalar | None = None,
) -> ProxyKey:
    """Generate a fresh distribution key (``x`` forceable for tests)."""
    if x is None:
        x = random_scalar(params, rng)
    elif not 1 <= x < params.q:
        raise ValueError("key scalar out of range [1, q-1]")
    return ProxyKey(
        key_id=key_id if key_id is not None else uuid.uuid4().hex,
        private=x,
        public=pow(params.g, x, params.p),
    )


def alias_key(user_id: str, keypair: KeyPair) -> ProxyKey:
    """A user's own key pair acting as a distribution key: the user id is
    the key id and no wrapping is involved."""
    return ProxyKey(key_id=user_id, private=keypair.private, public=keypair.public)


def wrap(
    params: GroupParams,
    holder_public: GroupElement,
    x: Scalar,
    rng: random.Random | None = None,
    *,
    key_id: str,
    holder_id: str,
    r: Scalar | None = None,
) -> WrappedProxyKey:
    """Wrap the key scalar x for a holder's public key."""
    if not params.contains(holder_public):
        raise ValueError("holder public key is not in the subgroup")
    if not 1 <= x < params.q:
        raise ValueError("key scalar out of range [1, q-1]")
    if r is None:
        r = random_scalar(params, rng)
    return WrappedProxyKey(
        key_id=key_id,
        holder_id=holder_id,
        w0=pow(params.g, r, params.p),
        w1=pow(holder_public, r, params.p) * x % params.p,
    )


def unwrap(params: GroupParams, wrapped: WrappedProxyKey, holder_private: Scalar) -> Scalar:
    """Recover the key scalar: x = w1 * (w0^a)^(-1) mod p.

    Raises:
        CorruptWrappedKey: the result is outside [1, q-1], which means the
            wrap was damaged or the wrong private key was used on a tuple
            whose unmasking left the scalar range.
    """
    x = wrapped.w1 * exp_neg(params, wrapped.w0, holder_private) % params.p
    if not 1 <= x < params.q:
        raise CorruptWrappedKey(
            f"unwrapped value {x} outside scalar range for key {wrapped.key_id!r}"
        )
    return x
