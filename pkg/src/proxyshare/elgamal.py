"""Multi-recipient Elgamal encryption with share-based decryption and
public re-randomization.

A message element m encrypted to public keys g^a, g^b, ... is

    c0 = g^r,   c1 = m * (g^a)^r * (g^b)^r * ...  (mod p)

so the ciphertext binds all recipients at once without anyone holding the
summed secret a + b + ... . Decryption is cooperative: each key holder
contributes the share (c0)^(-x), and the product of c1 with every share
recovers m. A missing or wrong share leaves the result off by a uniform
group factor.

Anyone who knows the combined public key can re-randomize a ciphertext,

    c0' = c0 * g^w,   c1' = c1 * (g^a * g^b * ...)^w,

which changes both components while decrypting to the same m.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Iterable, Sequence

from .groups import (
    GroupElement,
    GroupParams,
    Scalar,
    element_product,
    exp_neg,
    from_hex,
    random_scalar,
    to_hex,
)


@dataclass(frozen=True)
class Ciphertext:
    """Elgamal pair (c0, c1); both components are subgroup members."""

    c0: GroupElement
    c1: GroupElement
    group_label: str

    def to_dict(self) -> dict:
        return {"group_label": self.group_label, "c0": to_hex(self.c0), "c1": to_hex(self.c1)}

    @classmethod
    def from_dict(cls, d: dict) -> "Ciphertext":
        return cls(c0=from_hex(d["c0"]), c1=from_hex(d["c1"]), group_label=d["group_label"])


@dataclass(frozen=True)
class DecryptionShare:
    """One key holder's contribution (c0)^(-x) to a cooperative decryption.

    ``contributor`` names the recipient key the share answers for (the
    distribution key id; for a user's own key this is just the user id) so
    a combiner can tell which keys are still missing and which holder a bad
    share came from.
    """

    value: GroupElement
    contributor: str

    def to_dict(self) -> dict:
        return {"contributor": self.contributor, "value": to_hex(self.value)}

    @classmethod
    def from_dict(cls, d: dict) -> "DecryptionShare":
        return cls(value=from_hex(d["value"]), contributor=d["contributor"])


def encrypt(
    params: GroupParams,
    recipients: Sequence[GroupElement],
    m: GroupElement,
    rng: random.Random | None = None,
    *,
    r: Scalar | None = None,
) -> Ciphertext:
    """Encrypt a subgroup element for one or more recipient public keys.

    Args:
        recipients: public keys; all must be subgroup members.
        m: message element (use :func:`proxyshare.groups.encode_message`
            to map integers in).
        r: force the encryption scalar (tests only); fresh uniform scalar
            otherwise.

    Raises:
        ValueError: empty recipient list, or m / a recipient outside the
            subgroup.
    """
    if not recipients:
        raise ValueError("recipient list is empty")
    if not params.contains(m):
        raise ValueError("message element is not in the subgroup")
    for pk in recipients:
        if not params.contains(pk):
            raise ValueError("recipient public key is not in the subgroup")
    if r is None:
        r = random_scalar(params, rng)
    combined = element_product(params, recipients)
    return Ciphertext(
        c0=pow(params.g, r, params.p),
        c1=m * pow(combined, r, params.p) % params.p,
        group_label=params.label,
    )


def make_share(
    params: GroupParams, c0: GroupElement, private: Scalar, contributor: str = ""
) -> DecryptionShare:
    """Compute the decryption share (c0)^(-private)."""
    if not params.contains(c0):
        raise ValueError("c0 is not in the subgroup")
    return DecryptionShare(value=exp_neg(params, c0, private), contributor=contributor)


def combine_decrypt(
    params: GroupParams, ct: Ciphertext, shares: Iterable[DecryptionShare]
) -> GroupElement:
    """Multiply c1 by every share; equals m when the share set is complete.

    Shares may arrive in any order. Duplicate contributors are rejected:
    a correct combination uses exactly one share per recipient key.
    """
    shares = list(shares)
    if not shares:
        raise ValueError("share list is empty")
    seen = set()
    for s in shares:
        if s.contributor in seen:
            raise ValueError(f"duplicate share from contributor {s.contributor!r}")
        seen.add(s.contributor)
    return ct.c1 * element_product(params, (s.value for s in shares)) % params.p


def rerandomize(
    params: GroupParams,
    ct: Ciphertext,
    combined_public: GroupElement,
    rng: random.Random | None = None,
    *,
    w: Scalar | None = None,
) -> Ciphertext:
    """Refresh a ciphertext's randomness without touching the plaintext.

    ``combined_public`` must be the product of the recipient public keys
    used at encryption. Needs no private key and no knowledge of the
    original encryption scalar.
    """
    if w is None:
        w = random_scalar(params, rng)
    return Ciphertext(
        c0=ct.c0 * pow(params.g, w, params.p) % params.p,
        c1=ct.c1 * pow(combined_public, w, params.p) % params.p,
        group_label=ct.group_label,
    )
