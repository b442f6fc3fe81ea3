"""Per-viewer blinding of stored ciphertexts and revocation by deletion.

Instead of handing out a stored ciphertext (c0, c1), the server keeps a
secret pair (s, t) per (content, viewer) and serves

    c_u = c1 * t                      (the blinded payload)
    p_u = t * (g^a)^s * (g^b)^s ...   (the blinded unblinding token)

together with g^s and g^r (= c0). The viewer collects, from each key
holder, shares (g^r)^(-x) and (g^s)^(-x); the first set strips the
recipient factor off c_u leaving m*t, the second strips it off p_u leaving
t, and m = (m*t) / t. Deleting the stored (s, t) revokes the viewer:
the next fetch is blinded with fresh values and previously collected
shares no longer cancel.

The blinding factor t is sampled as g^tau so it stays inside the subgroup;
an unconstrained random t would leak whether m is a quadratic residue.
The server works only on c1, public keys, and its own randomness — it
never touches a private scalar.
"""

from __future__ import annotations

import random
import threading
import time
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .elgamal import Ciphertext, DecryptionShare
from .errors import ShareSetMismatch
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
class BlindingRecord:
    """Server-held secret pair for one (content, viewer); deleting it is
    the revocation mechanism."""

    content_id: str
    viewer_id: str
    s: Scalar
    t: GroupElement
    created_at: float

    def to_dict(self) -> dict:
        return {
            "content_id": self.content_id,
            "viewer_id": self.viewer_id,
            "s": to_hex(self.s),
            "t": to_hex(self.t),
            "created_at": self.created_at,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "BlindingRecord":
        return cls(
            content_id=d["content_id"],
            viewer_id=d["viewer_id"],
            s=from_hex(d["s"]),
            t=from_hex(d["t"]),
            created_at=d["created_at"],
        )


@dataclass(frozen=True)
class BlindedResponse:
    """What a viewer receives instead of the raw ciphertext."""

    c_u: GroupElement
    p_u: GroupElement
    g_s: GroupElement
    g_r: GroupElement
    group_label: str

    def to_dict(self) -> dict:
        return {
            "group_label": self.group_label,
            "c_u": to_hex(self.c_u),
            "p_u": to_hex(self.p_u),
            "g_s": to_hex(self.g_s),
            "g_r": to_hex(self.g_r),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "BlindedResponse":
        return cls(
            c_u=from_hex(d["c_u"]),
            p_u=from_hex(d["p_u"]),
            g_s=from_hex(d["g_s"]),
            g_r=from_hex(d["g_r"]),
            group_label=d["group_label"],
        )

    def fingerprint(self) -> str:
        """Identifies which blinding secrets produced this response; shares
        collected for one fingerprint do not apply to another."""
        return f"{to_hex(self.g_r)}:{to_hex(self.g_s)}"


@dataclass(frozen=True)
class UnblindShares:
    """Share pairs for one unblinding: one (g^r)-share and one (g^s)-share
    per recipient key, attributed by the same contributor ids."""

    r_shares: tuple[DecryptionShare, ...]
    s_shares: tuple[DecryptionShare, ...]

    def __post_init__(self):
        r_ids = sorted(s.contributor for s in self.r_shares)
        s_ids = sorted(s.contributor for s in self.s_shares)
        if r_ids != s_ids:
            raise ShareSetMismatch(
                "r-shares and s-shares name different contributors",
                missing=tuple(set(r_ids) ^ set(s_ids)),
            )

    def contributors(self) -> frozenset[str]:
        return frozenset(s.contributor for s in self.r_shares)


def apply_blinding(
    params: GroupParams,
    ct: Ciphertext,
    recipient_publics: Sequence[GroupElement],
    s: Scalar,
    t: GroupElement,
) -> BlindedResponse:
    """Deterministic core: blind ``ct`` with a known (s, t) pair.

    Used directly when replaying a stored record so repeated fetches return
    an identical response until the record is deleted.
    """
    if not recipient_publics:
        raise ValueError("recipient key list is empty")
    combined_s = pow(element_product(params, recipient_publics), s, params.p)
    return BlindedResponse(
        c_u=ct.c1 * t % params.p,
        p_u=t * combined_s % params.p,
        g_s=pow(params.g, s, params.p),
        g_r=ct.c0,
        group_label=params.label,
    )


def blind(
    params: GroupParams,
    ct: Ciphertext,
    recipient_publics: Sequence[GroupElement],
    rng: random.Random | None = None,
    *,
    content_id: str = "",
    viewer_id: str = "",
    s: Scalar | None = None,
    tau: Scalar | None = None,
) -> tuple[BlindedResponse, BlindingRecord]:
    """Blind a ciphertext with fresh secrets, returning the record to store.

    ``s`` and ``tau`` (with t = g^tau) can be forced for tests; both are
    fresh uniform scalars otherwise and successive calls are independent.
    """
    if s is None:
        s = random_scalar(params, rng)
    if tau is None:
        tau = random_scalar(params, rng)
    t = pow(params.g, tau, params.p)
    record = BlindingRecord(
        content_id=content_id, viewer_id=viewer_id, s=s, t=t, created_at=time.time()
    )
    return apply_blinding(params, ct, recipient_publics, s, t), record


def unblind(
    params: GroupParams, resp: BlindedResponse, shares: UnblindShares
) -> GroupElement:
    """Recover the message element from a blinded response.

    Computes m*t from c_u and the r-shares, t from p_u and the s-shares,
    and returns their quotient. The caller is expected to validate the
    decoded plaintext structurally; wrong or stale shares yield a uniformly
    wrong element, not an error here (unless the result leaves the
    subgroup, which indicates malformed inputs).
    """
    if not shares.r_shares:
        raise ShareSetMismatch("no shares supplied")
    mt = resp.c_u * element_product(params, (x.value for x in shares.r_shares)) % params.p
    t = resp.p_u * element_product(params, (x.value for x in shares.s_shares)) % params.p
    m = mt * exp_neg(params, t, 1) % params.p
    if not params.contains(m):
        raise ShareSetMismatch("unblinded value left the subgroup; inputs malformed")
    return m


def make_unblind_shares(
    params: GroupParams,
    resp_g_r: GroupElement,
    resp_g_s: GroupElement,
    private: Scalar,
    contributor: str,
) -> tuple[DecryptionShare, DecryptionShare]:
    """A key holder's contribution for one blinded response: the
    (g^r)-share and the (g^s)-share under the same private scalar."""
    r_share = DecryptionShare(value=exp_neg(params, resp_g_r, private), contributor=contributor)
    s_share = DecryptionShare(value=exp_neg(params, resp_g_s, private), contributor=contributor)
    return r_share, s_share


@dataclass
class BlindingRegistry:
    """Thread-safe map of (content_id, viewer_id) -> BlindingRecord.

    ``get_or_create`` serializes record creation so concurrent first
    fetches converge on a single record; ``revoke`` deletes it.
    """

    _records: dict[tuple[str, str], BlindingRecord] = field(default_factory=dict)
    _lock: threading.Lock = field(default_factory=threading.Lock)

    def get_or_create(
        self,
        params: GroupParams,
        content_id: str,
        viewer_id: str,
        rng: random.Random | None = None,
    ) -> BlindingRecord:
        key = (content_id, viewer_id)
        with self._lock:
            record = self._records.get(key)
            if record is None:
                s = random_scalar(params, rng)
                t = pow(params.g, random_scalar(params, rng), params.p)
                record = BlindingRecord(
                    content_id=content_id,
                    viewer_id=viewer_id,
                    s=s,
                    t=t,
                    created_at=time.time(),
                )
                self._records[key] = record
            return record

    def get(self, content_id: str, viewer_id: str) -> BlindingRecord | None:
        with self._lock:
            return self._records.get((content_id, viewer_id))

    def put(self, record: BlindingRecord) -> None:
        with self._lock:
            self._records[(record.content_id, record.viewer_id)] = record

    def revoke(self, content_id: str, viewer_id: str) -> bool:
        """Delete the record; returns whether one existed. The next
        ``get_or_create`` for the pair draws fresh secrets."""
        with self._lock:
            return self._records.pop((content_id, viewer_id), None) is not None

    def records(self) -> list[BlindingRecord]:
        with self._lock:
            return list(self._records.values())


def revoke(record_store: BlindingRegistry, content_id: str, viewer_id: str) -> bool:
    """Functional alias for :meth:`BlindingRegistry.revoke`."""
    return record_store.revoke(content_id, viewer_id)


def combined_public(params: GroupParams, publics: Iterable[GroupElement]) -> GroupElement:
    """Product of recipient public keys, as used for re-randomization."""
    return element_product(params, publics)
