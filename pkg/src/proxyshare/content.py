"""Content items: public, private, and circle posts.

Short protected payloads are carried directly inside an Elgamal element:
the bytes become a big-endian integer (must land in [1, q]), get mapped
into the subgroup, and the ciphertext is stored as the item payload. The
original byte length is kept on the item so decoding restores leading
zero bytes.

Anything longer goes through the hybrid path: a fresh 256-bit key
encrypts the payload with AES-GCM, and the key itself rides in a single
Elgamal element (so the group must satisfy q > 2^256; the tiny test group
rejects hybrid payloads as oversized). The GCM tag means tampering fails
authentication instead of producing garbage, and a wrong key element
recovered from stale shares fails the same way.

Circle posts share one symmetric key per epoch. The epoch key is Elgamal-
encrypted under all of the circle's distribution keys and a copy of that
ciphertext travels on every post, so reading a circle post is the same
unblind flow as any other protected item.
"""

from __future__ import annotations

import base64
import json
import random
import uuid
from dataclasses import dataclass, replace
from enum import Enum
from typing import Mapping, Sequence

from cryptography.exceptions import InvalidTag
from cryptography.hazmat.primitives.ciphers.aead import AESGCM

from . import elgamal
from .elgamal import Ciphertext
from .errors import DecodeFailure
from .groups import GroupElement, GroupParams, decode_message, encode_message
from .quorum import QuorumAssignment

SYM_KEY_BYTES = 32
_NONCE_BYTES = 12
# payloads up to this size may use the short path; above it the client
# always goes hybrid for uniformity
SHORT_PATH_LIMIT = 64

_SYSTEM_RNG = random.SystemRandom()


class Visibility(str, Enum):
    PUBLIC = "public"
    PRIVATE = "private"
    CIRCLE = "circle"


@dataclass(frozen=True)
class ContentItem:
    """One stored post.

    payload().. public: the plaintext bytes; short protected: the serialized
    Elgamal ciphertext; hybrid/circle: nonce + AES-GCM ciphertext with the
    key element in ``wrapped_key``.
    """

    content_id: str
    owner_id: str
    visibility: Visibility
    payload: bytes
    group_label: str
    wrapped_key: Ciphertext | None = None
    proxy_key_ids: tuple[str, ...] = ()
    circle_id: str | None = None
    epoch: int | None = None
    short_len: int | None = None

    def __post_init__(self):
        if self.visibility is Visibility.PUBLIC:
            if self.wrapped_key is not None or self.proxy_key_ids:
                raise ValueError("public items carry no key material")
        else:
            if self.wrapped_key is None and self.short_len is None:
                raise ValueError("protected items need a key ciphertext or a short payload")

    @property
    def is_short(self) -> bool:
        return self.visibility is not Visibility.PUBLIC and self.wrapped_key is None

    def elgamal_unit(self) -> Ciphertext:
        """The Elgamal ciphertext the blinding machinery operates on."""
        if self.is_short:
            return _parse_ct_payload(self.payload)
        if self.wrapped_key is None:
            raise ValueError("public items have no ciphertext")
        return self.wrapped_key

    def to_wire(self) -> dict:
        return {
            "content_id": self.content_id,
            "owner_id": self.owner_id,
            "visibility": self.visibility.value,
            "payload_b64": base64.b64encode(self.payload).decode(),
            "group_label": self.group_label,
            "wrapped_key": self.wrapped_key.to_dict() if self.wrapped_key else None,
            "proxy_key_ids": list(self.proxy_key_ids),
            "circle_id": self.circle_id,
            "epoch": self.epoch,
            "short_len": self.short_len,
        }

    @classmethod
    def from_wire(cls, d: dict) -> "ContentItem":
        return cls(
            content_id=d["content_id"],
            owner_id=d["owner_id"],
            visibility=Visibility(d["visibility"]),
            payload=base64.b64decode(d["payload_b64"]),
            group_label=d["group_label"],
            wrapped_key=Ciphertext.from_dict(d["wrapped_key"]) if d.get("wrapped_key") else None,
            proxy_key_ids=tuple(d.get("proxy_key_ids") or ()),
            circle_id=d.get("circle_id"),
            epoch=d.get("epoch"),
            short_len=d.get("short_len"),
        )


def _serialize_ct_payload(ct: Ciphertext) -> bytes:
    return json.dumps(ct.to_dict(), separators=(",", ":")).encode()


def _parse_ct_payload(payload: bytes) -> Ciphertext:
    return Ciphertext.from_dict(json.loads(payload.decode()))


def bytes_to_int(data: bytes) -> int:
    return int.from_bytes(data, "big")


def int_to_bytes(value: int, length: int) -> bytes:
    try:
        return value.to_bytes(length, "big")
    except OverflowError:
        raise DecodeFailure("recovered integer does not fit the recorded length") from None


def seal_short(
    params: GroupParams,
    plaintext: bytes,
    proxy_keys: Mapping[str, GroupElement],
    owner_id: str,
    rng: random.Random | None = None,
    *,
    visibility: Visibility = Visibility.PRIVATE,
    content_id: str | None = None,
) -> ContentItem:
    """Encrypt a short payload directly as one Elgamal element.

    Args:
        proxy_keys: key id -> public element; all listed keys must
            contribute shares at read time.

    Raises:
        ValueError: empty plaintext, zero-valued plaintext, or a payload
            whose integer form exceeds q (use :func:`seal_large`).
    """
    if not proxy_keys:
        raise ValueError("at least one distribution key is required")
    m_int = bytes_to_int(plaintext)
    if m_int < 1:
        raise ValueError("plaintext encodes to an integer below 1")
    if m_int > params.q:
        raise ValueError("payload too long for the short path; use seal_large")
    element = encode_message(params, m_int)
    ct = elgamal.encrypt(params, list(proxy_keys.values()), element, rng)
    return ContentItem(
        content_id=content_id or uuid.uuid4().hex,
        owner_id=owner_id,
        visibility=visibility,
        payload=_serialize_ct_payload(ct),
        group_label=params.label,
        proxy_key_ids=tuple(proxy_keys.keys()),
        short_len=len(plaintext),
    )


def decode_short(params: GroupParams, element: GroupElement, short_len: int) -> bytes:
    """Decode the plaintext bytes from a recovered message element.

    Raises:
        DecodeFailure: the element decodes to an integer that cannot have
            produced a payload of the recorded length — the signature of
            stale or corrupted shares.
    """
    m_int = decode_message(params, element)
    if m_int < 1:
        raise DecodeFailure("recovered integer below the message range")
    return int_to_bytes(m_int, short_len)


def open_short(params: GroupParams, item: ContentItem, element: GroupElement) -> bytes:
    if item.short_len is None:
        raise ValueError("item was not sealed on the short path")
    return decode_short(params, element, item.short_len)


def _aead_seal(key: bytes, plaintext: bytes, aad: bytes, rng: random.Random) -> bytes:
    nonce = rng.randbytes(_NONCE_BYTES)
    return nonce + AESGCM(key).encrypt(nonce, plaintext, aad)


def _aead_open(key: bytes, blob: bytes, aad: bytes) -> bytes:
    if len(blob) < _NONCE_BYTES + 16:
        raise DecodeFailure("hybrid payload truncated")
    try:
        return AESGCM(key).decrypt(blob[:_NONCE_BYTES], blob[_NONCE_BYTES:], aad)
    except InvalidTag:
        raise DecodeFailure("authentication failed on the symmetric layer") from None


def _fresh_sym_key(rng: random.Random) -> bytes:
    while True:
        key = rng.randbytes(SYM_KEY_BYTES)
        if bytes_to_int(key) != 0:
            return key


def seal_large(
    params: GroupParams,
    plaintext: bytes,
    proxy_keys: Mapping[str, GroupElement],
    owner_id: str,
    rng: random.Random | None = None,
    *,
    visibility: Visibility = Visibility.PRIVATE,
    content_id: str | None = None,
) -> ContentItem:
    """Hybrid path: AES-GCM payload under a fresh key, key element wrapped
    with the same Elgamal machinery as a short item."""
    if not proxy_keys:
        raise ValueError("at least one distribution key is required")
    rng = rng or _SYSTEM_RNG
    cid = content_id or uuid.uuid4().hex
    key = _fresh_sym_key(rng)
    key_int = bytes_to_int(key)
    if key_int > params.q:
        raise ValueError("group too small to carry a symmetric key")
    key_element = encode_message(params, key_int)
    wrapped = elgamal.encrypt(params, list(proxy_keys.values()), key_element, rng)
    return ContentItem(
        content_id=cid,
        owner_id=owner_id,
        visibility=visibility,
        payload=_aead_seal(key, plaintext, cid.encode(), rng),
        group_label=params.label,
        wrapped_key=wrapped,
        proxy_key_ids=tuple(proxy_keys.keys()),
    )


def element_to_sym_key(params: GroupParams, key_element: GroupElement) -> bytes:
    """Recover the symmetric key bytes from the unwrapped key element.

    Raises:
        DecodeFailure: the element decodes to an integer wider than the key
            length — wrong or stale shares.
    """
    return int_to_bytes(decode_message(params, key_element), SYM_KEY_BYTES)


def open_large(params: GroupParams, item: ContentItem, key_element: GroupElement) -> bytes:
    """Recover a hybrid payload from the unwrapped key element.

    Raises:
        DecodeFailure: wrong key element (stale shares) or tampered
            ciphertext; the authentication tag fails before any plaintext
            is released.
    """
    if item.wrapped_key is None:
        raise ValueError("item has no symmetric layer")
    key = element_to_sym_key(params, key_element)
    return _aead_open(key, item.payload, item.content_id.encode())


def open_large_with_key(item: ContentItem, key: bytes) -> bytes:
    """Recover a hybrid payload when the symmetric key itself is known
    (circle members who already collected the epoch key)."""
    return _aead_open(key, item.payload, item.content_id.encode())


def open_large_with_key_bytes(key: bytes, payload: bytes, content_id: str) -> bytes:
    """Same as :func:`open_large_with_key` for callers holding the raw
    wire fields rather than a ContentItem."""
    return _aead_open(key, payload, content_id.encode())


@dataclass(frozen=True)
class Circle:
    """A group of users sharing one symmetric key per epoch.

    The epoch key is Elgamal-encrypted under the circle's distribution
    keys; the quorum assignment records which member holds which key, with
    ``quorum_member_ids[i]`` naming assignment index i.
    """

    circle_id: str
    owner_id: str
    name: str
    member_ids: tuple[str, ...]
    proxy_key_ids: tuple[str, ...]
    quorum_member_ids: tuple[str, ...]
    key_assignment: tuple[tuple[int, ...], ...]  # per quorum member: key indices held
    epoch: int
    epoch_key_ct: Ciphertext

    def __post_init__(self):
        if not set(self.quorum_member_ids) <= set(self.member_ids):
            raise ValueError("quorum members must be circle members")

    def with_member(self, user_id: str) -> "Circle":
        if user_id in self.member_ids:
            return self
        return replace(self, member_ids=self.member_ids + (user_id,))

    def to_wire(self) -> dict:
        return {
            "circle_id": self.circle_id,
            "owner_id": self.owner_id,
            "name": self.name,
            "member_ids": list(self.member_ids),
            "proxy_key_ids": list(self.proxy_key_ids),
            "quorum_member_ids": list(self.quorum_member_ids),
            "key_assignment": [list(h) for h in self.key_assignment],
            "epoch": self.epoch,
            "epoch_key_ct": self.epoch_key_ct.to_dict(),
        }

    @classmethod
    def from_wire(cls, d: dict) -> "Circle":
        return cls(
            circle_id=d["circle_id"],
            owner_id=d["owner_id"],
            name=d["name"],
            member_ids=tuple(d["member_ids"]),
            proxy_key_ids=tuple(d["proxy_key_ids"]),
            quorum_member_ids=tuple(d["quorum_member_ids"]),
            key_assignment=tuple(tuple(h) for h in d["key_assignment"]),
            epoch=d["epoch"],
            epoch_key_ct=Ciphertext.from_dict(d["epoch_key_ct"]),
        )


def assignment_to_circle_keys(
    assignment: QuorumAssignment, proxy_key_ids: Sequence[str]
) -> tuple[tuple[int, ...], ...]:
    if assignment.k_keys != len(proxy_key_ids):
        raise ValueError("assignment key count does not match key ids")
    return tuple(tuple(sorted(hand)) for hand in assignment.assignment)


def make_circle_key(
    params: GroupParams,
    proxy_publics: Mapping[str, GroupElement],
    rng: random.Random | None = None,
) -> tuple[Ciphertext, bytes]:
    """Fresh symmetric circle key plus its Elgamal ciphertext under all of
    the circle's distribution keys."""
    rng = rng or _SYSTEM_RNG
    key = _fresh_sym_key(rng)
    key_int = bytes_to_int(key)
    if key_int > params.q:
        raise ValueError("group too small to carry a symmetric key")
    element = encode_message(params, key_int)
    ct = elgamal.encrypt(params, list(proxy_publics.values()), element, rng)
    return ct, key


def rotate_circle_key(
    params: GroupParams,
    circle: Circle,
    proxy_publics: Mapping[str, GroupElement],
    rng: random.Random | None = None,
) -> tuple[Circle, bytes]:
    """Advance the circle one epoch with a fresh key.

    Posts sealed after rotation need the new key; holders of the old epoch
    key cannot read them without collecting shares again.
    """
    if tuple(proxy_publics.keys()) != circle.proxy_key_ids:
        raise ValueError("publics must match the circle's key ids in order")
    ct, key = make_circle_key(params, proxy_publics, rng)
    return replace(circle, epoch=circle.epoch + 1, epoch_key_ct=ct), key


def seal_circle_post(
    params: GroupParams,
    circle: Circle,
    circle_key: bytes,
    plaintext: bytes,
    owner_id: str,
    rng: random.Random | None = None,
    *,
    content_id: str | None = None,
) -> ContentItem:
    """Seal a post under the circle's current epoch key. The epoch key
    ciphertext is copied onto the item so readers unblind it like any
    other protected content."""
    rng = rng or _SYSTEM_RNG
    cid = content_id or uuid.uuid4().hex
    return ContentItem(
        content_id=cid,
        owner_id=owner_id,
        visibility=Visibility.CIRCLE,
        payload=_aead_seal(circle_key, plaintext, cid.encode(), rng),
        group_label=params.label,
        wrapped_key=circle.epoch_key_ct,
        proxy_key_ids=circle.proxy_key_ids,
        circle_id=circle.circle_id,
        epoch=circle.epoch,
    )
