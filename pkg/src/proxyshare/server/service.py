"""Domain logic of the relay service, framework-free.

The server stores ciphertexts and public values only. Protected content is
never served raw: viewers get the per-viewer blinded form, and deleting
the stored blinding secrets revokes a viewer. Share requests are relayed
through a server-side inbox because key holders may be offline when a
reader needs them; the server itself is assumed honest about keeping the
blinding secrets it was asked to keep.

Every mutation accepts an optional idempotency key; a retry with the same
key replays the recorded response instead of re-executing.
"""

from __future__ import annotations

import hashlib
import random
import secrets
import time
import uuid
from typing import Callable

from .. import blinding, groups
from ..content import ContentItem, Visibility
from ..elgamal import Ciphertext
from ..groups import GroupParams, from_hex, to_hex
from .store import MemoryStore


class ApiError(Exception):
    """Maps one-to-one onto the wire error object {code, message}."""

    def __init__(self, status: int, code: str, message: str):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message


def _bad(message: str) -> ApiError:
    return ApiError(400, "bad_request", message)


def _token_hash(token: str) -> str:
    return hashlib.sha256(token.encode()).hexdigest()


class SocialService:
    def __init__(
        self,
        store: MemoryStore,
        params: GroupParams,
        rng: random.Random | None = None,
    ) -> None:
        self.store = store
        self.params = params
        self.rng = rng or random.SystemRandom()

    # -- auth ----------------------------------------------------------------

    def register(self, display_name: str, public_key_hex: str, request_key: str | None = None) -> dict:
        # never routed through the idempotency cache: the response carries
        # the raw bearer token, which must not land in the store. A retried
        # registration trips the duplicate-public-key check instead.
        public = self._parse_element(public_key_hex, "public_key")
        with self.store.lock:
            for user in self.store.values("users"):
                if user["public_key"] == to_hex(public):
                    raise ApiError(409, "duplicate_key", "public key already registered")
            user_id = uuid.uuid4().hex[:12]
            token = secrets.token_hex(16)
            self.store.put(
                "users",
                user_id,
                {
                    "user_id": user_id,
                    "display_name": display_name,
                    "public_key": to_hex(public),
                    "token_hash": _token_hash(token),
                    "group_label": self.params.label,
                },
            )
            return {"user_id": user_id, "token": token}

    def authenticate(self, token: str | None) -> dict:
        if not token:
            raise ApiError(401, "unauthenticated", "missing bearer token")
        token_hash = _token_hash(token)
        with self.store.lock:
            for user in self.store.values("users"):
                if user["token_hash"] == token_hash:
                    return user
        raise ApiError(401, "unauthenticated", "unknown token")

    def directory(self) -> list[dict]:
        return [
            {
                "user_id": u["user_id"],
                "display_name": u["display_name"],
                "public_key": u["public_key"],
            }
            for u in self.store.values("users")
        ]

    def get_user(self, user_id: str) -> dict:
        user = self.store.get("users", user_id)
        if user is None:
            raise ApiError(404, "unknown_user", f"no user {user_id!r}")
        return {k: user[k] for k in ("user_id", "display_name", "public_key")}

    # -- distribution keys -----------------------------------------------------

    def register_proxy_key(
        self,
        caller: dict,
        key_id: str,
        public_hex: str,
        wraps: list[dict] | None = None,
        request_key: str | None = None,
    ) -> dict:
        public = self._parse_element(public_hex, "public")
        with self.store.lock:
            def run() -> dict:
                existing = self.store.get("proxy_keys", key_id)
                if existing is not None and existing["public"] != to_hex(public):
                    raise ApiError(409, "duplicate_key_id", f"key id {key_id!r} taken")
                self.store.put(
                    "proxy_keys",
                    key_id,
                    {"key_id": key_id, "public": to_hex(public), "owner_id": caller["user_id"]},
                )
                self._store_wraps(key_id, wraps or [])
                return {"key_id": key_id}

            return self._idempotent(caller["user_id"], request_key, run)

    def add_wraps(
        self, caller: dict, key_id: str, wraps: list[dict], request_key: str | None = None
    ) -> dict:
        with self.store.lock:
            record = self.store.get("proxy_keys", key_id)
            if record is None:
                raise ApiError(404, "unknown_key", f"no distribution key {key_id!r}")
            if not self._may_distribute(caller["user_id"], key_id, record):
                raise ApiError(403, "forbidden", "only the key owner or a holder may re-wrap")

            def run() -> dict:
                self._store_wraps(key_id, wraps)
                return {"key_id": key_id, "added": len(wraps)}

            return self._idempotent(caller["user_id"], request_key, run)

    def _store_wraps(self, key_id: str, wraps: list[dict]) -> None:
        for wrap in wraps:
            for field in ("w0", "w1"):
                from_hex(wrap[field])  # validate canonical hex
            holder = wrap["holder_id"]
            if self.store.get("users", holder) is None:
                raise _bad(f"wrap names unknown holder {holder!r}")
            entry = self.store.get("wraps", key_id) or {"key_id": key_id, "holders": {}}
            entry["holders"][holder] = {
                "key_id": key_id,
                "holder_id": holder,
                "w0": wrap["w0"],
                "w1": wrap["w1"],
            }
            self.store.put("wraps", key_id, entry)

    def get_proxy_key(self, key_id: str) -> dict:
        """Public part of a distribution key plus who holds a wrap of it.
        Alias keys (user ids) resolve through the directory."""
        record = self.store.get("proxy_keys", key_id)
        if record is None:
            user = self.store.get("users", key_id)
            if user is None:
                raise ApiError(404, "unknown_key", f"no distribution key {key_id!r}")
            record = {"key_id": key_id, "public": user["public_key"], "owner_id": key_id}
        entry = self.store.get("wraps", key_id)
        record["holder_ids"] = sorted(entry["holders"]) if entry else []
        return record

    def wrapped_keys_for(self, caller: dict) -> list[dict]:
        out = []
        for entry in self.store.values("wraps"):
            wrap = entry["holders"].get(caller["user_id"])
            if wrap:
                out.append(wrap)
        return out

    def _may_distribute(self, user_id: str, key_id: str, record: dict | None = None) -> bool:
        """Owner of the key, a wrapped holder, or the aliased user."""
        if key_id == user_id:
            return True
        record = record or self.store.get("proxy_keys", key_id)
        if record and record["owner_id"] == user_id:
            return True
        entry = self.store.get("wraps", key_id)
        return bool(entry and user_id in entry["holders"])

    def resolve_publics(self, key_ids: tuple[str, ...] | list[str]) -> dict[str, int]:
        """key id -> public element; generated keys come from the registry,
        alias keys fall back to the user directory."""
        out: dict[str, int] = {}
        for key_id in key_ids:
            record = self.store.get("proxy_keys", key_id)
            if record is not None:
                out[key_id] = from_hex(record["public"])
                continue
            user = self.store.get("users", key_id)
            if user is None:
                raise _bad(f"cannot resolve distribution key {key_id!r}")
            out[key_id] = from_hex(user["public_key"])
        return out

    # -- content ---------------------------------------------------------------

    def publish(self, caller: dict, item_wire: dict, request_key: str | None = None) -> dict:
        try:
            item = ContentItem.from_wire(item_wire)
        except (KeyError, ValueError) as exc:
            raise _bad(f"malformed content item: {exc}") from None
        if item.owner_id != caller["user_id"]:
            raise ApiError(403, "forbidden", "owner_id must match the authenticated user")
        if item.group_label != self.params.label:
            raise _bad(f"group label {item.group_label!r} not served here")
        with self.store.lock:
            if item.visibility is not Visibility.PUBLIC:
                if not item.proxy_key_ids:
                    raise _bad("protected items need at least one distribution key")
                self.resolve_publics(item.proxy_key_ids)
                self._validate_ciphertext(item.elgamal_unit())
                if item.visibility is Visibility.CIRCLE:
                    circle = self.store.get("circles", item.circle_id or "")
                    if circle is None:
                        raise _bad("circle post names an unknown circle")
                    if caller["user_id"] not in circle["member_ids"]:
                        raise ApiError(403, "forbidden", "only members may post to a circle")

            def run() -> dict:
                existing = self.store.get("content", item.content_id)
                if existing is not None and existing["owner_id"] != caller["user_id"]:
                    raise ApiError(409, "duplicate_content_id", "content id taken")
                record = item.to_wire()
                record["created_at"] = time.time()
                self.store.put("content", item.content_id, record)
                return {"content_id": item.content_id}

            return self._idempotent(caller["user_id"], request_key, run)

    def _validate_ciphertext(self, ct: Ciphertext) -> None:
        for component in (ct.c0, ct.c1):
            if not self.params.contains(component):
                raise _bad("ciphertext component outside the subgroup")

    def _get_item(self, content_id: str) -> dict:
        record = self.store.get("content", content_id)
        if record is None:
            raise ApiError(404, "unknown_content", f"no content {content_id!r}")
        return record

    def get_content(self, caller: dict | None, content_id: str) -> dict:
        """Public items verbatim; protected items redacted (the stored
        Elgamal component is only ever served blinded)."""
        return self._redact(caller, self._get_item(content_id))

    def feed(self, caller: dict | None) -> list[dict]:
        items = sorted(
            self.store.values("content"), key=lambda r: r.get("created_at", 0.0)
        )
        return [self._redact(caller, record) for record in items]

    def _redact(self, caller: dict | None, record: dict) -> dict:
        record = dict(record)
        if record["visibility"] == Visibility.PUBLIC.value:
            record["protected"] = False
            return record
        if caller is None:
            raise ApiError(401, "unauthenticated", "protected content requires auth")
        record["protected"] = True
        record["wrapped_key"] = None
        if record.get("short_len") is not None:
            record["payload_b64"] = None  # short payload IS the ciphertext
        return record

    # -- blinded fetch and revocation -------------------------------------------

    def fetch_blinded(self, caller: dict, content_id: str) -> dict:
        record = self._get_item(content_id)
        if record["visibility"] == Visibility.PUBLIC.value:
            raise _bad("public content is served directly, not blinded")
        item = ContentItem.from_wire(record)
        with self.store.lock:
            publics = self.resolve_publics(item.proxy_key_ids)
            pair_key = f"{content_id}:{caller['user_id']}"
            stored = self.store.get("blinding", pair_key)
            if stored is None:
                rec = blinding.BlindingRecord(
                    content_id=content_id,
                    viewer_id=caller["user_id"],
                    s=groups.random_scalar(self.params, self.rng),
                    t=pow(self.params.g, groups.random_scalar(self.params, self.rng), self.params.p),
                    created_at=time.time(),
                )
                self.store.put("blinding", pair_key, rec.to_dict())
            else:
                rec = blinding.BlindingRecord.from_dict(stored)
            resp = blinding.apply_blinding(
                self.params, item.elgamal_unit(), list(publics.values()), rec.s, rec.t
            )
        out = resp.to_dict()
        out["content_id"] = content_id
        out["proxy_key_ids"] = list(item.proxy_key_ids)
        return out

    def revoke(
        self, caller: dict, content_id: str, viewer_id: str, request_key: str | None = None
    ) -> dict:
        record = self._get_item(content_id)
        with self.store.lock:
            if not self._may_revoke(caller["user_id"], record):
                raise ApiError(403, "forbidden", "only the owner or a listed key holder may revoke")

            def run() -> dict:
                deleted = self.store.delete("blinding", f"{content_id}:{viewer_id}")
                return {"deleted": deleted}

            return self._idempotent(caller["user_id"], request_key, run)

    def _may_revoke(self, user_id: str, record: dict) -> bool:
        if record["owner_id"] == user_id:
            return True
        return any(
            self._may_distribute(user_id, key_id) for key_id in record.get("proxy_key_ids", [])
        )

    # -- share relay -------------------------------------------------------------

    def create_share_request(
        self,
        caller: dict,
        content_id: str,
        g_r_hex: str,
        g_s_hex: str,
        request_key: str | None = None,
    ) -> dict:
        record = self._get_item(content_id)
        if record["visibility"] == Visibility.PUBLIC.value:
            raise _bad("public content needs no shares")
        self._parse_element(g_r_hex, "g_r")
        self._parse_element(g_s_hex, "g_s")
        with self.store.lock:
            def run() -> dict:
                request_id = uuid.uuid4().hex[:12]
                request = {
                    "request_id": request_id,
                    "content_id": content_id,
                    "requester_id": caller["user_id"],
                    "g_r": g_r_hex,
                    "g_s": g_s_hex,
                    "key_ids": list(record.get("proxy_key_ids", [])),
                    "status": "open",
                    "responses": {},
                    "created_at": time.time(),
                }
                self.store.put("share_requests", request_id, request)
                return request

            return self._idempotent(caller["user_id"], request_key, run)

    def respond_share_request(
        self,
        caller: dict,
        request_id: str,
        shares: dict[str, dict],
        request_key: str | None = None,
    ) -> dict:
        with self.store.lock:
            # all checks live inside run() so a retried request with the same
            # idempotency key replays the recorded response instead of
            # tripping the duplicate-contributor conflict
            def run() -> dict:
                request = self.store.get("share_requests", request_id)
                if request is None:
                    raise ApiError(404, "unknown_request", f"no share request {request_id!r}")
                if request["status"] != "open":
                    raise ApiError(409, "request_closed", "share request is no longer open")
                if caller["user_id"] in request["responses"]:
                    raise ApiError(409, "duplicate_response", "contributor already responded")
                if not shares:
                    raise _bad("response carries no shares")
                for key_id, pair in shares.items():
                    if key_id not in request["key_ids"]:
                        raise _bad(f"share for key {key_id!r} not named by the content")
                    if not self._may_distribute(caller["user_id"], key_id):
                        raise ApiError(403, "forbidden", f"caller does not hold key {key_id!r}")
                    for field in ("r_share", "s_share"):
                        self._parse_element(pair[field], field)
                request["responses"][caller["user_id"]] = shares
                covered = set()
                for response in request["responses"].values():
                    covered.update(response.keys())
                if covered >= set(request["key_ids"]):
                    request["status"] = "complete"
                self.store.put("share_requests", request_id, request)
                return {"request_id": request_id, "status": request["status"]}

            return self._idempotent(caller["user_id"], request_key, run)

    def get_share_request(self, caller: dict, request_id: str) -> dict:
        request = self.store.get("share_requests", request_id)
        if request is None:
            raise ApiError(404, "unknown_request", f"no share request {request_id!r}")
        if request["requester_id"] != caller["user_id"] and not any(
            self._may_distribute(caller["user_id"], key_id) for key_id in request["key_ids"]
        ):
            raise ApiError(403, "forbidden", "not involved in this request")
        return request

    def open_requests_for(self, caller: dict) -> list[dict]:
        """Pending requests the caller can contribute to and has not yet
        answered (their proxy inbox)."""
        out = []
        for request in self.store.values("share_requests"):
            if request["status"] != "open":
                continue
            if request["requester_id"] == caller["user_id"]:
                continue
            if caller["user_id"] in request["responses"]:
                continue
            if any(self._may_distribute(caller["user_id"], k) for k in request["key_ids"]):
                out.append(request)
        return sorted(out, key=lambda r: r["created_at"])

    # -- circles -------------------------------------------------------------------

    def create_circle(self, caller: dict, circle_wire: dict, request_key: str | None = None) -> dict:
        from ..content import Circle

        try:
            circle = Circle.from_wire(circle_wire)
        except (KeyError, ValueError) as exc:
            raise _bad(f"malformed circle: {exc}") from None
        if circle.owner_id != caller["user_id"]:
            raise ApiError(403, "forbidden", "owner_id must match the authenticated user")
        with self.store.lock:
            for user_id in circle.member_ids:
                if self.store.get("users", user_id) is None:
                    raise _bad(f"circle names unknown member {user_id!r}")
            self.resolve_publics(circle.proxy_key_ids)
            self._validate_ciphertext(circle.epoch_key_ct)

            def run() -> dict:
                if self.store.get("circles", circle.circle_id) is not None:
                    raise ApiError(409, "duplicate_circle_id", "circle id taken")
                self.store.put("circles", circle.circle_id, circle.to_wire())
                return {"circle_id": circle.circle_id}

            return self._idempotent(caller["user_id"], request_key, run)

    def join_circle(self, caller: dict, circle_id: str, request_key: str | None = None) -> dict:
        with self.store.lock:
            record = self._get_circle(circle_id)

            def run() -> dict:
                if caller["user_id"] not in record["member_ids"]:
                    record["member_ids"].append(caller["user_id"])
                    self.store.put("circles", circle_id, record)
                return record

            return self._idempotent(caller["user_id"], request_key, run)

    def rotate_circle(
        self,
        caller: dict,
        circle_id: str,
        expected_epoch: int,
        new_epoch_key_ct: dict,
        request_key: str | None = None,
    ) -> dict:
        with self.store.lock:
            record = self._get_circle(circle_id)
            if record["owner_id"] != caller["user_id"]:
                raise ApiError(403, "forbidden", "only the circle owner rotates keys")
            try:
                ct = Ciphertext.from_dict(new_epoch_key_ct)
            except (KeyError, ValueError) as exc:
                raise _bad(f"malformed key ciphertext: {exc}") from None
            self._validate_ciphertext(ct)

            def run() -> dict:
                if record["epoch"] != expected_epoch:
                    raise ApiError(409, "epoch_conflict", "circle rotated concurrently")
                record["epoch"] = expected_epoch + 1
                record["epoch_key_ct"] = ct.to_dict()
                self.store.put("circles", circle_id, record)
                return record

            return self._idempotent(caller["user_id"], request_key, run)

    def _get_circle(self, circle_id: str) -> dict:
        record = self.store.get("circles", circle_id)
        if record is None:
            raise ApiError(404, "unknown_circle", f"no circle {circle_id!r}")
        return record

    def get_circle(self, caller: dict, circle_id: str) -> dict:
        return self._get_circle(circle_id)

    def list_circles(self, caller: dict) -> list[dict]:
        return sorted(self.store.values("circles"), key=lambda c: c["circle_id"])

    # -- plumbing ---------------------------------------------------------------

    def _parse_element(self, text: str, field: str) -> int:
        try:
            value = from_hex(text)
        except (ValueError, TypeError):
            raise _bad(f"{field} is not canonical hex") from None
        if not self.params.contains(value):
            raise _bad(f"{field} is not a group element")
        return value

    def _idempotent(self, scope: str, request_key: str | None, run: Callable[[], dict]) -> dict:
        if not request_key:
            return run()
        cache_key = f"{scope}:{request_key}"
        cached = self.store.get("idempotency", cache_key)
        if cached is not None:
            return cached["response"]
        response = run()
        self.store.put("idempotency", cache_key, {"response": response, "at": time.time()})
        return response
