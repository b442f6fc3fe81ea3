"""User-side protocol workflows: posting, reading through the blinded
path, proxy duties, and circle management.

Reading protected content is a multi-party flow:

  1. fetch the blinded response (c_u, p_u, g^s, g^r) for the item,
  2. produce shares locally for every listed distribution key this wallet
     holds,
  3. open one relayed share request for the rest and poll it with
     exponential backoff as holders approve,
  4. unblind, decode, and for circle posts cache the recovered epoch key.

Collected shares are cached per blinded-response fingerprint: after a
revocation the server blinds with fresh secrets, the fingerprint changes,
and the whole collection starts over — stale shares cannot unblind the
new response.
"""

from __future__ import annotations

import base64
import random
import time
import uuid
from typing import Iterable, Sequence

import httpx

from .. import content, proxykeys, quorum
from ..blinding import BlindedResponse, UnblindShares, make_unblind_shares, unblind
from ..content import Circle, ContentItem, Visibility
from ..elgamal import DecryptionShare
from ..errors import CorruptWrappedKey, ProxyShareError
from ..groups import GroupParams, from_hex, keygen, standard_params, to_hex
from .api import ServerApi
from .wallet import Wallet

_SYSTEM_RNG = random.SystemRandom()


class SharesPending(ProxyShareError):
    """Not every distribution key has contributed shares yet."""

    def __init__(self, content_id: str, missing: Sequence[str], request_id: str | None):
        super().__init__(
            f"waiting on shares for keys {sorted(missing)} of content {content_id}"
        )
        self.content_id = content_id
        self.missing = tuple(sorted(missing))
        self.request_id = request_id


class UserSession:
    """One user's wallet plus their connection to the relay."""

    def __init__(
        self,
        wallet: Wallet,
        api: ServerApi,
        params: GroupParams,
        rng: random.Random | None = None,
    ):
        self.wallet = wallet
        self.api = api
        self.params = params
        self.rng = rng or _SYSTEM_RNG

    # -- session lifecycle ---------------------------------------------------

    @classmethod
    def register(
        cls,
        server_url: str,
        display_name: str,
        wallet_path: str,
        passphrase: str,
        transport: httpx.BaseTransport | None = None,
        rng: random.Random | None = None,
    ) -> "UserSession":
        api = ServerApi(server_url, transport=transport)
        label = api.meta()["group_label"]
        params = standard_params(label)
        pair = keygen(params, rng)
        out = api.register(display_name, to_hex(pair.public))
        api.token = out["token"]
        wallet = Wallet.create(
            wallet_path,
            passphrase,
            user_id=out["user_id"],
            display_name=display_name,
            server_url=server_url,
            group_label=label,
            token=out["token"],
            private_hex=to_hex(pair.private),
            public_hex=to_hex(pair.public),
        )
        return cls(wallet, api, params, rng)

    @classmethod
    def open(
        cls,
        wallet_path: str,
        passphrase: str,
        transport: httpx.BaseTransport | None = None,
        rng: random.Random | None = None,
    ) -> "UserSession":
        wallet = Wallet.load(wallet_path, passphrase)
        api = ServerApi(wallet.server_url, token=wallet.token, transport=transport)
        return cls(wallet, api, standard_params(wallet.group_label), rng)

    def close(self) -> None:
        self.api.close()

    @property
    def user_id(self) -> str:
        return self.wallet.user_id

    # -- posting ---------------------------------------------------------------

    def post_public(self, data: bytes) -> str:
        item = ContentItem(
            content_id=uuid.uuid4().hex,
            owner_id=self.user_id,
            visibility=Visibility.PUBLIC,
            payload=data,
            group_label=self.params.label,
        )
        return self.api.publish(item.to_wire(), request_key=item.content_id)

    def post_private(
        self,
        data: bytes,
        to_users: Iterable[str] = (),
        via_keys: Iterable[str] = (),
        new_key_holders: Iterable[str] = (),
    ) -> str:
        """Seal for an audience given as any mix of user ids (their own
        keys), existing distribution key ids, and a fresh key wrapped for
        the named holders."""
        publics: dict[str, int] = {}
        for user_id in to_users:
            publics[user_id] = from_hex(self.api.get_user(user_id)["public_key"])
        for key_id in via_keys:
            publics[key_id] = from_hex(self.api.get_proxy_key(key_id)["public"])
        new_key_holders = list(new_key_holders)
        if new_key_holders:
            key = self._mint_key_for(new_key_holders)
            publics[key.key_id] = key.public
        if not publics:
            raise ValueError("a protected post needs at least one audience key")
        item = self._seal(data, publics)
        return self.api.publish(item.to_wire(), request_key=item.content_id)

    def _seal(self, data: bytes, publics: dict[str, int]) -> ContentItem:
        fits_short = (
            0 < len(data) <= content.SHORT_PATH_LIMIT
            and 1 <= content.bytes_to_int(data) <= self.params.q
        )
        seal = content.seal_short if fits_short else content.seal_large
        return seal(self.params, data, publics, self.user_id, self.rng)

    def _mint_key_for(self, holder_ids: Sequence[str]) -> proxykeys.ProxyKey:
        """Generate a distribution key, wrap it for every holder, register
        it, and keep the scalar in the wallet."""
        key = proxykeys.gen_proxy_key(self.params, self.rng)
        wraps = []
        for holder in holder_ids:
            holder_pub = from_hex(self.api.get_user(holder)["public_key"])
            wraps.append(
                proxykeys.wrap(
                    self.params,
                    holder_pub,
                    key.private,
                    self.rng,
                    key_id=key.key_id,
                    holder_id=holder,
                ).to_dict()
            )
        self.api.register_proxy_key(key.key_id, to_hex(key.public), wraps)
        self.wallet.data["proxy_keys"][key.key_id] = {
            "private": to_hex(key.private),
            "public": to_hex(key.public),
        }
        self.wallet.save()
        return key

    # -- reading -----------------------------------------------------------------

    def read(
        self,
        content_id: str,
        poll_attempts: int = 8,
        poll_interval: float = 0.05,
    ) -> bytes:
        """Fetch and decrypt one item, collecting shares as needed.

        Raises:
            SharesPending: holders have not yet answered for every key;
                the open request stays on the server and a later call
                resumes where this one stopped.
        """
        meta = self.api.get_content(content_id)
        if not meta["protected"]:
            return base64.b64decode(meta["payload_b64"])

        # circle posts: a cached epoch key skips the share flow entirely
        if meta["visibility"] == Visibility.CIRCLE.value:
            cached = (
                self.wallet.data["circle_keys"]
                .get(meta["circle_id"] or "", {})
                .get(str(meta["epoch"]))
            )
            if cached:
                return content.open_large_with_key_bytes(
                    base64.b64decode(cached),
                    base64.b64decode(meta["payload_b64"]),
                    content_id,
                )

        blinded_wire = self.api.fetch_blinded(content_id)
        resp = BlindedResponse.from_dict(blinded_wire)
        key_ids = list(blinded_wire["proxy_key_ids"])
        collected = self._collect_shares(content_id, resp, key_ids, poll_attempts, poll_interval)

        shares = UnblindShares(
            r_shares=tuple(
                DecryptionShare(from_hex(pair["r_share"]), kid)
                for kid, pair in collected.items()
            ),
            s_shares=tuple(
                DecryptionShare(from_hex(pair["s_share"]), kid)
                for kid, pair in collected.items()
            ),
        )
        element = unblind(self.params, resp, shares)
        return self._decode(meta, element, content_id)

    def _collect_shares(
        self,
        content_id: str,
        resp: BlindedResponse,
        key_ids: list[str],
        poll_attempts: int,
        poll_interval: float,
    ) -> dict[str, dict]:
        fingerprint = resp.fingerprint()
        state = self.wallet.data["share_state"].get(content_id)
        if state is None or state["fingerprint"] != fingerprint:
            # fresh blinding secrets (first fetch, or access was revoked and
            # re-granted): previously collected shares are useless
            state = {"fingerprint": fingerprint, "request_id": None, "collected": {}}
            self.wallet.data["share_state"][content_id] = state
        collected: dict[str, dict] = state["collected"]

        for key_id in key_ids:
            if key_id in collected or key_id not in self.wallet.held_key_ids():
                continue
            r_share, s_share = make_unblind_shares(
                self.params, resp.g_r, resp.g_s, self.wallet.private_for_key(key_id), key_id
            )
            collected[key_id] = {
                "r_share": to_hex(r_share.value),
                "s_share": to_hex(s_share.value),
            }

        attempt = 0
        while True:
            missing = [k for k in key_ids if k not in collected]
            if not missing:
                break
            if state["request_id"] is None:
                request = self.api.create_share_request(
                    content_id, to_hex(resp.g_r), to_hex(resp.g_s)
                )
                state["request_id"] = request["request_id"]
                self.wallet.save()
            request = self.api.get_share_request(state["request_id"])
            for response in request["responses"].values():
                for key_id, pair in response.items():
                    if key_id in key_ids and key_id not in collected:
                        collected[key_id] = pair
            missing = [k for k in key_ids if k not in collected]
            if not missing:
                break
            if attempt >= poll_attempts:
                self.wallet.save()
                raise SharesPending(content_id, missing, state["request_id"])
            time.sleep(poll_interval * (2 ** min(attempt, 5)))
            attempt += 1
        self.wallet.save()
        return collected

    def _decode(self, meta: dict, element: int, content_id: str) -> bytes:
        if meta.get("short_len") is not None:
            return content.decode_short(self.params, element, meta["short_len"])
        key = content.element_to_sym_key(self.params, element)
        if meta["visibility"] == Visibility.CIRCLE.value and meta.get("circle_id"):
            keys = self.wallet.data["circle_keys"].setdefault(meta["circle_id"], {})
            keys[str(meta["epoch"])] = base64.b64encode(key).decode()
            self.wallet.save()
        return content.open_large_with_key_bytes(
            key, base64.b64decode(meta["payload_b64"]), content_id
        )

    def revoke(self, content_id: str, viewer_id: str) -> bool:
        return self.api.revoke(content_id, viewer_id)

    # -- proxy duties ---------------------------------------------------------------

    def inbox(self) -> list[dict]:
        denied = set(self.wallet.data["denied_requests"])
        return [r for r in self.api.inbox() if r["request_id"] not in denied]

    def approve_request(self, request: dict) -> bool:
        """Contribute shares for every listed key this wallet holds."""
        held = self.wallet.held_key_ids()
        mine = [k for k in request["key_ids"] if k in held]
        if not mine:
            return False
        g_r = from_hex(request["g_r"])
        g_s = from_hex(request["g_s"])
        shares = {}
        for key_id in mine:
            r_share, s_share = make_unblind_shares(
                self.params, g_r, g_s, self.wallet.private_for_key(key_id), key_id
            )
            shares[key_id] = {
                "r_share": to_hex(r_share.value),
                "s_share": to_hex(s_share.value),
            }
        self.api.respond_share_request(request["request_id"], shares)
        return True

    def deny_request(self, request: dict) -> None:
        """Local decision: the request simply never gets this holder's
        shares. Remembered so it stops appearing in the inbox."""
        self.wallet.data["denied_requests"].append(request["request_id"])
        self.wallet.save()

    def serve_proxy(self, rounds: int = 1, interval: float = 0.2) -> int:
        """Approve everything in the inbox (auto-approve mode); returns the
        number of requests answered."""
        answered = 0
        for i in range(rounds):
            for request in self.inbox():
                if self.approve_request(request):
                    answered += 1
            if i + 1 < rounds:
                time.sleep(interval)
        return answered

    def sync_wrapped_keys(self) -> list[str]:
        """Pull and unwrap every key wrapped for this user; returns newly
        held key ids."""
        mine = int(self.wallet.data["keypair"]["private"], 16)
        added = []
        for wire in self.api.wrapped_keys():
            wrapped = proxykeys.WrappedProxyKey.from_dict(wire)
            if wrapped.key_id in self.wallet.data["proxy_keys"]:
                continue
            try:
                x = proxykeys.unwrap(self.params, wrapped, mine)
            except CorruptWrappedKey:
                continue
            self.wallet.data["proxy_keys"][wrapped.key_id] = {
                "private": to_hex(x),
                "public": to_hex(pow(self.params.g, x, self.params.p)),
            }
            added.append(wrapped.key_id)
        if added:
            self.wallet.save()
        return added

    def rewrap_key_for(self, key_id: str, user_id: str) -> None:
        """Pass a held distribution key on to another user (the holder-
        initiated redistribution path)."""
        x = self.wallet.private_for_key(key_id)
        holder_pub = from_hex(self.api.get_user(user_id)["public_key"])
        wrapped = proxykeys.wrap(
            self.params, holder_pub, x, self.rng, key_id=key_id, holder_id=user_id
        )
        self.api.add_wraps(key_id, [wrapped.to_dict()])

    # -- circles ------------------------------------------------------------------------

    def create_circle(
        self,
        name: str,
        member_ids: Iterable[str],
        keys: int | None = None,
        keys_per_member: int = 1,
        assignment_seed: int | None = None,
    ) -> str:
        """Create a circle: mint its distribution keys, deal them to the
        member quorum, seal the first epoch key, and publish an empty
        carrier post so joiners can collect the key."""
        members = [self.user_id] + [m for m in member_ids if m != self.user_id]
        k = keys if keys is not None else min(3, len(members))
        if k > len(members):
            raise ValueError("more keys than quorum members: some key would go unheld")
        assignment = quorum.assign(len(members), k, keys_per_member, rng=assignment_seed)
        minted = [proxykeys.gen_proxy_key(self.params, self.rng) for _ in range(k)]

        directory = {u["user_id"]: from_hex(u["public_key"]) for u in self.api.directory()}
        for key_index, key in enumerate(minted):
            wraps = []
            for member_index, hand in enumerate(assignment.assignment):
                if key_index not in hand:
                    continue
                member = members[member_index]
                wraps.append(
                    proxykeys.wrap(
                        self.params,
                        directory[member],
                        key.private,
                        self.rng,
                        key_id=key.key_id,
                        holder_id=member,
                    ).to_dict()
                )
            self.api.register_proxy_key(key.key_id, to_hex(key.public), wraps)

        # the creator keeps only its own hand, like any other member
        my_hand = assignment.assignment[0]
        for key_index in my_hand:
            key = minted[key_index]
            self.wallet.data["proxy_keys"][key.key_id] = {
                "private": to_hex(key.private),
                "public": to_hex(key.public),
            }

        publics = {key.key_id: key.public for key in minted}
        key_ct, circle_key = content.make_circle_key(self.params, publics, self.rng)
        circle = Circle(
            circle_id=uuid.uuid4().hex[:12],
            owner_id=self.user_id,
            name=name,
            member_ids=tuple(members),
            proxy_key_ids=tuple(key.key_id for key in minted),
            quorum_member_ids=tuple(members),
            key_assignment=content.assignment_to_circle_keys(
                assignment, [key.key_id for key in minted]
            ),
            epoch=1,
            epoch_key_ct=key_ct,
        )
        self.api.create_circle(circle.to_wire())
        self.wallet.data["circle_keys"][circle.circle_id] = {
            "1": base64.b64encode(circle_key).decode()
        }
        self.wallet.save()
        self._publish_carrier(circle, circle_key)
        return circle.circle_id

    def join_circle(self, circle_id: str) -> dict:
        return self.api.join_circle(circle_id)

    def post_circle(self, circle_id: str, data: bytes) -> str:
        circle = Circle.from_wire(self.api.get_circle(circle_id))
        key = self._circle_key(circle)
        item = content.seal_circle_post(
            self.params, circle, key, data, self.user_id, self.rng
        )
        return self.api.publish(item.to_wire(), request_key=item.content_id)

    def rotate_circle(self, circle_id: str) -> int:
        """Owner-only: advance the epoch with a fresh key. Posts made after
        rotation are unreadable with any earlier epoch key."""
        circle = Circle.from_wire(self.api.get_circle(circle_id))
        publics = {
            key_id: from_hex(self.api.get_proxy_key(key_id)["public"])
            for key_id in circle.proxy_key_ids
        }
        rotated, key = content.rotate_circle_key(self.params, circle, publics, self.rng)
        self.api.rotate_circle(circle_id, circle.epoch, rotated.epoch_key_ct.to_dict())
        self.wallet.data["circle_keys"].setdefault(circle_id, {})[str(rotated.epoch)] = (
            base64.b64encode(key).decode()
        )
        self.wallet.save()
        self._publish_carrier(rotated, key)
        return rotated.epoch

    def _publish_carrier(self, circle: Circle, key: bytes) -> None:
        item = content.seal_circle_post(self.params, circle, key, b"", self.user_id, self.rng)
        self.api.publish(item.to_wire(), request_key=item.content_id)

    def _circle_key(self, circle: Circle) -> bytes:
        cached = self.wallet.data["circle_keys"].get(circle.circle_id, {}).get(str(circle.epoch))
        if cached:
            return base64.b64decode(cached)
        # collect the epoch key through the share flow on any post of this epoch
        for item in self.api.feed():
            if item.get("circle_id") == circle.circle_id and item.get("epoch") == circle.epoch:
                self.read(item["content_id"])
                cached = (
                    self.wallet.data["circle_keys"].get(circle.circle_id, {}).get(str(circle.epoch))
                )
                if cached:
                    return base64.b64decode(cached)
        raise ProxyShareError(
            f"no post at epoch {circle.epoch} to learn the circle key from"
        )
