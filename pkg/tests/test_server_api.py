import json
import random

import pytest

from proxyshare import content
from proxyshare.blinding import BlindedResponse
from proxyshare.groups import keygen, to_hex

from conftest import Relay


@pytest.fixture
def relay(tmp_path):
    return Relay(tmp_path)


def register(relay, name, seed):
    pair = keygen(relay.params, random.Random(seed))
    client = relay.raw_client()
    out = client.post(
        "/v1/register", json={"display_name": name, "public_key": to_hex(pair.public)}
    ).json()
    client.close()
    authed = relay.raw_client(out["token"])
    return {"user_id": out["user_id"], "pair": pair, "client": authed, "token": out["token"]}


def seal_for(relay, owner, recipients, data=b"\x09", rng_seed=50):
    keys = {r["user_id"]: r["pair"].public for r in recipients}
    item = content.seal_short(
        relay.params, data, keys, owner["user_id"], random.Random(rng_seed)
    )
    return item


class TestRegistration:
    def test_register_and_directory_round_trip(self, relay):
        alice = register(relay, "alice", 1)
        listing = alice["client"].get("/v1/directory").json()["users"]
        entry = next(u for u in listing if u["user_id"] == alice["user_id"])
        assert entry["public_key"] == to_hex(alice["pair"].public)
        assert entry["display_name"] == "alice"

    def test_duplicate_public_key_rejected(self, relay):
        register(relay, "alice", 1)
        pair = keygen(relay.params, random.Random(1))  # same seed, same key
        client = relay.raw_client()
        resp = client.post(
            "/v1/register", json={"display_name": "imposter", "public_key": to_hex(pair.public)}
        )
        assert resp.status_code == 409
        assert resp.json()["code"] == "duplicate_key"

    def test_malformed_key_rejected(self, relay):
        client = relay.raw_client()
        for bad in ("0xff", "GG", ""):
            resp = client.post("/v1/register", json={"display_name": "x", "public_key": bad})
            assert resp.status_code == 400

    def test_non_element_key_rejected(self, relay):
        client = relay.raw_client()
        resp = client.post("/v1/register", json={"display_name": "x", "public_key": "5"})
        assert resp.status_code == 400  # 5 is not in the tiny subgroup


class TestPublish:
    def test_requires_auth(self, relay):
        alice = register(relay, "alice", 1)
        item = seal_for(relay, alice, [alice])
        resp = relay.raw_client().post("/v1/content", json={"item": item.to_wire()})
        assert resp.status_code == 401

    def test_owner_must_match(self, relay):
        alice = register(relay, "alice", 1)
        bob = register(relay, "bob", 2)
        item = seal_for(relay, alice, [bob])
        resp = bob["client"].post("/v1/content", json={"item": item.to_wire()})
        assert resp.status_code == 403

    def test_malformed_item_rejected(self, relay):
        alice = register(relay, "alice", 1)
        resp = alice["client"].post("/v1/content", json={"item": {"content_id": "x"}})
        assert resp.status_code == 400

    def test_unresolvable_key_rejected(self, relay):
        alice = register(relay, "alice", 1)
        item = content.seal_short(
            relay.params, b"\x09", {"ghost-key": 18}, alice["user_id"], random.Random(3)
        )
        resp = alice["client"].post("/v1/content", json={"item": item.to_wire()})
        assert resp.status_code == 400

    def test_idempotent_retry(self, relay):
        alice = register(relay, "alice", 1)
        item = seal_for(relay, alice, [alice])
        headers = {"Idempotency-Key": "retry-1"}
        first = alice["client"].post("/v1/content", json={"item": item.to_wire()}, headers=headers)
        second = alice["client"].post("/v1/content", json={"item": item.to_wire()}, headers=headers)
        assert first.json() == second.json()
        feed = alice["client"].get("/v1/feed").json()["items"]
        assert len([i for i in feed if i["content_id"] == item.content_id]) == 1


class TestServing:
    def test_public_item_served_verbatim_without_auth(self, relay):
        alice = register(relay, "alice", 1)
        item = content.ContentItem(
            content_id="pub1",
            owner_id=alice["user_id"],
            visibility=content.Visibility.PUBLIC,
            payload=b"anyone may read",
            group_label=relay.params.label,
        )
        alice["client"].post("/v1/content", json={"item": item.to_wire()})
        got = relay.raw_client().get("/v1/content/pub1").json()
        assert got["payload_b64"] is not None
        assert content.ContentItem.from_wire(got).payload == b"anyone may read"

    def test_protected_item_requires_auth_and_is_redacted(self, relay):
        alice = register(relay, "alice", 1)
        bob = register(relay, "bob", 2)
        item = seal_for(relay, alice, [bob])
        alice["client"].post("/v1/content", json={"item": item.to_wire()})
        assert relay.raw_client().get(f"/v1/content/{item.content_id}").status_code == 401
        got = bob["client"].get(f"/v1/content/{item.content_id}").json()
        assert got["protected"] is True
        assert got["payload_b64"] is None  # short payload is the ciphertext
        assert got["wrapped_key"] is None

    def test_unknown_content(self, relay):
        alice = register(relay, "alice", 1)
        assert alice["client"].get("/v1/content/nope").status_code == 404


class TestBlindedFetch:
    def publish_private(self, relay, owner, recipients):
        item = seal_for(relay, owner, recipients)
        owner["client"].post("/v1/content", json={"item": item.to_wire()})
        return item

    def test_deterministic_between_revocations(self, relay):
        alice = register(relay, "alice", 1)
        bob = register(relay, "bob", 2)
        item = self.publish_private(relay, alice, [bob])
        one = bob["client"].post(f"/v1/content/{item.content_id}/blinded").json()
        two = bob["client"].post(f"/v1/content/{item.content_id}/blinded").json()
        assert one == two

    def test_viewers_get_independent_blindings(self, relay):
        alice = register(relay, "alice", 1)
        bob = register(relay, "bob", 2)
        carol = register(relay, "carol", 3)
        item = self.publish_private(relay, alice, [bob, carol])
        one = bob["client"].post(f"/v1/content/{item.content_id}/blinded").json()
        two = carol["client"].post(f"/v1/content/{item.content_id}/blinded").json()
        assert (one["c_u"], one["p_u"]) != (two["c_u"], two["p_u"]) or one["g_s"] != two["g_s"]

    def test_revoke_changes_the_blinding(self, relay):
        alice = register(relay, "alice", 1)
        bob = register(relay, "bob", 2)
        item = self.publish_private(relay, alice, [bob])
        before = bob["client"].post(f"/v1/content/{item.content_id}/blinded").json()
        out = alice["client"].post(
            f"/v1/content/{item.content_id}/revoke", json={"viewer_id": bob["user_id"]}
        ).json()
        assert out["deleted"] is True
        after = bob["client"].post(f"/v1/content/{item.content_id}/blinded").json()
        assert (before["g_s"], before["c_u"]) != (after["g_s"], after["c_u"])

    def test_blinded_fetch_of_public_content_rejected(self, relay):
        alice = register(relay, "alice", 1)
        item = content.ContentItem(
            content_id="pub2",
            owner_id=alice["user_id"],
            visibility=content.Visibility.PUBLIC,
            payload=b"x",
            group_label=relay.params.label,
        )
        alice["client"].post("/v1/content", json={"item": item.to_wire()})
        assert alice["client"].post("/v1/content/pub2/blinded").status_code == 400

    def test_response_components_in_subgroup(self, relay):
        alice = register(relay, "alice", 1)
        bob = register(relay, "bob", 2)
        item = self.publish_private(relay, alice, [bob])
        wire = bob["client"].post(f"/v1/content/{item.content_id}/blinded").json()
        resp = BlindedResponse.from_dict(wire)
        for value in (resp.c_u, resp.p_u, resp.g_s, resp.g_r):
            assert relay.params.contains(value)


class TestRevocationAuthority:
    def test_owner_and_listed_holder_may_revoke_stranger_may_not(self, relay):
        alice = register(relay, "alice", 1)
        bob = register(relay, "bob", 2)
        eve = register(relay, "eve", 5)
        item = seal_for(relay, alice, [bob])
        alice["client"].post("/v1/content", json={"item": item.to_wire()})
        bob["client"].post(f"/v1/content/{item.content_id}/blinded")
        # bob is a listed key holder (alias key): allowed
        out = bob["client"].post(
            f"/v1/content/{item.content_id}/revoke", json={"viewer_id": bob["user_id"]}
        )
        assert out.status_code == 200 and out.json()["deleted"] is True
        # a stranger is not
        resp = eve["client"].post(
            f"/v1/content/{item.content_id}/revoke", json={"viewer_id": bob["user_id"]}
        )
        assert resp.status_code == 403
        # revoking an absent record reports False
        out = alice["client"].post(
            f"/v1/content/{item.content_id}/revoke", json={"viewer_id": eve["user_id"]}
        ).json()
        assert out["deleted"] is False


class TestShareRelay:
    def setup_request(self, relay):
        alice = register(relay, "alice", 1)
        bob = register(relay, "bob", 2)
        carol = register(relay, "carol", 3)
        item = seal_for(relay, alice, [bob, carol])
        alice["client"].post("/v1/content", json={"item": item.to_wire()})
        blinded = carol["client"].post(f"/v1/content/{item.content_id}/blinded").json()
        request = carol["client"].post(
            "/v1/share-requests",
            json={"content_id": item.content_id, "g_r": blinded["g_r"], "g_s": blinded["g_s"]},
        ).json()
        return alice, bob, carol, item, blinded, request

    def share_payload(self, relay, user, blinded):
        from proxyshare.blinding import make_unblind_shares
        from proxyshare.groups import from_hex

        r_share, s_share = make_unblind_shares(
            relay.params,
            from_hex(blinded["g_r"]),
            from_hex(blinded["g_s"]),
            user["pair"].private,
            user["user_id"],
        )
        return {user["user_id"]: {"r_share": to_hex(r_share.value), "s_share": to_hex(s_share.value)}}

    def test_inbox_lists_only_relevant_open_requests(self, relay):
        alice, bob, carol, item, blinded, request = self.setup_request(relay)
        assert [r["request_id"] for r in bob["client"].get("/v1/share-requests/inbox").json()["requests"]] == [
            request["request_id"]
        ]
        # the requester and uninvolved users see nothing
        assert carol["client"].get("/v1/share-requests/inbox").json()["requests"] == []
        eve = register(relay, "eve", 9)
        assert eve["client"].get("/v1/share-requests/inbox").json()["requests"] == []

    def test_response_flow_and_closure(self, relay):
        alice, bob, carol, item, blinded, request = self.setup_request(relay)
        rid = request["request_id"]
        out = bob["client"].post(
            f"/v1/share-requests/{rid}/respond", json={"shares": self.share_payload(relay, bob, blinded)}
        ).json()
        assert out["status"] == "open"  # carol's own key still missing
        polled = carol["client"].get(f"/v1/share-requests/{rid}").json()
        assert bob["user_id"] in polled["responses"]
        # duplicate response from the same contributor
        resp = bob["client"].post(
            f"/v1/share-requests/{rid}/respond", json={"shares": self.share_payload(relay, bob, blinded)}
        )
        assert resp.status_code == 409 and resp.json()["code"] == "duplicate_response"

    def test_share_for_unlisted_key_rejected(self, relay):
        alice, bob, carol, item, blinded, request = self.setup_request(relay)
        payload = self.share_payload(relay, bob, blinded)
        payload["ghost"] = payload[bob["user_id"]]
        resp = bob["client"].post(
            f"/v1/share-requests/{request['request_id']}/respond", json={"shares": payload}
        )
        assert resp.status_code == 400

    def test_share_for_unheld_key_rejected(self, relay):
        alice, bob, carol, item, blinded, request = self.setup_request(relay)
        eve = register(relay, "eve", 9)
        payload = {bob["user_id"]: self.share_payload(relay, bob, blinded)[bob["user_id"]]}
        resp = eve["client"].post(
            f"/v1/share-requests/{request['request_id']}/respond", json={"shares": payload}
        )
        assert resp.status_code == 403

    def test_retry_with_same_idempotency_key_replays(self, relay):
        alice, bob, carol, item, blinded, request = self.setup_request(relay)
        rid = request["request_id"]
        headers = {"Idempotency-Key": "respond-once"}
        payload = {"shares": self.share_payload(relay, bob, blinded)}
        first = bob["client"].post(f"/v1/share-requests/{rid}/respond", json=payload, headers=headers)
        second = bob["client"].post(f"/v1/share-requests/{rid}/respond", json=payload, headers=headers)
        assert first.status_code == second.status_code == 200
        assert first.json() == second.json()
        # without the key, a second response is a conflict
        third = bob["client"].post(f"/v1/share-requests/{rid}/respond", json=payload)
        assert third.status_code == 409

    def test_response_to_closed_request_rejected(self, relay):
        alice, bob, carol, item, blinded, request = self.setup_request(relay)
        rid = request["request_id"]
        bob["client"].post(
            f"/v1/share-requests/{rid}/respond", json={"shares": self.share_payload(relay, bob, blinded)}
        )
        out = carol["client"].post(
            f"/v1/share-requests/{rid}/respond", json={"shares": self.share_payload(relay, carol, blinded)}
        ).json()
        assert out["status"] == "complete"
        resp = alice["client"].post(
            f"/v1/share-requests/{rid}/respond", json={"shares": self.share_payload(relay, alice, blinded)}
        )
        assert resp.status_code in (403, 409)  # closed (alice holds no listed key anyway)


class TestSecrecyAudit:
    def test_store_never_sees_private_scalars(self, relay):
        alice = register(relay, "alice", 1)
        bob = register(relay, "bob", 2)
        item = seal_for(relay, alice, [bob], data=b"\x09")
        alice["client"].post("/v1/content", json={"item": item.to_wire()})
        bob["client"].post(f"/v1/content/{item.content_id}/blinded")
        dump = json.dumps(relay.store.dump_state())
        for user in (alice, bob):
            private_hex = to_hex(user["pair"].private)
            assert f'"{private_hex}"' not in dump
        assert user["token"] not in dump  # only the hash is stored
