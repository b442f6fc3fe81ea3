"""Walkthrough: the full service, in one process.

Spins up the relay (in-memory store, 2048-bit group), registers four
users, and walks the complete story: a private post, share collection
through the relay inbox, revocation, and an encrypted circle with a key
rotation. No sockets; the HTTP layer runs in-process.
"""

import random
import tempfile
from pathlib import Path

from proxyshare.client.workflows import SharesPending, UserSession
from proxyshare.inprocess import InProcessTransport
from proxyshare.server.app import build_app

app = build_app(group_label="modp-2048", rng=random.Random(99))
transport = InProcessTransport(app)
wallet_dir = Path(tempfile.mkdtemp(prefix="proxyshare-demo-"))


def join(name: str, seed: int) -> UserSession:
    session = UserSession.register(
        "http://relay.demo", name, str(wallet_dir / f"{name}.wallet"), "demo-pass",
        transport=transport, rng=random.Random(seed),
    )
    print(f"  {name} registered as {session.user_id}")
    return session


print("registering users:")
alice, bob, carol, dave = (join(n, i + 1) for i, n in enumerate(["alice", "bob", "carol", "dave"]))

print("\nalice posts privately to bob and carol (both keys must contribute):")
post = alice.post_private(b"meet at the lake, not the office", to_users=[bob.user_id, carol.user_id])
print(f"  content id {post}")

print("\ncarol reads: her own share is local, bob's goes through the relay inbox:")
try:
    carol.read(post, poll_attempts=0)
except SharesPending as pending:
    print(f"  pending on keys: {list(pending.missing)}")
print(f"  bob's inbox: {[r['request_id'] for r in bob.inbox()]}")
bob.serve_proxy()
print(f"  carol now reads: {carol.read(post, poll_attempts=0)!r}")

print("\nalice revokes carol; the server deletes carol's blinding pair:")
alice.revoke(post, carol.user_id)
try:
    carol.read(post, poll_attempts=0)
except SharesPending as pending:
    print(f"  carol is locked out again, pending on: {list(pending.missing)}")
bob.serve_proxy()
print(f"  after bob approves once more: {carol.read(post, poll_attempts=0)!r}")

print("\nalice opens a circle with bob and carol (3 keys, 1 per member):")
circle = alice.create_circle("lakeside", [bob.user_id, carol.user_id], keys=3, keys_per_member=1)
bob.sync_wrapped_keys()
carol.sync_wrapped_keys()
update = alice.post_circle(circle, b"first circle update")
print(f"  circle {circle}, post {update}")

print("\ndave joins and must collect every key's share to read:")
dave.join_circle(circle)
try:
    dave.read(update, poll_attempts=0)
except SharesPending as pending:
    print(f"  pending on {len(pending.missing)} keys")
alice.serve_proxy()
bob.serve_proxy()
carol.serve_proxy()
print(f"  dave reads: {dave.read(update, poll_attempts=0)!r}")

print("\nalice rotates the circle key; posts after rotation need the new epoch key:")
epoch = alice.rotate_circle(circle)
sealed = alice.post_circle(circle, b"epoch two news")
try:
    dave.read(sealed, poll_attempts=0)
except SharesPending:
    print(f"  dave's cached epoch-1 key is useless at epoch {epoch}; collecting anew")
alice.serve_proxy()
bob.serve_proxy()
carol.serve_proxy()
print(f"  dave reads: {dave.read(sealed, poll_attempts=0)!r}")

print("\ndone; wallets under", wallet_dir)
