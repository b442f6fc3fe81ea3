"""Walkthrough: per-viewer blinding and revocation by deletion.

The server never serves a stored ciphertext raw. Each viewer gets a
version blinded with a secret pair (s, t) the server keeps for that
(content, viewer); deleting the pair revokes the viewer.
"""

import random

from proxyshare import blinding, elgamal
from proxyshare.groups import decode_message, encode_message, keypair_from_private, standard_params

params = standard_params("tiny")
rng = random.Random(13)

alice = keypair_from_private(params, 3)
bob = keypair_from_private(params, 5)
pubs = [alice.public, bob.public]

element = encode_message(params, 5)
ct = elgamal.encrypt(params, pubs, element, rng)
print(f"stored ciphertext: c0={ct.c0}, c1={ct.c1}")

# The server blinds for a viewer. It sees only c1, public keys, randomness.
resp, record = blinding.blind(params, ct, pubs, rng, content_id="post-1", viewer_id="viewer")
print(f"server secrets: s={record.s}, t={record.t}")
print(f"viewer receives: c_u={resp.c_u}, p_u={resp.p_u}, g^s={resp.g_s}, g^r={resp.g_r}")

# The viewer sends g^r and g^s to both key holders and gets share pairs back.
pairs = [
    blinding.make_unblind_shares(params, resp.g_r, resp.g_s, kp.private, name)
    for kp, name in ((alice, "alice"), (bob, "bob"))
]
shares = blinding.UnblindShares(
    r_shares=tuple(p[0] for p in pairs), s_shares=tuple(p[1] for p in pairs)
)
recovered = blinding.unblind(params, resp, shares)
print(f"unblinded element {recovered} -> message {decode_message(params, recovered)}")

# Revocation: the server deletes (s, t); a new fetch gets fresh secrets.
registry = blinding.BlindingRegistry()
registry.put(record)
print(f"\nrevoking: {blinding.revoke(registry, 'post-1', 'viewer')}")
fresh_record = registry.get_or_create(params, "post-1", "viewer", rng)
fresh_resp = blinding.apply_blinding(params, ct, pubs, fresh_record.s, fresh_record.t)
print(f"fresh blinding: s={fresh_record.s}, t={fresh_record.t}")

stale_result = blinding.unblind(params, fresh_resp, shares)
print(
    f"old shares against the fresh response give {decode_message(params, stale_result)} "
    f"(expected garbage; the viewer must collect shares again)"
)
