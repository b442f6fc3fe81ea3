"""Walkthrough: distribution keys and per-holder wrapping.

A generated key scalar x is handed to holders as (g^r, (g^a)^r * x): only
the holder of a can unmask x. The same x wraps for any number of holders,
and a holder can pass it on without involving the original owner.
"""

import random

from proxyshare import proxykeys
from proxyshare.groups import keypair_from_private, standard_params

params = standard_params("tiny")
rng = random.Random(29)

key = proxykeys.gen_proxy_key(params, rng, key_id="family-photos")
print(f"distribution key {key.key_id}: x={key.private}, g^x={key.public}")

alice = keypair_from_private(params, 3)
bob = keypair_from_private(params, 5)
carol = keypair_from_private(params, 7)

wrap_a = proxykeys.wrap(params, alice.public, key.private, rng, key_id=key.key_id, holder_id="alice")
wrap_b = proxykeys.wrap(params, bob.public, key.private, rng, key_id=key.key_id, holder_id="bob")
print(f"wrapped for alice: (w0={wrap_a.w0}, w1={wrap_a.w1})")
print(f"wrapped for bob:   (w0={wrap_b.w0}, w1={wrap_b.w1})")

print(f"alice unwraps: {proxykeys.unwrap(params, wrap_a, alice.private)}")
print(f"bob unwraps:   {proxykeys.unwrap(params, wrap_b, bob.private)}")

# Wrong key: the unmasking leaves a residual factor, never the true x.
try:
    stolen = proxykeys.unwrap(params, wrap_a, carol.private)
    print(f"carol (wrong key) gets {stolen}, not {key.private}")
except proxykeys.CorruptWrappedKey as err:
    print(f"carol (wrong key): rejected ({err})")

# Redistribution: bob re-wraps the scalar he holds for carol.
rewrap = proxykeys.wrap(
    params, carol.public, proxykeys.unwrap(params, wrap_b, bob.private), rng,
    key_id=key.key_id, holder_id="carol",
)
print(f"bob re-wraps for carol; she unwraps: {proxykeys.unwrap(params, rewrap, carol.private)}")

# Alias form: a user's own key pair used directly as a distribution key.
own = proxykeys.alias_key("alice", alice)
print(f"\nalias key: id={own.key_id!r}, public={own.public} (no wrapping needed)")
