"""Walkthrough: group arithmetic and multi-recipient encryption.

Uses the tiny group (p = 23, q = 11, g = 4) so every number fits on one
line and can be checked by hand.
"""

import random

from proxyshare import elgamal
from proxyshare.groups import (
    decode_message,
    encode_message,
    keypair_from_private,
    standard_params,
)

params = standard_params("tiny")
print(f"group: p={params.p}, q={params.q}, g={params.g}")
print(f"subgroup of quadratic residues: {sorted(pow(params.g, i, params.p) for i in range(params.q))}")

# Two recipients with hand-picked private scalars.
alice = keypair_from_private(params, 3)
bob = keypair_from_private(params, 5)
print(f"\nalice: private=3, public=g^3={alice.public}")
print(f"bob:   private=5, public=g^5={bob.public}")

# The message integer 5 is a non-residue mod 23, so it maps to 23 - 5 = 18.
message = 5
element = encode_message(params, message)
print(f"\nmessage {message} encodes to subgroup element {element}")

rng = random.Random(7)
ct = elgamal.encrypt(params, [alice.public, bob.public], element, rng)
print(f"ciphertext: c0={ct.c0}, c1={ct.c1}   (c1 = m * (pk_a * pk_b)^r)")

# Decryption is cooperative: each key holder contributes (c0)^(-x).
share_a = elgamal.make_share(params, ct.c0, alice.private, "alice")
share_b = elgamal.make_share(params, ct.c0, bob.private, "bob")
print(f"shares: alice={share_a.value}, bob={share_b.value}")

recovered = elgamal.combine_decrypt(params, ct, [share_a, share_b])
print(f"combined: {recovered} -> decodes to {decode_message(params, recovered)}")

# One missing share leaves the result off by a uniform factor.
partial = elgamal.combine_decrypt(params, ct, [share_a])
print(f"with only alice's share: {partial} (wrong, as it must be)")

# Anyone knowing the combined public key can re-randomize the ciphertext.
combined = alice.public * bob.public % params.p
fresh = elgamal.rerandomize(params, ct, combined, rng)
print(f"\nre-randomized: c0={fresh.c0}, c1={fresh.c1} (new randomness, same plaintext)")
shares = [
    elgamal.make_share(params, fresh.c0, alice.private, "alice"),
    elgamal.make_share(params, fresh.c0, bob.private, "bob"),
]
print(f"decrypts to {decode_message(params, elgamal.combine_decrypt(params, fresh, shares))}")
