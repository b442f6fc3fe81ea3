"""Fixed safe-prime group arithmetic and reversible message encoding.

Every protocol value lives in the subgroup of quadratic residues modulo a
safe prime p = 2q + 1 (q prime). Restricting to the order-q subgroup keeps
re-randomization and blinding factors indistinguishable from fresh elements
and gives a clean reversible encoding of small integers:

    encode(m) = m       if m is a quadratic residue mod p,
                p - m   otherwise.

Exactly one of {m, p - m} is a residue (p ≡ 3 mod 4, so -1 is a
non-residue), and since m ≤ q < p - m the inverse map is unambiguous.

Exponents are reduced mod q. Negative exponents are realised as q - e,
which inverts base^e for any base in the subgroup.

Two parameter sets ship with the package: a tiny group (p = 23) small
enough for exhaustive checking, and the published 2048-bit MODP group from
RFC 3526 whose generator 2 already generates the order-q subgroup
(p ≡ 7 mod 8, so 2 is a quadratic residue).
"""

from __future__ import annotations

import random
from dataclasses import dataclass

# Plain ints; aliases document which domain a value belongs to.
Scalar = int  # exponent in [1, q-1]
GroupElement = int  # subgroup member in [1, p-1] with v^q = 1 mod p

_SYSTEM_RNG = random.SystemRandom()

# RFC 3526, 2048-bit MODP group (id 14). (p - 1) / 2 is prime.
_MODP_2048_P = int(
    "FFFFFFFFFFFFFFFFC90FDAA22168C234C4C6628B80DC1CD129024E088A67CC74"
    "020BBEA63B139B22514A08798E3404DDEF9519B3CD3A431B302B0A6DF25F1437"
    "4FE1356D6D51C245E485B576625E7EC6F44C42E9A637ED6B0BFF5CB6F406B7ED"
    "EE386BFB5A899FA5AE9F24117C4B1FE649286651ECE45B3DC2007CB8A163BF05"
    "98DA48361C55D39A69163FA8FD24CF5F83655D23DCA3AD961C62F356208552BB"
    "9ED529077096966D670C354E4ABC9804F1746C08CA18217C32905E462E36CE3B"
    "E39E772C180E86039B2783A2EC07A28FB5C55DF06F4C52C9DE2BCBF695581718"
    "3995497CEA956AE515D2261898FA051015728E5A8AACAA68FFFFFFFFFFFFFFFF",
    16,
)


@dataclass(frozen=True)
class GroupParams:
    """A safe-prime multiplicative group: modulus p = 2q + 1, subgroup
    order q, and a generator g of the order-q subgroup.

    Instances are obtained from :func:`standard_params`; arbitrary parameter
    generation is out of scope.
    """

    label: str
    p: int
    q: int
    g: int

    def contains(self, value: int) -> bool:
        """Whether ``value`` is a member of the order-q subgroup."""
        return 1 <= value < self.p and pow(value, self.q, self.p) == 1

    def validate(self) -> None:
        """Check the group invariants; raises ValueError on any failure.

        Primality is checked with Miller-Rabin (deterministic witness set
        below 3.3e24, 64 random rounds beyond).
        """
        if self.p != 2 * self.q + 1:
            raise ValueError("p must equal 2q + 1")
        if not _is_prime(self.p):
            raise ValueError("p is not prime")
        if not _is_prime(self.q):
            raise ValueError("q is not prime")
        if self.g in (0, 1) or pow(self.g, self.q, self.p) != 1:
            raise ValueError("g does not generate the order-q subgroup")


_GROUPS = {
    "tiny-23": GroupParams(label="tiny-23", p=23, q=11, g=4),
    "modp-2048": GroupParams(
        label="modp-2048", p=_MODP_2048_P, q=(_MODP_2048_P - 1) // 2, g=2
    ),
}
_SIZE_ALIASES = {"tiny": "tiny-23", "standard": "modp-2048"}


def standard_params(size_label: str) -> GroupParams:
    """Return one of the fixed parameter sets.

    Args:
        size_label: "tiny" / "tiny-23" for the exhaustively checkable
            group (p = 23, q = 11, g = 4), or "standard" / "modp-2048"
            for the published 2048-bit safe-prime group.

    Raises:
        ValueError: unsupported label.
    """
    label = _SIZE_ALIASES.get(size_label, size_label)
    try:
        return _GROUPS[label]
    except KeyError:
        raise ValueError(f"unsupported group label: {size_label!r}") from None


@dataclass(frozen=True)
class KeyPair:
    """A private exponent x and its public element g^x mod p."""

    private: Scalar
    public: GroupElement


def random_scalar(params: GroupParams, rng: random.Random | None = None) -> Scalar:
    """Uniform scalar in [1, q-1]. Zero is excluded: an encryption with
    exponent 0 would expose the message directly."""
    rng = rng or _SYSTEM_RNG
    return rng.randrange(1, params.q)


def keygen(params: GroupParams, rng: random.Random | None = None) -> KeyPair:
    """Generate a key pair with uniform private scalar."""
    x = random_scalar(params, rng)
    return keypair_from_private(params, x)


def keypair_from_private(params: GroupParams, private: Scalar) -> KeyPair:
    """Build the key pair for a known private scalar (test and wallet use)."""
    if not 1 <= private < params.q:
        raise ValueError("private scalar out of range [1, q-1]")
    return KeyPair(private=private, public=pow(params.g, private, params.p))


def encode_message(params: GroupParams, m: int) -> GroupElement:
    """Map an integer in [1, q] into the subgroup.

    Returns m itself when m is a quadratic residue, else p - m. The result
    always satisfies the subgroup invariant and :func:`decode_message`
    inverts the map exactly.

    Raises:
        ValueError: m outside [1, q].
    """
    if not 1 <= m <= params.q:
        raise ValueError(f"message integer out of range [1, q]: {m}")
    if pow(m, params.q, params.p) == 1:
        return m
    return params.p - m


def decode_message(params: GroupParams, e: GroupElement) -> int:
    """Invert :func:`encode_message`: e if e ≤ q, else p - e."""
    return e if e <= params.q else params.p - e


def exp(params: GroupParams, base: GroupElement, e: Scalar) -> GroupElement:
    """base^e mod p with the exponent reduced mod q."""
    return pow(base, e % params.q, params.p)


def exp_neg(params: GroupParams, base: GroupElement, e: Scalar) -> GroupElement:
    """base^(-e) mod p, i.e. the multiplicative inverse of base^e.

    Valid for subgroup members only (base^q = 1, so the inverse exponent
    is q - e).
    """
    return pow(base, params.q - (e % params.q), params.p)


def element_product(params: GroupParams, elements) -> GroupElement:
    """Product of group elements mod p."""
    out = 1
    for v in elements:
        out = out * v % params.p
    return out


def to_hex(value: int) -> str:
    """Canonical wire form: lowercase hex, big-endian, no leading zeros."""
    if value < 0:
        raise ValueError("negative value")
    return format(value, "x")


def from_hex(text: str) -> int:
    """Parse the canonical hex form, rejecting non-canonical spellings."""
    if not text or text != text.lower() or (len(text) > 1 and text[0] == "0"):
        raise ValueError(f"non-canonical hex: {text!r}")
    return int(text, 16)


# Miller-Rabin. The first witness set is deterministic for n < 3.317e24
# which covers the tiny group; larger moduli get 64 random rounds.
_SMALL_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def _is_prime(n: int, rounds: int = 64) -> bool:
    if n < 2:
        return False
    for sp in _SMALL_PRIMES:
        if n % sp == 0:
            return n == sp
    d = n - 1
    r = 0
    while d % 2 == 0:
        d //= 2
        r += 1
    if n < 3_317_044_064_679_887_385_961_981:
        witnesses = _SMALL_PRIMES
    else:
        witnesses = tuple(_SYSTEM_RNG.randrange(2, n - 1) for _ in range(rounds))
    for a in witnesses:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True
