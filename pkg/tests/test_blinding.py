import inspect
import random
import threading

import pytest

from proxyshare import blinding
from proxyshare.blinding import (
    BlindedResponse,
    BlindingRecord,
    BlindingRegistry,
    UnblindShares,
    apply_blinding,
    blind,
    make_unblind_shares,
    unblind,
)
from proxyshare.elgamal import combine_decrypt, encrypt, make_share
from proxyshare.errors import ShareSetMismatch
from proxyshare.groups import decode_message

from conftest import TINY_SUBGROUP

KEY_SETS = [(3,), (3, 5), (2, 3, 7)]


def publics(params, privates):
    return [pow(params.g, x, params.p) for x in privates]


def full_shares(params, resp, privates):
    r_shares, s_shares = [], []
    for x in privates:
        r, s = make_unblind_shares(params, resp.g_r, resp.g_s, x, str(x))
        r_shares.append(r)
        s_shares.append(s)
    return UnblindShares(r_shares=tuple(r_shares), s_shares=tuple(s_shares))


class TestWorkedExample:
    """The 5-as-18 message under keys {3, 5}, r=2, s=3, t=g^3=18."""

    def test_blind_values(self, tiny):
        ct = encrypt(tiny, publics(tiny, [3, 5]), 18, r=2)
        resp, record = blind(tiny, ct, publics(tiny, [3, 5]), s=3, tau=3)
        assert (resp.c_u, resp.p_u, resp.g_s, resp.g_r) == (1, 12, 18, 16)
        assert record.t == 18 and record.s == 3

    def test_unblind_chain(self, tiny):
        ct = encrypt(tiny, publics(tiny, [3, 5]), 18, r=2)
        resp, _ = blind(tiny, ct, publics(tiny, [3, 5]), s=3, tau=3)
        shares = full_shares(tiny, resp, [3, 5])
        r_vals = sorted(s.value for s in shares.r_shares)
        s_vals = sorted(s.value for s in shares.s_shares)
        assert r_vals == [4, 12] and s_vals == [8, 16]
        element = unblind(tiny, resp, shares)
        assert element == 18
        assert decode_message(tiny, element) == 5


class TestDegenerateBlinding:
    def test_t_one_reduces_to_plain_combine(self, tiny):
        pubs = publics(tiny, [3, 5])
        for m in (9, 13, 18):
            ct = encrypt(tiny, pubs, m, r=7)
            resp = apply_blinding(tiny, ct, pubs, s=4, t=1)
            assert resp.c_u == ct.c1
            shares = full_shares(tiny, resp, [3, 5])
            assert unblind(tiny, resp, shares) == m
            plain = [make_share(tiny, ct.c0, x, str(x)) for x in (3, 5)]
            assert combine_decrypt(tiny, ct, plain) == m


class TestRoundTripExhaustive:
    def test_every_message_and_key_set(self, tiny):
        rng = random.Random(21)
        for privates in KEY_SETS:
            pubs = publics(tiny, privates)
            for m in TINY_SUBGROUP:
                ct = encrypt(tiny, pubs, m, rng)
                resp, _ = blind(tiny, ct, pubs, rng)
                assert unblind(tiny, resp, full_shares(tiny, resp, privates)) == m

    def test_single_key_works_like_larger_sets(self, tiny):
        rng = random.Random(22)
        for m in TINY_SUBGROUP:
            ct = encrypt(tiny, [18], m, rng)
            resp, _ = blind(tiny, ct, [18], rng)
            shares = full_shares(tiny, resp, [3])
            assert unblind(tiny, resp, shares) == m


class TestStaleShares:
    def test_stale_shares_survive_only_on_s_collision(self, tiny):
        """Shares collected for an old (s, t) applied to a response built
        from fresh secrets recover m exactly when s' = s, independent of
        the fresh t: old r-shares still cancel g^r, so the error factor is
        (combined_pk)^(s'-s). Exhaustive over all fresh pairs."""
        privates = (3, 5)
        pubs = publics(tiny, privates)
        ct = encrypt(tiny, pubs, 9, r=2)
        old_resp, _ = blind(tiny, ct, pubs, s=3, tau=3)
        stale = full_shares(tiny, old_resp, privates)
        survivals = 0
        total = 0
        for s_new in range(1, tiny.q):
            for tau_new in range(1, tiny.q):
                fresh, _ = blind(tiny, ct, pubs, s=s_new, tau=tau_new)
                total += 1
                if unblind(tiny, fresh, stale) == 9:
                    survivals += 1
                    assert s_new == 3
        assert total == (tiny.q - 1) ** 2
        assert survivals == tiny.q - 1  # one s value, any tau


class TestShareValidation:
    def test_mismatched_contributors_rejected(self, tiny):
        ct = encrypt(tiny, publics(tiny, [3, 5]), 9, r=2)
        resp, _ = blind(tiny, ct, publics(tiny, [3, 5]), s=3, tau=3)
        r3, s3 = make_unblind_shares(tiny, resp.g_r, resp.g_s, 3, "a")
        _, s5 = make_unblind_shares(tiny, resp.g_r, resp.g_s, 5, "b")
        with pytest.raises(ShareSetMismatch) as err:
            UnblindShares(r_shares=(r3,), s_shares=(s3, s5))
        assert "b" in err.value.missing

    def test_empty_shares_rejected(self, tiny):
        ct = encrypt(tiny, [18], 9, r=2)
        resp, _ = blind(tiny, ct, [18], s=3, tau=3)
        with pytest.raises(ShareSetMismatch):
            unblind(tiny, resp, UnblindShares(r_shares=(), s_shares=()))


class TestFreshness:
    def test_successive_blind_calls_draw_independent_secrets(self, tiny):
        rng = random.Random(33)
        ct = encrypt(tiny, [18], 9, rng)
        _, rec1 = blind(tiny, ct, [18], rng)
        _, rec2 = blind(tiny, ct, [18], rng)
        assert (rec1.s, rec1.t) != (rec2.s, rec2.t)

    def test_blind_takes_no_private_scalar(self):
        """The server-side operation is structurally unable to see private
        keys: its signature admits only the ciphertext, public keys, and
        randomness."""
        names = set(inspect.signature(blind).parameters)
        assert names == {
            "params",
            "ct",
            "recipient_publics",
            "rng",
            "content_id",
            "viewer_id",
            "s",
            "tau",
        }
        assert not any("private" in n for n in names)


class TestRegistry:
    def test_reuse_until_revoked(self, tiny):
        reg = BlindingRegistry()
        rng = random.Random(4)
        rec1 = reg.get_or_create(tiny, "c1", "v1", rng)
        rec2 = reg.get_or_create(tiny, "c1", "v1", rng)
        assert (rec1.s, rec1.t) == (rec2.s, rec2.t)
        assert blinding.revoke(reg, "c1", "v1") is True
        assert blinding.revoke(reg, "c1", "v1") is False
        rec3 = reg.get_or_create(tiny, "c1", "v1", rng)
        assert (rec3.s, rec3.t) != (rec1.s, rec1.t)

    def test_pairs_are_independent(self, tiny):
        reg = BlindingRegistry()
        rng = random.Random(4)
        a = reg.get_or_create(tiny, "c1", "v1", rng)
        b = reg.get_or_create(tiny, "c1", "v2", rng)
        assert (a.s, a.t) != (b.s, b.t)
        assert reg.revoke("c1", "v2") is True
        assert reg.get("c1", "v1") is not None

    def test_concurrent_first_fetch_converges(self, tiny):
        reg = BlindingRegistry()
        results = []
        barrier = threading.Barrier(8)

        def fetch():
            barrier.wait()
            results.append(reg.get_or_create(tiny, "c", "v"))

        threads = [threading.Thread(target=fetch) for _ in range(8)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert len({(r.s, r.t) for r in results}) == 1


class TestWire:
    def test_response_round_trip(self, tiny):
        ct = encrypt(tiny, [18], 9, r=2)
        resp, record = blind(tiny, ct, [18], s=3, tau=3)
        assert BlindedResponse.from_dict(resp.to_dict()) == resp
        assert BlindingRecord.from_dict(record.to_dict()) == record

    def test_fingerprint_tracks_secrets(self, tiny):
        ct = encrypt(tiny, [18], 9, r=2)
        resp1, _ = blind(tiny, ct, [18], s=3, tau=3)
        resp2, _ = blind(tiny, ct, [18], s=4, tau=3)
        assert resp1.fingerprint() != resp2.fingerprint()
