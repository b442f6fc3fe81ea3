import itertools
import math
from fractions import Fraction

import pytest

from proxyshare import quorum
from proxyshare.errors import InfeasibleQuorum
from proxyshare.quorum import (
    QuorumAssignment,
    ThresholdStats,
    assign,
    covers,
    exact_threshold,
    simulate_threshold,
)

# Frozen oracle values for the 10-member / 6-key / 2-per-member scheme,
# computed by the enumeration below and cross-checked against independent
# scratch implementations before the simulator existed.
MEMBER_10_6_2 = (5.9022872088380955, 0.6351920761904762)
BALANCED_10_6_2 = (5.5144708994709, 0.7402380952380951)


# ---------------------------------------------------------------------------
# independent brute-force oracle: enumerate every assignment the rule can
# produce (with its probability) x every pick ordering
# ---------------------------------------------------------------------------


def _pick_distribution_for(masks, n, k):
    """Mean/dist over all n! orderings for one fixed assignment, by subset
    counting: P(picks <= j) = (#covering j-subsets) / C(n, j)."""
    full = (1 << k) - 1
    cover = [0] * (n + 1)
    for bits in range(1 << n):
        union = 0
        size = 0
        for i in range(n):
            if bits >> i & 1:
                union |= masks[i]
                size += 1
        if union == full:
            cover[size] += 1
    return [Fraction(cover[j], math.comb(n, j)) for j in range(n + 1)]


def brute_force(n, k, kpm, strategy):
    """Exact conditional pick distribution by full enumeration."""
    if strategy == "member":
        options = []
        for m in range(n):
            f = m % k
            rest = [key for key in range(k) if key != f]
            hands = [
                (1 << f) | sum(1 << key for key in combo)
                for combo in itertools.combinations(rest, kpm - 1)
            ]
            options.append(hands)
        weighted = []
        total = math.prod(len(o) for o in options)
        for combo in itertools.product(*options):
            weighted.append((list(combo), Fraction(1, total)))
    else:
        weighted = []

        def deal(slot_index, totals, masks, prob):
            slots = [(r, m) for r in range(kpm - 1) for m in range(n)]
            if slot_index == len(slots):
                weighted.append((list(masks), prob))
                return
            _, m = slots[slot_index]
            lo = min(totals)
            cands = [key for key in range(k) if totals[key] == lo]
            for key in cands:
                totals[key] += 1
                old = masks[m]
                masks[m] |= 1 << key
                deal(slot_index + 1, totals, masks, prob / len(cands))
                masks[m] = old
                totals[key] -= 1

        totals = [0] * k
        for m in range(n):
            totals[m % k] += 1
        deal(0, totals, [1 << (m % k) for m in range(n)], Fraction(1))

    cdf = [Fraction(0)] * (n + 1)
    for masks, prob in weighted:
        per = _pick_distribution_for(masks, n, k)
        for j in range(n + 1):
            cdf[j] += prob * per[j]
    feasible = cdf[n]
    if feasible == 0:
        raise InfeasibleQuorum("no covering assignment")
    mean = sum(1 - c / feasible for c in cdf[:n])
    dist = {
        j: float((cdf[j] - cdf[j - 1]) / feasible)
        for j in range(1, n + 1)
        if cdf[j] != cdf[j - 1]
    }
    return float(mean), dist, float(feasible)


class TestAssign:
    def test_member_rule_first_key_and_distinctness(self):
        a = assign(10, 6, 2, rng=1, strategy="member")
        for m, hand in enumerate(a.assignment):
            assert m % 6 in hand
            assert len(hand) == 2

    def test_member_rule_extra_key_never_duplicates(self):
        for seed in range(30):
            a = assign(7, 4, 3, rng=seed, strategy="member")
            assert all(len(hand) == 3 for hand in a.assignment)

    def test_balanced_rule_hands(self):
        for seed in range(30):
            a = assign(10, 6, 2, rng=seed, strategy="balanced")
            for m, hand in enumerate(a.assignment):
                assert m % 6 in hand
                assert 1 <= len(hand) <= 2

    def test_single_key_per_member(self):
        a = assign(6, 6, 1, rng=0)
        assert a.assignment == tuple(frozenset({m}) for m in range(6))

    def test_full_hands(self):
        a = assign(4, 3, 3, rng=0, strategy="member")
        assert all(hand == frozenset({0, 1, 2}) for hand in a.assignment)

    def test_config_validation(self):
        with pytest.raises(ValueError):
            assign(5, 3, 4)
        with pytest.raises(ValueError):
            assign(0, 3, 1)
        with pytest.raises(ValueError):
            assign(5, 64, 1)
        with pytest.raises(ValueError):
            assign(5, 3, 1, strategy="global")


class TestCovers:
    def test_examples(self):
        a = assign(10, 6, 2, rng=3, strategy="member")
        assert covers(a, range(6))  # first keys 0..5 alone cover
        for pair in itertools.combinations(range(10), 2):
            assert not covers(a, pair)  # 2*2 < 6
        assert not covers(a, set())

    def test_out_of_range_member(self):
        a = assign(4, 3, 1, rng=0)
        with pytest.raises(ValueError):
            covers(a, {0, 7})

    def test_minimum_covering_size(self):
        # fewer than ceil(k / kpm) members can never cover
        for seed in range(20):
            a = assign(10, 6, 2, rng=seed, strategy="member")
            for size in range(1, 3):
                for members in itertools.combinations(range(10), size):
                    assert not covers(a, members)


class TestExactAgainstBruteForce:
    @pytest.mark.parametrize(
        "n,k,kpm",
        [(3, 2, 1), (4, 3, 2), (5, 3, 1), (4, 4, 2), (6, 3, 2), (5, 6, 2), (6, 4, 3)],
    )
    def test_member_rule(self, n, k, kpm):
        mean, dist, _ = brute_force(n, k, kpm, "member")
        stats = exact_threshold(n, k, kpm, strategy="member")
        assert stats.mean_picks == pytest.approx(mean, abs=1e-12)
        assert stats.pick_distribution == pytest.approx(dist, abs=1e-12)

    @pytest.mark.parametrize("n,k,kpm", [(3, 2, 2), (4, 3, 2), (5, 3, 2), (6, 4, 2)])
    def test_balanced_rule(self, n, k, kpm):
        mean, dist, _ = brute_force(n, k, kpm, "balanced")
        stats = exact_threshold(n, k, kpm, strategy="balanced")
        assert stats.mean_picks == pytest.approx(mean, abs=1e-9)
        assert stats.pick_distribution == pytest.approx(dist, abs=1e-9)

    def test_frozen_reference_values(self):
        member = exact_threshold(10, 6, 2, strategy="member")
        assert member.mean_picks == pytest.approx(MEMBER_10_6_2[0], abs=1e-12)
        assert member.p_window == pytest.approx(MEMBER_10_6_2[1], abs=1e-12)
        balanced = exact_threshold(10, 6, 2, strategy="balanced")
        assert balanced.mean_picks == pytest.approx(BALANCED_10_6_2[0], abs=1e-9)
        assert balanced.p_window == pytest.approx(BALANCED_10_6_2[1], abs=1e-9)

    def test_enumeration_limit(self):
        with pytest.raises(ValueError):
            exact_threshold(13, 6, 2)


class TestTrivialConfigurations:
    def test_permutation_case_needs_every_member(self):
        stats = exact_threshold(6, 6, 1)
        assert stats.mean_picks == 6.0
        assert stats.pick_distribution == {6: 1.0}
        sim = simulate_threshold(6, 6, 1, 2000, rng=0)
        assert sim.pick_distribution == {6: 1.0}

    def test_full_hands_need_one_pick(self):
        stats = exact_threshold(5, 3, 3, strategy="member")
        assert stats.mean_picks == 1.0
        sim = simulate_threshold(5, 3, 3, 2000, rng=0, strategy="member")
        assert sim.mean_picks == 1.0

    def test_impossible_coverage_flagged(self):
        # 3 members, 6 keys, 1 key each: keys 3..5 can never be handed out
        with pytest.raises(InfeasibleQuorum):
            exact_threshold(3, 6, 1)
        with pytest.raises(InfeasibleQuorum):
            simulate_threshold(3, 6, 1, 500, rng=0)


class TestSimulatorAgainstExact:
    CONFIGS = [
        (10, 6, 2, "member"),
        (10, 6, 2, "balanced"),
        (8, 4, 2, "member"),
        (8, 4, 2, "balanced"),
        (12, 6, 2, "member"),
        (7, 5, 3, "member"),
        (6, 6, 1, "balanced"),
        (5, 6, 2, "member"),  # partially infeasible assignments
    ]

    @pytest.mark.parametrize("n,k,kpm,strategy", CONFIGS)
    def test_within_three_standard_errors(self, n, k, kpm, strategy):
        exact = exact_threshold(n, k, kpm, strategy=strategy)
        sim = simulate_threshold(n, k, kpm, 60_000, rng=7, strategy=strategy)
        assert abs(sim.mean_picks - exact.mean_picks) <= 3 * sim.stderr_mean

    def test_partial_infeasibility_is_conditional(self):
        exact = exact_threshold(5, 6, 2, strategy="member")
        sim = simulate_threshold(5, 6, 2, 60_000, rng=11, strategy="member")
        assert sim.infeasible_trials > 0
        # brute force gave feasibility 0.67232; the simulator should agree
        assert sim.infeasible_trials / sim.trials == pytest.approx(1 - 0.67232, abs=0.01)
        assert abs(sim.mean_picks - exact.mean_picks) <= 3 * sim.stderr_mean


class TestStatsProperties:
    def test_distribution_sums_to_one(self):
        for stats in (
            exact_threshold(10, 6, 2),
            simulate_threshold(10, 6, 2, 20_000, rng=5),
        ):
            assert sum(stats.pick_distribution.values()) == pytest.approx(1.0, abs=1e-9)

    def test_support_bounds(self):
        for strategy in quorum.STRATEGIES:
            stats = simulate_threshold(10, 6, 2, 20_000, rng=5, strategy=strategy)
            assert min(stats.pick_distribution) >= math.ceil(6 / 2)
            assert max(stats.pick_distribution) <= 10

    def test_window_matches_distribution(self):
        stats = exact_threshold(10, 6, 2)
        assert stats.p_window == pytest.approx(stats.probability_between(4, 6), abs=1e-12)

    def test_inconsistent_stats_rejected(self):
        with pytest.raises(ValueError):
            ThresholdStats(mean_picks=2.0, pick_distribution={1: 0.6, 2: 0.3}, p_window=0.0)
        with pytest.raises(ValueError):
            ThresholdStats(mean_picks=2.0, pick_distribution={1: 0.5, 2: 0.5}, p_window=0.0)


class TestReproducibilityAndModes:
    def test_same_seed_same_result(self):
        a = simulate_threshold(10, 6, 2, 30_000, rng=42)
        b = simulate_threshold(10, 6, 2, 30_000, rng=42)
        assert a == b

    def test_fixed_assignment_mode(self):
        fixed = simulate_threshold(10, 6, 2, 30_000, rng=2, fresh_assignment=False)
        fresh = simulate_threshold(10, 6, 2, 30_000, rng=2, fresh_assignment=True)
        assert fixed.trials == fresh.trials == 30_000
        # one drawn assignment has its own exact statistics; they almost
        # never coincide with the fresh-per-trial average
        assert fixed.pick_distribution != fresh.pick_distribution

    def test_trial_validation(self):
        with pytest.raises(ValueError):
            simulate_threshold(10, 6, 2, 0, rng=1)
