"""Walkthrough: dealing keys to a quorum and measuring the coverage
threshold.

With 10 members, 6 keys, and 2 keys per member, a reader contacting
members in random order needs about 5 to 6 of them before every key is
represented. Two dealing rules ship:

  member   — each extra key uniform over what the member lacks
             (exact mean 5.9023, window probability 0.6352)
  balanced — each extra key uniform over the globally least-dealt keys
             (exact mean 5.5145, window probability 0.7402)
"""

import numpy as np

from proxyshare import quorum

assignment = quorum.assign(10, 6, 2, rng=np.random.default_rng(1))
print("one assignment (member rule):")
for m, hand in enumerate(assignment.assignment):
    print(f"  member {m}: keys {sorted(hand)}")
print(f"members 0..5 alone cover all keys: {quorum.covers(assignment, range(6))}")
print(f"members 0..2 cover: {quorum.covers(assignment, range(3))} (3 is the minimum possible)")

for strategy in quorum.STRATEGIES:
    exact = quorum.exact_threshold(10, 6, 2, strategy=strategy)
    sim = quorum.simulate_threshold(10, 6, 2, 200_000, rng=7, strategy=strategy)
    print(f"\n{strategy} rule, 10 members / 6 keys / 2 per member:")
    print(f"  exact:      mean {exact.mean_picks:.4f}, P(4..6 picks) {exact.p_window:.4f}")
    print(
        f"  simulated:  mean {sim.mean_picks:.4f} (se {sim.stderr_mean:.4f}), "
        f"P(4..6 picks) {sim.p_window:.4f}, {sim.trials} trials"
    )
    print("  pick distribution:")
    for picks, probability in sorted(sim.pick_distribution.items()):
        bar = "#" * round(probability * 60)
        print(f"    {picks:>2}: {probability:.4f} {bar}")
