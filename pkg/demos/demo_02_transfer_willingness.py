"""Transfer willingness: closed-form logit vs the sampled approximation.

A passenger transfers when the noisy utility of transferring beats staying.
The closed form is a binary logit in the incentive level; the design model
instead embeds a fixed set of Gumbel noise draws and counts per-draw wins,
which converges to the logit as the draw count grows.
"""

import math

from modularbus import UtilitySpec, logit_probability, saa_probability, sample_draws

spec = UtilitySpec(cons=1.0, incentive_costs=(0.0, 1.0, 2.0, 3.0))

print("closed-form willingness by incentive level:")
for s, label in zip((1, 2, 3, 4), ("none", "low", "middle", "high")):
    print(f"  {label:>6} (ic={spec.incentive_costs[s-1]:.0f}$): {logit_probability(spec, s):.4f}")

print("\nsampled approximation vs draw count (level=middle):")
p_true = logit_probability(spec, 3)
for n_draws in (10, 30, 100, 1_000, 10_000):
    draws = sample_draws(seed=7, n_draws=n_draws, n_stations=1, n_buses=1)
    est = saa_probability(draws, spec, 3, 0, 0)
    sigma = math.sqrt(p_true * (1 - p_true) / n_draws)
    print(f"  D={n_draws:>6}: {est:.4f}  (logit {p_true:.4f}, sampling sigma {sigma:.4f})")

print("\nwith a fixed draw set, a dearer level never lowers the estimate:")
draws = sample_draws(seed=3, n_draws=30, n_stations=1, n_buses=1)
print(" ", [round(saa_probability(draws, spec, s, 0, 0), 3) for s in (1, 2, 3, 4)])
