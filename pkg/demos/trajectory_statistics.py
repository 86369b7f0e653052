"""Sample measurement trajectories and compare tallies with the Born rule.

A repeatable instrument locks onto its first outcome: conditional
frequencies are exactly the Kronecker delta, with no statistical error,
because the repeated-outcome probability is exactly one trajectory by
trajectory.  Only the first outcome is random.
"""

import math

from qrepeat import (StateVector, born_probabilities, build_example_family,
                     empirical_conditionals, fixed_state_sampler,
                     run_trajectory)

inst = build_example_family(2, (0.3, 0.7))
psi = StateVector.basis(0)

print("Born probabilities from |0>:", born_probabilities(inst, psi))

record = run_trajectory(inst, psi, steps=8, seed=11)
print(f"trajectory outcomes: {record.outcomes}")
for k, step in enumerate(record.steps[:4]):
    print(f"  step {k}: outcome {step.outcome} "
          f"(p={step.probability:.3f}), depth {step.memory.depth}")
print("  ... depth keeps counting applications")

stats = empirical_conditionals(inst, fixed_state_sampler(psi),
                               trajectories=20_000, seed=7)
rate = stats.first_counts[1] / stats.trajectories
sigma = math.sqrt(0.3 * 0.7 / stats.trajectories)
print(f"\nfirst outcome 1 rate: {rate:.4f} "
      f"(Born 0.3000, sigma {sigma:.4f})")
print(f"p(1|1) = {stats.frequency(1, 1)}   p(2|1) = {stats.frequency(1, 2)}")
print(f"p(2|2) = {stats.frequency(2, 2)}   p(1|2) = {stats.frequency(2, 1)}")
print("the off-diagonal zeros are exact, not approximate: the repeated",
      "branch has amplitude zero in every float operation")
