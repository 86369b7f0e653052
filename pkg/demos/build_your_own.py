"""Assemble a repeatable instrument from shift and deposit blocks.

The recipe: pick disjoint eventually-periodic index sets, give each
outcome an isometric shift V acting inside its own set, and route every
leftover basis column into the shift supports through deposits W whose
squared amplitudes sum to one.  build_from_parts verifies each condition
and re-certifies the assembled instrument before handing it back.
"""

import math

from qrepeat import (Dyad, Family, PartsViolation, StateVector,
                     StructuredOperator, build_from_parts,
                     certify_repeatable, run_trajectory)

# three outcomes on residue classes mod 3; index 0 is nobody's support, so
# it becomes the shared deposit source
shifts = {
    1: StructuredOperator((Family(1.0, 3, 4, 3, 1),)),  # 1 -> 4 -> 7 ...
    2: StructuredOperator((Family(1.0, 3, 5, 3, 2),)),  # 2 -> 5 -> 8 ...
    3: StructuredOperator((Family(1.0, 3, 6, 3, 3),)),  # 3 -> 6 -> 9 ...
}
amps = (math.sqrt(0.2), math.sqrt(0.3) * 1j, math.sqrt(0.5))
deposits = {l: StructuredOperator((Dyad(amps[l - 1], l, 0),)) for l in (1, 2, 3)}

inst = build_from_parts({l: (shifts[l], deposits[l]) for l in (1, 2, 3)})
report = certify_repeatable(inst)
print(f"assembled instrument repeatable: {report.repeatable}")

record = run_trajectory(inst, StateVector.basis(0), steps=5, seed=3)
print(f"trajectory from the deposit source: outcomes {record.outcomes}")
print(f"final depth: {record.steps[-1].memory.depth}")

# a deposit aimed at another outcome's territory is refused with the
# violated condition and the offending matrix position
bad = dict(deposits)
bad[1] = StructuredOperator((Dyad(amps[0], 2, 0),))
try:
    build_from_parts({l: (shifts[l], bad[l]) for l in (1, 2, 3)})
except PartsViolation as err:
    print(f"\nrejected: {err}")

# so is a weight vector that fails to resolve the identity
short = dict(deposits)
short[3] = StructuredOperator((Dyad(math.sqrt(0.25), 3, 0),))
try:
    build_from_parts({l: (shifts[l], short[l]) for l in (1, 2, 3)})
except PartsViolation as err:
    print(f"rejected: {err}")
