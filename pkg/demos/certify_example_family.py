"""Certify the parameterized example family and contrast it with its sibling.

Both instruments share every effect, so no amount of outcome statistics on
single measurements can tell them apart.  The certificate works on the
measurement operators themselves and separates them immediately.
"""

import qrepeat.opalgebra as oa
from qrepeat import (build_example_family, build_nonrepeatable_sibling,
                     certify_repeatable, classify_povm)

n, p = 2, (0.3, 0.7)
example = build_example_family(n, p)
sibling = build_nonrepeatable_sibling(n, p)

print(f"example family with n={n}, p={p}")
for label, m in example.items():
    print(f"  M_{label} = {m}")

report = certify_repeatable(example)
print(f"repeatable: {report.repeatable}")
print(f"orthogonal POVM: {report.orthogonal}")
for label, checks in report.per_outcome.items():
    print(f"  outcome {label}: isometric on range {checks.isometric_on_range}, "
          f"range in support {checks.range_in_support}")

# the sibling reuses the example's effects verbatim
same = all(oa.equals(example.povm().effect(l), sibling.povm().effect(l))
           for l in example.outcomes)
print(f"\nsibling has identical POVM: {same}")

sib_report = certify_repeatable(sibling)
print(f"sibling repeatable: {sib_report.repeatable} "
      f"(complete: {sib_report.complete})")
for w in sib_report.witnesses[:3]:
    print(f"  witness: {w.condition} deviates {w.deviation:.3g} at {w.position}")

# classification of the shared POVM: the projective part plus one
# degenerate column that any repeatable completion must rebuild
cls = classify_povm(example.povm())
print(f"\nshared POVM admits a repeatable completion: {cls.admits_repeatable_form}")
print(f"degenerate indices: {cls.omega_set}")
for label in example.outcomes:
    print(f"  outcome {label}: projective part on {cls.z_sets[label]}, "
          f"residual weight {cls.t[label]}")
