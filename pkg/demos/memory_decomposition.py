"""Decompose measurement operators into unitary and shift parts.

The shift part is where repetition leaves a trace: each application moves
the state one step deeper into an orbit, so the basis index remembers how
many times the instrument has fired since the state entered.  The unitary
part (cycles, bilateral chains) carries no such counter.
"""

from qrepeat import (StateVector, build_binary_example, build_example_family,
                     read_memory, split, wold_decompose)

example = build_example_family(2, (0.5, 0.5))

for label, m in example.items():
    parts = split(m)
    dec = wold_decompose(parts.v)
    print(f"outcome {label}: M = V + W with")
    print(f"  V = {parts.v}")
    print(f"  W = {parts.w}")
    for orbit in dec.shift_orbits:
        print(f"  orbit from {orbit.generator}: phases {orbit.phases}, "
              f"step {orbit.step}")
    print(f"  shift domain {dec.shift_domain}, unitary domain {dec.unitary_domain}")

# depth readout: |5> sits two applications deep in outcome 1's orbit
dec1 = wold_decompose(split(example.operator(1)).v)
reading = read_memory(dec1, StateVector.basis(5))
print(f"\n|5> in outcome 1's orbit: orbit {reading.orbit_id}, "
      f"depth {reading.depth}")

# a superposition across depths has no single depth, only a distribution
mixed = StateVector({1: 0.6 ** 0.5, 5: 0.4 ** 0.5})
reading = read_memory(dec1, mixed)
print(f"superposition: depth {reading.depth}, "
      f"distribution {reading.as_dict()}")

# the binary instrument interleaves two counters on stride 4
binary = build_binary_example(0.3, 0.7)
dec = wold_decompose(split(binary.operator(1)).v)
for orbit in dec.shift_orbits:
    print(f"binary outcome 1 orbit from {orbit.generator}: step {orbit.step}")
