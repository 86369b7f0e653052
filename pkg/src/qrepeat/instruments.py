"""Measurement instruments and their effect operators.

An instrument is a finite, labeled family of structured contractions whose
squared moduli resolve the identity.  Builders cover the worked families
used throughout the tests: a one-parameter-per-outcome repeatable family,
its non-repeatable sibling with the same effects, a two-outcome example
with two-dimensional deposit blocks, projective instruments over index-set
partitions, and reassembly from shift/deposit parts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping

from . import opalgebra as oa
from .errors import (BadProbabilityVector, CompletenessViolation,
                     ContractionViolation, CoverageViolation, InvalidPovm,
                     PartsViolation)
from .indexsets import IndexSet
from .opalgebra import Dyad, Family, StructuredOperator

Outcome = int | str


def _sort_key(label: Outcome):
    return (0, label, "") if isinstance(label, int) else (1, 0, label)


@dataclass(frozen=True)
class Instrument:
    """Labeled measurement operators, ordered by outcome label."""

    entries: tuple[tuple[Outcome, StructuredOperator], ...]

    @property
    def outcomes(self) -> tuple[Outcome, ...]:
        return tuple(label for label, _ in self.entries)

    def operator(self, label: Outcome) -> StructuredOperator:
        for lab, op in self.entries:
            if lab == label:
                return op
        raise KeyError(label)

    def items(self):
        return iter(self.entries)

    def povm(self) -> "Povm":
        return povm(self)


@dataclass(frozen=True)
class Povm:
    """Effect operators ``P_e = M_e* M_e``, in outcome label order."""

    entries: tuple[tuple[Outcome, StructuredOperator], ...]

    @property
    def outcomes(self) -> tuple[Outcome, ...]:
        return tuple(label for label, _ in self.entries)

    def effect(self, label: Outcome) -> StructuredOperator:
        for lab, op in self.entries:
            if lab == label:
                return op
        raise KeyError(label)

    def items(self):
        return iter(self.entries)


def _sum_ops(ops: Iterable[StructuredOperator]) -> StructuredOperator:
    total = StructuredOperator.zero()
    for op in ops:
        total = total + op
    return total


def make_instrument(entries: Mapping[Outcome, StructuredOperator],
                    check_completeness: bool = True,
                    tol: float | None = None) -> Instrument:
    """Validate and freeze a labeled operator family.

    Each operator must be a contraction; when ``check_completeness`` is set
    the squared moduli must sum to the identity exactly (window-decided).
    """
    if not entries:
        raise ValueError("an instrument needs at least one outcome")
    ordered = tuple(sorted(entries.items(), key=lambda kv: _sort_key(kv[0])))
    tol_ = oa.TOLERANCE if tol is None else tol
    for label, op in ordered:
        if not isinstance(op, StructuredOperator):
            raise TypeError(f"outcome {label!r} is not a StructuredOperator")
        norm, method = oa.operator_norm(op)
        slack = tol_ if method == "exact" else max(tol_, 1e-9)
        if norm > 1.0 + slack:
            raise ContractionViolation(
                f"operator for outcome {label!r} has norm {norm:.6g} > 1",
                outcome=label, norm=norm)
    if check_completeness:
        total = _sum_ops(oa.compose(oa.adjoint(op), op) for _, op in ordered)
        dev, pos = oa.max_deviation(total, StructuredOperator.identity())
        if dev > tol_:
            raise CompletenessViolation(
                f"sum of squared moduli deviates from identity by {dev:.3g} at {pos}",
                position=pos, deviation=dev)
    return Instrument(ordered)


def povm(inst: Instrument) -> Povm:
    return Povm(tuple((label, oa.compose(oa.adjoint(op), op))
                      for label, op in inst.items()))


def make_povm(entries: Mapping[Outcome, StructuredOperator],
              tol: float | None = None) -> Povm:
    """Freeze raw effects, verifying only that they sum to the identity.

    Positivity of arbitrary structured effects is not decided here; effects
    produced by :func:`povm` are positive by construction.
    """
    ordered = tuple(sorted(entries.items(), key=lambda kv: _sort_key(kv[0])))
    total = _sum_ops(op for _, op in ordered)
    dev, pos = oa.max_deviation(total, StructuredOperator.identity())
    if dev > (oa.TOLERANCE if tol is None else tol):
        raise InvalidPovm(f"effects deviate from a resolution of identity by {dev:.3g} at {pos}")
    return Povm(ordered)


# -- worked families -------------------------------------------------------


def _check_probability_vector(p: Iterable[float], tol: float | None = None) -> tuple[float, ...]:
    p = tuple(float(x) for x in p)
    tol_ = oa.TOLERANCE if tol is None else tol
    if any(x < -tol_ or x > 1.0 + tol_ for x in p):
        raise BadProbabilityVector(f"entries must lie in [0, 1]: {p}")
    if abs(sum(p) - 1.0) > tol_:
        raise BadProbabilityVector(f"entries must sum to 1: {p}")
    return tuple(min(max(x, 0.0), 1.0) for x in p)


def build_example_family(n: int, p: Iterable[float]) -> Instrument:
    """Repeatable instrument with outcomes ``1..n``.

    Outcome ``l`` maps |0> to |l> with amplitude ``sqrt(p_l)`` and shifts
    the residue class ``l mod n`` upward by ``n``.  The effects are
    ``p_l |0><0| + sum_j |nj+l><nj+l|``, so for ``0 < p_l < 1`` no outcome
    is projective, yet every repetition reproduces the first result.
    """
    if n < 1:
        raise BadProbabilityVector("n must be at least 1")
    p = _check_probability_vector(p)
    if len(p) != n:
        raise BadProbabilityVector(f"expected {n} probabilities, got {len(p)}")
    entries = {}
    for l in range(1, n + 1):
        terms = [Family(1.0, n, n + l, n, l)]
        amp = math.sqrt(p[l - 1])
        if amp > 0:
            terms.append(Dyad(amp, l, 0))
        entries[l] = StructuredOperator(terms)
    return make_instrument(entries)


def build_nonrepeatable_sibling(n: int, p: Iterable[float]) -> Instrument:
    """Instrument with the same effects as :func:`build_example_family`.

    Outcome ``l`` keeps |0> in place instead of shifting it out of the way,
    which destroys repeatability while leaving every outcome probability
    unchanged.
    """
    if n < 1:
        raise BadProbabilityVector("n must be at least 1")
    p = _check_probability_vector(p)
    if len(p) != n:
        raise BadProbabilityVector(f"expected {n} probabilities, got {len(p)}")
    entries = {}
    for l in range(1, n + 1):
        terms = [Family(1.0, n, l, n, l)]
        amp = math.sqrt(p[l - 1])
        if amp > 0:
            terms.append(Dyad(amp, 0, 0))
        entries[l] = StructuredOperator(terms)
    return make_instrument(entries)


def build_binary_example(p1: float, p2: float) -> Instrument:
    """Two-outcome repeatable instrument with a two-dimensional deposit block.

    Outcome 1 carries |0> to |2> and |1> to |4| with amplitudes
    ``sqrt(p1), sqrt(p2)`` and shifts even indices >= 2 up by four; outcome 2
    mirrors this on odd indices with the complementary amplitudes.
    """
    for name, val in (("p1", p1), ("p2", p2)):
        if not 0.0 <= val <= 1.0:
            raise BadProbabilityVector(f"{name} must lie in [0, 1], got {val}")
    m1 = [Family(1.0, 2, 6, 2, 2)]
    if p1 > 0:
        m1.append(Dyad(math.sqrt(p1), 2, 0))
    if p2 > 0:
        m1.append(Dyad(math.sqrt(p2), 4, 1))
    m2 = [Family(1.0, 2, 7, 2, 3)]
    if p1 < 1:
        m2.append(Dyad(math.sqrt(1.0 - p1), 3, 0))
    if p2 < 1:
        m2.append(Dyad(math.sqrt(1.0 - p2), 5, 1))
    return make_instrument({1: StructuredOperator(m1), 2: StructuredOperator(m2)})


def build_orthogonal(index_sets: Mapping[Outcome, IndexSet]) -> Instrument:
    """Projective instrument from a partition of the basis into index sets."""
    labels = sorted(index_sets, key=_sort_key)
    union = IndexSet.empty()
    for label in labels:
        s = index_sets[label]
        overlap = union.intersect(s)
        if not overlap.is_empty:
            raise CoverageViolation(
                f"index sets overlap at {overlap.first()} (outcome {label!r})")
        union = union.union(s)
    if union != IndexSet.full():
        missing = IndexSet.full().difference(union)
        raise CoverageViolation(f"basis index {missing.first()} is not covered")
    return make_instrument({label: oa.projector(index_sets[label]) for label in labels})


def build_from_parts(parts: Mapping[Outcome, tuple[StructuredOperator, StructuredOperator]],
                     tol: float | None = None) -> Instrument:
    """Assemble ``M_e = V_e + W_e`` from shift and deposit blocks.

    Verifies that each ``V_e`` is a partial isometry, that deposits feed
    into the matching shift range, that distinct outcomes have orthogonal
    blocks, and that the squared moduli resolve the identity; the result is
    then re-certified for repeatability rather than trusted.
    """
    from .certify import certify_repeatable

    tol_ = oa.TOLERANCE if tol is None else tol
    labels = sorted(parts, key=_sort_key)
    zero = StructuredOperator.zero()

    def check(cond: str, a: StructuredOperator, b: StructuredOperator):
        dev, pos = oa.max_deviation(a, b)
        if dev > tol_:
            raise PartsViolation(f"{cond}: deviation {dev:.3g} at {pos}",
                                 condition=cond, position=pos, deviation=dev)

    for label in labels:
        v, w = parts[label]
        gram = oa.compose(oa.adjoint(v), v)
        check(f"shift block {label!r} is a partial isometry",
              oa.compose(gram, gram), gram)
        check(f"blocks of outcome {label!r} have orthogonal ranges",
              oa.compose(oa.adjoint(w), v), zero)
        check(f"blocks of outcome {label!r} have orthogonal ranges (adjoint)",
              oa.compose(oa.adjoint(v), w), zero)
        # repeated application must act isometrically on whatever W emits
        check(f"deposit of outcome {label!r} lands in the shift support",
              oa.compose(gram, w), w)
        check(f"deposit of outcome {label!r} composes to zero with itself",
              oa.compose(w, w), zero)
        check(f"shift of outcome {label!r} avoids the deposit block",
              oa.compose(oa.compose(oa.adjoint(w), w), v), zero)
    for la in labels:
        for lb in labels:
            if la == lb:
                continue
            check(f"shift ranges of {la!r} and {lb!r} are orthogonal",
                  oa.compose(oa.adjoint(parts[la][0]), parts[lb][0]), zero)
            check(f"deposits of {la!r} and {lb!r} are orthogonal",
                  oa.compose(oa.adjoint(parts[la][1]), parts[lb][1]), zero)
    total = _sum_ops(
        oa.compose(oa.adjoint(parts[label][0]), parts[label][0]) +
        oa.compose(oa.adjoint(parts[label][1]), parts[label][1])
        for label in labels)
    check("blocks resolve the identity", total, StructuredOperator.identity())

    inst = make_instrument({label: parts[label][0] + parts[label][1] for label in labels},
                           tol=tol)
    report = certify_repeatable(inst, tol=tol)
    if not report.repeatable:
        first = report.witnesses[0] if report.witnesses else None
        raise PartsViolation(
            "assembled instrument failed repeatability certification"
            + (f" ({first.condition} at {first.position})" if first else ""),
            condition="repeatability",
            position=first.position if first else None,
            deviation=first.deviation if first else None)
    return inst
