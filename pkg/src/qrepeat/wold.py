"""Shift/deposit splitting and orbit decomposition of partial isometries.

A monomial partial isometry whose families all translate along their own
progression acts on basis indices as an injective partial map sigma.  Its
orbit structure is computed exactly: forward walks from generator indices
become unilateral shift orbits, translation-free pieces form a fixed
domain, and whatever remains splits into finite cycles, periodic families
of cycles, and bilateral chains.  The shift orbits carry the repetition
counter: the depth of a basis index inside its orbit counts how many times
the measurement has acted since the state entered the orbit.

Walk termination rests on two facts.  Forward orbits visit pairwise
distinct indices, so each dyad is crossed at most once; and between dyad
crossings a revisit of the same (family, index mod L) key at a higher
index proves the walk has become translation-periodic, because the whole
segment between the two visits shifts upward unchanged.  Revisits at lower
indices form strictly decreasing chains, which are finite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from . import opalgebra as oa
from .errors import (NotIsometricOnSupport, PeriodCapExceeded,
                     SplitInvariantViolation, UnsupportedForm)
from .indexsets import IndexSet
from .opalgebra import Dyad, Family, StateVector, StructuredOperator

_WALK_CAP = 500_000


# -- splitting M = V + W ----------------------------------------------------


@dataclass(frozen=True)
class SplitParts:
    """Shift block ``v`` (columns inside the range) and deposit block ``w``."""

    v: StructuredOperator
    w: StructuredOperator


def split(m: StructuredOperator, tol: float | None = None) -> SplitParts:
    """Split a monomial operator into its shift and deposit blocks.

    Columns whose input index already lies in the range of ``m`` form
    ``v``; the remaining support columns form ``w``.  For operators coming
    from a repeatable instrument ``v`` is a partial isometry and the blocks
    have orthogonal ranges; violations are reported with the failing
    condition and deviation, which is the standard symptom of feeding in a
    non-repeatable operator.
    """
    tol_ = oa.TOLERANCE if tol is None else tol
    if not oa.is_monomial(m):
        raise UnsupportedForm("splitting requires at most one entry per column")
    v = oa.compose(m, oa.projector(m.range_set()))
    w = m + v.scale(-1.0)

    def check(cond: str, a: StructuredOperator, b: StructuredOperator):
        dev, _ = oa.max_deviation(a, b)
        if dev > tol_:
            raise SplitInvariantViolation(
                f"{cond}: deviation {dev:.3g}", condition=cond, deviation=dev)

    gram = oa.compose(oa.adjoint(v), v)
    check("shift block squares to itself", oa.compose(gram, gram), gram)
    zero = StructuredOperator.zero()
    check("deposit range is orthogonal to the shift range",
          oa.compose(oa.adjoint(v), w), zero)
    check("shift range is orthogonal to the deposit range",
          oa.compose(oa.adjoint(w), v), zero)
    return SplitParts(v, w)


# -- orbit bookkeeping -------------------------------------------------------


@dataclass(frozen=True)
class ShiftOrbit:
    """Forward orbit of one generator index.

    The orbit visits ``prefix`` first, then cycles through ``phases``
    shifted upward by ``step`` per revolution: the index at depth
    ``len(prefix) + r*len(phases) + k`` is ``phases[k] + r*step``.
    """

    generator: int
    prefix: tuple[int, ...]
    phases: tuple[int, ...]
    step: int

    def depth_of(self, index: int) -> int | None:
        """Number of steps from the generator, or None when outside."""
        if index in self.prefix:
            return self.prefix.index(index)
        hits = [(k, (index - p) // self.step)
                for k, p in enumerate(self.phases)
                if index >= p and (index - p) % self.step == 0]
        if not hits:
            return None
        if len(hits) > 1:
            raise RuntimeError("orbit phases decode ambiguously; walk is corrupt")
        k, r = hits[0]
        return len(self.prefix) + r * len(self.phases) + k

    def index_at(self, depth: int) -> int:
        if depth < 0:
            raise ValueError("depth must be nonnegative")
        if depth < len(self.prefix):
            return self.prefix[depth]
        d = depth - len(self.prefix)
        r, k = divmod(d, len(self.phases))
        return self.phases[k] + r * self.step

    def index_set(self) -> IndexSet:
        s = IndexSet.from_indices(self.prefix)
        for p in self.phases:
            s = s.union(IndexSet.from_progression(self.step, p))
        return s


@dataclass(frozen=True)
class CycleFamily:
    """Infinitely many congruent cycles: ``offsets + j*step`` for every j >= 0."""

    offsets: tuple[int, ...]
    step: int

    def index_set(self) -> IndexSet:
        s = IndexSet.empty()
        for off in self.offsets:
            s = s.union(IndexSet.from_progression(self.step, off))
        return s


@dataclass(frozen=True)
class BilateralOrbit:
    """Orbit with no generator, unbounded in both directions.

    Read forward, the orbit descends through ``descending_phases`` shifted
    by ``descending_step`` per revolution, crosses the finite ``core``, and
    climbs away through ``ascending_phases``.
    """

    descending_phases: tuple[int, ...]
    descending_step: int
    core: tuple[int, ...]
    ascending_phases: tuple[int, ...]
    ascending_step: int

    def index_set(self) -> IndexSet:
        s = IndexSet.from_indices(self.core)
        for p in self.descending_phases:
            s = s.union(IndexSet.from_progression(self.descending_step, p))
        for p in self.ascending_phases:
            s = s.union(IndexSet.from_progression(self.ascending_step, p))
        return s


@dataclass(frozen=True)
class WoldDecomposition:
    """Exact unitary/shift splitting ``v = u + s`` with its orbit inventory."""

    u: StructuredOperator
    s: StructuredOperator
    shift_orbits: tuple[ShiftOrbit, ...]
    cycles: tuple[tuple[int, ...], ...]
    cycle_families: tuple[CycleFamily, ...]
    bilateral_orbits: tuple[BilateralOrbit, ...]
    fixed_domain: IndexSet
    unitary_domain: IndexSet
    shift_domain: IndexSet

    def orbit_of(self, index: int) -> ShiftOrbit | None:
        for orbit in self.shift_orbits:
            if orbit.depth_of(index) is not None:
                return orbit
        return None


# -- the index map sigma -----------------------------------------------------


class _Piece:
    __slots__ = ("pid", "kind", "a", "b", "stride", "offset", "shift")

    def __init__(self, pid, kind, a=0, b=0, stride=1, offset=0, shift=0):
        self.pid = pid
        self.kind = kind  # "dyad" or "family"
        self.a = a
        self.b = b
        self.stride = stride
        self.offset = offset
        self.shift = shift


def _pieces_of(terms, inverse: bool) -> list[_Piece]:
    out = []
    for n, t in enumerate(terms):
        if isinstance(t, Dyad):
            a, b = (t.out, t.in_) if inverse else (t.in_, t.out)
            out.append(_Piece(n, "dyad", a=a, b=b))
        else:
            shift = t.out_offset - t.in_offset
            if inverse:
                out.append(_Piece(n, "family", stride=t.in_stride,
                                  offset=t.out_offset, shift=-shift))
            else:
                out.append(_Piece(n, "family", stride=t.in_stride,
                                  offset=t.in_offset, shift=shift))
    return out


def _lookup(pieces: list[_Piece], i: int) -> _Piece | None:
    for p in pieces:
        if p.kind == "dyad":
            if p.a == i:
                return p
        elif i >= p.offset and (i - p.offset) % p.stride == 0:
            return p
    return None


def _walk(pieces: list[_Piece], start: int, modulus: int):
    """Follow sigma from ``start`` until the orbit closes or turns periodic.

    Returns ("cycle", indices) or ("ray", prefix, phases, step).
    """
    seq = [start]
    visited = {start}
    seen: dict[tuple[int, int], int] = {}
    while len(seq) <= _WALK_CAP:
        i = seq[-1]
        piece = _lookup(pieces, i)
        if piece is None:
            raise RuntimeError(f"index map is not total at {i}")
        if piece.kind == "family":
            key = (piece.pid, i % modulus)
            at = seen.get(key)
            if at is not None and seq[at] < i:
                return "ray", tuple(seq[:at]), tuple(seq[at:-1]), i - seq[at]
            seen[key] = len(seq) - 1
            nxt = i + piece.shift
        else:
            seen.clear()
            nxt = piece.b
        if nxt == start:
            return "cycle", tuple(seq)
        if nxt in visited:
            raise RuntimeError("orbit walk revisited an interior index")
        seq.append(nxt)
        visited.add(nxt)
    raise RuntimeError("orbit walk exceeded the safety cap")


# -- decomposition -----------------------------------------------------------


def _validate(v: StructuredOperator, tol: float) -> tuple[IndexSet, IndexSet]:
    if not oa.is_monomial(v):
        raise UnsupportedForm("orbit analysis requires at most one entry per column")
    if not oa.is_monomial(oa.adjoint(v)):
        raise NotIsometricOnSupport(
            "columns share output rows, so the squared modulus is not a projector")
    for t in v.terms:
        if isinstance(t, Family) and t.out_stride != t.in_stride:
            raise UnsupportedForm(
                "a family changes stride, so its orbits are not eventually arithmetic")
        if abs(abs(t.coeff) - 1.0) > tol:
            raise NotIsometricOnSupport(
                f"column amplitude {abs(t.coeff):.6g} differs from 1")
    rng, support = v.range_set(), v.support_set()
    if not rng.is_subset(support):
        raise UnsupportedForm(
            "the range leaves the support, so forward orbits are not total")
    return support, rng


def wold_decompose(v: StructuredOperator, tol: float | None = None) -> WoldDecomposition:
    """Split a partial isometry into unitary and unilateral-shift blocks.

    Requires a monomial operator with unimodular amplitudes whose families
    translate along their own progressions and whose range stays inside its
    support.  Forward walks from the finitely many generator indices
    (support minus range) yield the shift orbits; the rest of the support
    carries the unitary block, inventoried as a fixed domain, finite
    cycles, periodic cycle families, and bilateral chains.  Every verdict
    is re-verified exactly before returning.
    """
    tol_ = oa.TOLERANCE if tol is None else tol
    zero = StructuredOperator.zero()
    if v.is_zero():
        empty = IndexSet.empty()
        return WoldDecomposition(zero, zero, (), (), (), (), empty, empty, empty)
    support, rng = _validate(v, tol_)

    fixed = IndexSet.empty()
    active = []
    for t in v.terms:
        if isinstance(t, Family) and t.out_offset == t.in_offset:
            fixed = fixed.union(IndexSet.from_progression(t.in_stride, t.in_offset))
        else:
            active.append(t)
    pieces = _pieces_of(active, inverse=False)
    inv_pieces = _pieces_of(active, inverse=True)
    fam_pieces = [p for p in pieces if p.kind == "family"]
    modulus = math.lcm(*[p.stride for p in fam_pieces]) if fam_pieces else 1

    generators = support.difference(rng)
    if not generators.is_finite:
        raise RuntimeError("generator set is infinite despite range inclusion")
    orbits: list[ShiftOrbit] = []
    shift_domain = IndexSet.empty()
    for g in generators.members_below(generators.bound):
        kind, *rest = _walk(pieces, g, modulus)
        if kind != "ray":
            raise RuntimeError("a generator orbit closed into a cycle")
        prefix, phases, step = rest
        orbit = ShiftOrbit(g, prefix, phases, step)
        oset = orbit.index_set()
        if not shift_domain.is_disjoint(oset):
            raise RuntimeError("shift orbits overlap")
        orbits.append(orbit)
        shift_domain = shift_domain.union(oset)

    # everything else is recurrent: cycles, cycle families, bilateral chains
    leftover = support.difference(fixed).difference(shift_domain)
    dyad_indices = [x for p in pieces if p.kind == "dyad" for x in (p.a, p.b)]
    horizon = max([leftover.bound, 1]
                  + [p.offset + p.stride for p in fam_pieces]
                  + [x + 1 for x in dyad_indices])
    cycles: list[tuple[int, ...]] = []
    bilaterals: list[BilateralOrbit] = []
    claimed = IndexSet.empty()
    for q in leftover.members_below(horizon):
        if q in claimed:
            continue
        kind, *rest = _walk(pieces, q, modulus)
        if kind == "cycle":
            cycles.append(rest[0])
            claimed = claimed.union(IndexSet.from_indices(rest[0]))
            continue
        fprefix, fphases, fstep = rest
        bkind, *brest = _walk(inv_pieces, q, modulus)
        if bkind != "ray":
            raise RuntimeError("backward walk closed a cycle the forward walk missed")
        bprefix, bphases, bstep = brest
        back = tuple(reversed(bprefix))
        core = back + fprefix[1:] if back and fprefix else back + fprefix
        orbit = BilateralOrbit(bphases, bstep, core, fphases, fstep)
        bilaterals.append(orbit)
        claimed = claimed.union(orbit.index_set())

    cycle_families = _tail_cycle_families(leftover, fam_pieces, modulus, horizon)

    covered = fixed.union(shift_domain).union(claimed)
    for cf in cycle_families:
        covered = covered.union(cf.index_set())
    if covered != support:
        raise RuntimeError("orbit inventory fails to cover the support")

    unitary_domain = support.difference(shift_domain)
    s_op = oa.compose(v, oa.projector(shift_domain))
    u_op = oa.compose(v, oa.projector(unitary_domain))
    proj_u = oa.projector(unitary_domain)
    if not oa.equals(u_op + s_op, v, tol_):
        raise RuntimeError("unitary and shift blocks do not reassemble the input")
    if not oa.equals(oa.compose(oa.adjoint(u_op), u_op), proj_u, tol_) \
            or not oa.equals(oa.compose(u_op, oa.adjoint(u_op)), proj_u, tol_):
        raise RuntimeError("unitary block fails its unitarity certificate")
    return WoldDecomposition(u_op, s_op, tuple(orbits), tuple(cycles),
                             tuple(cycle_families), tuple(bilaterals),
                             fixed, unitary_domain, shift_domain)


def _tail_cycle_families(leftover: IndexSet, fam_pieces: list[_Piece],
                         modulus: int, horizon: int) -> tuple[CycleFamily, ...]:
    """Cycle families hiding in the periodic tail of the recurrent region.

    Beyond the horizon the index map is a pure residue translation, so the
    residue classes mod lcm(modulus, period) permute; a residue cycle with
    zero net lift spawns one congruent basis-index cycle per period step.
    Classes with nonzero lift belong to bilateral chains, which were
    already discovered by the explicit walks below the horizon.
    """
    from . import indexsets as iss

    tail = leftover.tail_progressions()
    if not tail:
        return ()
    lam = math.lcm(modulus, leftover.period)
    if lam > iss.PERIOD_CAP:
        raise PeriodCapExceeded(
            f"orbit residue analysis needs period {lam} beyond the cap")
    residues = set()
    for p, off in tail:
        for k in range(lam // p):
            residues.add((off + k * p) % lam)
    families: list[CycleFamily] = []
    done: set[int] = set()
    for r0 in sorted(residues):
        if r0 in done:
            continue
        r, lift, deltas = r0, 0, []
        while True:
            done.add(r)
            deltas.append(lift)
            rep = horizon + ((r - horizon) % lam)
            owner = _lookup(fam_pieces, rep)
            if owner is None:
                raise RuntimeError(f"tail index {rep} has no owning family")
            lift += owner.shift
            r = (r + owner.shift) % lam
            if r == r0:
                break
            if r not in residues or r in done:
                raise RuntimeError("tail residues do not permute cleanly")
        if lift == 0:
            start = horizon - min(deltas)
            base = start + ((r0 - start) % lam)
            families.append(CycleFamily(tuple(base + d for d in deltas), lam))
    return tuple(families)


# -- memory readout ----------------------------------------------------------


@dataclass(frozen=True)
class MemoryReading:
    """Shift-orbit position of a state, the repetition counter.

    ``depth`` is set when the state occupies a single depth; superpositions
    across depths leave it None and report the full ``distribution`` as
    (depth, probability) pairs.  ``outcome`` is filled in by trajectory
    code; a bare readout leaves it None.
    """

    outcome: object
    orbit_id: int
    depth: int | None
    distribution: tuple[tuple[int, float], ...]

    def as_dict(self) -> dict[int, float]:
        return dict(self.distribution)


def read_memory(decomp: WoldDecomposition, psi: StateVector,
                tol: float | None = None) -> MemoryReading | None:
    """Locate a state inside the shift orbits, or None when that is undefined.

    The readout is defined when every occupied basis index lies in one and
    the same shift orbit; touching the unitary domain or straddling two
    orbits returns None.
    """
    tol_ = oa.TOLERANCE if tol is None else tol
    total = psi.norm_sq()
    if total <= tol_:
        return None
    orbit: ShiftOrbit | None = None
    weights: dict[int, float] = {}
    for i, amp in psi.items():
        prob = (amp.real * amp.real + amp.imag * amp.imag) / total
        if prob <= tol_:
            continue
        here = decomp.orbit_of(i)
        if here is None:
            return None
        if orbit is None:
            orbit = here
        elif here.generator != orbit.generator:
            return None
        depth = here.depth_of(i)
        weights[depth] = weights.get(depth, 0.0) + prob
    if orbit is None:
        return None
    dist = tuple(sorted(weights.items()))
    return MemoryReading(None, orbit.generator,
                         dist[0][0] if len(dist) == 1 else None, dist)


def memory_map(inst, tol: float | None = None):
    """Per-outcome decompositions for instruments that support them.

    Outcomes whose operator cannot be split and decomposed (non-monomial,
    not a partial isometry, or orbit structure out of scope) map to None
    instead of raising, so trajectory code can attach readings when they
    exist and stay silent when they do not.
    """
    out = {}
    for label, op in inst.items():
        try:
            parts = split(op, tol)
            out[label] = wold_decompose(parts.v, tol)
        except (UnsupportedForm, SplitInvariantViolation, NotIsometricOnSupport,
                PeriodCapExceeded):
            out[label] = None
    return out
