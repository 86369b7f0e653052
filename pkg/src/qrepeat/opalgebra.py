"""Structured operators on l2 of the nonnegative integers.

An operator is a finite formal sum of rank-one dyads ``c |out><in|`` and
shift families ``c * sum_{j>=0} |os*j+oo><is*j+io|``.  The class is closed
under adjoint, sum, and composition, which makes completeness and
repeatability checks exact rather than truncation-limited.

Equality is decided on a finite window.  Entries of a difference operator
repeat along progression directions beyond all sporadic crossings of
non-parallel families; crossing coordinates are bounded by ``2*P^2*B`` for
``P`` the lcm of strides and ``B`` the largest offset, so agreement on
``[0, 2*P^2*(B+2) + B)^2`` forces agreement everywhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping

import numpy as np

from .errors import PeriodCapExceeded
from .indexsets import IndexSet

TOLERANCE = 1e-12
WINDOW_CAP = 4 * 10**6


def set_tolerance(value: float) -> None:
    """Set the global comparison tolerance (mostly for the CLI)."""
    global TOLERANCE
    if not value > 0:
        raise ValueError("tolerance must be positive")
    TOLERANCE = float(value)


def _tol(tol: float | None) -> float:
    return TOLERANCE if tol is None else tol


@dataclass(frozen=True)
class Dyad:
    """Rank-one term ``coeff * |out><in_|``."""

    coeff: complex
    out: int
    in_: int

    def __post_init__(self):
        _check_coeff(self.coeff)
        if self.out < 0 or self.in_ < 0:
            raise ValueError("dyad indices must be nonnegative")


@dataclass(frozen=True)
class Family:
    """Shift family ``coeff * sum_{j>=0} |out_stride*j + out_offset><in_stride*j + in_offset|``."""

    coeff: complex
    out_stride: int
    out_offset: int
    in_stride: int
    in_offset: int

    def __post_init__(self):
        _check_coeff(self.coeff)
        if self.out_stride < 1 or self.in_stride < 1:
            raise ValueError("family strides must be at least 1; use a Dyad for stride-0 terms")
        if self.out_offset < 0 or self.in_offset < 0:
            raise ValueError("family offsets must be nonnegative")


Term = Dyad | Family


def _check_coeff(c: complex) -> None:
    c = complex(c)
    if not (math.isfinite(c.real) and math.isfinite(c.imag)):
        raise ValueError("coefficients must be finite")


def dyad(coeff: complex, out: int, in_: int) -> Dyad:
    return Dyad(complex(coeff), int(out), int(in_))


def family(coeff: complex, out_stride: int, out_offset: int,
           in_stride: int, in_offset: int, j_start: int = 0) -> Family:
    """Build a shift family; a nonzero ``j_start`` is folded into the offsets."""
    if j_start < 0:
        raise ValueError("j_start must be nonnegative")
    return Family(complex(coeff),
                  int(out_stride), int(out_offset) + int(j_start) * int(out_stride),
                  int(in_stride), int(in_offset) + int(j_start) * int(in_stride))


class StructuredOperator:
    """Finite formal sum of dyads and shift families, kept canonical.

    Canonicalization merges duplicate signatures, drops negligible
    coefficients, and absorbs dyads that exactly cancel a family head or
    extend a family one step backward.  None of these steps changes the
    entrywise realization.
    """

    __slots__ = ("terms",)

    def __init__(self, terms: Iterable[Term] = (), tol: float | None = None):
        object.__setattr__(self, "terms", _canonicalize(terms, _tol(tol)))

    def __setattr__(self, name, value):
        raise AttributeError("StructuredOperator is immutable")

    def __eq__(self, other):
        # syntactic identity of canonical forms; use equals() for a
        # tolerance-aware comparison
        if not isinstance(other, StructuredOperator):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return hash(self.terms)

    # -- constructors --------------------------------------------------

    @staticmethod
    def zero() -> "StructuredOperator":
        return StructuredOperator()

    @staticmethod
    def identity() -> "StructuredOperator":
        return StructuredOperator([Family(1.0, 1, 0, 1, 0)])

    # -- structure queries ---------------------------------------------

    @property
    def dyads(self) -> tuple[Dyad, ...]:
        return tuple(t for t in self.terms if isinstance(t, Dyad))

    @property
    def families(self) -> tuple[Family, ...]:
        return tuple(t for t in self.terms if isinstance(t, Family))

    def is_zero(self, tol: float | None = None) -> bool:
        return equals(self, StructuredOperator.zero(), tol)

    def support_set(self) -> IndexSet:
        """Input indices touched by some term (columns carrying entries)."""
        out = IndexSet.empty()
        for t in self.terms:
            if isinstance(t, Dyad):
                out = out.union(IndexSet.from_indices([t.in_]))
            else:
                out = out.union(IndexSet.from_progression(t.in_stride, t.in_offset))
        return out

    def range_set(self) -> IndexSet:
        """Output indices touched by some term (rows carrying entries)."""
        out = IndexSet.empty()
        for t in self.terms:
            if isinstance(t, Dyad):
                out = out.union(IndexSet.from_indices([t.out]))
            else:
                out = out.union(IndexSet.from_progression(t.out_stride, t.out_offset))
        return out

    # -- algebra ---------------------------------------------------------

    def adjoint(self) -> "StructuredOperator":
        return adjoint(self)

    def compose(self, other: "StructuredOperator") -> "StructuredOperator":
        return compose(self, other)

    def apply(self, psi: "StateVector") -> "StateVector":
        return apply(self, psi)

    def scale(self, factor: complex) -> "StructuredOperator":
        return StructuredOperator([_scaled(t, factor) for t in self.terms])

    def __add__(self, other: "StructuredOperator") -> "StructuredOperator":
        return add(self, other)

    def __sub__(self, other: "StructuredOperator") -> "StructuredOperator":
        return add(self, other.scale(-1.0))

    def __matmul__(self, other: "StructuredOperator") -> "StructuredOperator":
        return compose(self, other)

    def __mul__(self, factor: complex) -> "StructuredOperator":
        return self.scale(factor)

    __rmul__ = __mul__

    def __repr__(self) -> str:
        if not self.terms:
            return "StructuredOperator(0)"
        bits = []
        for t in self.terms:
            if isinstance(t, Dyad):
                bits.append(f"{t.coeff:.6g}|{t.out}><{t.in_}|")
            else:
                bits.append(f"{t.coeff:.6g}*sum_j|{t.out_stride}j+{t.out_offset}>"
                            f"<{t.in_stride}j+{t.in_offset}|")
        return "StructuredOperator(" + " + ".join(bits) + ")"


def _scaled(t: Term, factor: complex) -> Term:
    if isinstance(t, Dyad):
        return Dyad(t.coeff * factor, t.out, t.in_)
    return Family(t.coeff * factor, t.out_stride, t.out_offset, t.in_stride, t.in_offset)


def _canonicalize(terms: Iterable[Term], tol: float) -> tuple[Term, ...]:
    fams: dict[tuple[int, int, int, int], complex] = {}
    dyds: dict[tuple[int, int], complex] = {}
    for t in terms:
        if isinstance(t, Dyad):
            key = (t.out, t.in_)
            dyds[key] = dyds.get(key, 0.0) + complex(t.coeff)
        elif isinstance(t, Family):
            sig = (t.out_stride, t.out_offset, t.in_stride, t.in_offset)
            fams[sig] = fams.get(sig, 0.0) + complex(t.coeff)
        else:
            raise TypeError(f"not a structured term: {t!r}")
    dyds = {k: c for k, c in dyds.items() if abs(c) > tol}
    fams = {k: c for k, c in fams.items() if abs(c) > tol}

    # Absorb dyads sitting exactly on a family boundary.  Each pass removes
    # one dyad, so the loop is bounded by the dyad count.
    changed = True
    while changed:
        changed = False
        for (o, i), c in sorted(dyds.items(), key=lambda kv: kv[0]):
            for sig in sorted(fams):
                os_, oo, is_, io = sig
                cf = fams[sig]
                if (o, i) == (oo, io) and abs(c + cf) <= tol:
                    # dyad cancels the family head; the family starts one step later
                    del dyds[(o, i)]
                    del fams[sig]
                    nsig = (os_, oo + os_, is_, io + is_)
                    cf = fams.get(nsig, 0.0) + cf
                    if abs(cf) > tol:
                        fams[nsig] = cf
                    elif nsig in fams:
                        del fams[nsig]
                    changed = True
                    break
                if (o, i) == (oo - os_, io - is_) and o >= 0 and i >= 0 and abs(c - cf) <= tol:
                    # dyad extends the family one step backward
                    del dyds[(o, i)]
                    del fams[sig]
                    nsig = (os_, oo - os_, is_, io - is_)
                    cf = fams.get(nsig, 0.0) + cf
                    if abs(cf) > tol:
                        fams[nsig] = cf
                    elif nsig in fams:
                        del fams[nsig]
                    changed = True
                    break
            if changed:
                break

    out: list[Term] = [Family(c, *sig) for sig, c in sorted(fams.items())]
    out.extend(Dyad(c, o, i) for (o, i), c in sorted(dyds.items()))
    return tuple(out)


# -- state vectors -------------------------------------------------------


class StateVector:
    """Finitely supported vector, stored as an index -> amplitude map."""

    __slots__ = ("_amp",)

    def __init__(self, amplitudes: Mapping[int, complex] | Iterable[tuple[int, complex]] = ()):
        items = amplitudes.items() if isinstance(amplitudes, Mapping) else amplitudes
        amp: dict[int, complex] = {}
        for i, c in items:
            i = int(i)
            c = complex(c)
            _check_coeff(c)
            if i < 0:
                raise ValueError("basis indices must be nonnegative")
            if c != 0:
                amp[i] = amp.get(i, 0.0) + c
        object.__setattr__(self, "_amp", {i: amp[i] for i in sorted(amp) if amp[i] != 0})

    def __setattr__(self, name, value):
        raise AttributeError("StateVector is immutable")

    @staticmethod
    def basis(i: int) -> "StateVector":
        return StateVector({i: 1.0})

    def items(self) -> Iterator[tuple[int, complex]]:
        return iter(self._amp.items())

    def support(self) -> tuple[int, ...]:
        return tuple(self._amp)

    def amplitude(self, i: int) -> complex:
        return self._amp.get(i, 0.0)

    def norm_sq(self) -> float:
        return sum(abs(c) ** 2 for c in self._amp.values())

    def is_normalized(self, tol: float | None = None) -> bool:
        return abs(self.norm_sq() - 1.0) <= _tol(tol)

    def normalized(self) -> "StateVector":
        n = math.sqrt(self.norm_sq())
        if n == 0:
            raise ValueError("cannot normalize the zero vector")
        return StateVector({i: c / n for i, c in self._amp.items()})

    def __len__(self) -> int:
        return len(self._amp)

    def __repr__(self) -> str:
        inner = ", ".join(f"{i}: {c:.6g}" for i, c in self._amp.items())
        return f"StateVector({{{inner}}})"


def norm_sq(psi: StateVector) -> float:
    return psi.norm_sq()


def random_state(rng: np.random.Generator, max_index: int, max_support: int = 8) -> StateVector:
    """Normalized state with small uniform support and Gaussian amplitudes."""
    size = min(int(rng.integers(1, max_support + 1)), max_index)
    idx = rng.choice(max_index, size=size, replace=False)
    amps = rng.standard_normal(size) + 1j * rng.standard_normal(size)
    n = np.linalg.norm(amps)
    while n < 1e-9:  # absurdly unlikely, but keep the draw well defined
        amps = rng.standard_normal(size) + 1j * rng.standard_normal(size)
        n = np.linalg.norm(amps)
    return StateVector({int(i): complex(a / n) for i, a in zip(idx, amps)})


# -- application and composition ----------------------------------------


def apply(op: StructuredOperator, psi: StateVector) -> StateVector:
    """Image of ``psi`` under ``op`` (not renormalized)."""
    out: dict[int, complex] = {}
    for i, c in psi.items():
        for t in op.terms:
            if isinstance(t, Dyad):
                if t.in_ == i:
                    out[t.out] = out.get(t.out, 0.0) + t.coeff * c
            else:
                d = i - t.in_offset
                if d >= 0 and d % t.in_stride == 0:
                    j = d // t.in_stride
                    r = t.out_stride * j + t.out_offset
                    out[r] = out.get(r, 0.0) + t.coeff * c
    return StateVector(out)


def adjoint(op: StructuredOperator) -> StructuredOperator:
    terms: list[Term] = []
    for t in op.terms:
        if isinstance(t, Dyad):
            terms.append(Dyad(t.coeff.conjugate(), t.in_, t.out))
        else:
            terms.append(Family(t.coeff.conjugate(), t.in_stride, t.in_offset,
                                t.out_stride, t.out_offset))
    return StructuredOperator(terms)


def add(a: StructuredOperator, b: StructuredOperator) -> StructuredOperator:
    return StructuredOperator(a.terms + b.terms)


def _match_progressions(s1: int, o1: int, s2: int, o2: int):
    """Minimal nonnegative solution of ``s1*k + o1 == s2*j + o2``.

    Returns ``(k0, j0, kstep, jstep)`` parametrizing all solutions as
    ``k = k0 + kstep*t, j = j0 + jstep*t`` for ``t >= 0``, or None.
    """
    g = math.gcd(s1, s2)
    d = o2 - o1
    if d % g:
        return None
    m = s2 // g
    k0 = 0 if m == 1 else ((d // g) % m) * pow(s1 // g, -1, m) % m
    j0 = (s1 * k0 + o1 - o2) // s2
    kstep, jstep = s2 // g, s1 // g
    if j0 < 0:
        t = -(j0 // jstep)  # ceil(-j0 / jstep)
        k0 += kstep * t
        j0 += jstep * t
    return k0, j0, kstep, jstep


def _compose_terms(a: Term, b: Term) -> Term | None:
    if isinstance(a, Dyad) and isinstance(b, Dyad):
        if a.in_ == b.out:
            return Dyad(a.coeff * b.coeff, a.out, b.in_)
        return None
    if isinstance(a, Dyad):
        d = a.in_ - b.out_offset
        if d >= 0 and d % b.out_stride == 0:
            j = d // b.out_stride
            return Dyad(a.coeff * b.coeff, a.out, b.in_stride * j + b.in_offset)
        return None
    if isinstance(b, Dyad):
        d = b.out - a.in_offset
        if d >= 0 and d % a.in_stride == 0:
            k = d // a.in_stride
            return Dyad(a.coeff * b.coeff, a.out_stride * k + a.out_offset, b.in_)
        return None
    m = _match_progressions(a.in_stride, a.in_offset, b.out_stride, b.out_offset)
    if m is None:
        return None
    k0, j0, kstep, jstep = m
    return Family(a.coeff * b.coeff,
                  a.out_stride * kstep, a.out_stride * k0 + a.out_offset,
                  b.in_stride * jstep, b.in_stride * j0 + b.in_offset)


def compose(a: StructuredOperator, b: StructuredOperator) -> StructuredOperator:
    """Operator product ``a @ b`` (apply ``b`` first)."""
    terms = []
    for ta in a.terms:
        for tb in b.terms:
            t = _compose_terms(ta, tb)
            if t is not None:
                terms.append(t)
    return StructuredOperator(terms)


# -- equality on a sufficient window --------------------------------------


def _window_size(terms: Iterable[Term], period_cap: int | None = None) -> int:
    from . import indexsets

    cap = indexsets.PERIOD_CAP if period_cap is None else period_cap
    bound = 0
    strides: list[int] = []
    for t in terms:
        if isinstance(t, Dyad):
            bound = max(bound, t.out, t.in_)
        else:
            bound = max(bound, t.out_offset, t.in_offset)
            strides.append(t.out_stride)
            strides.append(t.in_stride)
    period = math.lcm(*strides) if strides else 1
    if period > cap:
        raise PeriodCapExceeded(f"stride lcm {period} exceeds cap {cap}")
    w = max(2 * period * period * (bound + 2) + bound, 8)
    if w > WINDOW_CAP:
        raise PeriodCapExceeded(f"comparison window {w} exceeds cap {WINDOW_CAP}")
    return w


def _entries(terms: Iterable[Term], window: int) -> dict[tuple[int, int], complex]:
    ents: dict[tuple[int, int], complex] = {}
    for t in terms:
        if isinstance(t, Dyad):
            if t.out < window and t.in_ < window:
                key = (t.out, t.in_)
                ents[key] = ents.get(key, 0.0) + t.coeff
        else:
            jmax = min((window - 1 - t.out_offset) // t.out_stride,
                       (window - 1 - t.in_offset) // t.in_stride)
            for j in range(jmax + 1):
                key = (t.out_stride * j + t.out_offset, t.in_stride * j + t.in_offset)
                ents[key] = ents.get(key, 0.0) + t.coeff
    return ents


def max_deviation(a: StructuredOperator, b: StructuredOperator):
    """Largest entrywise difference over the decision window.

    Returns ``(deviation, position)``; the window bound makes a zero
    deviation a proof of global equality.
    """
    window = _window_size(a.terms + b.terms)
    ea = _entries(a.terms, window)
    eb = _entries(b.terms, window)
    dev, pos = 0.0, None
    for key in ea.keys() | eb.keys():
        d = abs(ea.get(key, 0.0) - eb.get(key, 0.0))
        if d > dev:
            dev, pos = d, key
    return dev, pos


def equals(a: StructuredOperator, b: StructuredOperator, tol: float | None = None) -> bool:
    dev, _ = max_deviation(a, b)
    return dev <= _tol(tol)


def entries_in_window(op: StructuredOperator, window: int) -> dict[tuple[int, int], complex]:
    """Exact nonzero entries with both indices below ``window``."""
    return {k: v for k, v in _entries(op.terms, window).items() if v != 0}


# -- structural predicates -------------------------------------------------


def is_monomial(op: StructuredOperator) -> bool:
    """True when no basis column carries two entries at different rows.

    Decided exactly: any clash between two terms lives on the intersection
    of their input progressions, which is itself a progression.
    """
    terms = op.terms
    for idx, t1 in enumerate(terms):
        for t2 in terms[idx + 1:]:
            if isinstance(t1, Dyad) and isinstance(t2, Dyad):
                if t1.in_ == t2.in_:
                    return False  # canonical form already merged equal positions
            elif isinstance(t1, Dyad) != isinstance(t2, Dyad):
                dy, fam_ = (t1, t2) if isinstance(t1, Dyad) else (t2, t1)
                d = dy.in_ - fam_.in_offset
                if d >= 0 and d % fam_.in_stride == 0:
                    j = d // fam_.in_stride
                    if fam_.out_stride * j + fam_.out_offset != dy.out:
                        return False
            else:
                m = _match_progressions(t1.in_stride, t1.in_offset,
                                        t2.in_stride, t2.in_offset)
                if m is None:
                    continue
                k0, j0, kstep, jstep = m
                r1 = t1.out_stride * k0 + t1.out_offset
                r2 = t2.out_stride * j0 + t2.out_offset
                if r1 != r2 or t1.out_stride * kstep != t2.out_stride * jstep:
                    return False
    return True


def diagonal_part(op: StructuredOperator) -> StructuredOperator:
    """Terms restricted to the main diagonal (exact for the structured class)."""
    terms: list[Term] = []
    for t in op.terms:
        if isinstance(t, Dyad):
            if t.out == t.in_:
                terms.append(t)
        elif t.out_stride == t.in_stride:
            if t.out_offset == t.in_offset:
                terms.append(t)
        else:
            den = t.out_stride - t.in_stride
            num = t.in_offset - t.out_offset
            if num % den == 0:
                j = num // den
                if j >= 0:
                    r = t.out_stride * j + t.out_offset
                    terms.append(Dyad(t.coeff, r, r))
    return StructuredOperator(terms)


def is_diagonal(op: StructuredOperator, tol: float | None = None) -> bool:
    return equals(op, diagonal_part(op), tol)


def projector(s: IndexSet) -> StructuredOperator:
    """Orthogonal projector onto the basis vectors indexed by ``s``."""
    terms: list[Term] = [Dyad(1.0, i, i) for i in sorted(s.transient)]
    for stride, offset in s.tail_progressions():
        terms.append(Family(1.0, stride, offset, stride, offset))
    return StructuredOperator(terms)


def operator_norm(op: StructuredOperator) -> tuple[float, str]:
    """Operator norm, exact for monomial operators.

    For a monomial operator ``M`` the Gram operator ``M M*`` is diagonal,
    and the supremum of its entries over the decision window is the global
    supremum, so the returned value is exact.  Otherwise the largest
    singular value of a dense window realization is reported, tagged
    ``"window-estimate"``.
    """
    if not op.terms:
        return 0.0, "exact"
    if is_monomial(op):
        gram = compose(op, adjoint(op))
        window = _window_size(gram.terms)
        ents = _entries(gram.terms, window)
        top = max((abs(v) for v in ents.values()), default=0.0)
        return math.sqrt(top), "exact"
    dim = _estimate_dim(op)
    mat = np.zeros((dim, dim), dtype=complex)
    for t in op.terms:
        if isinstance(t, Dyad):
            if t.out < dim and t.in_ < dim:
                mat[t.out, t.in_] += t.coeff
        else:
            jmax = min((dim - 1 - t.out_offset) // t.out_stride,
                       (dim - 1 - t.in_offset) // t.in_stride)
            for j in range(jmax + 1):
                mat[t.out_stride * j + t.out_offset, t.in_stride * j + t.in_offset] += t.coeff
    return float(np.linalg.norm(mat, 2)), "window-estimate"


def _estimate_dim(op: StructuredOperator) -> int:
    bound, stride = 0, 1
    for t in op.terms:
        if isinstance(t, Dyad):
            bound = max(bound, t.out, t.in_)
        else:
            bound = max(bound, t.out_offset, t.in_offset)
            stride = max(stride, t.out_stride, t.in_stride)
    return min(max(bound + 4 * stride + 8, 16), 512)
