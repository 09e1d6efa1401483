"""Sparse multivariate polynomials and a Buchberger engine for degree counting.

The monomial order is graded reverse lexicographic with the ring's variables
ordered ``x0 > x1 > ...``.  Internally a monomial with exponents
``(e0, ..., e_{k-1})`` is stored as the tuple ``(-deg, e_{k-1}, ..., e0)``;
under plain tuple comparison the *smallest* encoded tuple is the *largest*
monomial, so ``min`` gives the leading monomial and ``heapq`` pops terms in
decreasing order.  Multiplication of monomials is elementwise addition of
the encoded tuples.
"""

from __future__ import annotations

import os
import re
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from heapq import heapify, heappop, heappush
from operator import add, le, sub

from .exact import GF, P1, QQ

DEFAULT_MAX_PAIRS = 200_000


class GroebnerResourceError(RuntimeError):
    """Raised when a Buchberger run exceeds its pair-reduction cap."""


class NotZeroDimensionalError(ValueError):
    pass


def default_max_pairs() -> int:
    env = os.environ.get("BMT_RMLD_MAX_PAIRS")
    return int(env) if env else DEFAULT_MAX_PAIRS


class PolyRing:
    """Polynomial ring over ``field`` with named variables and grevlex order."""

    order = "grevlex"

    def __init__(self, names, field=None):
        self.names = tuple(names)
        if len(set(self.names)) != len(self.names):
            raise ValueError("variable names must be distinct")
        self.nvars = len(self.names)
        self.field = GF(P1) if field is None else field
        self._index = {n: i for i, n in enumerate(self.names)}

    def __eq__(self, other):
        return isinstance(other, PolyRing) and self.names == other.names and self.field == other.field

    def __hash__(self):
        return hash((self.names, self.field))

    def __repr__(self):
        return f"PolyRing({len(self.names)} vars over {self.field!r})"

    def with_field(self, field) -> "PolyRing":
        return PolyRing(self.names, field)

    def index(self, name) -> int:
        return self._index[name]

    # -- monomial codec ---------------------------------------------------------

    def encode(self, exps):
        exps = tuple(exps)
        if len(exps) != self.nvars or any(e < 0 for e in exps):
            raise ValueError(f"bad exponent vector {exps}")
        return (-sum(exps),) + exps[::-1]

    @staticmethod
    def decode(mono):
        return mono[:0:-1]

    # -- constructors -----------------------------------------------------------

    def poly(self, terms) -> "Polynomial":
        """Polynomial from ``{exponent_tuple: coefficient}``."""
        f = self.field
        out = {}
        for exps, c in terms.items():
            m = self.encode(exps)
            v = f.norm(out.get(m, 0) + f(c))
            if v:
                out[m] = v
            else:
                out.pop(m, None)
        return Polynomial(self, out)

    def const(self, c) -> "Polynomial":
        return self.poly({(0,) * self.nvars: c})

    def var(self, name) -> "Polynomial":
        e = [0] * self.nvars
        e[self._index[name]] = 1
        return self.poly({tuple(e): 1})

    @property
    def gens(self):
        return [self.var(n) for n in self.names]

    def linear(self, coeffs, constant=0) -> "Polynomial":
        """``sum coeffs[i] * x_i + constant``."""
        terms = {}
        for i, c in enumerate(coeffs):
            if c:
                e = [0] * self.nvars
                e[i] = 1
                terms[tuple(e)] = c
        if constant:
            terms[(0,) * self.nvars] = constant
        return self.poly(terms)

    def convert(self, p: "Polynomial") -> "Polynomial":
        """Map a polynomial with the same variable names into this ring's field."""
        if p.ring.names != self.names:
            raise ValueError("variable tables differ")
        return self.poly(dict(p.items()))

    _TERM = re.compile(r"([+-]?)([^+-]+)")

    def parse(self, text: str) -> "Polynomial":
        """Parse the canonical text form, e.g. ``"p01*p23 - 3*p02^2 + 1/2"``."""
        s = text.replace(" ", "").replace("−", "-").replace("**", "^")
        if not s:
            raise ValueError("empty polynomial text")
        if s == "0":
            return Polynomial(self, {})
        pos = 0
        terms = {}
        for m in self._TERM.finditer(s):
            if m.start() != pos:
                raise ValueError(f"cannot parse polynomial near {s[pos:]!r}")
            pos = m.end()
            sign, body = m.groups()
            coef = Fraction(-1 if sign == "-" else 1)
            exps = [0] * self.nvars
            for factor in body.split("*"):
                if not factor:
                    raise ValueError(f"empty factor in {body!r}")
                if factor[0].isdigit():
                    coef *= Fraction(factor)
                    continue
                name, _, power = factor.partition("^")
                if name not in self._index:
                    raise ValueError(f"unknown variable {name!r}")
                exps[self._index[name]] += int(power) if power else 1
            key = tuple(exps)
            terms[key] = terms.get(key, 0) + coef
        if pos != len(s):
            raise ValueError(f"cannot parse polynomial near {s[pos:]!r}")
        return self.poly(terms)


class Polynomial:
    """Element of a :class:`PolyRing`; terms map encoded monomials to nonzero coefficients."""

    __slots__ = ("ring", "terms")

    def __init__(self, ring: PolyRing, terms: dict):
        self.ring = ring
        self.terms = terms

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def items(self):
        """``(exponents, coefficient)`` pairs in decreasing monomial order."""
        return [(self.ring.decode(m), self.terms[m]) for m in sorted(self.terms)]

    @property
    def leading_monomial(self):
        return self.ring.decode(min(self.terms)) if self.terms else None

    @property
    def leading_coefficient(self):
        return self.terms[min(self.terms)] if self.terms else 0

    @property
    def total_degree(self) -> int:
        return max(-m[0] for m in self.terms) if self.terms else -1

    def is_homogeneous(self) -> bool:
        return len({m[0] for m in self.terms}) <= 1

    def monic(self) -> "Polynomial":
        if not self.terms:
            return self
        f = self.ring.field
        s = f.inv(self.leading_coefficient)
        return Polynomial(self.ring, {m: f.norm(c * s) for m, c in self.terms.items()})

    def _check(self, other):
        if isinstance(other, Polynomial):
            if other.ring != self.ring:
                raise ValueError("polynomials live in different rings")
            return other
        return self.ring.const(other)

    def __add__(self, other):
        other = self._check(other)
        norm = self.ring.field.norm
        out = dict(self.terms)
        for m, c in other.terms.items():
            v = norm(out.get(m, 0) + c)
            if v:
                out[m] = v
            else:
                out.pop(m, None)
        return Polynomial(self.ring, out)

    __radd__ = __add__

    def __neg__(self):
        norm = self.ring.field.norm
        return Polynomial(self.ring, {m: norm(-c) for m, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._check(other))

    def __rsub__(self, other):
        return self._check(other) - self

    def __mul__(self, other):
        other = self._check(other)
        norm = self.ring.field.norm
        out = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = tuple(map(add, m1, m2))
                v = norm(out.get(m, 0) + c1 * c2)
                if v:
                    out[m] = v
                else:
                    out.pop(m, None)
        return Polynomial(self.ring, out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        out = self.ring.const(1)
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other):
        if not isinstance(other, Polynomial):
            other = self.ring.const(other)
        return self.ring == other.ring and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __str__(self):
        if not self.terms:
            return "0"
        sym = self.ring.field.symmetric
        names = self.ring.names
        parts = []
        for exps, c in self.items():
            c = sym(c)
            factors = []
            for name, e in zip(names, exps):
                if e == 1:
                    factors.append(name)
                elif e > 1:
                    factors.append(f"{name}^{e}")
            neg = c < 0
            mag = -c if neg else c
            if not factors:
                body = str(mag)
            elif mag == 1:
                body = "*".join(factors)
            else:
                body = f"{mag}*" + "*".join(factors)
            if not parts:
                parts.append(("-" if neg else "") + body)
            else:
                parts.append(("- " if neg else "+ ") + body)
        return " ".join(parts)

    def __repr__(self):
        return f"Polynomial({str(self)!r})"


# -- engine internals -------------------------------------------------------------


class _Elem:
    """A monic basis element prepared for fast division."""

    __slots__ = ("lm", "key", "deg", "tail", "terms")

    def __init__(self, terms: dict):
        lm = min(terms)
        self.lm = lm
        self.key = lm[1:]
        self.deg = -lm[0]
        self.terms = terms
        self.tail = [(m, c) for m, c in terms.items() if m != lm]


def _divides(a, b) -> bool:
    return all(map(le, a, b))


def _lcm(a, b):
    e = tuple(map(max, a[1:], b[1:]))
    return (-sum(e),) + e


def _coprime(a, b) -> bool:
    for x, y in zip(a[1:], b[1:]):
        if x and y:
            return False
    return True


def _make_monic(terms: dict, field) -> dict:
    lc = terms[min(terms)]
    if lc == 1:
        return terms
    s = field.inv(lc)
    norm = field.norm
    return {m: norm(c * s) for m, c in terms.items()}


def _find_reducer(key, deg, reducers):
    for r in reducers:
        if r.deg <= deg and _divides(r.key, key):
            return r
    return None


def _reduce(f: dict, reducers, field) -> dict:
    """Full multivariate division remainder of ``f`` (consumed) by ``reducers``."""
    p = field.p
    heap = list(f)
    heapify(heap)
    rem = {}
    while heap:
        m = heappop(heap)
        c = f.pop(m, None)
        if c is None:
            continue
        r = _find_reducer(m[1:], -m[0], reducers)
        if r is None:
            rem[m] = c
            continue
        q = tuple(map(sub, m, r.lm))
        if p:
            for mono, gc in r.tail:
                nm = tuple(map(add, mono, q))
                old = f.get(nm)
                if old is None:
                    f[nm] = (-c * gc) % p
                    heappush(heap, nm)
                else:
                    v = (old - c * gc) % p
                    if v:
                        f[nm] = v
                    else:
                        del f[nm]
        else:
            for mono, gc in r.tail:
                nm = tuple(map(add, mono, q))
                old = f.get(nm)
                if old is None:
                    f[nm] = -c * gc
                    heappush(heap, nm)
                else:
                    v = old - c * gc
                    if v:
                        f[nm] = v
                    else:
                        del f[nm]
    return rem


def _spoly(a: _Elem, b: _Elem, lcm, field) -> dict:
    qa = tuple(map(sub, lcm, a.lm))
    qb = tuple(map(sub, lcm, b.lm))
    norm = field.norm
    out = {tuple(map(add, m, qa)): c for m, c in a.tail}
    for m, c in b.tail:
        nm = tuple(map(add, m, qb))
        v = norm(out.get(nm, 0) - c)
        if v:
            out[nm] = v
        else:
            out.pop(nm, None)
    return out


@dataclass
class GroebnerBasis:
    """Reduced Gröbner basis with its standard-monomial count.

    ``standard_monomial_count`` is ``None`` when the ideal is not
    zero-dimensional (infinitely many standard monomials).
    """

    ring: PolyRing
    generators: list
    zero_dimensional: bool
    standard_monomial_count: int | None
    pairs_reduced: int = 0
    stats: dict = dc_field(default_factory=dict)

    @property
    def order(self):
        return self.ring.order

    @property
    def leading_monomials(self):
        return [g.leading_monomial for g in self.generators]

    def is_unit_ideal(self) -> bool:
        return any(g.total_degree == 0 for g in self.generators)

    def reduce(self, f: Polynomial) -> Polynomial:
        return normal_form(f, self.generators)

    def contains(self, f: Polynomial) -> bool:
        return self.reduce(f).is_zero()


def normal_form(f: Polynomial, basis) -> Polynomial:
    """Remainder of ``f`` on division by ``basis`` (no remaining term is divisible by a leading term)."""
    ring = f.ring
    elems = []
    for g in basis:
        if g.ring != ring:
            raise ValueError("polynomials live in different rings")
        if g.terms:
            elems.append(_Elem(_make_monic(dict(g.terms), ring.field)))
    return Polynomial(ring, _reduce(dict(f.terms), elems, ring.field))


def buchberger(gens, max_pairs: int | None = None) -> GroebnerBasis:
    """Reduced Gröbner basis of the ideal generated by ``gens`` (grevlex).

    Uses the normal selection strategy with the Gebauer-Möller installation
    of Buchberger's coprime and chain criteria.  Raises
    :class:`GroebnerResourceError` after ``max_pairs`` pair reductions.
    """
    gens = list(gens)
    if not gens:
        raise ValueError("buchberger needs at least one generator")
    ring = gens[0].ring
    for g in gens:
        if g.ring != ring:
            raise ValueError("generators live in different rings")
    field = ring.field
    cap = default_max_pairs() if max_pairs is None else max_pairs

    elems: list[_Elem] = []
    active: list[int] = []
    pairs: list[tuple] = []  # (lcm, i, j)

    def install(terms):
        h = _Elem(_make_monic(terms, field))
        k = len(elems)
        elems.append(h)
        lm_h = h.lm
        cand = [(_lcm(elems[g].lm, lm_h), g) for g in active]
        kept = []
        for idx, (l, g) in enumerate(cand):
            if _coprime(elems[g].lm, lm_h):
                kept.append((l, g))
                continue
            others = cand[idx + 1:] + kept
            if not any(_divides(l2[1:], l[1:]) for l2, _ in others):
                kept.append((l, g))
        new_pairs = [(l, g, k) for l, g in kept if not _coprime(elems[g].lm, lm_h)]
        key_h = lm_h[1:]
        old = []
        for l, i, j in pairs:
            if (
                _divides(key_h, l[1:])
                and _lcm(elems[i].lm, lm_h) != l
                and _lcm(elems[j].lm, lm_h) != l
            ):
                continue
            old.append((l, i, j))
        pairs[:] = old + new_pairs
        active[:] = [g for g in active if not _divides(key_h, elems[g].key)] + [k]

    def reducers():
        return sorted((elems[g] for g in active), key=lambda e: e.lm, reverse=True)

    inputs = sorted(
        (dict(g.terms) for g in gens if g.terms),
        key=lambda t: min(t),
        reverse=True,
    )
    for terms in inputs:
        rem = _reduce(terms, reducers(), field)
        if rem:
            install(rem)

    count = 0
    while pairs:
        best = max(range(len(pairs)), key=lambda k: (pairs[k][0], -pairs[k][1], -pairs[k][2]))
        l, i, j = pairs.pop(best)
        count += 1
        if count > cap:
            raise GroebnerResourceError(f"Buchberger exceeded the cap of {cap} pair reductions")
        s = _spoly(elems[i], elems[j], l, field)
        if not s:
            continue
        rem = _reduce(s, reducers(), field)
        if rem:
            install(rem)
            if -min(rem)[0] == 0:
                break  # unit ideal

    # reduced basis: interreduce the (already minimal) active set
    basis = [elems[g] for g in active]
    if any(e.deg == 0 for e in basis):
        basis = [_Elem({(0,) * (ring.nvars + 1): 1})]
    final = []
    for idx, e in enumerate(basis):
        others = [b for k, b in enumerate(basis) if k != idx]
        tail = _reduce({m: c for m, c in e.tail}, others, field)
        tail[e.lm] = 1
        final.append(tail)
    final.sort(key=lambda t: min(t), reverse=True)
    polys = [Polynomial(ring, t) for t in final]
    lms = [min(t) for t in final]
    zero_dim = _is_zero_dimensional(lms, ring.nvars)
    count_std = _count_standard(lms, ring.nvars) if zero_dim else None
    return GroebnerBasis(ring, polys, zero_dim, count_std, count, {"basis_size": len(polys)})


def _is_zero_dimensional(lms, nvars) -> bool:
    if any(-m[0] == 0 for m in lms):
        return True
    pure = set()
    for m in lms:
        nz = [k for k, e in enumerate(m[1:]) if e]
        if len(nz) == 1:
            pure.add(nz[0])
    return len(pure) == nvars


def _count_standard(lms, nvars) -> int:
    """Number of monomials divisible by no leading monomial (finite case)."""
    keys = [m[1:] for m in lms]
    if any(not any(k) for k in keys):
        return 0
    count = 0
    stack = [((0,) * nvars, 0)]
    while stack:
        mono, start = stack.pop()
        count += 1
        for v in range(start, nvars):
            nxt = mono[:v] + (mono[v] + 1,) + mono[v + 1:]
            if not any(_divides(k, nxt) for k in keys):
                stack.append((nxt, v))
    return count


def quotient_degree(gb: GroebnerBasis) -> int:
    """Dimension of the quotient ring, i.e. the solution count with multiplicity."""
    if not gb.zero_dimensional:
        raise NotZeroDimensionalError("the ideal is not zero-dimensional")
    return gb.standard_monomial_count


def ideal_equal(gens_a, gens_b, max_pairs: int | None = None) -> bool:
    """True iff both generating sets span the same ideal."""
    gens_a = [g for g in gens_a if g]
    gens_b = [g for g in gens_b if g]
    if not gens_a or not gens_b:
        return not gens_a and not gens_b
    gb_a = buchberger(gens_a, max_pairs)
    gb_b = buchberger(gens_b, max_pairs)
    return all(gb_b.contains(g) for g in gens_a) and all(gb_a.contains(g) for g in gens_b)


def rational_ring(names) -> PolyRing:
    return PolyRing(names, QQ)
