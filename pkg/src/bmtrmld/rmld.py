"""Reciprocal ML-degree: closed form and Gröbner certification."""

from __future__ import annotations

import json
import time
from dataclasses import asdict, dataclass, field as dc_field
from itertools import combinations

import numpy as np

from .exact import GF, P1, P2, QQ, ExactMatrix
from .groebner import (
    GroebnerResourceError,
    PolyRing,
    buchberger,
    quotient_degree,
)
from .model import PCoordinates, build_design_A, lspace_basis
from .toric import binomial_from_poly, binomial_polys, hypersimplex_binomials, lattice_member, pair_ring, tree_binomials
from .trees import RootedTree, star_tree

RESAMPLES = 3
RATIONAL_RANGE = 2**15


class DegenerateSliceError(RuntimeError):
    """The linear slice stayed positive-dimensional after all resamples."""


class GeneratorError(ValueError):
    pass


def rmld_formula(t: RootedTree) -> int:
    """Product over internal vertices of ``2^d - d - 1`` with ``d`` the out-degree."""
    out = 1
    for v in t.internal:
        d = t.outdeg(v)
        out *= 2**d - d - 1
    return out


def _field(prime):
    return QQ if prime is None else GF(prime)


def sample_data(size: int, seed: int, prime: int | None, attempt: int = 0):
    """Seeded generic data: nonzero field elements (or integers in ``[1, 2^15]`` over Q)."""
    rng = np.random.default_rng([seed, attempt])
    hi = RATIONAL_RANGE if prime is None else prime - 1
    return [int(x) for x in rng.integers(1, hi, size=size, endpoint=True)]


@dataclass
class SliceRun:
    prime: int | None
    seed: int
    degree: int | None
    resamples: int
    pairs_reduced: int
    seconds: float

    def to_dict(self, timing=True):
        d = asdict(self)
        d["field"] = "QQ" if self.prime is None else f"GF({self.prime})"
        if not timing:
            d.pop("seconds")
        return d


def _slice_degree(gens, design: ExactMatrix, ring: PolyRing, seed: int, max_pairs=None) -> SliceRun:
    """Degree of V(gens) ∩ {design p = design u} for seeded u, resampling degenerate draws."""
    field = ring.field
    a = design.over(field)
    start = time.perf_counter()
    pairs = 0
    for attempt in range(RESAMPLES + 1):
        u = sample_data(a.ncols, seed, field.p, attempt)
        rhs = a.apply(u)
        forms = [ring.linear(row, -c) for row, c in zip(a.entries, rhs)]
        gb = buchberger(list(gens) + forms, max_pairs)
        pairs += gb.pairs_reduced
        if gb.zero_dimensional:
            return SliceRun(field.p, seed, quotient_degree(gb), attempt, pairs, time.perf_counter() - start)
    raise DegenerateSliceError(f"slice not zero-dimensional after {RESAMPLES} resamples (seed {seed}, {field!r})")


def toric_mld_given_gens(gens, design: ExactMatrix, seed: int, prime: int | None = P1, max_pairs=None) -> int:
    """ML-degree of the toric model of ``design``, given generators of its toric ideal.

    Binomial generators are checked against the lattice of ``design``.
    """
    if gens:
        ring = gens[0].ring.with_field(_field(prime))
        gens = [ring.convert(g) for g in gens]
    else:
        names = [f"x{k}" for k in range(design.ncols)]
        ring = PolyRing(names, _field(prime))
    if ring.nvars != design.ncols:
        raise GeneratorError("generator ring and design matrix disagree on the variable count")
    for g in gens:
        b = binomial_from_poly(g)
        if b is not None and not lattice_member(b, design):
            raise GeneratorError(f"{g} is not in the toric ideal of the design matrix")
    return _slice_degree(gens, design, ring, seed, max_pairs).degree


@dataclass
class CertificationReport:
    newick: str
    formula_value: int
    certified_degree: int | None
    runs: list = dc_field(default_factory=list)
    primes: list = dc_field(default_factory=list)
    seeds: list = dc_field(default_factory=list)
    match: bool = False

    @property
    def degrees(self):
        return [r.degree for r in self.runs]

    @property
    def prime_a_degree(self):
        return next((r.degree for r in self.runs if r.prime == self.primes[0]), None)

    @property
    def prime_b_degree(self):
        if len(self.primes) < 2:
            return None
        return next((r.degree for r in self.runs if r.prime == self.primes[1]), None)

    @property
    def consistent(self) -> bool:
        return len(set(self.degrees)) == 1

    @property
    def resampled(self) -> int:
        return sum(r.resamples for r in self.runs)

    def to_dict(self, timing: bool = True) -> dict:
        return {
            "tree": self.newick,
            "formula_value": self.formula_value,
            "certified_degree": self.certified_degree,
            "prime_a_degree": self.prime_a_degree,
            "prime_b_degree": self.prime_b_degree,
            "primes": ["QQ" if p is None else p for p in self.primes],
            "seeds": self.seeds,
            "consistent": self.consistent,
            "match": self.match,
            "runs": [r.to_dict(timing) for r in self.runs],
        }

    def to_json(self, timing: bool = True) -> str:
        return json.dumps(self.to_dict(timing), sort_keys=True)


def certification_system(t: RootedTree, prime: int | None = P1):
    """Ring, quartet generators and design matrix for the slice of a tree."""
    ring = pair_ring(t, _field(prime))
    return ring, binomial_polys(tree_binomials(t), ring), build_design_A(t)


def rmld_certify(
    t: RootedTree,
    seed: int = 42,
    primes=(P1, P2),
    n_seeds: int = 2,
    rational: bool = False,
    max_pairs=None,
    max_leaves: int = 7,
) -> CertificationReport:
    """Certify the reciprocal ML-degree of ``t`` by counting standard monomials of the slice.

    Runs every combination of ``n_seeds`` consecutive seeds and ``primes``
    (or Q when ``rational``) and reports whether all degrees equal the
    closed form.
    """
    if t.n + 1 > max_leaves:
        raise ValueError(f"tree has {t.n + 1} leaves; the cap is {max_leaves}")
    primes = [None] if rational else list(primes)
    seeds = [seed + k for k in range(n_seeds)]
    runs = []
    for s in seeds:
        for p in primes:
            ring, gens, a = certification_system(t, p)
            runs.append(_slice_degree(gens, a, ring, s, max_pairs))
    formula = rmld_formula(t)
    degrees = [r.degree for r in runs]
    certified = degrees[0] if len(set(degrees)) == 1 else None
    return CertificationReport(t.newick(), formula, certified, runs, primes, seeds, certified == formula)


def certified_degree(t: RootedTree, seed: int = 42, prime: int = P1, max_pairs=None) -> int:
    """Single-run certified degree (one seed, one prime)."""
    ring, gens, a = certification_system(t, prime)
    return _slice_degree(gens, a, ring, seed, max_pairs).degree


# -- general linear covariance models --------------------------------------------


def linear_rmld(lspace, seed: int = 42, prime: int | None = P1, max_pairs=None) -> int:
    """Reciprocal ML-degree of the linear covariance model spanned by ``lspace``.

    Unknowns are the coordinates ``s_1..s_d`` of Sigma in the given basis and
    the entries ``k_ij`` (``i <= j``) of a symmetric K.  Equations:
    ``Sigma K = Id`` entrywise and ``<K - W, B_l> = 0`` for each basis matrix,
    with W a seeded random symmetric matrix.
    """
    basis = [[[x for x in row] for row in b] for b in lspace]
    if not basis:
        raise ValueError("empty basis")
    n = len(basis[0])
    if n > 4:
        raise ValueError("linear_rmld is limited to n <= 4")
    for b in basis:
        if len(b) != n or any(len(r) != n for r in b) or any(b[i][j] != b[j][i] for i in range(n) for j in range(n)):
            raise ValueError("basis elements must be symmetric n x n matrices")
    d = len(basis)
    field = _field(prime)
    kpairs = [(i, j) for i in range(n) for j in range(i, n)]
    names = [f"s{l + 1}" for l in range(d)] + [f"k{i + 1}{j + 1}" for i, j in kpairs]
    ring = PolyRing(names, field)
    svars = ring.gens[:d]
    kvar = {}
    for idx, (i, j) in enumerate(kpairs):
        kvar[i, j] = kvar[j, i] = ring.gens[d + idx]
    sigma = [[sum((field(b[i][j]) * s for b, s in zip(basis, svars) if b[i][j]), ring.const(0)) for j in range(n)] for i in range(n)]
    start = time.perf_counter()
    for attempt in range(RESAMPLES + 1):
        w = sample_data(len(kpairs), seed, field.p, attempt)
        wmat = {}
        for (i, j), x in zip(kpairs, w):
            wmat[i, j] = wmat[j, i] = x
        eqs = []
        for i in range(n):
            for j in range(n):
                e = sum((sigma[i][c] * kvar[c, j] for c in range(n)), ring.const(0))
                eqs.append(e - int(i == j))
        for b in basis:
            lin = ring.const(0)
            for i in range(n):
                for j in range(n):
                    if b[j][i]:
                        lin = lin + field(b[j][i]) * (kvar[i, j] - wmat[i, j])
            eqs.append(lin)
        gb = buchberger([e for e in eqs if e], max_pairs)
        if gb.zero_dimensional:
            return quotient_degree(gb)
    raise DegenerateSliceError(
        f"linear_rmld system not zero-dimensional after {RESAMPLES} resamples ({time.perf_counter() - start:.1f}s)"
    )


def star_origin_check(n: int, prime: int | None = P1, max_pairs=None) -> bool:
    """True iff the star tree's toric variety meets the orthogonal complement only at the origin.

    The ideal (hypersimplex quadrics + homogeneous linear forms) is
    homogeneous, so a finite quotient is equivalent to the variety being
    the origin alone.
    """
    if not 2 <= n <= 5:
        raise ValueError("star_origin_check supports 2 <= n <= 5")
    t = star_tree(n)
    ring = pair_ring(t, _field(prime))
    gens = binomial_polys(hypersimplex_binomials(n), ring)
    a = build_design_A(t, ring.field)
    gens += [ring.linear(row) for row in a.entries]
    return buchberger(gens, max_pairs).zero_dimensional


# -- fixtures for the non-tree counterexample --------------------------------------

BAD_TORIC_COLUMNS = ("11", "12", "13", "14", "22", "23", "24", "33", "34", "44")


def bad_toric_design(field=QQ) -> ExactMatrix:
    """Design matrix of the toric variety of inverses of the counterexample space."""
    rows = (
        (2, 1, 1, 1, 0, 0, 0, 0, 0, 0),
        (0, 0, 0, 0, 1, 0, 0, 1, 0, 1),
        (0, 1, 1, 1, 0, 2, 2, 0, 2, 0),
    )
    return ExactMatrix(rows, field, None, BAD_TORIC_COLUMNS)


def bad_toric_generators(field=None):
    """Generators of its toric ideal in the ten variables ``k11, k12, ..., k44``."""
    ring = PolyRing([f"k{c}" for c in BAD_TORIC_COLUMNS], field)
    texts = [
        "k22 - k33", "k33 - k44",
        "k12 - k13", "k13 - k14",
        "k23 - k24", "k24 - k34",
        "k12^2 - k11*k23",
    ]
    return [ring.parse(s) for s in texts]


def bad_toric_lspace():
    """Basis (a, b, c) of the space of matrices [[a,c,c,c],[c,b,0,0],[c,0,b,0],[c,0,0,b]]."""
    a = [[1, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0]]
    b = [[0, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]]
    c = [[0, 1, 1, 1], [1, 0, 0, 0], [1, 0, 0, 0], [1, 0, 0, 0]]
    return [a, b, c]


def tree_lspace(t: RootedTree):
    return lspace_basis(t)


def random_pcoords(t: RootedTree, seed: int, prime: int | None = P1) -> PCoordinates:
    vals = sample_data(len(t.pairs()), seed, prime)
    return PCoordinates(t.n, dict(zip(combinations(range(t.n + 1), 2), vals)))


__all__ = [
    "CertificationReport",
    "DegenerateSliceError",
    "GroebnerResourceError",
    "bad_toric_design",
    "bad_toric_generators",
    "bad_toric_lspace",
    "certified_degree",
    "linear_rmld",
    "rmld_certify",
    "rmld_formula",
    "star_origin_check",
    "toric_mld_given_gens",
    "tree_lspace",
]
