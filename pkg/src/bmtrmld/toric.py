"""Toric ideals of tree models: quartet binomials, lattice membership, fiber products."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from itertools import combinations

from .exact import ExactMatrix, IntegerMatrix, integer_kernel, lattices_equal
from .groebner import PolyRing, Polynomial, ideal_equal
from .model import build_path_B, variable_names
from .trees import Gluing, RootedTree, glue


@dataclass(frozen=True)
class Binomial:
    """``p^plus - p^minus`` over the pair variables ``p_ij`` (column order of the tree)."""

    plus: tuple
    minus: tuple

    def __post_init__(self):
        if len(self.plus) != len(self.minus):
            raise ValueError("exponent vectors differ in length")
        if tuple(self.plus) == tuple(self.minus):
            raise ValueError("a binomial needs distinct monomials")

    def to_poly(self, ring: PolyRing) -> Polynomial:
        return ring.poly({tuple(self.plus): 1}) - ring.poly({tuple(self.minus): 1})


def _pair_index(n):
    return {p: k for k, p in enumerate(combinations(range(n + 1), 2))}


def _quad(index, size, a, b, c, d):
    """Exponent vector of ``p_ab * p_cd``."""
    e = [0] * size
    e[index[min(a, b), max(a, b)]] += 1
    e[index[min(c, d), max(c, d)]] += 1
    return tuple(e)


def tree_binomials(t: RootedTree):
    """Quadratic generators of the tree's toric ideal, one or two per quartet.

    A resolved quartet with cherries ``{a,b}``, ``{c,d}`` gives
    ``p_ac p_bd - p_ad p_bc``; an unresolved quartet gives the two
    independent hypersimplex differences.
    """
    index = _pair_index(t.n)
    size = len(index)
    out = []
    for q in combinations(range(t.n + 1), 4):
        top = t.quartet_topology(q)
        if top.resolved:
            (a, b), (c, d) = top.split
            out.append(Binomial(_quad(index, size, a, c, b, d), _quad(index, size, a, d, b, c)))
        else:
            i, j, k, l = q
            out.append(Binomial(_quad(index, size, i, j, k, l), _quad(index, size, i, k, j, l)))
            out.append(Binomial(_quad(index, size, i, k, j, l), _quad(index, size, i, l, j, k)))
    return out


def hypersimplex_binomials(n: int):
    """All ``p_ij p_kl - p_ik p_jl`` for distinct ``i, j, k, l`` in ``0..n`` (up to sign)."""
    index = _pair_index(n)
    size = len(index)
    out = []
    for i, j, k, l in combinations(range(n + 1), 4):
        monos = [_quad(index, size, i, j, k, l), _quad(index, size, i, k, j, l), _quad(index, size, i, l, j, k)]
        for x, y in combinations(monos, 2):
            out.append(Binomial(x, y))
    return out


def pair_ring(t_or_n, field=None) -> PolyRing:
    """Polynomial ring in the pair variables ``p01, p02, ...`` of a tree (or of ``n``)."""
    if isinstance(t_or_n, RootedTree):
        names = variable_names(t_or_n)
    else:
        n = t_or_n
        names = ["p" + (f"{i}{j}" if n < 10 else f"{i}_{j}") for i, j in combinations(range(n + 1), 2)]
    return PolyRing(names, field)


def binomial_polys(binomials, ring: PolyRing):
    return [b.to_poly(ring) for b in binomials]


def lattice_member(b: Binomial, design: ExactMatrix) -> bool:
    """True iff ``design @ (plus - minus) == 0``, i.e. the binomial lies in I(design)."""
    if len(b.plus) != design.ncols:
        raise ValueError(f"binomial has {len(b.plus)} variables, design has {design.ncols} columns")
    diff = [x - y for x, y in zip(b.plus, b.minus)]
    return not any(design.apply(diff))


def binomial_from_poly(f: Polynomial) -> Binomial | None:
    """The :class:`Binomial` of ``f`` when ``f = c (p^u - p^v)``, else ``None``."""
    items = f.items()
    if len(items) != 2:
        return None
    (u, cu), (v, cv) = items
    if f.ring.field.norm(cu + cv) != 0:
        return None
    return Binomial(tuple(u), tuple(v))


# -- toric fiber product ---------------------------------------------------------


@dataclass
class TfpReport:
    newick: str
    t_prime: str
    ell: int
    m: int
    kernel_rank_psi: int
    kernel_rank_B: int
    equal: bool
    ideal_equal: bool | None

    @property
    def passed(self) -> bool:
        return self.equal and self.ideal_equal is not False

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def psi_exponent_matrix(g: Gluing, halve: bool = True):
    """Exponent matrix of the fiber-product parametrisation, columns in the glued tree's pair order.

    Rows are ``t_*`` followed by the edges of the glued tree.  Each pair
    variable maps to ``t_*^2`` times the edge parameters of its path in ``T'``
    and in ``S_m``; the shared edge ``e(ell)`` appears twice on crossing
    paths.  With ``halve`` the ``t_*`` and ``e(ell)`` rows are divided by two.
    """
    t, tp = g.tree, g.t_prime
    star = g.star
    edges = list(t.nonroot_vertices)
    row_of = {v: k + 1 for k, v in enumerate(edges)}

    def tp_vertex(v):
        if v == g.ell:
            return g.center
        return g.leaf_map[v] if tp.is_leaf(v) else g.internal_map[v]

    def star_vertex(v):
        return g.center if v == star.root_child else g.star_leaf_map[v]

    inv_leaf = {new: old for old, new in g.leaf_map.items()}
    inv_star = {new: old for old, new in g.star_leaf_map.items()}
    cols = []
    for i, j in t.pairs():
        col = [0] * (len(edges) + 1)
        col[0] = 2
        side_i = "T" if i in inv_leaf else "S"
        side_j = "T" if j in inv_leaf else "S"
        if side_i == side_j == "T":
            tp_edges, s_edges = tp.path_edges(inv_leaf[i], inv_leaf[j]), ()
        elif side_i == side_j == "S":
            tp_edges, s_edges = (), star.path_edges(inv_star[i], inv_star[j])
        else:
            a, b = (i, j) if side_i == "T" else (j, i)
            tp_edges = tp.path_edges(inv_leaf[a], g.ell)
            s_edges = star.path_edges(0, inv_star[b])
        for e in tp_edges:
            col[row_of[tp_vertex(e)]] += 1
        for e in s_edges:
            col[row_of[star_vertex(e)]] += 1
        cols.append(col)
    rows = [list(r) for r in zip(*cols)]
    if halve:
        for r in (0, row_of[g.center]):
            if any(x % 2 for x in rows[r]):
                raise ArithmeticError("expected only even exponents in the halved rows")
            rows[r] = [x // 2 for x in rows[r]]
    return IntegerMatrix(tuple(map(tuple, rows)))


def lift_generators(g: Gluing, ring: PolyRing):
    """Generators of the fiber product assembled from the two factors' quartet binomials.

    Degree-preserving lifts of the generators of ``T'`` and ``S_m`` plus the
    quadratic moves ``p_ij p_kl - p_il p_kj`` (``i, k`` from ``T'``, ``j, l`` from ``S_m``).
    """
    t, tp, star = g.tree, g.t_prime, g.star
    index = _pair_index(t.n)
    size = len(index)
    cross_tp = [g.leaf_map[i] for i in range(tp.n + 1) if i != g.ell]
    cross_s = [g.star_leaf_map[k] for k in range(1, g.m + 1)]

    def var_pairs(exps, n):
        pairs = list(combinations(range(n + 1), 2))
        out = []
        for k, e in enumerate(exps):
            out.extend([pairs[k]] * e)
        return out

    def mono(pairs):
        e = [0] * size
        for a, b in pairs:
            e[index[min(a, b), max(a, b)]] += 1
        return tuple(e)

    out = []
    for b in tree_binomials(tp):
        sides = []
        for exps in (b.plus, b.minus):
            sides.append(var_pairs(exps, tp.n))
        if any(g.ell in p for p in sides[0]):
            for j in cross_s:
                new = []
                for side in sides:
                    new.append([(g.leaf_map[x] if x != g.ell else j, g.leaf_map[y] if y != g.ell else j) for x, y in side])
                out.append((mono(new[0]), mono(new[1])))
        else:
            new = [[(g.leaf_map[x], g.leaf_map[y]) for x, y in side] for side in sides]
            out.append((mono(new[0]), mono(new[1])))
    for b in tree_binomials(star):
        sides = [var_pairs(exps, star.n) for exps in (b.plus, b.minus)]
        if any(0 in p for p in sides[0]):
            for i in cross_tp:
                new = [[(g.star_leaf_map[x] if x else i, g.star_leaf_map[y] if y else i) for x, y in side] for side in sides]
                out.append((mono(new[0]), mono(new[1])))
        else:
            new = [[(g.star_leaf_map[x], g.star_leaf_map[y]) for x, y in side] for side in sides]
            out.append((mono(new[0]), mono(new[1])))
    for i, k in combinations(cross_tp, 2):
        for j, l in combinations(cross_s, 2):
            out.append((mono([(i, j), (k, l)]), mono([(i, l), (k, j)])))
    polys = []
    for plus, minus in out:
        if plus != minus:
            polys.append(Binomial(plus, minus).to_poly(ring))
    return polys


def tfp_kernel_check(g: Gluing, ideal_check_max_leaves: int = 7) -> TfpReport:
    """Compare the saturated kernels of the fiber-product map and of the glued tree's path matrix.

    For glued trees with at most ``ideal_check_max_leaves`` leaves the quartet
    generators of the glued tree are also compared, as ideals, against the
    generators lifted from the two factors.
    """
    if not isinstance(g, Gluing):
        raise TypeError("expected a Gluing (see trees.glue)")
    t = g.tree
    psi = psi_exponent_matrix(g)
    b = IntegerMatrix.from_exact(build_path_B(t))
    k_psi = integer_kernel(psi)
    k_b = integer_kernel(b)
    same = lattices_equal(k_psi, k_b)
    ideal_ok = None
    if t.n + 1 <= ideal_check_max_leaves:
        ring = pair_ring(t)
        mine = binomial_polys(tree_binomials(t), ring)
        lifted = lift_generators(g, ring)
        if not mine and not lifted:
            ideal_ok = True
        else:
            ideal_ok = ideal_equal(mine, lifted)
    return TfpReport(t.newick(), g.t_prime.newick(), g.ell, g.m, len(k_psi), len(k_b), same, ideal_ok)


def all_gluings(max_leaves: int, trees=None):
    """Every gluing ``(T', ell, m)`` whose result has at most ``max_leaves`` leaves (root included)."""
    from .trees import enumerate_topologies

    bases = trees if trees is not None else enumerate_topologies(max_leaves - 1)
    out = []
    for tp in bases:
        for ell in range(1, tp.n + 1):
            for m in range(2, max_leaves - tp.n + 1):
                if tp.n + m <= max_leaves:
                    out.append(glue(tp, ell, m))
    return out
