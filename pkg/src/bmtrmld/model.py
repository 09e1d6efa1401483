"""Linear algebra defining the Brownian motion tree model of a rooted tree.

Columns are indexed by unordered leaf pairs ``{i, j}``, ``0 <= i < j <= n``,
in lexicographic order and labelled ``"ij"`` (``"i_j"`` once n >= 10).
Rows of the design matrix are indexed by non-root vertices, rows of the path
matrix by edges ``e(v)``; both follow ``tree.nonroot_vertices``.
"""

from __future__ import annotations

from dataclasses import dataclass

from .exact import QQ, ExactMatrix
from .trees import RootedTree


def pair_label(i: int, j: int, n: int) -> str:
    i, j = min(i, j), max(i, j)
    return f"{i}{j}" if n < 10 else f"{i}_{j}"


def pair_labels(t: RootedTree):
    return [pair_label(i, j, t.n) for i, j in t.pairs()]


def variable_names(t: RootedTree, prefix="p"):
    return [prefix + lab for lab in pair_labels(t)]


def covariance_pattern(t: RootedTree) -> dict:
    """Map each pair ``(i, j)``, ``1 <= i <= j <= n``, to ``lca(i, j)``.

    Entries of a covariance matrix in the model agree whenever their pairs
    share a class.
    """
    return {(i, j): t.lca(i, j) for i in range(1, t.n + 1) for j in range(i, t.n + 1)}


def build_design_A(t: RootedTree, field=QQ) -> ExactMatrix:
    """Matrix with entry 1 at ``(v, {i,j})`` iff ``v`` is ``i``, ``j`` or ``lca(i, j)``."""
    rows = []
    pairs = t.pairs()
    for v in t.nonroot_vertices:
        rows.append(tuple(int(v == i or v == j or v == t.lca(i, j)) for i, j in pairs))
    return ExactMatrix(tuple(rows), field, tuple(map(str, t.nonroot_vertices)), tuple(pair_labels(t)))


def build_path_B(t: RootedTree, starred: bool = False, field=QQ) -> ExactMatrix:
    """Edge/path incidence matrix: entry 1 iff edge ``e`` lies on the path between ``i`` and ``j``.

    With ``starred=True`` a zero column ``*`` is appended and then a row ``*`` of ones.
    """
    pairs = t.pairs()
    paths = [t.path_edges(i, j) for i, j in pairs]
    rows = [tuple(int(v in p) for p in paths) for v in t.nonroot_vertices]
    row_labels = [f"e({v})" for v in t.nonroot_vertices]
    col_labels = pair_labels(t)
    if starred:
        rows = [r + (0,) for r in rows]
        rows.append((1,) * (len(pairs) + 1))
        row_labels.append("*")
        col_labels = col_labels + ["*"]
    return ExactMatrix(tuple(rows), field, tuple(row_labels), tuple(col_labels))


class IdentityError(AssertionError):
    pass


def row_transform_b_of_a(t: RootedTree, v: int, check: bool = True) -> dict:
    """Coefficients expressing the path-matrix row of ``e(v)`` in design-matrix rows.

    ``b^{e(v)} = sum_{k in desLv(v)} a^k - 2 sum_{k in desInt(v)} a^k``, where
    ``desInt(v)`` contains ``v`` itself when ``v`` is internal.  With
    ``check`` the identity is verified against the two matrices.
    """
    if v == 0 or v not in t.parent:
        raise ValueError(f"{v} is not a non-root vertex")
    coeffs = {k: 1 for k in t.descendant_leaves(v)}
    for k in t.descendant_internal(v):
        coeffs[k] = -2
    if check:
        a = build_design_A(t)
        b = build_path_B(t)
        index = {u: r for r, u in enumerate(t.nonroot_vertices)}
        combo = [sum(c * a[index[k], col] for k, c in coeffs.items()) for col in range(a.ncols)]
        if tuple(combo) != b.row(index[v]):
            raise IdentityError(f"row identity fails for e({v})")
    return coeffs


@dataclass(frozen=True)
class PCoordinates:
    """Values indexed by unordered pairs ``(i, j)``, ``0 <= i < j <= n``."""

    n: int
    values: dict

    def __post_init__(self):
        norm = {}
        for (i, j), x in self.values.items():
            if i == j:
                raise ValueError("p-coordinates are indexed by distinct pairs")
            norm[min(i, j), max(i, j)] = x
        expected = (self.n + 1) * self.n // 2
        if len(norm) != expected:
            raise ValueError(f"expected {expected} pair values, got {len(norm)}")
        object.__setattr__(self, "values", norm)

    def __getitem__(self, pair):
        i, j = pair
        return self.values[min(i, j), max(i, j)]

    def vector(self):
        return [self.values[p] for p in sorted(self.values)]

    @classmethod
    def from_vector(cls, n, vec):
        from itertools import combinations

        pairs = list(combinations(range(n + 1), 2))
        if len(vec) != len(pairs):
            raise ValueError("vector length does not match the pair count")
        return cls(n, dict(zip(pairs, vec)))


def p_coords(k, direction: str = "forward"):
    """Linear change of coordinates between symmetric ``K`` and pair coordinates.

    Forward: ``p_ij = -k_ij`` for ``1 <= i < j <= n`` and ``p_0i = sum_j k_ij``.
    Inverse takes :class:`PCoordinates` and returns ``K`` as a list of rows
    (indices shifted so that ``K[0][0]`` is ``k_11``).  Works for any scalar
    type supporting ``+`` and ``-``.
    """
    if direction == "forward":
        n = len(k)
        vals = {}
        for i in range(1, n + 1):
            row = k[i - 1]
            s = row[0]
            for x in list(row)[1:]:
                s = s + x
            vals[0, i] = s
            for j in range(i + 1, n + 1):
                vals[i, j] = -k[i - 1][j - 1]
        return PCoordinates(n, vals)
    if direction == "inverse":
        p = k
        n = p.n
        out = [[None] * n for _ in range(n)]
        for i in range(1, n + 1):
            diag = p[0, i]
            for j in range(1, n + 1):
                if j != i:
                    diag = diag + p[i, j]
                    out[i - 1][j - 1] = -p[i, j]
            out[i - 1][i - 1] = diag
        return out
    raise ValueError("direction must be 'forward' or 'inverse'")


@dataclass(frozen=True)
class AffineSystem:
    """Equations ``matrix @ p = rhs`` with one row per non-root vertex."""

    matrix: ExactMatrix
    rhs: tuple

    def residual(self, p):
        return tuple(x - y for x, y in zip(self.matrix.apply(p), self.rhs))


def perp_linear_system(t: RootedTree, u: PCoordinates, field=QQ) -> AffineSystem:
    """Affine equations in ``p`` expressing ``K - W`` orthogonal to the model space.

    For each internal ``v``: ``sum_{lca(i,j)=v, 1<=i<j} (p_ij - u_ij) = 0``;
    for each leaf ``i >= 1``: ``sum_{j != i} (p_ij - u_ij) = 0``.  Built from
    these sums directly, independently of :func:`build_design_A`.
    """
    pairs = t.pairs()
    rows = []
    for v in t.nonroot_vertices:
        if t.is_leaf(v):
            row = [int(v in (i, j)) for i, j in pairs]
        else:
            row = [int(i >= 1 and t.lca(i, j) == v) for i, j in pairs]
        rows.append(tuple(row))
    m = ExactMatrix(tuple(rows), field, tuple(map(str, t.nonroot_vertices)), tuple(pair_labels(t)))
    uvec = [u[p] for p in pairs]
    return AffineSystem(m, m.apply(uvec))


def lspace_basis(t: RootedTree):
    """Basis of the model space: for each non-root vertex, the 0/1 indicator of its lca class."""
    pattern = covariance_pattern(t)
    basis = []
    for v in t.nonroot_vertices:
        e = [[0] * t.n for _ in range(t.n)]
        for (i, j), w in pattern.items():
            if w == v:
                e[i - 1][j - 1] = e[j - 1][i - 1] = 1
        basis.append(e)
    return basis
