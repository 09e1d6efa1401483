"""Exact dense linear algebra over Q and prime fields, and integer lattice kernels."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from fractions import Fraction

P1 = 2147483647
P2 = 2147483629


class SingularMatrixError(ArithmeticError):
    pass


class InconsistentSystemError(ArithmeticError):
    pass


class RationalField:
    """The field Q; elements are ``fractions.Fraction``."""

    p = None
    name = "QQ"

    def __call__(self, x):
        return x if isinstance(x, Fraction) else Fraction(x)

    def norm(self, x):
        return x

    def inv(self, x):
        if x == 0:
            raise ZeroDivisionError("inverse of zero")
        return 1 / x

    def symmetric(self, x):
        return x

    def __eq__(self, other):
        return isinstance(other, RationalField)

    def __hash__(self):
        return hash("QQ")

    def __repr__(self):
        return "QQ"


class PrimeField:
    """F_p with elements stored as ints in ``[0, p)``."""

    def __init__(self, p: int):
        self.p = int(p)
        self.name = f"GF({self.p})"

    def __call__(self, x):
        if isinstance(x, Fraction):
            return x.numerator * pow(x.denominator, -1, self.p) % self.p
        return int(x) % self.p

    def norm(self, x):
        return x % self.p

    def inv(self, x):
        if x % self.p == 0:
            raise ZeroDivisionError("inverse of zero")
        return pow(x, -1, self.p)

    def symmetric(self, x):
        """Representative in ``(-p/2, p/2]``, for display."""
        return x - self.p if x > self.p // 2 else x

    def __eq__(self, other):
        return isinstance(other, PrimeField) and other.p == self.p

    def __hash__(self):
        return hash(self.p)

    def __repr__(self):
        return self.name


QQ = RationalField()


def GF(p: int) -> PrimeField:
    return PrimeField(p)


@dataclass(frozen=True)
class ExactMatrix:
    """Dense matrix over ``field`` with optional row/column labels."""

    entries: tuple
    field: object = QQ
    row_labels: tuple | None = None
    col_labels: tuple | None = None

    def __post_init__(self):
        rows = tuple(tuple(self.field(x) for x in r) for r in self.entries)
        widths = {len(r) for r in rows}
        if len(widths) > 1:
            raise ValueError("ragged matrix")
        object.__setattr__(self, "entries", rows)
        for labels, size, what in ((self.row_labels, self.nrows, "row"), (self.col_labels, self.ncols, "column")):
            if labels is None:
                continue
            labels = tuple(labels)
            if len(labels) != size or len(set(labels)) != size:
                raise ValueError(f"{what} labels must be {size} distinct strings")
        if self.row_labels is not None:
            object.__setattr__(self, "row_labels", tuple(self.row_labels))
        if self.col_labels is not None:
            object.__setattr__(self, "col_labels", tuple(self.col_labels))

    @property
    def nrows(self) -> int:
        return len(self.entries)

    @property
    def ncols(self) -> int:
        return len(self.entries[0]) if self.entries else 0

    @property
    def shape(self):
        return self.nrows, self.ncols

    def __getitem__(self, idx):
        i, j = idx
        return self.entries[i][j]

    def row(self, i):
        return self.entries[i]

    def entry(self, row_label, col_label):
        return self.entries[self.row_labels.index(row_label)][self.col_labels.index(col_label)]

    def transpose(self) -> "ExactMatrix":
        return ExactMatrix(tuple(zip(*self.entries)), self.field, self.col_labels, self.row_labels)

    def over(self, field) -> "ExactMatrix":
        return ExactMatrix(self.entries, field, self.row_labels, self.col_labels)

    def __matmul__(self, other: "ExactMatrix") -> "ExactMatrix":
        if self.ncols != other.nrows:
            raise ValueError("dimension mismatch")
        f = self.field
        cols = list(zip(*other.entries))
        out = tuple(tuple(f.norm(sum(a * b for a, b in zip(r, c))) for c in cols) for r in self.entries)
        return ExactMatrix(out, f, self.row_labels, other.col_labels)

    def apply(self, vec):
        """Matrix-vector product."""
        f = self.field
        return tuple(f.norm(sum(a * f(b) for a, b in zip(r, vec))) for r in self.entries)

    def to_int_rows(self):
        return [[int(x) for x in r] for r in self.entries]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        sym = self.field.symmetric
        if self.col_labels is not None:
            w.writerow(([""] if self.row_labels is not None else []) + list(self.col_labels))
        for i, r in enumerate(self.entries):
            lead = [self.row_labels[i]] if self.row_labels is not None else []
            w.writerow(lead + [str(sym(x)) for x in r])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, field=QQ, row_labels=True, col_labels=True) -> "ExactMatrix":
        rows = [r for r in csv.reader(io.StringIO(text)) if r]
        cl = None
        if col_labels:
            cl = rows[0]
            rows = rows[1:]
        rl = None
        if row_labels:
            rl = [r[0] for r in rows]
            rows = [r[1:] for r in rows]
            if cl is not None and len(cl) == len(rows[0]) + 1:
                cl = cl[1:]
        return cls(tuple(tuple(Fraction(x) for x in r) for r in rows), field, rl, cl)

    def to_dict(self) -> dict:
        sym = self.field.symmetric
        return {
            "field": repr(self.field),
            "rows": list(self.row_labels) if self.row_labels else None,
            "cols": list(self.col_labels) if self.col_labels else None,
            "entries": [[str(sym(x)) for x in r] for r in self.entries],
        }


def identity(n: int, field=QQ) -> ExactMatrix:
    return ExactMatrix(tuple(tuple(int(i == j) for j in range(n)) for i in range(n)), field)


def _rref_rows(rows, field, ncols):
    """In-place Gauss-Jordan elimination; returns pivot columns."""
    norm, inv = field.norm, field.inv
    pivots = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(rows)) if rows[i][c] != 0), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        s = inv(rows[r][c])
        rows[r] = [norm(x * s) for x in rows[r]]
        pr = rows[r]
        for i in range(len(rows)):
            if i != r and rows[i][c] != 0:
                a = rows[i][c]
                rows[i] = [norm(x - a * y) for x, y in zip(rows[i], pr)]
        pivots.append(c)
        r += 1
        if r == len(rows):
            break
    return pivots


def rank_rref(m: ExactMatrix):
    """Rank and reduced row echelon form over the matrix's field."""
    rows = [list(r) for r in m.entries]
    pivots = _rref_rows(rows, m.field, m.ncols)
    return len(pivots), ExactMatrix(tuple(rows), m.field, None, m.col_labels)


def _reduce_against(vec, rref_rows, pivots, field):
    vec = list(vec)
    for r, c in zip(rref_rows, pivots):
        a = vec[c]
        if a != 0:
            vec = [field.norm(x - a * y) for x, y in zip(vec, r)]
    return vec


def rowspan_equal(a: ExactMatrix, b: ExactMatrix) -> bool:
    """True iff the row spaces coincide: each row of one reduces to zero against the other's rref."""
    if a.ncols != b.ncols:
        raise ValueError(f"column counts differ: {a.ncols} vs {b.ncols}")
    if a.field != b.field:
        raise ValueError("matrices live over different fields")
    f = a.field
    for x, y in ((a, b), (b, a)):
        rows = [list(r) for r in y.entries]
        pivots = _rref_rows(rows, f, y.ncols)
        rows = rows[: len(pivots)]
        for r in x.entries:
            if any(_reduce_against(r, rows, pivots, f)):
                return False
    return True


def solve_or_invert(m: ExactMatrix, rhs: ExactMatrix | None = None) -> ExactMatrix:
    """Exact inverse of ``m`` (``rhs`` omitted) or a solution ``x`` of ``m x = rhs``.

    For an under-determined consistent system the free variables are set to 0.
    """
    f = m.field
    inverting = rhs is None
    if inverting:
        if m.nrows != m.ncols:
            raise SingularMatrixError("only square matrices can be inverted")
        rhs = identity(m.nrows, f)
    if rhs.nrows != m.nrows:
        raise ValueError("right-hand side has the wrong number of rows")
    k = rhs.ncols
    rows = [list(r) + [f(x) for x in s] for r, s in zip(m.entries, rhs.entries)]
    pivots = [c for c in _rref_rows(rows, f, m.ncols + k) if c < m.ncols]
    rank = len(pivots)
    if inverting and rank < m.ncols:
        raise SingularMatrixError("matrix is singular")
    for r in rows[rank:]:
        if any(x != 0 for x in r[m.ncols:]):
            raise InconsistentSystemError("the linear system has no solution")
    out = [[f(0)] * k for _ in range(m.ncols)]
    for r, c in zip(rows, pivots):
        out[c] = r[m.ncols:]
    return ExactMatrix(tuple(map(tuple, out)), f)


def invert(m: ExactMatrix) -> ExactMatrix:
    return solve_or_invert(m)


# -- integer lattices -----------------------------------------------------------


@dataclass(frozen=True)
class IntegerMatrix:
    entries: tuple

    def __post_init__(self):
        rows = tuple(tuple(int(x) for x in r) for r in self.entries)
        if len({len(r) for r in rows}) > 1:
            raise ValueError("ragged matrix")
        object.__setattr__(self, "entries", rows)

    @property
    def nrows(self):
        return len(self.entries)

    @property
    def ncols(self):
        return len(self.entries[0]) if self.entries else 0

    def apply(self, vec):
        return tuple(sum(a * b for a, b in zip(r, vec)) for r in self.entries)

    @classmethod
    def from_exact(cls, m: ExactMatrix) -> "IntegerMatrix":
        return cls(tuple(tuple(int(x) for x in r) for r in m.entries))


def _integer_echelon(rows, ncols):
    """Unimodular row reduction to echelon form (Euclid-style pivoting).

    Returns the pivot columns; ``rows`` is modified in place.
    """
    r = 0
    pivots = []
    for c in range(ncols):
        while True:
            nz = [i for i in range(r, len(rows)) if rows[i][c] != 0]
            if not nz:
                break
            piv = min(nz, key=lambda i: abs(rows[i][c]))
            rows[r], rows[piv] = rows[piv], rows[r]
            pr = rows[r]
            done = True
            for i in range(r + 1, len(rows)):
                a = rows[i][c]
                if a:
                    q = a // pr[c]
                    rows[i] = [x - q * y for x, y in zip(rows[i], pr)]
                    if rows[i][c]:
                        done = False
            if done:
                break
        if any(rows[i][c] for i in range(r, len(rows))):
            pivots.append(c)
            r += 1
            if r == len(rows):
                break
    return pivots


def integer_kernel(m: IntegerMatrix):
    """A basis of the saturated lattice ``{v in Z^cols : m v = 0}``.

    Columns of ``m`` are row-reduced with a unimodular transform tracked
    alongside; transform rows whose image vanishes span the kernel lattice.
    """
    ncols = m.ncols
    nrows = m.nrows
    cols = list(zip(*m.entries)) if m.entries else [()] * ncols
    aug = [list(cols[j]) + [int(i == j) for i in range(ncols)] for j in range(ncols)]
    pivots = _integer_echelon(aug, nrows)
    basis = [tuple(r[nrows:]) for r in aug[len(pivots):]]
    return hermite_normal_form(basis)


def hermite_normal_form(vectors):
    """Row-style Hermite normal form of the lattice spanned by ``vectors`` (zero rows dropped)."""
    vectors = [list(v) for v in vectors]
    if not vectors:
        return []
    width = len(vectors[0])
    pivots = _integer_echelon(vectors, width)
    rows = vectors[: len(pivots)]
    for k, c in enumerate(pivots):
        if rows[k][c] < 0:
            rows[k] = [-x for x in rows[k]]
        for i in range(k):
            q = rows[i][c] // rows[k][c]
            if q:
                rows[i] = [x - q * y for x, y in zip(rows[i], rows[k])]
    return [tuple(r) for r in rows]


def lattices_equal(a, b) -> bool:
    return hermite_normal_form(a) == hermite_normal_form(b)
