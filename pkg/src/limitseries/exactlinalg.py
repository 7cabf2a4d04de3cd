"""Exact linear algebra over the rationals.

Everything downstream is built on the four value types in this module:
rational matrices (:class:`MatQ`), canonical subspaces (:class:`Subspace`),
complete flags (:class:`Flag`) and univariate polynomials with rational
coefficients (:class:`Poly`).  All values are immutable and all arithmetic
is exact; subspaces are stored in reduced row echelon form so that equality
of the stored representation is equality of subspaces.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Optional, Sequence

QQ = Fraction


def parse_rational(s) -> Fraction:
    """Parse ``"p/q"`` (or ``"p"``, or an int) into a Fraction."""
    if isinstance(s, bool):
        raise ValueError("not a rational: %r" % (s,))
    if isinstance(s, int):
        return Fraction(s)
    if isinstance(s, str):
        return Fraction(s)
    raise ValueError("not a rational: %r" % (s,))


def format_rational(q: Fraction) -> str:
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else "%d/%d" % (
        q.numerator,
        q.denominator,
    )


def _rref(rows, cols):
    """Reduced row echelon form of a list of row tuples.

    Returns (new_rows, pivot_columns).  Rows of zeros are kept (callers that
    want a basis drop them).
    """
    rows = [list(r) for r in rows]
    pivots = []
    lead = 0
    for j in range(cols):
        piv = None
        for i in range(lead, len(rows)):
            if rows[i][j] != 0:
                piv = i
                break
        if piv is None:
            continue
        rows[lead], rows[piv] = rows[piv], rows[lead]
        inv = rows[lead][j]
        rows[lead] = [x / inv for x in rows[lead]]
        for i in range(len(rows)):
            if i != lead and rows[i][j] != 0:
                c = rows[i][j]
                rows[i] = [a - c * b for a, b in zip(rows[i], rows[lead])]
        pivots.append(j)
        lead += 1
        if lead == len(rows):
            break
    return [tuple(r) for r in rows], tuple(pivots)


class MatQ:
    """A rows x cols matrix of Fractions, immutable.

    Parameters
    ----------
    data : sequence of row tuples
    cols : number of columns (needed when there are no rows)
    """

    __slots__ = ("data", "rows", "cols")

    def __init__(self, data, cols: Optional[int] = None):
        data = tuple(tuple(Fraction(x) for x in row) for row in data)
        if data:
            cols_found = len(data[0])
            if any(len(r) != cols_found for r in data):
                raise ValueError("ragged rows")
            if cols is not None and cols != cols_found:
                raise ValueError("cols mismatch")
            cols = cols_found
        elif cols is None:
            cols = 0
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "rows", len(data))
        object.__setattr__(self, "cols", cols)

    def __setattr__(self, *a):
        raise AttributeError("MatQ is immutable")

    @classmethod
    def from_rows(cls, rows, cols: Optional[int] = None) -> "MatQ":
        return cls(rows, cols)

    @classmethod
    def identity(cls, n: int) -> "MatQ":
        return cls([[1 if i == j else 0 for j in range(n)] for i in range(n)])

    @classmethod
    def zero(cls, rows: int, cols: int) -> "MatQ":
        return cls([[0] * cols for _ in range(rows)], cols=cols)

    def __eq__(self, other):
        return isinstance(other, MatQ) and self.data == other.data and \
            self.cols == other.cols

    def __hash__(self):
        return hash((self.data, self.cols))

    def __repr__(self):
        return "MatQ(%r)" % (self.data,)

    def row(self, i):
        return self.data[i]

    def column(self, j):
        return tuple(r[j] for r in self.data)

    def transpose(self) -> "MatQ":
        return MatQ(
            [self.column(j) for j in range(self.cols)], cols=self.rows
        )

    def __mul__(self, other: "MatQ") -> "MatQ":
        if self.cols != other.rows:
            raise ValueError("shape mismatch")
        cols = [other.column(j) for j in range(other.cols)]
        return MatQ(
            [
                [sum(a * b for a, b in zip(r, c)) for c in cols]
                for r in self.data
            ],
            cols=other.cols,
        )

    def apply(self, v: Sequence[Fraction]):
        if len(v) != self.cols:
            raise ValueError("shape mismatch")
        return tuple(sum(a * b for a, b in zip(r, v)) for r in self.data)

    def scale(self, c) -> "MatQ":
        c = Fraction(c)
        return MatQ([[c * x for x in r] for r in self.data], cols=self.cols)

    def add(self, other: "MatQ") -> "MatQ":
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise ValueError("shape mismatch")
        return MatQ(
            [
                [a + b for a, b in zip(r1, r2)]
                for r1, r2 in zip(self.data, other.data)
            ],
            cols=self.cols,
        )

    def rref(self):
        rows, pivots = _rref(self.data, self.cols)
        return MatQ(rows, cols=self.cols), pivots

    def rank(self) -> int:
        return len(self.rref()[1])

    def kernel(self) -> "Subspace":
        rows, pivots = _rref(self.data, self.cols)
        free = [j for j in range(self.cols) if j not in pivots]
        basis = []
        for f in free:
            v = [Fraction(0)] * self.cols
            v[f] = Fraction(1)
            for i, p in enumerate(pivots):
                v[p] = -rows[i][f]
            basis.append(tuple(v))
        return Subspace.from_vectors(self.cols, basis)

    def image_of(self, sub: "Subspace") -> "Subspace":
        return Subspace.from_vectors(
            self.rows, [self.apply(b) for b in sub.basis]
        )

    def image(self) -> "Subspace":
        return Subspace.from_vectors(
            self.rows, [self.column(j) for j in range(self.cols)]
        )

    def preimage_of(self, sub: "Subspace") -> "Subspace":
        if sub.ambient_dim != self.rows:
            raise ValueError("shape mismatch")
        ann = sub.annihilator_matrix()
        return (ann * self).kernel()


def hstack(mats: Sequence[MatQ]) -> MatQ:
    rows = mats[0].rows
    if any(m.rows != rows for m in mats):
        raise ValueError("row mismatch")
    return MatQ(
        [sum((list(m.data[i]) for m in mats), []) for i in range(rows)],
        cols=sum(m.cols for m in mats),
    )


def vstack(mats: Sequence[MatQ]) -> MatQ:
    cols = mats[0].cols
    if any(m.cols != cols for m in mats):
        raise ValueError("col mismatch")
    data = []
    for m in mats:
        data.extend(m.data)
    return MatQ(data, cols=cols)


def kernel(m: MatQ) -> "Subspace":
    return m.kernel()


def rank(m: MatQ) -> int:
    return m.rank()


def echelonize(m: MatQ) -> MatQ:
    return m.rref()[0]


def solve(m: MatQ, b: Sequence[Fraction]):
    """One solution of m x = b, or None if the system is inconsistent."""
    aug = MatQ([list(r) + [bv] for r, bv in zip(m.data, b)],
               cols=m.cols + 1)
    rows, pivots = _rref(aug.data, aug.cols)
    if m.cols in pivots:
        return None
    x = [Fraction(0)] * m.cols
    for i, p in enumerate(pivots):
        x[p] = rows[i][m.cols]
    return tuple(x)


class Subspace:
    """A linear subspace of Q^n in canonical form.

    The basis is stored in reduced row echelon form with zero rows dropped,
    so two equal subspaces have bitwise-equal representations and Subspace
    values can be dictionary keys.
    """

    __slots__ = ("ambient_dim", "basis")

    def __init__(self, ambient_dim: int, basis):
        object.__setattr__(self, "ambient_dim", ambient_dim)
        object.__setattr__(self, "basis", tuple(tuple(v) for v in basis))

    def __setattr__(self, *a):
        raise AttributeError("Subspace is immutable")

    @classmethod
    def from_vectors(cls, ambient_dim: int, vectors: Iterable) -> "Subspace":
        vectors = [tuple(Fraction(x) for x in v) for v in vectors]
        for v in vectors:
            if len(v) != ambient_dim:
                raise ValueError("vector length != ambient dimension")
        rows, pivots = _rref(vectors, ambient_dim)
        return cls(ambient_dim, rows[: len(pivots)])

    @classmethod
    def zero(cls, ambient_dim: int) -> "Subspace":
        return cls(ambient_dim, [])

    @classmethod
    def full(cls, ambient_dim: int) -> "Subspace":
        return cls.from_vectors(
            ambient_dim, MatQ.identity(ambient_dim).data
        )

    @property
    def dim(self) -> int:
        return len(self.basis)

    def __eq__(self, other):
        return (
            isinstance(other, Subspace)
            and self.ambient_dim == other.ambient_dim
            and self.basis == other.basis
        )

    def __hash__(self):
        return hash((self.ambient_dim, self.basis))

    def __repr__(self):
        return "Subspace(%d, %r)" % (self.ambient_dim, list(self.basis))

    def matrix(self) -> MatQ:
        return MatQ(self.basis, cols=self.ambient_dim)

    def contains(self, v) -> bool:
        v = list(Fraction(x) for x in v)
        # reduce v against the echelon basis
        for row in self.basis:
            j = next(i for i, x in enumerate(row) if x == 1)
            if v[j] != 0:
                c = v[j]
                v = [a - c * b for a, b in zip(v, row)]
        return all(x == 0 for x in v)

    def contains_subspace(self, other: "Subspace") -> bool:
        return all(self.contains(b) for b in other.basis)

    def add(self, other: "Subspace") -> "Subspace":
        if self.ambient_dim != other.ambient_dim:
            raise ValueError("ambient mismatch")
        return Subspace.from_vectors(
            self.ambient_dim, list(self.basis) + list(other.basis)
        )

    def intersect(self, other: "Subspace") -> "Subspace":
        if self.ambient_dim != other.ambient_dim:
            raise ValueError("ambient mismatch")
        if not self.basis or not other.basis:
            return Subspace.zero(self.ambient_dim)
        # solve sum a_i u_i = sum b_j w_j; read off the u-part
        m = MatQ(
            [
                list(col) + [-x for x in colw]
                for col, colw in zip(
                    self.matrix().transpose().data,
                    other.matrix().transpose().data,
                )
            ],
            cols=self.dim + other.dim,
        )
        vecs = []
        for kvec in m.kernel().basis:
            coeffs = kvec[: self.dim]
            v = [Fraction(0)] * self.ambient_dim
            for c, b in zip(coeffs, self.basis):
                v = [a + c * x for a, x in zip(v, b)]
            vecs.append(tuple(v))
        return Subspace.from_vectors(self.ambient_dim, vecs)

    def annihilator_matrix(self) -> MatQ:
        """Rows form a basis of the functionals vanishing on this space."""
        k = self.matrix().kernel()
        return MatQ(k.basis, cols=self.ambient_dim)

    def combine(self, coeffs):
        """Linear combination of the canonical basis vectors."""
        if len(coeffs) != self.dim:
            raise ValueError("coefficient count does not match dimension")
        v = [Fraction(0)] * self.ambient_dim
        for c, row in zip(coeffs, self.basis):
            if c:
                v = [a + Fraction(c) * b for a, b in zip(v, row)]
        return tuple(v)

    def basis_combinations(self, coeff_range):
        """All combinations with coefficients drawn from coeff_range."""
        for combo in itertools.product(coeff_range, repeat=self.dim):
            yield self.combine(combo)


class Flag:
    """A complete flag 0 = U_0 < U_1 < ... < U_d = Q^d."""

    __slots__ = ("ambient_dim", "subspaces")

    def __init__(self, subspaces: Sequence[Subspace]):
        subspaces = tuple(subspaces)
        d = len(subspaces) - 1
        for i, u in enumerate(subspaces):
            if u.dim != i or u.ambient_dim != d:
                raise ValueError("not a complete flag")
            if i and not u.contains_subspace(subspaces[i - 1]):
                raise ValueError("not nested")
        object.__setattr__(self, "ambient_dim", d)
        object.__setattr__(self, "subspaces", subspaces)

    def __setattr__(self, *a):
        raise AttributeError("Flag is immutable")

    @classmethod
    def from_basis(cls, vectors) -> "Flag":
        vectors = list(vectors)
        d = len(vectors)
        return cls(
            [Subspace.from_vectors(d, vectors[:i]) for i in range(d + 1)]
        )

    def __getitem__(self, i) -> Subspace:
        return self.subspaces[i]


def flag_compatible_basis(u: Flag, w: Flag):
    """A basis adapted to two complete flags simultaneously.

    Returns d vectors such that every member of either flag is the span of a
    subset of them.  Inductive construction: peel off the hyperplane U_{d-1},
    locate the unique index where intersecting with it stalls, and recurse.
    """
    if u.ambient_dim != w.ambient_dim:
        raise ValueError("ambient mismatch")

    def peel(us, ws, m):
        if m == 0:
            return []
        vprime = us[m - 1]
        i0 = None
        for i in range(m):
            if ws[i].intersect(vprime) == ws[i + 1].intersect(vprime):
                i0 = i
                break
        assert i0 is not None  # exactly one stall exists
        b_top = next(b for b in ws[i0 + 1].basis if not vprime.contains(b))
        new_ws = [ws[i] if i <= i0 else ws[i + 1].intersect(vprime)
                  for i in range(m)]
        return peel(us[:m], new_ws, m - 1) + [b_top]

    return peel(list(u.subspaces), list(w.subspaces), u.ambient_dim)


class Poly:
    """Univariate polynomial with Fraction coefficients, low degree first.

    The zero polynomial has degree -1 (sentinel).  Supports ring arithmetic
    with Poly, int and Fraction operands, exact divmod, and vanishing-order
    queries.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs):
        coeffs = [Fraction(c) for c in coeffs]
        while coeffs and coeffs[-1] == 0:
            coeffs.pop()
        object.__setattr__(self, "coeffs", tuple(coeffs))

    def __setattr__(self, *a):
        raise AttributeError("Poly is immutable")

    @classmethod
    def zero(cls) -> "Poly":
        return cls([])

    @classmethod
    def one(cls) -> "Poly":
        return cls([1])

    @classmethod
    def const(cls, c) -> "Poly":
        return cls([c])

    @classmethod
    def x(cls) -> "Poly":
        return cls([0, 1])

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def __eq__(self, other):
        other = _coerce_poly(other)
        if other is None:
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __repr__(self):
        return "Poly(%r)" % (list(self.coeffs),)

    def __add__(self, other):
        other = _coerce_poly(other)
        if other is None:
            return NotImplemented
        a, b = self.coeffs, other.coeffs
        n = max(len(a), len(b))
        a = list(a) + [Fraction(0)] * (n - len(a))
        b = list(b) + [Fraction(0)] * (n - len(b))
        return Poly([x + y for x, y in zip(a, b)])

    __radd__ = __add__

    def __neg__(self):
        return Poly([-c for c in self.coeffs])

    def __sub__(self, other):
        other = _coerce_poly(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = _coerce_poly(other)
        if other is None:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other):
        other = _coerce_poly(other)
        if other is None:
            return NotImplemented
        if self.is_zero() or other.is_zero():
            return Poly.zero()
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return Poly(out)

    __rmul__ = __mul__

    def __divmod__(self, other):
        other = _coerce_poly(other)
        if other is None or other.is_zero():
            raise ZeroDivisionError("poly division by zero")
        rem = list(self.coeffs)
        den = other.coeffs
        q = [Fraction(0)] * max(0, len(rem) - len(den) + 1)
        while len(rem) >= len(den):
            c = rem[-1] / den[-1]
            k = len(rem) - len(den)
            q[k] = c
            for i, d in enumerate(den):
                rem[k + i] -= c * d
            while rem and rem[-1] == 0:
                rem.pop()
            if not rem:
                break
        return Poly(q), Poly(rem)

    def __floordiv__(self, other):
        return divmod(self, other)[0]

    def __mod__(self, other):
        return divmod(self, other)[1]

    def __pow__(self, n):
        if not isinstance(n, int) or n < 0:
            raise ValueError("exponent must be a nonnegative integer")
        out = Poly.one()
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def evaluate(self, p) -> Fraction:
        p = Fraction(p)
        acc = Fraction(0)
        for c in reversed(self.coeffs):
            acc = acc * p + c
        return acc

    def order_at(self, p) -> Optional[int]:
        """Vanishing order at p; None for the zero polynomial."""
        if self.is_zero():
            return None
        p = Fraction(p)
        fac = Poly([-p, 1])
        n = 0
        cur = self
        while cur.evaluate(p) == 0:
            cur, r = divmod(cur, fac)
            assert r.is_zero()
            n += 1
        return n

    def monic(self) -> "Poly":
        if self.is_zero():
            return self
        lead = self.coeffs[-1]
        return Poly([c / lead for c in self.coeffs])

    def derivative(self) -> "Poly":
        return Poly([i * c for i, c in enumerate(self.coeffs)][1:])


def _coerce_poly(v):
    if isinstance(v, Poly):
        return v
    if isinstance(v, (int, Fraction)):
        return Poly([v])
    return None


def poly_gcd(a: Poly, b: Poly) -> Poly:
    """Monic gcd in Q[x]; gcd(0, 0) = 0."""
    while not b.is_zero():
        a, b = b, a % b
    return a.monic()


def det(rows):
    """Determinant over any commutative ring by cofactor expansion.

    Entries need +, - and *; fine for Fraction or Poly at the sizes used
    here.
    """
    n = len(rows)
    if any(len(r) != n for r in rows):
        raise ValueError("not square")
    if n == 1:
        return rows[0][0]
    acc = None
    for j in range(n):
        minor = [r[:j] + r[j + 1:] for r in rows[1:]]
        term = rows[0][j] * det(minor)
        if j % 2:
            term = -term
        acc = term if acc is None else acc + term
    return acc


def minors(m, size: int):
    """All size x size minor determinants, row-combination-major order.

    m is a list of equal-length lists over Fraction or Poly.  A size that
    exceeds either dimension yields the empty list.
    """
    nrows = len(m)
    ncols = len(m[0]) if m else 0
    if size < 1 or size > nrows or size > ncols:
        return []
    out = []
    for ri in combinations(range(nrows), size):
        for ci in combinations(range(ncols), size):
            out.append(det([[m[i][j] for j in ci] for i in ri]))
    return out
