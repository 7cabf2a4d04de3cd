"""Vanishing loci of polynomial matrix families on the affine line.

The k-th vanishing locus of a map of free modules is cut out by the
minors of size one more than the corank; over Q[t] every such ideal is
principal, so loci are stored as single monic generators (zero for the
whole line, one for the empty locus).  The same machinery drives
one-parameter families of gluing data on a nodal curve: the
node-restriction complex of a family is a polynomial matrix whose
vanishing loci measure where the section kernel jumps.
"""

from fractions import Fraction
from itertools import combinations
from math import comb, gcd

from .curve_model import CurveBundle
from .degree_graph import in_bar_GII, is_vertex_GII
from .exactlinalg import MatQ, Poly, Subspace, solve

SAMPLE_POINTS = (0, 1, -1, 2, 7)


def _as_poly(x):
    if isinstance(x, Poly):
        return x
    if isinstance(x, (list, tuple)):
        return Poly(x)
    return Poly.const(Fraction(x))


def poly_gcd(a, b):
    """Monic greatest common divisor (zero when both arguments are)."""
    a, b = _as_poly(a), _as_poly(b)
    while not b.is_zero():
        a, b = b, a % b
    return a.monic()


def _divisors(n):
    n = abs(n)
    return [d for d in range(1, n + 1) if n % d == 0]


def rational_roots(p):
    """All rational roots of a nonzero polynomial, by the rational root
    bounds on the integer form; empty tuple for the zero polynomial."""
    p = _as_poly(p)
    if p.is_zero():
        return ()
    roots = set()
    coeffs = list(p.coeffs)
    while coeffs and coeffs[0] == 0:
        coeffs.pop(0)
        roots.add(Fraction(0))
    if len(coeffs) > 1:
        den = 1
        for c in coeffs:
            den = den * c.denominator // gcd(den, c.denominator)
        ints = [int(c * den) for c in coeffs]
        for num in _divisors(ints[0]):
            for q in _divisors(ints[-1]):
                for cand in (Fraction(num, q), Fraction(-num, q)):
                    if p.evaluate(cand) == 0:
                        roots.add(cand)
    return tuple(sorted(roots))


class PolyMatrix:
    """Rectangular matrix of univariate polynomials.

    Entries may be given as Poly, scalars, or low-first coefficient
    arrays; an explicit column count is required when there are no rows.
    """

    __slots__ = ("data", "rows", "cols")

    def __init__(self, rows, cols=None):
        data = []
        width = cols
        for row in rows:
            entries = tuple(_as_poly(x) for x in row)
            if width is None:
                width = len(entries)
            elif len(entries) != width:
                raise ValueError("ragged rows")
            data.append(entries)
        if width is None:
            raise ValueError("column count required for an empty matrix")
        object.__setattr__(self, "data", tuple(data))
        object.__setattr__(self, "rows", len(data))
        object.__setattr__(self, "cols", width)

    def __setattr__(self, *a):
        raise AttributeError("PolyMatrix is immutable")

    @classmethod
    def identity(cls, n):
        return cls(
            [[Poly.one() if i == j else Poly.zero() for j in range(n)]
             for i in range(n)],
            cols=n,
        )

    @classmethod
    def zero(cls, rows, cols):
        return cls(
            [[Poly.zero()] * cols for _ in range(rows)], cols=cols
        )

    @classmethod
    def from_matq(cls, m):
        return cls([[Poly.const(x) for x in row] for row in m.data],
                   cols=m.cols)

    def entry(self, i, j):
        return self.data[i][j]

    def __eq__(self, other):
        if not isinstance(other, PolyMatrix):
            return NotImplemented
        return self.cols == other.cols and self.data == other.data

    def __hash__(self):
        return hash((self.cols, self.data))

    def __repr__(self):
        return "PolyMatrix(%d x %d)" % (self.rows, self.cols)

    def __mul__(self, other):
        if isinstance(other, MatQ):
            other = PolyMatrix.from_matq(other)
        if not isinstance(other, PolyMatrix):
            return NotImplemented
        if self.cols != other.rows:
            raise ValueError("shape mismatch")
        out = []
        for i in range(self.rows):
            row = []
            for j in range(other.cols):
                acc = Poly.zero()
                for m in range(self.cols):
                    a = self.data[i][m]
                    if not a.is_zero():
                        acc = acc + a * other.data[m][j]
                row.append(acc)
            out.append(row)
        return PolyMatrix(out, cols=other.cols)

    def scale(self, c):
        c = _as_poly(c)
        return PolyMatrix(
            [[c * x for x in row] for row in self.data], cols=self.cols
        )

    def transpose(self):
        return PolyMatrix(
            [[self.data[i][j] for i in range(self.rows)]
             for j in range(self.cols)],
            cols=self.rows,
        )

    def direct_sum(self, other):
        return poly_block(
            [
                [self, PolyMatrix.zero(self.rows, other.cols)],
                [PolyMatrix.zero(other.rows, self.cols), other],
            ]
        )

    def evaluate(self, tau):
        return MatQ.from_rows(
            [[x.evaluate(tau) for x in row] for row in self.data],
            cols=self.cols,
        )


def poly_block(blocks):
    """Assemble a matrix from a grid of compatibly-sized blocks."""
    widths = [b.cols for b in blocks[0]]
    total = sum(widths)
    out = []
    for brow in blocks:
        if [b.cols for b in brow] != widths:
            raise ValueError("block widths disagree")
        height = {b.rows for b in brow}
        if len(height) != 1:
            raise ValueError("block heights disagree")
        for i in range(height.pop()):
            row = []
            for b in brow:
                row.extend(b.data[i])
            out.append(row)
    return PolyMatrix(out, cols=total)


def poly_det(m):
    if m.rows != m.cols:
        raise ValueError("determinant needs a square matrix")
    n = m.rows
    if n == 0:
        return Poly.one()
    if n == 1:
        return m.data[0][0]
    total = Poly.zero()
    for i in range(n):
        c = m.data[i][0]
        if c.is_zero():
            continue
        sub = PolyMatrix(
            [
                [m.data[x][j] for j in range(1, n)]
                for x in range(n)
                if x != i
            ],
            cols=n - 1,
        )
        term = c * poly_det(sub)
        total = total + term if i % 2 == 0 else total - term
    return total


def poly_rank(m):
    """Rank over the rational function field: the largest minor size
    with a not-identically-zero determinant."""
    for s in range(min(m.rows, m.cols), 0, -1):
        for rr in combinations(range(m.rows), s):
            for cc in combinations(range(m.cols), s):
                sub = PolyMatrix(
                    [[m.data[i][j] for j in cc] for i in rr], cols=s
                )
                if not poly_det(sub).is_zero():
                    return s
    return 0


def _poly_divides(a, b):
    """Membership of b in the ideal generated by a."""
    a, b = _as_poly(a), _as_poly(b)
    if a.is_zero():
        return b.is_zero()
    return (b % a).is_zero()


class VanishingLocus:
    """Closed subscheme of the affine line as a monic principal ideal
    generator; zero means the whole line, one the empty locus."""

    __slots__ = ("generator",)

    def __init__(self, generator):
        g = _as_poly(generator)
        if not g.is_zero():
            g = g.monic()
        object.__setattr__(self, "generator", g)

    def __setattr__(self, *a):
        raise AttributeError("VanishingLocus is immutable")

    @property
    def is_whole(self):
        return self.generator.is_zero()

    @property
    def is_empty(self):
        return self.generator == Poly.one()

    def contains_point(self, tau):
        if self.is_whole:
            return True
        return self.generator.evaluate(tau) == 0

    def contains(self, other):
        """Scheme containment: the other locus sits inside this one."""
        return _poly_divides(other.generator, self.generator)

    def __eq__(self, other):
        if not isinstance(other, VanishingLocus):
            return NotImplemented
        return self.generator == other.generator

    def __hash__(self):
        return hash(self.generator)

    def __repr__(self):
        if self.is_whole:
            return "VanishingLocus(whole)"
        if self.is_empty:
            return "VanishingLocus(empty)"
        return "VanishingLocus(%r)" % (list(self.generator.coeffs),)


def vanishing_locus(f, k):
    """Locus where the kernel of f has dimension at least k, cut out by
    the minors of size cols + 1 - k; beyond the source rank the locus is
    empty by convention."""
    if k < 0:
        raise ValueError("negative kernel dimension")
    if k > f.cols:
        return VanishingLocus(Poly.one())
    s = f.cols + 1 - k
    if s > f.rows:
        return VanishingLocus(Poly.zero())
    g = Poly.zero()
    for rr in combinations(range(f.rows), s):
        for cc in combinations(range(f.cols), s):
            minor = poly_det(
                PolyMatrix([[f.data[i][j] for j in cc] for i in rr],
                           cols=s)
            )
            g = poly_gcd(g, minor)
            if g == Poly.one():
                return VanishingLocus(g)
    return VanishingLocus(g)


def direct_sum_invariance(f, m):
    """Padding by an identity block never moves any vanishing locus."""
    fp = f.direct_sum(PolyMatrix.identity(m))
    return all(
        vanishing_locus(f, k) == vanishing_locus(fp, k)
        for k in range(f.cols + 1)
    )


def inclusion_samples(f, fp, k):
    """Sample points for the kernel-injectivity hypothesis: the fixed
    set plus every rational root of either generator."""
    pts = set(Fraction(x) for x in SAMPLE_POINTS)
    pts.update(rational_roots(vanishing_locus(f, k).generator))
    pts.update(rational_roots(vanishing_locus(fp, k).generator))
    return tuple(sorted(pts))


def kernel_injective_on_samples(f, g, points):
    """Whether g stays injective on the pointwise kernel of f at each
    sample point."""
    for tau in points:
        ker = f.evaluate(tau).kernel()
        if ker.dim == 0:
            continue
        img = [g.evaluate(tau).apply(b) for b in ker.basis]
        if MatQ.from_rows(img, cols=g.rows).rank() < ker.dim:
            return False
    return True


def inclusion_check(f, fp, g, h, k):
    """Divisibility verdict for the k-th loci of a commuting square
    (the first locus sits inside the second).

    The verdict is guaranteed only under pointwise kernel-injectivity
    of g, which kernel_injective_on_samples probes separately; a broken
    hypothesis may flip it.
    """
    if fp * g != h * f:
        raise ValueError("square does not commute")
    gen = vanishing_locus(f, k).generator
    genp = vanishing_locus(fp, k).generator
    return _poly_divides(gen, genp)


def _mat_inv(m):
    cols = []
    for j in range(m.rows):
        e = [Fraction(0)] * m.rows
        e[j] = Fraction(1)
        sol = solve(m, e)
        if sol is None:
            raise ValueError("matrix is singular")
        cols.append(sol)
    return MatQ.from_rows(
        [[cols[j][i] for j in range(m.rows)] for i in range(m.rows)],
        cols=m.rows,
    )


def _splitting(emb):
    """Projection onto a constant subbundle and onto a complement:
    rows of the inverse of a completed basis matrix."""
    s, kk = emb.rows, emb.cols
    if kk == 0:
        return MatQ.from_rows([], cols=s), MatQ.identity(s)
    if emb.rank() < kk:
        raise ValueError("embedding is not a subbundle")
    cols = [list(emb.column(j)) for j in range(kk)]
    for i in range(s):
        if len(cols) == s:
            break
        e_i = [Fraction(0)] * s
        e_i[i] = Fraction(1)
        if Subspace.from_vectors(s, cols + [e_i]).dim > len(cols):
            cols.append(e_i)
    t = MatQ.from_rows(
        [[cols[j][i] for j in range(s)] for i in range(s)], cols=s
    )
    tinv = _mat_inv(t)
    proj = MatQ.from_rows([list(tinv.row(i)) for i in range(kk)], cols=s)
    quot = MatQ.from_rows(
        [list(tinv.row(i)) for i in range(kk, s)], cols=s
    )
    return proj, quot


def fibered_product_bound(f, f1, f2, embeddings, m1, m2, z):
    """Kernel-size bound for a map whose kernel is the fibered product
    of two kernels over a shared constant subbundle of the targets.

    Hypotheses are verified first: each quotient map must vanish to
    order m_i along the divisor, and the kernel of f must match the
    kernel of the assembled block map at every rational point of the
    divisor.  Failures raise; the returned verdict is the containment
    of the divisor in the combined locus.
    """
    emb1, emb2 = embeddings
    if not isinstance(emb1, MatQ):
        emb1 = MatQ.from_rows(emb1)
    if not isinstance(emb2, MatQ):
        emb2 = MatQ.from_rows(emb2)
    kk = emb1.cols
    if emb2.cols != kk:
        raise ValueError("subbundle ranks disagree")
    if emb1.rows != f1.rows or emb2.rows != f2.rows:
        raise ValueError("embedding shapes do not match the targets")
    if f.cols != f1.cols + f2.cols:
        raise ValueError("source must be the direct sum of the sources")
    z = _as_poly(z).monic()
    p1, q1 = _splitting(emb1)
    p2, q2 = _splitting(emb2)
    f1p = PolyMatrix.from_matq(q1) * f1
    f2p = PolyMatrix.from_matq(q2) * f2
    for fp, m in ((f1p, m1), (f2p, m2)):
        if not _poly_divides(z, vanishing_locus(fp, m).generator):
            raise ValueError("quotient locus does not contain the divisor")
    g = poly_block(
        [
            [f1p, PolyMatrix.zero(f1p.rows, f2.cols)],
            [PolyMatrix.zero(f2p.rows, f1.cols), f2p],
            [PolyMatrix.from_matq(p1) * f1,
             (PolyMatrix.from_matq(p2) * f2).scale(-1)],
        ]
    )
    for tau in rational_roots(z):
        if f.evaluate(tau).kernel().dim != g.evaluate(tau).kernel().dim:
            raise ValueError(
                "kernel is not the fibered product at t = %s" % tau
            )
    k = max(0, m1 + m2 - kk)
    return _poly_divides(z, vanishing_locus(f, k).generator)


# ----------------------------------------------------------- families

class GluingFamily:
    """Split bundle data whose gluing matrices vary polynomially in one
    parameter and are invertible at the generic point."""

    def __init__(self, cfg, splits, nodes, gluings):
        probe = CurveBundle(
            cfg,
            splits,
            nodes,
            {e.id: MatQ.identity(cfg.r) for e in cfg.graph.edges},
        )
        if set(gluings) != {e.id for e in cfg.graph.edges}:
            raise ValueError("gluing keys do not match edge ids")
        fams = {}
        for eid, m in gluings.items():
            if not isinstance(m, PolyMatrix):
                m = PolyMatrix(m, cols=cfg.r)
            if m.rows != cfg.r or m.cols != cfg.r:
                raise ValueError("gluing at %r has wrong shape" % eid)
            if poly_det(m).is_zero():
                raise ValueError(
                    "gluing at %r degenerates identically" % eid
                )
            fams[eid] = m
        self.cfg = cfg
        self.graph = cfg.graph
        self.r = cfg.r
        self.splits = probe.splits
        self.nodes = probe.nodes
        self.gluings = fams
        self.ambient_dim = probe.ambient_dim
        self._probe = probe

    def gluing(self, eid):
        return self.gluings[eid]

    def evaluate(self, tau):
        """The bundle at one parameter value; raises where some gluing
        matrix degenerates."""
        return CurveBundle(
            self.cfg,
            self.splits,
            self.nodes,
            {eid: m.evaluate(tau) for eid, m in self.gluings.items()},
        )


def _component_offsets(fam, v):
    offs = []
    pos = 0
    for c in fam.splits[v]:
        offs.append(pos)
        pos += c + 1
    return offs, pos


def _x_divmod(coeffs, p):
    """Synthetic division of a polynomial in x (coefficients in Q[t],
    low first) by x - p."""
    n = len(coeffs)
    if n == 0:
        return [], Poly.zero()
    quot = [Poly.zero()] * (n - 1)
    prev = coeffs[n - 1]
    for i in range(n - 1, 0, -1):
        quot[i - 1] = prev
        prev = coeffs[i - 1] + prev * p
    return quot, prev


def _taylor_value(vec, off, width, p, t):
    """Coefficient of (x - p)^t in the degree-bounded slice starting at
    off, as an element of Q[t]."""
    acc = Poly.zero()
    for i in range(t, width):
        c = vec[off + i]
        if not c.is_zero():
            acc = acc + c * (Fraction(comb(i, t)) * Fraction(p) ** (i - t))
    return acc


def _normalize_spaces(fam, spaces):
    if set(spaces) != set(fam.graph.vertex_ids):
        raise ValueError("space keys do not match vertex ids")
    out = {}
    for v in fam.graph.vertex_ids:
        _, width = _component_offsets(fam, v)
        vecs = []
        for raw in spaces[v]:
            vec = tuple(_as_poly(x) for x in raw)
            if len(vec) != width:
                raise ValueError("vector at %r has wrong length" % v)
            vecs.append(vec)
        out[v] = tuple(vecs)
    return out


def _check_component_spaces(fam, spaces, prof):
    for v, vecs in spaces.items():
        offs, width = _component_offsets(fam, v)
        if vecs:
            m = PolyMatrix(list(vecs), cols=width)
            if poly_rank(m) < len(vecs):
                raise ValueError(
                    "basis at %r is dependent at the generic point" % v
                )
        for vec in vecs:
            for e in fam.graph.incident_edges(v):
                t = prof[(e.id, v)]
                p = fam.nodes[(e.id, v)]
                for j, c in enumerate(fam.splits[v]):
                    cs = list(vec[offs[j]:offs[j] + c + 1])
                    for _ in range(t):
                        cs, rem = _x_divmod(cs, p)
                        if not rem.is_zero():
                            raise ValueError(
                                "divisibility fails at (%s, %s)"
                                % (e.id, v)
                            )


def family_map(fam, spaces, w):
    """Node-restriction matrix of a family: columns indexed by the given
    per-component basis vectors, one row block of size r per node."""
    w = fam.cfg.md(w)
    if not is_vertex_GII(fam.cfg, w):
        raise ValueError("multidegree is not a graph vertex")
    if not in_bar_GII(fam.cfg, w):
        raise ValueError("multidegree outside the bounded window")
    spaces = _normalize_spaces(fam, spaces)
    prof = fam._probe.t_profile(w)
    _check_component_spaces(fam, spaces, prof)
    columns = [
        (v, i)
        for v in fam.graph.vertex_ids
        for i in range(len(spaces[v]))
    ]
    rows = []
    for e in fam.graph.edges:
        phi = fam.gluing(e.id)
        t_t, t_h = prof[(e.id, e.tail)], prof[(e.id, e.head)]
        p_t, p_h = fam.nodes[(e.id, e.tail)], fam.nodes[(e.id, e.head)]
        offs_t, _ = _component_offsets(fam, e.tail)
        offs_h, _ = _component_offsets(fam, e.head)
        for m in range(fam.r):
            row = []
            for v, i in columns:
                vec = spaces[v][i]
                if v == e.tail:
                    acc = Poly.zero()
                    for j, c in enumerate(fam.splits[v]):
                        coef = phi.data[m][j]
                        if not coef.is_zero():
                            acc = acc + coef * _taylor_value(
                                vec, offs_t[j], c + 1, p_t, t_t
                            )
                    row.append(acc)
                elif v == e.head:
                    c = fam.splits[v][m]
                    row.append(
                        -_taylor_value(vec, offs_h[m], c + 1, p_h, t_h)
                    )
                else:
                    row.append(Poly.zero())
            rows.append(row)
    return PolyMatrix(rows, cols=len(columns)), columns


def family_vanishing_locus(fam, spaces, w, k):
    """Locus on the parameter line where the kernel of the family's
    node-restriction map on the given spaces has dimension at least k;
    a zero generator means the condition holds everywhere."""
    m, _ = family_map(fam, spaces, w)
    return vanishing_locus(m, k)


def full_component_spaces(fam, w):
    """Bases of all component sections in multidegree w: per summand,
    the node divisor times the allowed powers of x."""
    w = fam.cfg.md(w)
    prof = fam._probe.t_profile(w)
    out = {}
    for v in fam.graph.vertex_ids:
        offs, width = _component_offsets(fam, v)
        vecs = []
        for j, c in enumerate(fam.splits[v]):
            div = Poly.one()
            for e in fam.graph.incident_edges(v):
                t = prof[(e.id, v)]
                p = fam.nodes[(e.id, v)]
                div = div * (Poly.x() - p) ** t
            for m in range(c - div.degree + 1):
                q = div * Poly.x() ** m
                vec = [Fraction(0)] * width
                for i, x in enumerate(q.coeffs):
                    vec[offs[j] + i] = x
                vecs.append(vec)
        out[v] = vecs
    return out


# ------------------------------------------- kernels over Q(t)

class _RatFunc:
    """Rational function in lowest terms with monic denominator."""

    __slots__ = ("num", "den")

    def __init__(self, num, den=None):
        num = _as_poly(num)
        den = Poly.one() if den is None else _as_poly(den)
        if den.is_zero():
            raise ZeroDivisionError("zero denominator")
        if num.is_zero():
            num, den = Poly.zero(), Poly.one()
        else:
            g = poly_gcd(num, den)
            num, den = num // g, den // g
            lead = den.coeffs[-1]
            if lead != 1:
                num = Poly([c / lead for c in num.coeffs])
                den = den.monic()
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)

    def __setattr__(self, *a):
        raise AttributeError("_RatFunc is immutable")

    def is_zero(self):
        return self.num.is_zero()

    def __add__(self, other):
        return _RatFunc(
            self.num * other.den + other.num * self.den,
            self.den * other.den,
        )

    def __sub__(self, other):
        return _RatFunc(
            self.num * other.den - other.num * self.den,
            self.den * other.den,
        )

    def __mul__(self, other):
        return _RatFunc(self.num * other.num, self.den * other.den)

    def __truediv__(self, other):
        if other.is_zero():
            raise ZeroDivisionError("division by the zero function")
        return _RatFunc(self.num * other.den, self.den * other.num)

    def __neg__(self):
        return _RatFunc(-self.num, self.den)


def _kernel_over_fractions(mat):
    """Kernel basis over the rational function field, cleared to
    polynomial vectors with no common factor."""
    rf = [[_RatFunc(x) for x in row] for row in mat.data]
    pivots = []
    r = 0
    for c in range(mat.cols):
        p = next(
            (i for i in range(r, len(rf)) if not rf[i][c].is_zero()),
            None,
        )
        if p is None:
            continue
        rf[r], rf[p] = rf[p], rf[r]
        inv = rf[r][c]
        rf[r] = [x / inv for x in rf[r]]
        for i in range(len(rf)):
            if i != r and not rf[i][c].is_zero():
                fac = rf[i][c]
                rf[i] = [a - fac * b for a, b in zip(rf[i], rf[r])]
        pivots.append(c)
        r += 1
        if r == len(rf):
            break
    piv = set(pivots)
    basis = []
    for free in range(mat.cols):
        if free in piv:
            continue
        vec = [_RatFunc(Poly.zero()) for _ in range(mat.cols)]
        vec[free] = _RatFunc(Poly.one())
        for i, c in enumerate(pivots):
            vec[c] = -rf[i][free]
        lcm = Poly.one()
        for x in vec:
            if not x.is_zero():
                lcm = lcm * (x.den // poly_gcd(lcm, x.den))
        cleared = [x.num * (lcm // x.den) for x in vec]
        g = Poly.zero()
        for q in cleared:
            g = poly_gcd(g, q)
        if not g.is_zero() and g != Poly.one():
            cleared = [q // g for q in cleared]
        basis.append(tuple(cleared))
    return basis


def family_kernel_basis(fam, spaces, w):
    """Kernel of the node-restriction map over Q(t), cleared and
    saturated to polynomial coordinate vectors."""
    m, _ = family_map(fam, spaces, w)
    return _kernel_over_fractions(m)


def subbundle_pointwise_check(fam, vectors, w, sample_points=None):
    """Whether a family of global sections stays injective into the
    section space at the generic point and at every sample value.

    The vectors must satisfy the divisibility and gluing conditions
    identically in the parameter; that they do is a precondition."""
    w = fam.cfg.md(w)
    if not is_vertex_GII(fam.cfg, w):
        raise ValueError("multidegree is not a graph vertex")
    if not in_bar_GII(fam.cfg, w):
        raise ValueError("multidegree outside the bounded window")
    probe = fam._probe
    vecs = []
    for raw in vectors:
        vec = tuple(_as_poly(x) for x in raw)
        if len(vec) != probe.ambient_dim:
            raise ValueError("vector has wrong length")
        vecs.append(vec)
    prof = probe.t_profile(w)
    for vec in vecs:
        for v in fam.graph.vertex_ids:
            for e in fam.graph.incident_edges(v):
                t = prof[(e.id, v)]
                p = fam.nodes[(e.id, v)]
                for j in range(fam.r):
                    start, stop = probe.block(v, j)
                    cs = list(vec[start:stop])
                    for _ in range(t):
                        cs, rem = _x_divmod(cs, p)
                        if not rem.is_zero():
                            raise ValueError(
                                "divisibility fails at (%s, %s)"
                                % (e.id, v)
                            )
        for e in fam.graph.edges:
            phi = fam.gluing(e.id)
            t_t, t_h = prof[(e.id, e.tail)], prof[(e.id, e.head)]
            p_t = fam.nodes[(e.id, e.tail)]
            p_h = fam.nodes[(e.id, e.head)]
            tail_vals = []
            for j in range(fam.r):
                start, stop = probe.block(e.tail, j)
                tail_vals.append(
                    _taylor_value(vec, start, stop - start, p_t, t_t)
                )
            for m in range(fam.r):
                start, stop = probe.block(e.head, m)
                head_val = _taylor_value(
                    vec, start, stop - start, p_h, t_h
                )
                acc = Poly.zero()
                for j in range(fam.r):
                    if not phi.data[m][j].is_zero():
                        acc = acc + phi.data[m][j] * tail_vals[j]
                if acc != head_val:
                    raise ValueError(
                        "gluing fails at %s in the family" % e.id
                    )
    n = len(vecs)
    if n == 0:
        return True
    if poly_rank(PolyMatrix(vecs, cols=probe.ambient_dim)) < n:
        return False
    pts = SAMPLE_POINTS if sample_points is None else sample_points
    for tau in pts:
        m = MatQ.from_rows(
            [[c.evaluate(tau) for c in vec] for vec in vecs],
            cols=probe.ambient_dim,
        )
        if m.rank() < n:
            return False
    return True
