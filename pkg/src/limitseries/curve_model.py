"""Concrete model of a vector bundle on a tree of rational curves.

Each component carries a split bundle, presented by its splitting
degrees; sections of a degree-c summand are polynomials of degree <= c
in a fixed affine chart, and all nodes sit at finite, pairwise distinct
chart coordinates.  A single invertible matrix per edge glues node
fibers in every multidegree at once: a section in multidegree w is
divisible by (x - p)^t at a node with twist value t >= 0, and the glued
value is the degree-t Taylor coefficient there.

Twisting down at a component is modelled by the normalization that kills
the section on that component and keeps it unchanged elsewhere; all the
scalar choices this leaves open are considered absorbed into the gluing
matrices.
"""

from fractions import Fraction
from math import comb

from .degree_graph import (
    in_bar_GII,
    is_vertex_GII,
    step_II,
    t_value,
)
from .exactlinalg import MatQ, Poly, Subspace


class CurveBundle:
    """Split bundle data: degrees, node coordinates, gluing matrices.

    Parameters
    ----------
    cfg : DegreeConfig
    splits : mapping vertex id -> sequence of r integers summing to dv
    nodes : mapping (edge id, vertex id) -> rational chart coordinate
    gluings : mapping edge id -> r x r invertible matrix (rows or MatQ)
    """

    def __init__(self, cfg, splits, nodes, gluings):
        graph = cfg.graph
        r = cfg.r
        if set(splits) != set(graph.vertex_ids):
            raise ValueError("split keys do not match vertex ids")
        self.splits = {}
        for v in graph.vertex_ids:
            parts = tuple(int(c) for c in splits[v])
            if len(parts) != r:
                raise ValueError("need %d split degrees at %r" % (r, v))
            if sum(parts) != cfg.dv[v]:
                raise ValueError("split degrees at %r do not sum to dv" % v)
            self.splits[v] = parts
        want = {(e.id, v) for e in graph.edges for v in (e.tail, e.head)}
        if set(nodes) != want:
            raise ValueError("node coordinates must cover every edge end")
        self.nodes = {kk: Fraction(nodes[kk]) for kk in nodes}
        for v in graph.vertex_ids:
            coords = [self.nodes[(e.id, v)] for e in graph.incident_edges(v)]
            if len(set(coords)) != len(coords):
                raise ValueError("node coordinates collide on %r" % v)
        if set(gluings) != {e.id for e in graph.edges}:
            raise ValueError("gluing keys do not match edge ids")
        self.gluings = {}
        for eid in gluings:
            m = gluings[eid]
            if not isinstance(m, MatQ):
                m = MatQ.from_rows(m, cols=r)
            if m.rows != r or m.cols != r or m.rank() != r:
                raise ValueError("gluing at %r is not invertible r x r" % eid)
            self.gluings[eid] = m
        self.cfg = cfg
        self.graph = graph
        self.r = r
        offsets = {}
        pos = 0
        for v in graph.vertex_ids:
            for j in range(r):
                ln = max(0, self.splits[v][j] + 1)
                offsets[(v, j)] = (pos, pos + ln)
                pos += ln
        self._offsets = offsets
        self.ambient_dim = pos

    def node(self, eid, v):
        return self.nodes[(eid, v)]

    def gluing(self, eid):
        return self.gluings[eid]

    def block(self, v, j):
        return self._offsets[(v, j)]

    def euler_characteristic(self):
        total = sum(c + 1 for v in self.splits for c in self.splits[v])
        return total - self.r * len(self.graph.edges)

    def t_profile(self, w):
        out = {}
        for e in self.graph.edges:
            for v in (e.tail, e.head):
                out[(e.id, v)] = t_value(self.cfg, w, e.id, v)
        return out

    def _taylor_row(self, v, j, p, m):
        """Functional q |-> coefficient of (x-p)^m in q, as an ambient
        row vector supported on the (v, j) block."""
        row = [Fraction(0)] * self.ambient_dim
        start, stop = self.block(v, j)
        for i in range(stop - start):
            if i >= m:
                row[start + i] = Fraction(comb(i, m)) * (Fraction(p) ** (i - m))
        return row


def _diveval(q, p, t):
    """Value of q / (x-p)^t at p (0 whenever t < 0)."""
    if t < 0:
        return Fraction(0)
    quot, rem = divmod(q, (Poly.x() - p) ** t)
    if not rem.is_zero():
        raise ValueError("section not divisible at node")
    return quot.evaluate(p)


class SectionTuple:
    """Per-component polynomial vectors forming a global section in a
    fixed multidegree; all invariants are checked on construction."""

    def __init__(self, bundle, w, polys, validate=True):
        self.bundle = bundle
        self.w = bundle.cfg.md(w)
        norm = {}
        for v in bundle.graph.vertex_ids:
            if v not in polys:
                raise ValueError("missing component %r" % v)
            qs = tuple(
                q if isinstance(q, Poly) else Poly(q) for q in polys[v]
            )
            if len(qs) != bundle.r:
                raise ValueError("need %d polynomials at %r" % (bundle.r, v))
            norm[v] = qs
        self.polys = norm
        if validate:
            self._validate()

    def _validate(self):
        bundle = self.bundle
        if not is_vertex_GII(bundle.cfg, self.w):
            raise ValueError("multidegree is not a graph vertex")
        prof = bundle.t_profile(self.w)
        for v in bundle.graph.vertex_ids:
            for j, q in enumerate(self.polys[v]):
                if q.degree > bundle.splits[v][j]:
                    raise ValueError("degree bound exceeded at %r" % v)
        for e in bundle.graph.edges:
            for v in (e.tail, e.head):
                t = prof[(e.id, v)]
                if t > 0:
                    p = bundle.node(e.id, v)
                    div = (Poly.x() - p) ** t
                    for q in self.polys[v]:
                        if not (q % div).is_zero():
                            raise ValueError(
                                "divisibility fails at (%s, %s)" % (e.id, v)
                            )
        for e in bundle.graph.edges:
            tail_val = self.node_values(e.id, e.tail, prof)
            head_val = self.node_values(e.id, e.head, prof)
            glued = bundle.gluing(e.id).apply(tail_val)
            if tuple(glued) != tuple(head_val):
                raise ValueError("gluing fails at %s" % e.id)

    def node_values(self, eid, v, prof=None):
        if prof is None:
            prof = self.bundle.t_profile(self.w)
        p = self.bundle.node(eid, v)
        t = prof[(eid, v)]
        return tuple(_diveval(q, p, t) for q in self.polys[v])

    def vector(self):
        out = [Fraction(0)] * self.bundle.ambient_dim
        for v in self.bundle.graph.vertex_ids:
            for j, q in enumerate(self.polys[v]):
                start, stop = self.bundle.block(v, j)
                for i, c in enumerate(q.coeffs):
                    if i >= stop - start:
                        raise ValueError("degree bound exceeded")
                    out[start + i] = c
        return tuple(out)

    @classmethod
    def from_vector(cls, bundle, w, vec, validate=True):
        if len(vec) != bundle.ambient_dim:
            raise ValueError("vector has wrong length")
        polys = {}
        for v in bundle.graph.vertex_ids:
            qs = []
            for j in range(bundle.r):
                start, stop = bundle.block(v, j)
                qs.append(Poly(vec[start:stop]))
            polys[v] = tuple(qs)
        return cls(bundle, w, polys, validate=validate)

    def is_zero(self):
        return all(
            q.is_zero() for v in self.polys for q in self.polys[v]
        )


def global_sections(bundle, w):
    """Canonical basis of the space of sections in multidegree w.

    Only defined inside the bounded twist window; kernel of the stacked
    divisibility and gluing conditions on the coefficient space.
    """
    w = bundle.cfg.md(w)
    if not is_vertex_GII(bundle.cfg, w):
        raise ValueError("multidegree is not a graph vertex")
    if not in_bar_GII(bundle.cfg, w):
        raise ValueError("multidegree outside the bounded window")
    prof = bundle.t_profile(w)
    rows = []
    for v in bundle.graph.vertex_ids:
        for e in bundle.graph.incident_edges(v):
            t = prof[(e.id, v)]
            p = bundle.node(e.id, v)
            for j in range(bundle.r):
                for m in range(t):
                    rows.append(bundle._taylor_row(v, j, p, m))
    for e in bundle.graph.edges:
        phi = bundle.gluing(e.id)
        t_t = prof[(e.id, e.tail)]
        t_h = prof[(e.id, e.head)]
        p_t = bundle.node(e.id, e.tail)
        p_h = bundle.node(e.id, e.head)
        for m in range(bundle.r):
            row = [Fraction(0)] * bundle.ambient_dim
            for j in range(bundle.r):
                c = phi.data[m][j]
                if c:
                    for i, x in enumerate(
                        bundle._taylor_row(e.tail, j, p_t, t_t)
                    ):
                        row[i] += c * x
            for i, x in enumerate(
                bundle._taylor_row(e.head, m, p_h, t_h)
            ):
                row[i] -= x
            rows.append(row)
    if not rows:
        return Subspace.full(bundle.ambient_dim)
    return MatQ.from_rows(rows, cols=bundle.ambient_dim).kernel()


def apply_twist(bundle, s, v0):
    """One elementary move at v0: the section dies on that component and
    is carried along unchanged everywhere else."""
    w2 = step_II(bundle.cfg, s.w, v0)
    polys = dict(s.polys)
    polys[v0] = tuple(Poly.zero() for _ in range(bundle.r))
    return SectionTuple(bundle, w2, polys)


def apply_path(bundle, s, vertices):
    for v in vertices:
        s = apply_twist(bundle, s, v)
    return s


def apply_step_I(bundle, s, eid, v):
    """Restricted move across an edge, realized as the move sequence
    over the whole component on the decreasing side."""
    far = bundle.graph.far_side(eid, v)
    comp = sorted(u for u in bundle.graph.vertex_ids if u not in far)
    return apply_path(bundle, s, comp)


def path_image(bundle, sub, w, vertices):
    vecs = []
    for b in sub.basis:
        s = SectionTuple.from_vector(bundle, w, b)
        vecs.append(apply_path(bundle, s, vertices).vector())
    return Subspace.from_vectors(bundle.ambient_dim, vecs)


def node_fiber_value(bundle, s, eid, v):
    return s.node_values(eid, v)


def section_order_at(bundle, s, v, point):
    orders = [q.order_at(point) for q in s.polys[v]]
    orders = [o for o in orders if o is not None]
    return min(orders) if orders else None


def condition_I_holds(bundle):
    """Every splitting degree bounded by b, so that twisting down b+1
    times at any single node leaves no sections; vacuous without nodes."""
    if not bundle.graph.edges:
        return True
    return all(
        c <= bundle.cfg.b for v in bundle.splits for c in bundle.splits[v]
    )


def restriction_injective(bundle, w, v):
    """No global section in multidegree w dies on component v."""
    sub = global_sections(bundle, w)
    rows = []
    for j in range(bundle.r):
        start, stop = bundle.block(v, j)
        for i in range(start, stop):
            row = [Fraction(0)] * bundle.ambient_dim
            row[i] = Fraction(1)
            rows.append(row)
    if not rows:
        return sub.dim == 0
    coker = MatQ.from_rows(rows, cols=bundle.ambient_dim).kernel()
    return sub.intersect(coker).dim == 0


def determinant_data(bundle):
    """Rank-1 bundle with the top exterior degrees and gluing scalars."""
    from .degree_graph import DegreeConfig
    from .exactlinalg import det

    graph = bundle.graph
    dv = {v: sum(bundle.splits[v]) for v in graph.vertex_ids}
    cfg = DegreeConfig(
        graph, r=1, d=sum(dv.values()), k=1, b=0, dv=dv
    )
    gluings = {
        e.id: [[det([list(r) for r in bundle.gluing(e.id).data])]]
        for e in graph.edges
    }
    return CurveBundle(cfg, {v: (dv[v],) for v in dv}, bundle.nodes, gluings)


def same_determinant_class(b1, b2):
    """Rank-1 bundles agree after an independent unit rescale on each
    component.  On a tree the scalar part can always be normalized away,
    so this amounts to matching multidegrees; the potential propagation
    is still carried out and re-checked edge by edge."""
    if b1.r != 1 or b2.r != 1:
        raise ValueError("determinant comparison needs rank-1 data")
    if b1.graph.vertex_ids != b2.graph.vertex_ids:
        return False
    if {v: sum(b1.splits[v]) for v in b1.splits} != {
        v: sum(b2.splits[v]) for v in b2.splits
    }:
        return False
    lam = {b1.graph.vertex_ids[0]: Fraction(1)}
    pending = list(b1.graph.edges)
    while pending:
        progressed = False
        for e in list(pending):
            s1 = b1.gluing(e.id).data[0][0]
            s2 = b2.gluing(e.id).data[0][0]
            if e.tail in lam and e.head in lam:
                if lam[e.tail] * s1 != lam[e.head] * s2:
                    return False
                pending.remove(e)
                progressed = True
            elif e.tail in lam:
                lam[e.head] = lam[e.tail] * s1 / s2
                pending.remove(e)
                progressed = True
            elif e.head in lam:
                lam[e.tail] = lam[e.head] * s2 / s1
                pending.remove(e)
                progressed = True
        if not progressed:
            raise RuntimeError("disconnected gluing data")
    return True


def stability_inequality(bundle, subsheaf_data, polarization=None,
                         l_mode=False):
    """Compare the subsheaf slope against the full slope.

    Returns "stable", "semistable-boundary" or "violating" according to
    whether the subsheaf slope is below, at or above the total slope.
    The caller supplies per-component ranks and the Euler characteristic
    of the subsheaf; enumeration of subsheaves is out of scope.
    """
    ranks = subsheaf_data["ranks"]
    chi_f = Fraction(subsheaf_data["chi"])
    if set(ranks) != set(bundle.graph.vertex_ids):
        raise ValueError("subsheaf ranks must cover every component")
    chi_e = Fraction(bundle.euler_characteristic())
    if polarization is None and not l_mode:
        raise ValueError("choose a polarization or the constant-rank mode")
    if polarization is not None:
        if set(polarization) != set(bundle.graph.vertex_ids):
            raise ValueError("polarization must weight every component")
        weights = {v: Fraction(polarization[v]) for v in polarization}
        if sum(weights.values()) != 1:
            raise ValueError("polarization weights must sum to 1")
        denom_f = sum(weights[v] * ranks[v] for v in weights)
    else:
        vals = set(ranks.values())
        if len(vals) != 1:
            raise ValueError("constant-rank mode needs constant rank")
        denom_f = Fraction(vals.pop())
    if denom_f == 0:
        raise ValueError("zero subsheaf rank")
    mu_f = chi_f / denom_f
    mu_e = chi_e / bundle.r
    if mu_f > mu_e:
        return "violating"
    if mu_f == mu_e:
        return "semistable-boundary"
    return "stable"
