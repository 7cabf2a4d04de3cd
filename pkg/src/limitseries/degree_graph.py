"""Multidegree combinatorics on the dual graph of a nodal curve of
compact type.

A configuration fixes a tree with per-vertex genus labels, a rank ``r``,
total degree ``d``, section count ``k``, a twisting parameter ``b`` and a
degree ``dv[v]`` for each vertex, subject to

    sum(dv) - #edges * r * b == d.

Multidegrees are integer tuples indexed by the sorted vertex ids.  Two
directed graphs live on top of them: a restricted one whose vertices
concentrate all excess degree on at most two adjacent components, and an
unrestricted one connected by elementary moves at single vertices.  The
bounded window of the unrestricted graph (twist values between 0 and b on
both sides of every edge) is finite and is the region where section
spaces of the twisted bundles are computed directly.
"""

from fractions import Fraction


class CongruenceError(ValueError):
    """Raised when a multidegree breaks the residue pattern mod r."""


class Edge:
    __slots__ = ("id", "tail", "head")

    def __init__(self, id, tail, head):
        self.id = id
        self.tail = tail
        self.head = head

    def other(self, v):
        if v == self.tail:
            return self.head
        if v == self.head:
            return self.tail
        raise ValueError("vertex %r not on edge %r" % (v, self.id))

    def __repr__(self):
        return "Edge(%r, %r, %r)" % (self.id, self.tail, self.head)


class DualGraph:
    """Tree with string vertex ids, genus labels and directed edge ids.

    Parameters
    ----------
    vertices : iterable of (id, genus)
    edges : iterable of (id, tail, head)

    The edge direction is combinatorially irrelevant but fixes, once and
    for all, which gluing matrix direction is stored for each node.
    Vertex ids are sorted lexicographically and all positional encodings
    (multidegree tuples in particular) follow that order.
    """

    def __init__(self, vertices, edges):
        genus = {}
        for vid, g in vertices:
            if vid in genus:
                raise ValueError("duplicate vertex id %r" % vid)
            if g < 0:
                raise ValueError("negative genus at %r" % vid)
            genus[vid] = int(g)
        self.genus = genus
        self.vertex_ids = tuple(sorted(genus))
        self._index = {v: i for i, v in enumerate(self.vertex_ids)}
        es = []
        seen = set()
        for eid, tail, head in edges:
            if eid in seen:
                raise ValueError("duplicate edge id %r" % eid)
            seen.add(eid)
            if tail not in genus or head not in genus:
                raise ValueError("edge %r touches unknown vertex" % eid)
            if tail == head:
                raise ValueError("loop edge %r" % eid)
            es.append(Edge(eid, tail, head))
        self.edges = tuple(sorted(es, key=lambda e: e.id))
        self._edge_by_id = {e.id: e for e in self.edges}
        if len(self.edges) != len(self.vertex_ids) - 1:
            raise ValueError("graph is not a tree")
        if self.vertex_ids and not self._connected():
            raise ValueError("graph is not connected")

    def _connected(self):
        seen = {self.vertex_ids[0]}
        stack = [self.vertex_ids[0]]
        while stack:
            v = stack.pop()
            for e in self.edges:
                if v in (e.tail, e.head):
                    u = e.other(v)
                    if u not in seen:
                        seen.add(u)
                        stack.append(u)
        return len(seen) == len(self.vertex_ids)

    def index(self, v):
        return self._index[v]

    def edge(self, eid):
        return self._edge_by_id[eid]

    def incident_edges(self, v):
        return [e for e in self.edges if v in (e.tail, e.head)]

    def neighbors(self, v):
        return sorted(e.other(v) for e in self.incident_edges(v))

    def valence(self, v):
        return len(self.incident_edges(v))

    def far_side(self, eid, v):
        """Vertex ids not in v's component after removing the edge."""
        e = self.edge(eid)
        u = e.other(v)
        seen = {u}
        stack = [u]
        while stack:
            x = stack.pop()
            for f in self.incident_edges(x):
                if f.id == eid:
                    continue
                y = f.other(x)
                if y not in seen:
                    seen.add(y)
                    stack.append(y)
        return frozenset(seen)

    def total_genus(self):
        # compact type: no cycles contribute
        return sum(self.genus.values())


class Multidegree(tuple):
    def as_dict(self, graph):
        return {v: self[i] for i, v in enumerate(graph.vertex_ids)}

    @classmethod
    def from_dict(cls, graph, values):
        if set(values) != set(graph.vertex_ids):
            raise ValueError("multidegree keys do not match vertex ids")
        return cls(int(values[v]) for v in graph.vertex_ids)


class DegreeConfig:
    """Numerical setup: graph plus (r, d, k, b, dv)."""

    def __init__(self, graph, r, d, k, b, dv):
        if r < 1 or k < 1 or b < 0:
            raise ValueError("need r >= 1, k >= 1, b >= 0")
        if set(dv) != set(graph.vertex_ids):
            raise ValueError("dv keys do not match vertex ids")
        total = sum(dv.values()) - len(graph.edges) * r * b
        if total != d:
            raise ValueError(
                "degree mismatch: sum(dv) - #E*r*b = %d != d = %d"
                % (total, d)
            )
        self.graph = graph
        self.r = r
        self.d = d
        self.k = k
        self.b = b
        self.dv = {v: int(dv[v]) for v in graph.vertex_ids}

    def md(self, values):
        if isinstance(values, dict):
            return Multidegree.from_dict(self.graph, values)
        return Multidegree(values)


def _check_shape(cfg, w):
    if len(w) != len(cfg.graph.vertex_ids):
        raise ValueError("multidegree has wrong length")


def is_vertex_GII(cfg, w):
    _check_shape(cfg, w)
    if sum(w) != cfg.d:
        return False
    return all(
        (w[i] - cfg.dv[v]) % cfg.r == 0
        for i, v in enumerate(cfg.graph.vertex_ids)
    )


def is_vertex_GI(cfg, w):
    if not is_vertex_GII(cfg, w):
        return False
    floor = {v: cfg.dv[v] - cfg.r * cfg.b for v in cfg.graph.vertex_ids}
    strict = []
    for i, v in enumerate(cfg.graph.vertex_ids):
        if w[i] < floor[v]:
            return False
        if w[i] > floor[v]:
            strict.append(v)
    if len(strict) > 2:
        return False
    if len(strict) == 2:
        u, v = strict
        return v in cfg.graph.neighbors(u)
    return True


def t_value(cfg, w, eid, v):
    """Twist applied on v's side of the given edge to reach w.

    Integer by construction for multidegrees with the right residues;
    anything else raises CongruenceError.
    """
    _check_shape(cfg, w)
    far = cfg.graph.far_side(eid, v)
    acc = Fraction(len(far) * cfg.b)
    for u in far:
        acc -= Fraction(cfg.dv[u] - w[cfg.graph.index(u)], cfg.r)
    if acc.denominator != 1:
        raise CongruenceError(
            "twist at (%s, %s) is not integral" % (eid, v)
        )
    return int(acc)


def in_bar_GII(cfg, w):
    if not is_vertex_GII(cfg, w):
        return False
    for e in cfg.graph.edges:
        # both sides bounded by b forces both nonnegative as well
        if not 0 <= t_value(cfg, w, e.id, e.tail) <= cfg.b:
            return False
    return True


def md_from_twists(cfg, tail_twists):
    """Multidegree with prescribed twist value on the tail side of each
    edge (the head side is then b minus that)."""
    vals = []
    for v in cfg.graph.vertex_ids:
        s = 0
        for e in cfg.graph.incident_edges(v):
            t = tail_twists[e.id]
            s += t if v == e.tail else cfg.b - t
        vals.append(cfg.dv[v] - cfg.r * s)
    return Multidegree(vals)


def enumerate_bar_GII(cfg):
    """All multidegrees in the bounded window, sorted lexicographically.

    There are (b+1)^#edges of them: one for each choice of tail-side
    twist in 0..b per edge.
    """
    eids = [e.id for e in cfg.graph.edges]
    out = []

    def rec(i, assignment):
        if i == len(eids):
            out.append(md_from_twists(cfg, assignment))
            return
        for t in range(cfg.b + 1):
            assignment[eids[i]] = t
            rec(i + 1, assignment)

    rec(0, {})
    out.sort()
    return out


def extremal_vertex(cfg, v):
    """Multidegree with everything minimal except at v."""
    vals = [cfg.dv[u] - cfg.r * cfg.b for u in cfg.graph.vertex_ids]
    vals[cfg.graph.index(v)] = cfg.dv[v]
    return Multidegree(vals)


def enumerate_GI(cfg):
    """All multidegrees of the restricted graph, sorted.

    The total excess over the floors equals r*b on a tree, carried by a
    single vertex or split r*j / r*(b-j) over one edge.
    """
    found = {extremal_vertex(cfg, v) for v in cfg.graph.vertex_ids}
    for e in cfg.graph.edges:
        for j in range(1, cfg.b):
            vals = [cfg.dv[u] - cfg.r * cfg.b for u in cfg.graph.vertex_ids]
            vals[cfg.graph.index(e.tail)] = cfg.dv[e.tail] - cfg.r * j
            vals[cfg.graph.index(e.head)] = cfg.dv[e.head] - cfg.r * (
                cfg.b - j
            )
            found.add(Multidegree(vals))
    for w in found:
        assert is_vertex_GI(cfg, w)
    return sorted(found)


def step_II(cfg, w, v):
    """One elementary move at v: drop r*valence(v) there, raise r at
    each neighbor."""
    _check_shape(cfg, w)
    vals = list(w)
    vals[cfg.graph.index(v)] -= cfg.r * cfg.graph.valence(v)
    for u in cfg.graph.neighbors(v):
        vals[cfg.graph.index(u)] += cfg.r
    return Multidegree(vals)


def step_I(cfg, w, eid, v):
    """One restricted move: r flows across the edge away from v."""
    e = cfg.graph.edge(eid)
    vals = list(w)
    vals[cfg.graph.index(v)] -= cfg.r
    vals[cfg.graph.index(e.other(v))] += cfg.r
    return Multidegree(vals)


class PathII:
    """Sequence of elementary moves, validated eagerly."""

    def __init__(self, cfg, start, vertices):
        if not is_vertex_GII(cfg, start):
            raise ValueError("start is not a multidegree vertex")
        self.cfg = cfg
        self.start = cfg.md(start)
        self.vertices = list(vertices)
        w = self.start
        self._inter = [w]
        for v in self.vertices:
            if v not in cfg.graph.genus:
                raise ValueError("unknown vertex %r" % v)
            w = step_II(cfg, w, v)
            self._inter.append(w)

    def endpoint(self):
        return self._inter[-1]

    def intermediates(self):
        return list(self._inter)

    def multiset(self):
        out = {}
        for v in self.vertices:
            out[v] = out.get(v, 0) + 1
        return out


class PathI:
    """Sequence of restricted moves; every stop must satisfy the
    restricted-graph conditions."""

    def __init__(self, cfg, start, pairs):
        if not is_vertex_GI(cfg, start):
            raise ValueError("start is not a restricted-graph vertex")
        self.cfg = cfg
        self.start = cfg.md(start)
        self.pairs = [(e, v) for e, v in pairs]
        w = self.start
        self._inter = [w]
        for eid, v in self.pairs:
            w = step_I(cfg, w, eid, v)
            if not is_vertex_GI(cfg, w):
                raise ValueError(
                    "step (%s, %s) leaves the restricted graph" % (eid, v)
                )
            self._inter.append(w)

    def endpoint(self):
        return self._inter[-1]

    def intermediates(self):
        return list(self._inter)


def minimal_path_II(cfg, w, w2):
    """Vertex multiset of the minimal move sequence from w to w2.

    Unique once normalized so that some vertex is unused.  Computed by
    propagating net flows over the tree: for each edge, the difference
    of multiplicities across it is the total coordinate change on one
    side, in units of r.
    """
    _check_shape(cfg, w)
    _check_shape(cfg, w2)
    if not (is_vertex_GII(cfg, w) and is_vertex_GII(cfg, w2)):
        raise ValueError("endpoints must be multidegree vertices")
    delta = {}
    for i, v in enumerate(cfg.graph.vertex_ids):
        q = Fraction(w2[i] - w[i], cfg.r)
        if q.denominator != 1:
            raise CongruenceError("difference not divisible by r")
        delta[v] = int(q)
    root = cfg.graph.vertex_ids[0]
    n = {root: 0}
    stack = [root]
    seen = {root}
    while stack:
        u = stack.pop()
        for e in cfg.graph.incident_edges(u):
            x = e.other(u)
            if x in seen:
                continue
            # multiplicity difference across e equals the net outflow
            # from u's side
            side = cfg.graph.far_side(e.id, x)
            n[x] = n[u] + sum(delta[y] for y in side)
            seen.add(x)
            stack.append(x)
    shift = min(n.values())
    out = {v: n[v] - shift for v in n if n[v] != shift}
    # confirm the multiset actually lands on w2
    verts = [v for v in sorted(out) for _ in range(out[v])]
    assert PathII(cfg, w, verts).endpoint() == w2
    return out


def reorder_path_within_bar(cfg, path):
    """Rearrange a move sequence so every stop stays in the bounded
    window.  Requires both endpoints inside; a safe next vertex always
    exists then, and the lexicographically first one is taken."""
    if not in_bar_GII(cfg, path.start):
        raise ValueError("start outside the bounded window")
    if not in_bar_GII(cfg, path.endpoint()):
        raise ValueError("endpoint outside the bounded window")
    remaining = path.multiset()
    w = path.start
    order = []
    while any(remaining.values()):
        for v in sorted(v for v in remaining if remaining[v]):
            if in_bar_GII(cfg, step_II(cfg, w, v)):
                break
        else:
            raise RuntimeError("no admissible reordering step")
        w = step_II(cfg, w, v)
        remaining[v] -= 1
        order.append(v)
    return PathII(cfg, path.start, order)


def rho(g, r, d, k):
    """Expected dimension 1 + r^2(g-1) - k(k - d + r(g-1))."""
    return 1 + r * r * (g - 1) - k * (k - d + r * (g - 1))


def rho_minus_1(g, r, d, k):
    return rho(g, r, d, k) - 1


def rho_minus_g(g, r, d, k):
    return rho(g, r, d, k) - g
