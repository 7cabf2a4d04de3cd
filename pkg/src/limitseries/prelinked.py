"""Compatible families of subspaces indexed by a directed graph.

One rank-d rational vector space per vertex, one d-by-d matrix per
edge, subject to the scalar-compatibility of path compositions: any
two directed paths with common endpoints compose to proportional
matrices, with an invertible ratio against a minimal path.  Points are
tuples of equidimensional subspaces carried into each other by the
edge maps; the simple ones admit a single set of generators whose
transports form bases everywhere, and at those the deformation count
matches the plain Grassmannian.
"""

from fractions import Fraction

from .exactlinalg import MatQ, Subspace, solve
from .series import SearchResult, _witness_grid


class PLEdge:
    __slots__ = ("id", "tail", "head", "matrix")

    def __init__(self, eid, tail, head, matrix):
        self.id = eid
        self.tail = tail
        self.head = head
        self.matrix = matrix

    def __repr__(self):
        return "PLEdge(%r, %r -> %r)" % (self.id, self.tail, self.head)


def _as_matrix(rows, dim):
    if isinstance(rows, MatQ):
        m = rows
    else:
        m = MatQ.from_rows([list(r) for r in rows], cols=dim)
    if m.rows != dim or m.cols != dim:
        raise ValueError("edge matrix must be %d x %d" % (dim, dim))
    return m


class PrelinkedData:
    """Directed graph (cycles allowed) with one matrix per edge.

    Validates shapes and that every ordered vertex pair is joined by a
    directed path in at least one direction; the scalar-compatibility
    condition is checked separately by check_condition_I, up to a path
    length bound.
    """

    def __init__(self, dim, vertices, edges):
        self.dim = int(dim)
        if self.dim <= 0:
            raise ValueError("dimension must be positive")
        ids = [v for v in vertices]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate vertex id")
        self.vertex_ids = tuple(sorted(ids))
        out = []
        seen = set()
        for eid, tail, head, rows in edges:
            if eid in seen:
                raise ValueError("duplicate edge id %r" % eid)
            seen.add(eid)
            if tail not in self.vertex_ids or head not in self.vertex_ids:
                raise ValueError("edge %r has unknown endpoint" % eid)
            out.append(PLEdge(eid, tail, head, _as_matrix(rows, self.dim)))
        self.edges = tuple(out)
        self._out = {v: [] for v in self.vertex_ids}
        for e in self.edges:
            self._out[e.tail].append(e)
        reach = self._reachability()
        for u in self.vertex_ids:
            for v in self.vertex_ids:
                if v not in reach[u] and u not in reach[v]:
                    raise ValueError(
                        "no directed path joins %r and %r" % (u, v)
                    )
        self._reach = reach

    def edges_from(self, v):
        return tuple(self._out[v])

    def edge(self, eid):
        for e in self.edges:
            if e.id == eid:
                return e
        raise KeyError(eid)

    def _reachability(self):
        reach = {}
        for u in self.vertex_ids:
            seen = {u}
            stack = [u]
            while stack:
                x = stack.pop()
                for e in self._out[x]:
                    if e.head not in seen:
                        seen.add(e.head)
                        stack.append(e.head)
            reach[u] = seen
        return reach

    def reaches_all(self, u):
        return self._reach[u] == set(self.vertex_ids)


class PrelinkedPoint:
    """One subspace per vertex, all of the same dimension."""

    def __init__(self, data, spaces):
        if set(spaces) != set(data.vertex_ids):
            raise ValueError("space keys do not match vertex ids")
        norm = {}
        rank = None
        for v in data.vertex_ids:
            sub = spaces[v]
            if not isinstance(sub, Subspace):
                sub = Subspace.from_vectors(
                    data.dim, [list(x) for x in sub]
                )
            if sub.ambient_dim != data.dim:
                raise ValueError("space at %r has wrong ambient" % v)
            if rank is None:
                rank = sub.dim
            elif sub.dim != rank:
                raise ValueError("subspace dimensions differ")
            norm[v] = sub
        self.data = data
        self.spaces = norm
        self.rank = rank

    def space(self, v):
        return self.spaces[v]


def _as_point(data, point):
    if isinstance(point, PrelinkedPoint):
        return point
    return PrelinkedPoint(data, point)


# ------------------------------------------------------- compatibility

def _normalize(m):
    """Scale so the first nonzero entry is 1; None for the zero matrix."""
    for row in m.data:
        for x in row:
            if x:
                return m.scale(Fraction(1, 1) / x)
    return None


def _is_multiple(m, base):
    """Whether m = c * base for some scalar c (possibly zero)."""
    nm = _normalize(m)
    if nm is None:
        return True
    nb = _normalize(base)
    if nb is None:
        return False
    return nm.data == nb.data


def longest_simple_cycle(data):
    """Length of the longest directed cycle without repeated vertices
    (0 when the graph is acyclic)."""
    best = 0

    def walk(start, current, used, length):
        nonlocal best
        for e in data.edges_from(current):
            if e.head == start:
                best = max(best, length + 1)
            elif e.head not in used:
                used.add(e.head)
                walk(start, e.head, used, length + 1)
                used.remove(e.head)

    for v in data.vertex_ids:
        walk(v, v, {v}, 0)
    return best


def check_condition_I(data, max_path_len=None):
    """Scalar compatibility of all path compositions up to a length
    bound (default twice the vertex count plus the longest simple
    cycle); the verdict certifies only paths within the bound.

    Every walk is compared against a fixed minimal-length walk with the
    same endpoints: equal-length comparisons demand a nonzero ratio,
    longer walks need only be scalar multiples of the minimal one.
    """
    if max_path_len is None:
        max_path_len = 2 * len(data.vertex_ids) + longest_simple_cycle(data)
    ident = MatQ.identity(data.dim)
    canonical = {(v, v): ident for v in data.vertex_ids}
    # classes[(start, end)] = distinct walk maps up to scalar, this length
    classes = {(v, v): [ident] for v in data.vertex_ids}
    for _ in range(max_path_len):
        nxt = {}
        for (u, w), mats in classes.items():
            for e in data.edges_from(w):
                for m in mats:
                    nxt.setdefault((u, e.head), []).append(e.matrix * m)
        classes = {}
        for key, mats in nxt.items():
            if key not in canonical:
                base = mats[0]
                canonical[key] = base
                for m in mats[1:]:
                    # both walks minimal: ratio must be invertible
                    nm, nb = _normalize(m), _normalize(base)
                    if (nm is None) != (nb is None):
                        return False
                    if nm is not None and nm.data != nb.data:
                        return False
            else:
                for m in mats:
                    if not _is_multiple(m, canonical[key]):
                        return False
            kept = []
            for m in mats:
                nm = _normalize(m)
                form = None if nm is None else nm.data
                if all(
                    form != (None if _normalize(x) is None
                             else _normalize(x).data)
                    for x in kept
                ):
                    kept.append(m)
            classes[key] = kept
    return True


# ------------------------------------------------------------- points

def is_linked_point(data, point):
    """Every edge map carries the tail subspace into the head one."""
    point = _as_point(data, point)
    for e in data.edges:
        img = e.matrix.image_of(point.space(e.tail))
        if not point.space(e.head).contains_subspace(img):
            return False
    return True


def edge_images(data, point, v):
    """Images of the incoming edge maps inside the space at v."""
    point = _as_point(data, point)
    return {
        e.id: e.matrix.image_of(point.space(e.tail))
        for e in data.edges
        if e.head == v
    }


def _minimal_map(data, u, v):
    """Matrix of one shortest directed walk from u to v, None when no
    walk exists; by scalar compatibility the choice only matters up to
    an invertible factor."""
    if u == v:
        return MatQ.identity(data.dim)
    frontier = {u: MatQ.identity(data.dim)}
    seen = {u}
    while frontier:
        nxt = {}
        for w, m in frontier.items():
            for e in data.edges_from(w):
                if e.head in seen or e.head in nxt:
                    continue
                nxt[e.head] = e.matrix * m
        if v in nxt:
            return nxt[v]
        seen.update(nxt)
        frontier = nxt
    return None


def is_simple_point(data, point, budget=None):
    """Search for generators s_1..s_r, each at a vertex reaching the
    whole graph, whose minimal-walk transports form a basis at every
    vertex.  Exhaustive for ranks up to two, budgeted beyond."""
    point = _as_point(data, point)
    if not is_linked_point(data, point):
        raise ValueError("point is not linked")
    r = point.rank
    if r == 0:
        return SearchResult("witnessed", {"vertices": [], "vectors": []})
    sources = [u for u in data.vertex_ids if data.reaches_all(u)]
    if not sources:
        return SearchResult("proven-false")
    coords = {}
    for u in sources:
        for v in data.vertex_ids:
            m = _minimal_map(data, u, v)
            target = point.space(v).matrix().transpose()
            cs = []
            for bv in point.space(u).basis:
                lam = solve(target, m.apply(bv))
                if lam is None:
                    raise RuntimeError("transport leaves the point")
                cs.append(list(lam))
            coords[(u, v)] = cs
    if budget is None and r > 2:
        budget = 20000
    found, complete = _witness_grid(
        sources, coords, list(data.vertex_ids), r, budget
    )
    if found is not None:
        tup, assign = found
        vectors = []
        for i in range(r):
            vec = [Fraction(0)] * data.dim
            for c, bv in zip(
                assign[i * r:(i + 1) * r], point.space(tup[i]).basis
            ):
                if c:
                    vec = [a + c * x for a, x in zip(vec, bv)]
            vectors.append(tuple(vec))
        return SearchResult(
            "witnessed", {"vertices": list(tup), "vectors": vectors}
        )
    if complete:
        return SearchResult("proven-false")
    return SearchResult("not-witnessed-within-budget")


def tangent_dimension(data, point):
    """Dimension of the space of first-order deformations of a linked
    point: per-vertex homomorphisms into the quotient, compatible with
    every edge map modulo the subspaces, as one exact linear system."""
    point = _as_point(data, point)
    if not is_linked_point(data, point):
        raise ValueError("point is not linked")
    r = point.rank
    d = data.dim
    q = d - r
    if q == 0 or r == 0:
        return 0
    offsets = {}
    for i, v in enumerate(data.vertex_ids):
        offsets[v] = i * r * q
    total = len(data.vertex_ids) * r * q
    anns = {}
    secs = {}
    for v in data.vertex_ids:
        n = point.space(v).annihilator_matrix()
        anns[v] = n
        cols = []
        for a in range(q):
            e_a = [Fraction(0)] * q
            e_a[a] = Fraction(1)
            cols.append(solve(n, e_a))
        secs[v] = MatQ.from_rows(
            [[cols[b][i] for b in range(q)] for i in range(d)], cols=q
        )
    rows = []
    for e in data.edges:
        u, w = e.tail, e.head
        tw = point.space(w).matrix().transpose()
        # quotient-coordinate action of the edge map on deformations
        act = anns[w] * e.matrix * secs[u]
        for j, x in enumerate(point.space(u).basis):
            c = solve(tw, e.matrix.apply(x))
            for a in range(q):
                row = [Fraction(0)] * total
                for b in range(q):
                    row[offsets[u] + b * r + j] += act.data[a][b]
                for m_i in range(r):
                    row[offsets[w] + a * r + m_i] -= c[m_i]
                rows.append(row)
    if not rows:
        return total
    return MatQ.from_rows(rows, cols=total).kernel().dim


# ------------------------------------------------------------ fixtures

def star_example():
    """The four-vertex star with both-way edges at the center and the
    projection/inclusion matrices: a linked point whose incoming images
    at the center are three distinct lines, hence never simple."""
    dim = 3
    zero = [[0, 0, 0], [0, 0, 0], [0, 0, 0]]

    def diag(*entries):
        m = [row[:] for row in zero]
        for i, x in enumerate(entries):
            m[i][i] = x
        return m

    edges = [
        ("e12", "v1", "v2", diag(0, 0, 1)),
        ("e21", "v2", "v1", diag(1, 1, 0)),
        ("e13", "v1", "v3", diag(0, 1, 0)),
        ("e31", "v3", "v1", diag(1, 0, 1)),
        ("e14", "v1", "v4", diag(1, 0, 0)),
        ("e41", "v4", "v1", diag(0, 1, 1)),
    ]
    data = PrelinkedData(dim, ["v1", "v2", "v3", "v4"], edges)
    point = PrelinkedPoint(
        data,
        {
            "v1": [(1, 1, 0), (1, 0, 1)],
            "v2": [(1, 1, 0), (0, 0, 1)],
            "v3": [(0, 1, 0), (1, 0, 1)],
            "v4": [(1, 0, 0), (0, 1, -1)],
        },
    )
    return data, point
