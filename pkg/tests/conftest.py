import random

import pytest

from limitseries.curve_model import CurveBundle, SectionTuple
from limitseries.degree_graph import DegreeConfig, DualGraph
from limitseries.exactlinalg import MatQ, Poly


def chain_graph(n, genus=0):
    return DualGraph(
        [("v%d" % i, genus) for i in range(1, n + 1)],
        [("e%d" % i, "v%d" % i, "v%d" % (i + 1)) for i in range(1, n)],
    )


def random_tree(rng, n):
    verts = [("v%d" % i, 0) for i in range(1, n + 1)]
    edges = []
    for i in range(2, n + 1):
        j = rng.randint(1, i - 1)
        edges.append(("e%d" % (i - 1), "v%d" % j, "v%d" % i))
    return DualGraph(verts, edges)


def random_gl(rng, r):
    from limitseries.exactlinalg import MatQ, det

    while True:
        m = MatQ.from_rows(
            [[rng.randint(-3, 3) for _ in range(r)] for _ in range(r)]
        )
        if det([list(row) for row in m.data]) != 0:
            return m


def random_bundle(rng, cfg, condition_I=False):
    """Split bundle with distinct small node coordinates and invertible
    gluings.  With condition_I=True every split degree is kept <= b,
    which needs dv <= r*b to be arrangeable."""
    r = cfg.r
    splits = {}
    for v in cfg.graph.vertex_ids:
        dv = cfg.dv[v]
        if condition_I:
            assert dv <= r * cfg.b
            parts = [cfg.b] * r
            excess = r * cfg.b - dv
            i = 0
            while excess > 0:
                take = min(excess, parts[i])
                parts[i] -= take
                excess -= take
                i += 1
        else:
            parts = [dv // r] * r
            parts[0] += dv - sum(parts)
            for _ in range(3):
                i, j = rng.randrange(r), rng.randrange(r)
                if parts[i] > 0:
                    parts[i] -= 1
                    parts[j] += 1
        splits[v] = tuple(parts)
    nodes = {}
    for v in cfg.graph.vertex_ids:
        coords = rng.sample([0, 1, 2, 3, -1, -2, 5], cfg.graph.valence(v))
        for e, p in zip(cfg.graph.incident_edges(v), coords):
            nodes[(e.id, v)] = p
    gluings = {e.id: random_gl(rng, r) for e in cfg.graph.edges}
    return CurveBundle(cfg, splits, nodes, gluings)


@pytest.fixture
def bad_compare():
    """Three-component chain with a degree-2 middle component; the
    running counterexample curve for uniqueness questions."""
    g = chain_graph(3)
    cfg = DegreeConfig(g, r=1, d=2, k=2, b=1, dv={"v1": 1, "v2": 2, "v3": 1})
    bundle = CurveBundle(
        cfg,
        splits={"v1": (1,), "v2": (2,), "v3": (1,)},
        nodes={
            ("e1", "v1"): 0,
            ("e1", "v2"): 0,
            ("e2", "v2"): 1,
            ("e2", "v3"): 0,
        },
        gluings={"e1": [[1]], "e2": [[1]]},
    )
    return cfg, bundle


@pytest.fixture
def rng():
    return random.Random(20240817)


# ------------------------------------------------------- series-level data

def standard_chain_nodes(n):
    """Node coordinates 1 on the left end of each edge, 0 on the right."""
    nodes = {}
    for i in range(1, n):
        nodes[("e%d" % i, "v%d" % i)] = 1
        nodes[("e%d" % i, "v%d" % (i + 1))] = 0
    return nodes


def bad_compare_spaces(bundle, shift=0):
    """Ambient-vector generators of the multidegree subspaces of the
    running counterexample.  ``shift`` adds that multiple of the section
    supported on v1 to the first generator in multidegree (1, 0, 1); any
    nonzero shift gives a second, genuinely different compatible family
    with the same component data."""
    x = Poly.x()
    zero = Poly.zero()
    one = Poly.one()
    xx = x * (x - 1)

    def vec(w, q1, q2, q3):
        return SectionTuple(
            bundle, w, {"v1": (q1,), "v2": (q2,), "v3": (q3,)}
        ).vector()

    s1 = vec((1, 0, 1), shift * x - 1, xx, one)
    return {
        (1, 0, 1): [s1, vec((1, 0, 1), x, zero, x)],
        (0, 2, 0): [vec((0, 2, 0), zero, xx, zero), vec((0, 2, 0), x, one, x)],
        (1, 1, 0): [vec((1, 1, 0), -one, xx, zero), vec((1, 1, 0), x, zero, zero)],
        (0, 1, 1): [vec((0, 1, 1), zero, xx, one), vec((0, 1, 1), zero, zero, x)],
    }


def bad_compare_component_spaces():
    x = Poly.x()
    return {
        "v1": [(Poly.one(),), (x,)],
        "v2": [(Poly.one(),), (x * (x - 1),)],
        "v3": [(Poly.one(),), (x,)],
    }


def three_chain_fixture():
    """r=1 three-component chain, k=2, b=2; adaptable everywhere with
    trivial matching permutations."""
    x = Poly.x()
    g = chain_graph(3)
    cfg = DegreeConfig(g, r=1, d=2, k=2, b=2, dv={v: 2 for v in g.vertex_ids})
    bundle = CurveBundle(
        cfg,
        splits={v: (2,) for v in g.vertex_ids},
        nodes=standard_chain_nodes(3),
        gluings={"e1": [[1]], "e2": [[1]]},
    )
    spaces = {
        "v1": [(Poly.one(),), ((x - 1) ** 2,)],
        "v2": [(x ** 2,), ((x - 1) ** 2,)],
        "v3": [(Poly.one(),), (x ** 2,)],
    }
    return cfg, bundle, spaces


def rank_two_chain_fixture():
    """Rank-2 four-component chain with b=3; refined, adaptable, and all
    matching permutations trivial."""
    x = Poly.x()
    zero = Poly.zero()
    g = chain_graph(4)
    cfg = DegreeConfig(g, r=2, d=6, k=2, b=3, dv={v: 6 for v in g.vertex_ids})
    nodes = standard_chain_nodes(4)
    nodes[("e1", "v1")] = 0
    bundle = CurveBundle(
        cfg,
        splits={v: (3, 3) for v in g.vertex_ids},
        nodes=nodes,
        gluings={e.id: [[1, 0], [0, 1]] for e in g.edges},
    )
    spaces = {
        "v1": [(x, zero), (zero, x)],
        "v2": [(-(x ** 2) * (x - 1), zero), (zero, -(x ** 2) * (x - 1))],
        "v3": [((x ** 2) * (x - 1), zero), (zero, -(x ** 2))],
        "v4": [(x ** 2, zero), (zero, -(x ** 3))],
    }
    return cfg, bundle, spaces


def swap_chain_fixture():
    """Rank-2 four-component chain with b=2 whose middle gluing forces a
    nontrivial matching permutation."""
    x = Poly.x()
    zero = Poly.zero()
    g = chain_graph(4)
    cfg = DegreeConfig(g, r=2, d=4, k=2, b=2, dv={v: 4 for v in g.vertex_ids})
    nodes = standard_chain_nodes(4)
    nodes[("e1", "v1")] = 0
    bundle = CurveBundle(
        cfg,
        splits={v: (2, 2) for v in g.vertex_ids},
        nodes=nodes,
        gluings={e.id: [[1, 0], [0, 1]] for e in g.edges},
    )
    spaces = {
        "v1": [(x, zero), (zero, x ** 2)],
        "v2": [(zero, x - 1), (x * (x - 1), zero)],
        "v3": [(x * (x - 1), zero), (zero, x)],
        "v4": [(x, zero), (zero, x ** 2)],
    }
    return cfg, bundle, spaces


def full_interior_fixture():
    """k=3 chain whose component spaces are complete; every interior
    check is trivially satisfied."""
    x = Poly.x()
    g = chain_graph(3)
    cfg = DegreeConfig(g, r=1, d=2, k=3, b=2, dv={v: 2 for v in g.vertex_ids})
    bundle = CurveBundle(
        cfg,
        splits={v: (2,) for v in g.vertex_ids},
        nodes=standard_chain_nodes(3),
        gluings={"e1": [[1]], "e2": [[1]]},
    )
    spaces = {v: [(Poly.one(),), (x,), (x ** 2,)] for v in g.vertex_ids}
    return cfg, bundle, spaces


def stubborn_interior_fixture():
    """Refined chain whose middle component space admits no basis with
    the required order profiles at both of its nodes."""
    x = Poly.x()
    g = chain_graph(3)
    cfg = DegreeConfig(g, r=1, d=2, k=2, b=2, dv={v: 2 for v in g.vertex_ids})
    bundle = CurveBundle(
        cfg,
        splits={v: (2,) for v in g.vertex_ids},
        nodes=standard_chain_nodes(3),
        gluings={"e1": [[1]], "e2": [[1]]},
    )
    spaces = {
        "v1": [(x - 1,), ((x - 1) ** 2,)],
        "v2": [(x ** 2 - x,), (2 * x ** 2 - 2 * x + 1,)],
        "v3": [(x,), (x ** 2,)],
    }
    return cfg, bundle, spaces


_GLUING_POOL = [1, 2, 3, -1, -2]


def monomial_chain(rng, n, k, b):
    """Random r=1 chain data built from monomial order ladders; the
    orders increase weakly left to right, so the result is refined and
    adaptable with trivial matching permutations."""
    assert 1 <= k <= b + 1
    x = Poly.x()
    seqs = [None, None]  # seqs[i] = orders at the left node of comp i
    prev = None
    for i in range(2, n + 1):
        if prev is None:
            seq = sorted(rng.sample(range(b + 1), k))
        else:
            seq = []
            last = -1
            for j in range(k):
                lo = max(prev[j], last + 1)
                hi = b - (k - 1 - j)
                seq.append(rng.randint(lo, hi))
                last = seq[j]
        seqs.append(seq)
        prev = seq
    g = chain_graph(n)
    cfg = DegreeConfig(g, r=1, d=b, k=k, b=b, dv={v: b for v in g.vertex_ids})
    bundle = CurveBundle(
        cfg,
        splits={v: (b,) for v in g.vertex_ids},
        nodes=standard_chain_nodes(n),
        gluings={e.id: [[rng.choice(_GLUING_POOL)]] for e in g.edges},
    )
    spaces = {}
    for i in range(1, n + 1):
        left = seqs[i] if i > 1 else seqs[2]
        gens = []
        for j in range(k):
            q = x ** left[j]
            if i < n:
                q = q * (x - 1) ** (b - seqs[i + 1][j])
            gens.append((q,))
        spaces["v%d" % i] = gens
    return cfg, bundle, spaces


def direct_sum_data(data1, data2):
    """Componentwise direct sum of two r=1 series on the same chain."""
    cfg1, b1, sp1 = data1
    cfg2, b2, sp2 = data2
    assert cfg1.b == cfg2.b and len(cfg1.graph.vertex_ids) == len(cfg2.graph.vertex_ids)
    assert b1.nodes == b2.nodes
    g = chain_graph(len(cfg1.graph.vertex_ids))
    cfg = DegreeConfig(
        g,
        r=2,
        d=cfg1.d + cfg2.d,
        k=cfg1.k + cfg2.k,
        b=cfg1.b,
        dv={v: cfg1.dv[v] + cfg2.dv[v] for v in g.vertex_ids},
    )
    splits = {v: b1.splits[v] + b2.splits[v] for v in g.vertex_ids}
    nodes = dict(b1.nodes)
    gluings = {}
    for e in g.edges:
        m1 = b1.gluing(e.id)
        m2 = b2.gluing(e.id)
        gluings[e.id] = [
            [m1.data[0][0], 0],
            [0, m2.data[0][0]],
        ]
    bundle = CurveBundle(cfg, splits, nodes, gluings)
    zero = Poly.zero()
    spaces = {}
    for v in g.vertex_ids:
        gens = [(q[0], zero) for q in sp1[v]]
        gens += [(zero, q[0]) for q in sp2[v]]
        spaces[v] = gens
    return cfg, bundle, spaces


def aligned_direct_sum(rng, n, b):
    """Direct sum of two k=1 ladders whose orders are comparable at
    every node, obtained by splitting one strict k=2 ladder."""
    cfg, bundle, spaces = monomial_chain(rng, n, 2, b)
    parts = []
    for idx in (0, 1):
        c = DegreeConfig(
            chain_graph(n), r=1, d=b, k=1, b=b,
            dv={v: b for v in cfg.graph.vertex_ids},
        )
        bu = CurveBundle(
            c, bundle.splits, bundle.nodes,
            {e.id: bundle.gluing(e.id) for e in c.graph.edges},
        )
        parts.append((c, bu, {v: [spaces[v][idx]] for v in spaces}))
    return direct_sum_data(*parts)


def random_component_spaces(rng, bundle, k):
    """Random k-dimensional subspaces of each component space, given by
    coefficient vectors."""
    spaces = {}
    for v in bundle.graph.vertex_ids:
        width = sum(c + 1 for c in bundle.splits[v])
        vecs = []
        m = MatQ.from_rows(vecs, cols=width)
        while m.rank() < k:
            vecs.append([rng.randint(-3, 3) for _ in range(width)])
            m = MatQ.from_rows(vecs, cols=width)
        spaces[v] = [tuple(row) for row in m.rref()[0].data[:k]]
    return spaces


def random_series_candidate(rng, engineered=None):
    """Candidate limit-series data on a short chain; engineered draws
    are refined by construction, plain random draws usually are not."""
    n = rng.choice([2, 3])
    b = rng.choice([1, 2])
    if engineered is None:
        engineered = rng.random() < 0.5
    if engineered:
        r = rng.choice([1, 2])
        if r == 1:
            k = rng.randint(1, min(2, b + 1))
            return monomial_chain(rng, n, k, b)
        lhs = monomial_chain(rng, n, 1, b)
        rhs = monomial_chain(rng, n, 1, b)
        return direct_sum_data(lhs, rhs)
    r = rng.choice([1, 2])
    k = rng.randint(1, 2)
    g = chain_graph(n)
    cfg = DegreeConfig(g, r=r, d=r * b, k=k, b=b, dv={v: r * b for v in g.vertex_ids})
    bundle = CurveBundle(
        cfg,
        splits={v: (b,) * r for v in g.vertex_ids},
        nodes=standard_chain_nodes(n),
        gluings={e.id: random_gl(rng, r) for e in g.edges},
    )
    return cfg, bundle, random_component_spaces(rng, bundle, k)


def random_adapt_instance(rng):
    """A subspace of polynomials of bounded degree together with two
    marked points; roughly two in five draws are engineered so that no
    basis can meet both order profiles at once."""
    d = rng.randint(2, 5)
    k = rng.randint(1, min(3, d + 1))
    pp, qq = rng.sample([0, 1, 2, -1], 2)
    x = Poly.x()
    engineered = k >= 2 and rng.random() < 0.4
    vecs = []
    if engineered:
        u = Poly([rng.randint(-3, 3) for _ in range(d - 1)])
        if u.is_zero():
            u = Poly.one()
        vecs.append((x - pp) * (x - qq) * u)
        while len(vecs) < k:
            w = Poly([rng.randint(-3, 3) for _ in range(d + 1)])
            if w.evaluate(pp) != 0 and w.evaluate(qq) != 0:
                vecs.append(w)
    rows = [list(q.coeffs) + [0] * (d + 1 - len(q.coeffs)) for q in vecs]
    while MatQ.from_rows(rows, cols=d + 1).rank() < k:
        rows.append([rng.randint(-4, 4) for _ in range(d + 1)])
    keep = []
    for row in rows:
        if MatQ.from_rows(keep + [row], cols=d + 1).rank() > len(keep):
            keep.append(row)
        if len(keep) == k:
            break
    return keep, (d,), pp, qq
