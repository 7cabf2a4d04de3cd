"""Limit linear series on split-bundle curve models.

Two viewpoints on the same data and the translations between them:

* component data -- one k-dimensional space of polynomial vectors per
  component, checked edge by edge (order sums against the twist bound,
  matching of node-fiber values) or globally (section-kernel dimensions
  over the restricted multidegree graph);
* multidegree families -- one k-dimensional space of global sections per
  multidegree in a window, compatible with the elementary moves.

On top of these sit the witness searches (simple points, constrained
loci), adapted bases along chains, and the rebalancing that raises the
twist bound until every splitting degree fits under it.
"""

from fractions import Fraction
from itertools import combinations_with_replacement, permutations, product
from math import comb

from .curve_model import (
    CurveBundle,
    SectionTuple,
    apply_path,
    condition_I_holds,
    global_sections,
    path_image,
)
from .degree_graph import (
    DegreeConfig,
    DualGraph,
    Multidegree,
    enumerate_GI,
    enumerate_bar_GII,
    extremal_vertex,
    is_vertex_GII,
    md_from_twists,
    minimal_path_II,
    step_I,
    step_II,
    t_value,
)
from .exactlinalg import MatQ, Poly, Subspace, det, solve


class ConditionIError(ValueError):
    """An operation that needs every splitting degree bounded by b was
    run on a bundle where some degree exceeds it."""


def _gate(bundle, require):
    if require and not condition_I_holds(bundle):
        raise ConditionIError(
            "a splitting degree exceeds the twist bound b; rebalance via "
            "increase_b/condition_I_target or pass require_condition_I=False"
        )


# ------------------------------------------------------------------ orders

def _comp_width(degs):
    return sum(c + 1 for c in degs)


def _level_rows(degs, point, m):
    """One row per slot: the functional picking the coefficient of
    (x - point)^m out of a component coefficient vector."""
    width = _comp_width(degs)
    p = Fraction(point)
    rows = []
    pos = 0
    for c in degs:
        row = [Fraction(0)] * width
        for i in range(m, c + 1):
            row[pos + i] = Fraction(comb(i, m)) * p ** (i - m)
        rows.append(row)
        pos += c + 1
    return rows


def _order_cut(sub, degs, point, a):
    """Intersect with the vectors vanishing to order >= a at the point."""
    if a <= 0:
        return sub
    width = _comp_width(degs)
    rows = []
    for m in range(a):
        rows.extend(_level_rows(degs, point, m))
    return sub.intersect(MatQ.from_rows(rows, cols=width).kernel())


def _order_tower(sub, degs, point, top):
    """List F with F[a] the subspace of order >= a, for a = 0..top."""
    width = _comp_width(degs)
    out = [sub]
    for a in range(top):
        cut = MatQ.from_rows(
            _level_rows(degs, point, a), cols=width
        ).kernel()
        out.append(out[-1].intersect(cut))
    return out


def _level_value(degs, point, t, vec):
    rows = _level_rows(degs, point, t)
    return tuple(
        sum(c * x for c, x in zip(row, vec)) for row in rows
    )


class VanishingSequence(tuple):
    """Weakly increasing orders of vanishing, smallest first."""

    def __new__(cls, values):
        vals = tuple(int(v) for v in values)
        for i, v in enumerate(vals):
            if v < 0:
                raise ValueError("negative vanishing order")
            if i and v < vals[i - 1]:
                raise ValueError("orders must be weakly increasing")
        return super().__new__(cls, vals)


def vanishing_sequence(V, point, degs=None):
    """Orders of vanishing of a space of polynomial vectors at a point.

    ``degs`` lists the per-slot degree caps; a single slot of degree
    ambient-1 is assumed when omitted.  The order of a vector is the
    minimum over its nonzero slots.
    """
    if not isinstance(V, Subspace):
        vecs = [list(v) for v in V]
        amb = _comp_width(degs) if degs else len(vecs[0])
        V = Subspace.from_vectors(amb, vecs)
    if degs is None:
        degs = (V.ambient_dim - 1,)
    degs = tuple(int(c) for c in degs)
    if V.ambient_dim != _comp_width(degs):
        raise ValueError("degree caps do not match the ambient dimension")
    tower = _order_tower(V, degs, point, max(degs) + 1)
    seq = []
    for a in range(len(tower) - 1):
        seq.extend([a] * (tower[a].dim - tower[a + 1].dim))
    return VanishingSequence(seq)


# ------------------------------------------------------------ adapted bases

def adaptable(V, P, Q, degs=None):
    """Whether one basis can realize both vanishing sequences at once.

    Holds exactly when every two-sided order cut has the dimension
    predicted by pairing the i-th smallest order at P with the i-th
    largest at Q.
    """
    if degs is None:
        degs = (V.ambient_dim - 1,)
    k = V.dim
    if k == 0:
        return True
    a_seq = vanishing_sequence(V, P, degs)
    c_seq = vanishing_sequence(V, Q, degs)
    ptow = _order_tower(V, degs, P, a_seq[-1] + 1)
    for a in range(a_seq[-1] + 1):
        qtow = _order_tower(ptow[a], degs, Q, c_seq[-1] + 1)
        for c in range(c_seq[-1] + 1):
            count = sum(
                1
                for i in range(k)
                if a_seq[i] >= a and c_seq[k - 1 - i] >= c
            )
            if qtow[c].dim != count:
                return False
    return True


def adapted_basis(V, P, Q, degs=None):
    """Basis realizing the vanishing sequences at P and Q together.

    Vectors come sorted by increasing order at P (hence decreasing order
    at Q); None when no such basis exists.
    """
    if degs is None:
        degs = (V.ambient_dim - 1,)
    k = V.dim
    if k == 0:
        return []
    a_seq = vanishing_sequence(V, P, degs)
    c_seq = vanishing_sequence(V, Q, degs)
    amax, cmax = a_seq[-1], c_seq[-1]
    ptow = _order_tower(V, degs, P, amax + 2)
    F = [
        _order_tower(ptow[a], degs, Q, cmax + 2)
        for a in range(amax + 2)
    ]
    # multiplicity of the cell (a, c) under the pairing
    pairs = [(a_seq[i], c_seq[k - 1 - i]) for i in range(k)]
    picks = {}
    for a in range(amax, -1, -1):
        for c in range(cmax, -1, -1):
            need = pairs.count((a, c))
            if not need:
                continue
            got = []
            blocked = F[a][c + 1].add(F[a + 1][c])
            for vec in F[a][c].basis:
                if len(got) == need:
                    break
                if not blocked.contains(vec):
                    got.append(vec)
                    blocked = blocked.add(
                        Subspace.from_vectors(V.ambient_dim, [vec])
                    )
            if len(got) < need:
                return None
            picks[(a, c)] = got
    out = []
    used = {cell: 0 for cell in picks}
    for a, c in sorted(pairs):
        out.append(list(picks[(a, c)][used[(a, c)]]))
        used[(a, c)] += 1
    if Subspace.from_vectors(V.ambient_dim, out).dim != k:
        return None
    return out


# -------------------------------------------------------- component series

def _component_vector(bundle, v, item):
    """Normalize one generator at a component to a flat coefficient
    vector; accepts a bare polynomial, a tuple of r polynomials or
    coefficient lists, or the flat vector itself."""
    width = _comp_width(bundle.splits[v])
    if isinstance(item, Poly):
        item = (item,)
    entries = list(item)
    if entries and all(
        isinstance(q, (Poly, list, tuple)) for q in entries
    ):
        if len(entries) != bundle.r:
            raise ValueError(
                "need %d polynomials at %r" % (bundle.r, v)
            )
        out = []
        for j, q in enumerate(entries):
            q = q if isinstance(q, Poly) else Poly(q)
            cap = bundle.splits[v][j] + 1
            cs = list(q.coeffs)
            if len(cs) > cap:
                raise ValueError("degree bound exceeded at %r" % v)
            out += cs + [Fraction(0)] * (cap - len(cs))
        return out
    vec = [Fraction(x) for x in entries]
    if len(vec) != width:
        raise ValueError("component vector at %r has wrong length" % v)
    return vec


def _component_space(bundle, v, items):
    width = _comp_width(bundle.splits[v])
    if isinstance(items, Subspace):
        if items.ambient_dim != width:
            raise ValueError("component space at %r has wrong ambient" % v)
        return items
    return Subspace.from_vectors(
        width, [_component_vector(bundle, v, it) for it in items]
    )


def _component_slice(bundle, v, vec):
    start = bundle.block(v, 0)[0]
    stop = bundle.block(v, bundle.r - 1)[1]
    return list(vec[start:stop])


def _slot_polys(bundle, v, vec):
    out = []
    pos = 0
    for c in bundle.splits[v]:
        out.append(Poly(list(vec[pos:pos + c + 1])))
        pos += c + 1
    return tuple(out)


def _bundle_key(bundle):
    g = bundle.graph
    return (
        tuple((v, g.genus[v]) for v in g.vertex_ids),
        tuple((e.id, e.tail, e.head) for e in g.edges),
        (bundle.cfg.r, bundle.cfg.d, bundle.cfg.k, bundle.cfg.b),
        tuple(sorted(bundle.cfg.dv.items())),
        tuple(sorted(bundle.splits.items())),
        tuple(sorted(bundle.nodes.items())),
        tuple(
            (eid, tuple(tuple(row) for row in bundle.gluings[eid].data))
            for eid in sorted(bundle.gluings)
        ),
    )


class EHTSeries:
    """Component data: one k-dimensional space of polynomial vectors on
    each component, inside the split-degree bounds."""

    def __init__(self, bundle, spaces, require_condition_I=True):
        _gate(bundle, require_condition_I)
        if set(spaces) != set(bundle.graph.vertex_ids):
            raise ValueError("space keys do not match vertex ids")
        self.bundle = bundle
        self.cfg = bundle.cfg
        self.k = bundle.cfg.k
        norm = {}
        for v in bundle.graph.vertex_ids:
            sub = _component_space(bundle, v, spaces[v])
            if sub.dim != self.k:
                raise ValueError(
                    "component space at %r has dimension %d, expected %d"
                    % (v, sub.dim, self.k)
                )
            norm[v] = sub
        self.spaces = norm

    def __eq__(self, other):
        return (
            isinstance(other, EHTSeries)
            and _bundle_key(self.bundle) == _bundle_key(other.bundle)
            and self.spaces == other.spaces
        )

    def __repr__(self):
        return "EHTSeries(k=%d, components=%d)" % (
            self.k, len(self.spaces)
        )


def _edge_sequences(s, e):
    bundle = s.bundle
    au = vanishing_sequence(
        s.spaces[e.tail], bundle.node(e.id, e.tail), bundle.splits[e.tail]
    )
    aw = vanishing_sequence(
        s.spaces[e.head], bundle.node(e.id, e.head), bundle.splits[e.head]
    )
    return au, aw


def check_EHT_direct(s, require_condition_I=True):
    """Edge-by-edge test: order sums reach the twist bound, and at every
    exact-contact level the glued node-fiber values can be matched."""
    _gate(s.bundle, require_condition_I)
    bundle = s.bundle
    b = s.cfg.b
    k = s.k
    for e in bundle.graph.edges:
        au, aw = _edge_sequences(s, e)
        for i in range(k):
            if au[i] + aw[k - 1 - i] < b:
                return False
        levels = {}
        for i in range(k):
            if au[i] + aw[k - 1 - i] == b:
                levels[au[i]] = levels.get(au[i], 0) + 1
        degs_t = bundle.splits[e.tail]
        degs_h = bundle.splits[e.head]
        p_t = bundle.node(e.id, e.tail)
        p_h = bundle.node(e.id, e.head)
        for alpha, n in levels.items():
            left = _order_cut(s.spaces[e.tail], degs_t, p_t, alpha)
            right = _order_cut(s.spaces[e.head], degs_h, p_h, b - alpha)
            lvals = MatQ.from_rows(
                _level_rows(degs_t, p_t, alpha), cols=_comp_width(degs_t)
            ).image_of(left)
            rvals = MatQ.from_rows(
                _level_rows(degs_h, p_h, b - alpha),
                cols=_comp_width(degs_h),
            ).image_of(right)
            glued = bundle.gluing(e.id).image_of(lvals)
            if glued.intersect(rvals).dim < n:
                return False
    return True


def check_refined(s, require_condition_I=True):
    """All order sums exactly equal to the twist bound, on top of the
    componentwise series conditions."""
    if not check_EHT_direct(s, require_condition_I=require_condition_I):
        return False
    b = s.cfg.b
    k = s.k
    for e in s.bundle.graph.edges:
        au, aw = _edge_sequences(s, e)
        if any(au[i] + aw[k - 1 - i] != b for i in range(k)):
            return False
    return True


def kernel_at(s, w):
    """Global sections in multidegree w lying componentwise in the given
    spaces."""
    bundle = s.bundle
    w = s.cfg.md(w)
    amb = bundle.ambient_dim
    vecs = []
    for v in bundle.graph.vertex_ids:
        start = bundle.block(v, 0)[0]
        for bv in s.spaces[v].basis:
            row = [Fraction(0)] * amb
            row[start:start + len(bv)] = [Fraction(x) for x in bv]
            vecs.append(row)
    box = Subspace.from_vectors(amb, vecs)
    return global_sections(bundle, w).intersect(box)


def kernel_dimension_table(s):
    """Kernel dimensions at every multidegree of the bounded window."""
    return {
        w: kernel_at(s, w).dim for w in enumerate_bar_GII(s.cfg)
    }


def check_EHT_kernel(s, require_condition_I=True):
    """Kernel characterization: dimension at least k at every vertex of
    the restricted multidegree graph."""
    _gate(s.bundle, require_condition_I)
    return all(
        kernel_at(s, w).dim >= s.k for w in enumerate_GI(s.cfg)
    )


# ------------------------------------------------------------- families

def _window_keys(cfg, variant):
    if variant == "II":
        return list(enumerate_bar_GII(cfg))
    if variant == "I":
        return list(enumerate_GI(cfg))
    raise ValueError("variant must be 'I' or 'II'")


def _window_arrows(cfg, keys, variant):
    keyset = set(keys)
    out = []
    for w in keys:
        if variant == "II":
            for v in cfg.graph.vertex_ids:
                w2 = step_II(cfg, w, v)
                if w2 in keyset:
                    out.append((w, v, w2))
        else:
            for e in cfg.graph.edges:
                for v in (e.tail, e.head):
                    w2 = step_I(cfg, w, e.id, v)
                    if w2 in keyset:
                        out.append((w, (e.id, v), w2))
    return out


def _arrow_matrix(bundle, move, variant):
    # both move kinds act as coordinate projections killing components
    if variant == "II":
        dead = {move}
    else:
        eid, v = move
        far = bundle.graph.far_side(eid, v)
        dead = {
            u for u in bundle.graph.vertex_ids if u not in far
        }
    amb = bundle.ambient_dim
    rows = [list(r) for r in MatQ.identity(amb).data]
    for u in dead:
        start = bundle.block(u, 0)[0]
        stop = bundle.block(u, bundle.r - 1)[1]
        for i in range(start, stop):
            rows[i][i] = Fraction(0)
    return MatQ.from_rows(rows, cols=amb)


class LinkedSeries:
    """One space of global sections per multidegree of a window,
    compatible with the elementary moves between window vertices."""

    def __init__(self, bundle, spaces, variant="II"):
        self.bundle = bundle
        self.cfg = bundle.cfg
        self.k = bundle.cfg.k
        self.variant = variant
        self.multidegrees = _window_keys(self.cfg, variant)
        provided = {}
        for key, val in spaces.items():
            provided[self.cfg.md(key)] = val
        unknown = set(provided) - set(self.multidegrees)
        if unknown:
            raise ValueError(
                "multidegree %s is not in the window" % (sorted(unknown)[0],)
            )
        norm = {}
        for w in self.multidegrees:
            if w not in provided:
                raise ValueError(
                    "missing multidegree %s" % (tuple(w),)
                )
            items = provided[w]
            if isinstance(items, Subspace):
                if items.ambient_dim != bundle.ambient_dim:
                    raise ValueError("space at %s has wrong ambient" % (w,))
                sub = items
            else:
                sub = Subspace.from_vectors(
                    bundle.ambient_dim, [list(x) for x in items]
                )
            if sub.dim != self.k:
                raise ValueError(
                    "space at %s has dimension %d, expected %d"
                    % (tuple(w), sub.dim, self.k)
                )
            for bv in sub.basis:
                # raises when the vector is no section in this multidegree
                SectionTuple.from_vector(bundle, w, bv)
            norm[w] = sub
        self._spaces = norm

    def space(self, w):
        w = self.cfg.md(w)
        if w not in self._spaces:
            raise ValueError("multidegree %s not in the window" % (tuple(w),))
        return self._spaces[w]

    def arrows(self):
        return _window_arrows(self.cfg, self.multidegrees, self.variant)

    def __eq__(self, other):
        return (
            isinstance(other, LinkedSeries)
            and self.variant == other.variant
            and _bundle_key(self.bundle) == _bundle_key(other.bundle)
            and self._spaces == other._spaces
        )

    def __repr__(self):
        return "LinkedSeries(variant=%r, k=%d, multidegrees=%d)" % (
            self.variant, self.k, len(self.multidegrees)
        )


def linked_violations(ls):
    """Arrows whose image is not contained in the target space."""
    bundle = ls.bundle
    out = []
    for w, move, w2 in ls.arrows():
        m = _arrow_matrix(bundle, move, ls.variant)
        img = m.image_of(ls.space(w))
        if not ls.space(w2).contains_subspace(img):
            out.append((w, move, w2))
    return out


def check_linked(ls):
    return not linked_violations(ls)


def forgetful_to_EHT(ls):
    """Component data read off at the extremal multidegrees.

    Fails when some extremal space collapses under restriction to its
    component, which cannot happen once every splitting degree is
    bounded by b.
    """
    bundle = ls.bundle
    cfg = ls.cfg
    spaces = {}
    for v in bundle.graph.vertex_ids:
        wv = extremal_vertex(cfg, v)
        width = _comp_width(bundle.splits[v])
        rows = [
            _component_slice(bundle, v, vec)
            for vec in ls.space(wv).basis
        ]
        sub = Subspace.from_vectors(width, rows)
        if sub.dim < cfg.k:
            raise ValueError(
                "family collapses on component %r under restriction" % v
            )
        spaces[v] = sub
    return EHTSeries(bundle, spaces, require_condition_I=False)


def eht_to_linked(s, variant="II", tie_break="lex", require_condition_I=True):
    """Family of section spaces generated by the component data.

    Starts from the full kernels, then cuts every oversized space down
    to dimension k: the incoming images are forced in, the rest is
    completed from the kernel basis in canonical order ("lex") or the
    reverse.  The result is verified to be linked.
    """
    if tie_break not in ("lex", "reversed"):
        raise ValueError("tie_break must be 'lex' or 'reversed'")
    _gate(s.bundle, require_condition_I)
    if not check_EHT_kernel(s, require_condition_I=require_condition_I):
        raise ValueError("component spaces do not form a limit series")
    bundle = s.bundle
    cfg = s.cfg
    k = s.k
    keys = _window_keys(cfg, variant)
    spaces = {w: kernel_at(s, w) for w in keys}
    if any(spaces[w].dim < k for w in keys):
        raise ValueError("component spaces do not form a limit series")
    arrows = _window_arrows(cfg, keys, variant)
    out_by = {w: [] for w in keys}
    in_by = {w: [] for w in keys}
    mats = {}
    for w, move, w2 in arrows:
        out_by[w].append((move, w2))
        in_by[w2].append((w, move))
        if move not in mats:
            mats[move] = _arrow_matrix(bundle, move, variant)

    def shrink(w):
        cut = spaces[w]
        for move, w2 in out_by[w]:
            cut = cut.intersect(mats[move].preimage_of(spaces[w2]))
        forced = Subspace.zero(bundle.ambient_dim)
        for w0, move in in_by[w]:
            forced = forced.add(mats[move].image_of(spaces[w0]))
        if forced.dim > k or cut.dim < k:
            return False
        if not cut.contains_subspace(forced):
            return False
        chosen = forced
        order = list(cut.basis)
        if tie_break == "reversed":
            order.reverse()
        for vec in order:
            if chosen.dim == k:
                break
            if not chosen.contains(vec):
                chosen = chosen.add(
                    Subspace.from_vectors(bundle.ambient_dim, [vec])
                )
        if chosen.dim != k:
            return False
        spaces[w] = chosen
        return True

    pending = [w for w in keys if spaces[w].dim > k]
    while pending:
        progressed = False
        for w in list(pending):
            # prefer vertices whose outgoing targets are already final
            if any(spaces[w2].dim > k for _, w2 in out_by[w] if w2 != w):
                continue
            if shrink(w):
                pending.remove(w)
                progressed = True
        if progressed:
            continue
        for w in list(pending):
            if shrink(w):
                pending.remove(w)
                progressed = True
                break
        if not progressed:
            raise RuntimeError(
                "translation stalled before every space reached dimension k"
            )
    ls = LinkedSeries(bundle, {w: spaces[w] for w in keys}, variant=variant)
    if linked_violations(ls):
        raise RuntimeError("translation produced an unlinked family")
    return ls


# ------------------------------------------------------------- searches

class SearchResult:
    """Outcome of a witness search; truthy exactly when witnessed."""

    __slots__ = ("verdict", "witness")

    _VERDICTS = ("witnessed", "proven-false", "not-witnessed-within-budget")

    def __init__(self, verdict, witness=None):
        if verdict not in self._VERDICTS:
            raise ValueError("unknown verdict %r" % verdict)
        self.verdict = verdict
        self.witness = witness

    def __bool__(self):
        return self.verdict == "witnessed"

    def __repr__(self):
        return "SearchResult(%r)" % self.verdict


def _combine_rows(coords, lam, k):
    row = [Fraction(0)] * k
    for c, cv in zip(lam, coords):
        if c:
            row = [a + c * x for a, x in zip(row, cv)]
    return row


def _witness_grid(items, coords, places, k, budget):
    """Search for one section per chosen source whose coordinate rows
    have nonzero determinant at every place.

    The product of determinants has degree at most len(places) in each
    coefficient, so the grid 0..len(places) per coefficient decides
    vanishing exactly; a budget turns the exhaustive proof into a
    bounded search.
    """
    side = len(places) + 1
    spent = 0
    for tup in combinations_with_replacement(items, k):
        degenerate = False
        for pl in places:
            stacked = [cv for w in tup for cv in coords[(w, pl)]]
            if MatQ.from_rows(stacked, cols=k).rank() < k:
                degenerate = True
                break
        if degenerate:
            continue
        for assign in product(range(side), repeat=k * k):
            if budget is not None:
                spent += 1
                if spent > budget:
                    return None, False
            good = True
            for pl in places:
                rows = [
                    _combine_rows(
                        coords[(tup[i], pl)], assign[i * k:(i + 1) * k], k
                    )
                    for i in range(k)
                ]
                if det(rows) == 0:
                    good = False
                    break
            if good:
                return (tup, assign), True
    return None, True


def check_simple(ls, budget=None):
    """Search for k sections of the family whose images at every
    extremal multidegree stay independent.

    Exhaustive (hence a proof either way) for k <= 2; budgeted beyond.
    """
    if ls.variant != "II":
        raise ValueError("simplicity search needs the bounded-window family")
    cfg = ls.cfg
    bundle = ls.bundle
    k = cfg.k
    ids = cfg.graph.vertex_ids
    exts = {v: extremal_vertex(cfg, v) for v in ids}
    targets = {
        v: ls.space(exts[v]).matrix().transpose() for v in ids
    }
    coords = {}
    for w in ls.multidegrees:
        for v in ids:
            counts = minimal_path_II(cfg, w, exts[v])
            verts = [u for u in sorted(counts) for _ in range(counts[u])]
            cs = []
            for bv in ls.space(w).basis:
                st = SectionTuple.from_vector(bundle, w, bv, validate=False)
                img = apply_path(bundle, st, verts).vector()
                lam = solve(targets[v], img)
                if lam is None:
                    raise RuntimeError(
                        "family is not closed under minimal-path transport"
                    )
                cs.append(list(lam))
            coords[(w, v)] = cs
    if budget is None and k > 2:
        budget = 20000
    found, complete = _witness_grid(
        ls.multidegrees, coords, list(ids), k, budget
    )
    if found is not None:
        tup, assign = found
        vectors = []
        for i in range(k):
            vec = [Fraction(0)] * bundle.ambient_dim
            for c, bv in zip(
                assign[i * k:(i + 1) * k], ls.space(tup[i]).basis
            ):
                if c:
                    vec = [a + c * x for a, x in zip(vec, bv)]
            vectors.append(tuple(vec))
        return SearchResult(
            "witnessed",
            {"multidegrees": list(tup), "vectors": vectors},
        )
    if complete:
        return SearchResult("proven-false")
    return SearchResult("not-witnessed-within-budget")


def check_constrained(s, budget=None, require_condition_I=True):
    """Search for k kernel sections, one per multidegree with kernel
    dimension exactly k, whose restrictions to every component are
    independent.

    Only exact-dimension multidegrees can carry such witnesses, so the
    grid over them decides the question for k <= 2.
    """
    _gate(s.bundle, require_condition_I)
    bundle = s.bundle
    cfg = s.cfg
    k = s.k
    ids = cfg.graph.vertex_ids
    kernels = {w: kernel_at(s, w) for w in enumerate_bar_GII(cfg)}
    cands = [w for w in kernels if kernels[w].dim == k]
    cands.sort()
    targets = {
        v: s.spaces[v].matrix().transpose() for v in ids
    }
    coords = {}
    for w in cands:
        for v in ids:
            cs = []
            for bv in kernels[w].basis:
                lam = solve(targets[v], _component_slice(bundle, v, bv))
                if lam is None:
                    raise RuntimeError("kernel leaves the component spaces")
                cs.append(list(lam))
            coords[(w, v)] = cs
    if budget is None and k > 2:
        budget = 20000
    found, complete = _witness_grid(cands, coords, list(ids), k, budget)
    if found is not None:
        tup, assign = found
        vectors = []
        for i in range(k):
            vec = [Fraction(0)] * bundle.ambient_dim
            for c, bv in zip(
                assign[i * k:(i + 1) * k], kernels[tup[i]].basis
            ):
                if c:
                    vec = [a + c * x for a, x in zip(vec, bv)]
            vectors.append(tuple(vec))
        return SearchResult(
            "witnessed",
            {"multidegrees": list(tup), "vectors": vectors},
        )
    if complete:
        return SearchResult("proven-false")
    return SearchResult("not-witnessed-within-budget")


def verify_constrained_witness(s, multidegrees, vectors):
    """Full check of a constrained witness: exact kernel dimension and
    kernel membership at every listed multidegree, and componentwise
    independence of the vectors."""
    cfg = s.cfg
    k = s.k
    if len(multidegrees) != k or len(vectors) != k:
        return False
    mds = [cfg.md(w) for w in multidegrees]
    for w, vec in zip(mds, vectors):
        ker = kernel_at(s, w)
        if ker.dim != k or not ker.contains(vec):
            return False
    for v in cfg.graph.vertex_ids:
        target = s.spaces[v].matrix().transpose()
        rows = []
        for vec in vectors:
            lam = solve(target, _component_slice(s.bundle, v, vec))
            if lam is None:
                return False
            rows.append(list(lam))
        if MatQ.from_rows(rows, cols=k).rank() != k:
            return False
    return True


# ------------------------------------------------------------ chain bases

def _chain_layout(s):
    g = s.cfg.graph
    if any(g.valence(v) > 2 for v in g.vertex_ids):
        raise ValueError("the dual graph is not a chain")
    ids = list(g.vertex_ids)
    if len(ids) == 1:
        return ids, []
    start = sorted(v for v in ids if g.valence(v) == 1)[0]
    comps = [start]
    edges = []
    seen = {start}
    while len(comps) < len(ids):
        for e in g.incident_edges(comps[-1]):
            u = e.other(comps[-1])
            if u not in seen:
                comps.append(u)
                seen.add(u)
                edges.append(e.id)
                break
    return comps, edges


def chain_adaptable(s, require_condition_I=True):
    """Refined, and every interior component space admits one basis
    adapted to both of its nodes at once."""
    comps, edges = _chain_layout(s)
    if not check_refined(s, require_condition_I=require_condition_I):
        return False
    bundle = s.bundle
    for i in range(1, len(comps) - 1):
        v = comps[i]
        pp = bundle.node(edges[i - 1], v)
        qq = bundle.node(edges[i], v)
        if not adaptable(s.spaces[v], pp, qq, bundle.splits[v]):
            return False
    return True


def _adapted_single(V, point, degs, seq):
    """Independent vectors with exact orders given by seq, positioned so
    that slot j carries the (k-1-j)-th entry (largest order first)."""
    k = V.dim
    amb = V.ambient_dim
    if k == 0:
        return []
    tower = _order_tower(V, degs, point, seq[-1] + 1)
    picks = {}
    chosen = Subspace.zero(amb)
    for a in sorted(set(seq), reverse=True):
        need = list(seq).count(a)
        got = []
        blocked = tower[a + 1].add(chosen)
        for vec in tower[a].basis:
            if len(got) == need:
                break
            if not blocked.contains(vec):
                got.append(list(vec))
                blocked = blocked.add(Subspace.from_vectors(amb, [vec]))
        assert len(got) == need
        picks[a] = got
        chosen = chosen.add(Subspace.from_vectors(amb, got))
    used = {a: 0 for a in picks}
    out = []
    for j in range(k):
        a = seq[k - 1 - j]
        out.append(picks[a][used[a]])
        used[a] += 1
    return out


def _affine_member(W, rows, target, avoid):
    """x in W with prescribed level values, outside finitely many
    subspaces; the grid side exceeds the number of avoided spaces, so a
    point exists whenever the constraints are satisfiable at all."""
    if W.dim == 0:
        return None
    width = W.ambient_dim
    m = MatQ.from_rows(rows, cols=width) * W.matrix().transpose()
    lam0 = solve(m, target)
    if lam0 is None:
        return None
    base = W.combine(lam0)
    dirs = [W.combine(h) for h in m.kernel().basis]
    side = len(avoid) + 1
    for combo in product(range(side), repeat=len(dirs)):
        x = list(base)
        for c, d in zip(combo, dirs):
            if c:
                x = [a + c * b for a, b in zip(x, d)]
        if not any(u.contains(x) for u in avoid):
            return x
    return None


def _mat_inverse(m):
    n = m.rows
    cols = []
    for i in range(n):
        e = [Fraction(0)] * n
        e[i] = Fraction(1)
        x = solve(m, e)
        if x is None:
            raise ValueError("matrix is not invertible")
        cols.append(x)
    return MatQ.from_rows(
        [[cols[j][i] for j in range(n)] for i in range(n)], cols=n
    )


def chain_global_bases(s, require_condition_I=True):
    """Bases of the component spaces glued into global chains.

    Returns (bases, sigmas): bases[i] lists k tuples of slot
    polynomials for the i-th component along the chain, sorted by
    increasing order at the left node; sigmas[i] matches each basis
    element of component i to the element of component i+1 whose node
    values continue it.  Matching permutations are searched identity
    first, blockwise over equal-order groups.
    """
    if not chain_adaptable(s, require_condition_I=require_condition_I):
        raise ValueError("series is not adaptable along the chain")
    bundle = s.bundle
    cfg = s.cfg
    k = cfg.k
    b = cfg.b
    comps, edges = _chain_layout(s)
    n = len(comps)
    if n == 1:
        basis = [list(v) for v in s.spaces[comps[0]].basis]
        return (
            [[_slot_polys(bundle, comps[0], v) for v in basis]],
            [],
        )
    degs = {v: bundle.splits[v] for v in comps}
    # right-node vanishing sequence fixes the first component's basis
    q0 = bundle.node(edges[0], comps[0])
    c_seq = vanishing_sequence(s.spaces[comps[0]], q0, degs[comps[0]])
    flat = [_adapted_single(s.spaces[comps[0]], q0, degs[comps[0]], c_seq)]
    sigmas = []
    for i in range(n - 1):
        left, right = comps[i], comps[i + 1]
        eid = edges[i]
        qp = bundle.node(eid, left)
        pp = bundle.node(eid, right)
        e = cfg.graph.edge(eid)
        phi = bundle.gluing(eid)
        if e.tail != left:
            phi = _mat_inverse(phi)
        a_seq = vanishing_sequence(s.spaces[right], pp, degs[right])
        ptow = _order_tower(s.spaces[right], degs[right], pp, b + 2)
        interior = i + 1 < n - 1
        if interior:
            qq = bundle.node(edges[i + 1], right)
            next_seq = vanishing_sequence(s.spaces[right], qq, degs[right])
            qtow = _order_tower(s.spaces[right], degs[right], qq, b + 2)
        # left-side contact orders and the glued target values
        orders = []
        targets = []
        for vec in flat[i]:
            c = next(
                a for a in range(b + 1)
                if any(_level_value(degs[left], qp, a, vec))
            )
            orders.append(c)
            targets.append(
                list(phi.apply(_level_value(degs[left], qp, c, vec)))
            )
        # equal-order blocks are index-aligned on both sides
        blocks = []
        j0 = 0
        while j0 < k:
            j1 = j0
            while j1 < k and a_seq[j1] == a_seq[j0]:
                j1 += 1
            blocks.append(list(range(j0, j1)))
            j0 = j1
        per_block = [sorted(permutations(blk)) for blk in blocks]
        solved = None
        for choice in product(*per_block):
            sigma = [None] * k
            for blk, perm in zip(blocks, choice):
                for pos, tgt in zip(blk, perm):
                    sigma[pos] = tgt
            chosen = [None] * k
            span = Subspace.zero(_comp_width(degs[right]))
            ok = True
            for j in range(k):
                jp = sigma[j]
                a = a_seq[jp]
                if a != b - orders[j]:
                    ok = False
                    break
                window = ptow[a]
                avoid = [span]
                if interior:
                    qreq = next_seq[k - 1 - jp]
                    window = window.intersect(qtow[qreq])
                    avoid.append(qtow[qreq + 1])
                x = _affine_member(
                    window,
                    _level_rows(degs[right], pp, a),
                    targets[j],
                    avoid,
                )
                if x is None:
                    ok = False
                    break
                chosen[jp] = x
                span = span.add(
                    Subspace.from_vectors(len(x), [x])
                )
            if ok:
                solved = (chosen, tuple(sigma))
                break
        if solved is None:
            raise RuntimeError(
                "no matching permutation admits glued bases at edge %r" % eid
            )
        flat.append(solved[0])
        sigmas.append(solved[1])
    bases = [
        [_slot_polys(bundle, comps[i], vec) for vec in flat[i]]
        for i in range(n)
    ]
    return bases, sigmas


class ChainWitness:
    """Chains assembled from glued bases: their multidegrees, section
    vectors, and the two sides of the dimension identity per chain."""

    __slots__ = ("multidegrees", "vectors", "identity")

    def __init__(self, multidegrees, vectors, identity):
        self.multidegrees = list(multidegrees)
        self.vectors = list(vectors)
        self.identity = list(identity)

    def __repr__(self):
        return "ChainWitness(%r)" % (
            [tuple(w) for w in self.multidegrees],
        )


def _filtered_component(s, v, w):
    bundle = s.bundle
    sub = s.spaces[v]
    for e in bundle.graph.incident_edges(v):
        t = t_value(s.cfg, w, e.id, v)
        if t > 0:
            sub = _order_cut(
                sub, bundle.splits[v], bundle.node(e.id, v), t
            )
    return sub


def constrained_witness_from_chain(s, require_condition_I=True):
    """Candidate constrained witness read off the glued chain bases.

    Each chain concentrates in one multidegree; the reported identity
    compares the total filtered component dimension there with k plus
    the overlap counts of the vanishing sequences at the edges."""
    bases, sigmas = chain_global_bases(
        s, require_condition_I=require_condition_I
    )
    bundle = s.bundle
    cfg = s.cfg
    comps, edges = _chain_layout(s)
    mds, vecs, ident = [], [], []
    for j0 in range(cfg.k):
        parts = {comps[0]: bases[0][j0]}
        twists = {}
        idx = j0
        for i, eid in enumerate(edges):
            left = comps[i]
            p = bundle.node(eid, left)
            c = min(
                q.order_at(p) for q in parts[left] if not q.is_zero()
            )
            e = cfg.graph.edge(eid)
            twists[eid] = c if e.tail == left else cfg.b - c
            idx = sigmas[i][idx]
            parts[comps[i + 1]] = bases[i + 1][idx]
        w = md_from_twists(cfg, twists)
        st = SectionTuple(bundle, w, {v: parts[v] for v in parts})
        mds.append(w)
        vecs.append(st.vector())
        lhs = sum(
            _filtered_component(s, v, w).dim
            for v in cfg.graph.vertex_ids
        )
        rhs = cfg.k
        for i, eid in enumerate(edges):
            left = comps[i]
            bi = t_value(cfg, w, eid, left)
            seq = vanishing_sequence(
                s.spaces[left], bundle.node(eid, left), bundle.splits[left]
            )
            ell = min(t + 1 for t in range(cfg.k) if seq[t] >= bi)
            m = max(t + 1 for t in range(cfg.k) if seq[t] <= bi)
            rhs += m + 1 - ell
        ident.append((lhs, rhs))
    return ChainWitness(mds, vecs, ident)


# ------------------------------------------------------------- extension

def extend_from_bar(ls, w):
    """Section space at any multidegree, transported from the nearest
    window vertex along a minimal move sequence; well defined because
    the images agree for every choice of start."""
    if ls.variant != "II":
        raise ValueError("extension needs the bounded-window family")
    cfg = ls.cfg
    w = cfg.md(w)
    if not is_vertex_GII(cfg, w):
        raise ValueError("multidegree is not a graph vertex")
    if w in set(ls.multidegrees):
        return ls.space(w)
    best = None
    for w0 in ls.multidegrees:
        counts = minimal_path_II(cfg, w0, w)
        key = (sum(counts.values()), tuple(w0))
        if best is None or key < best[0]:
            best = (key, w0, counts)
    _, w0, counts = best
    verts = [u for u in sorted(counts) for _ in range(counts[u])]
    img = path_image(ls.bundle, ls.space(w0), w0, verts)
    if img.dim != cfg.k:
        raise RuntimeError("extension loses dimension at %s" % (tuple(w),))
    return img


# ----------------------------------------------------------- rebalancing

def _edge_transfers(cfg, b2, dv2):
    """Per edge-side twist increments realizing the new degrees; unique
    on a tree, found by stripping leaves."""
    graph = cfg.graph
    if set(dv2) != set(graph.vertex_ids):
        raise ValueError("dv keys do not match vertex ids")
    db = b2 - cfg.b
    if db < 0:
        raise ValueError("the twist bound can only grow")
    need = {}
    for v in graph.vertex_ids:
        diff = dv2[v] - cfg.dv[v]
        if diff % cfg.r:
            raise ValueError("degree change at %r not divisible by r" % v)
        need[v] = diff // cfg.r
        if need[v] < 0:
            raise ValueError("component degree at %r would drop" % v)
    if sum(need.values()) != len(graph.edges) * db:
        raise ValueError("degree changes do not match the bound change")
    delta = {}
    deg = {v: graph.valence(v) for v in graph.vertex_ids}
    alive = {e.id for e in graph.edges}
    left = dict(need)
    queue = [v for v in graph.vertex_ids if deg[v] == 1]
    while alive:
        v = queue.pop()
        eid = next(
            e.id for e in graph.incident_edges(v) if e.id in alive
        )
        u = graph.edge(eid).other(v)
        take = left[v]
        if take < 0 or db - take < 0:
            raise ValueError("no admissible transfer of twists")
        delta[(eid, v)] = take
        delta[(eid, u)] = db - take
        left[v] = 0
        left[u] -= db - take
        alive.remove(eid)
        deg[v] -= 1
        deg[u] -= 1
        if deg[u] == 1:
            queue.append(u)
    if any(left[v] for v in left):
        raise ValueError("no admissible transfer of twists")
    return delta


def _rebalanced_bundle(bundle, b2, dv2):
    cfg = bundle.cfg
    delta = _edge_transfers(cfg, b2, dv2)
    graph = cfg.graph
    splits2 = {}
    for v in graph.vertex_ids:
        grow = sum(
            delta.get((e.id, v), 0) for e in graph.incident_edges(v)
        )
        splits2[v] = tuple(c + grow for c in bundle.splits[v])
    gluings2 = {}
    for e in graph.edges:
        scale = Fraction(1)
        for v, sign in ((e.head, 1), (e.tail, -1)):
            p = bundle.node(e.id, v)
            for f in graph.incident_edges(v):
                if f.id == e.id:
                    continue
                d = delta.get((f.id, v), 0)
                if d:
                    fac = (p - bundle.node(f.id, v)) ** d
                    scale = scale * fac if sign > 0 else scale / fac
        gluings2[e.id] = bundle.gluing(e.id).scale(scale)
    cfg2 = DegreeConfig(
        graph, cfg.r, cfg.d, cfg.k, b2, {v: dv2[v] for v in graph.vertex_ids}
    )
    bundle2 = CurveBundle(cfg2, splits2, bundle.nodes, gluings2)
    return bundle2, delta


def _lift_matrix(bundle, bundle2, delta, v):
    """Multiplication by the vanishing factors at v, as a map of flat
    component coefficient vectors."""
    graph = bundle.graph
    fac = Poly.one()
    for e in graph.incident_edges(v):
        d = delta.get((e.id, v), 0)
        if d:
            fac = fac * (Poly.x() - bundle.node(e.id, v)) ** d
    fc = list(fac.coeffs)
    rows = []
    width = _comp_width(bundle.splits[v])
    for j, c in enumerate(bundle.splits[v]):
        c2 = bundle2.splits[v][j]
        pos = sum(x + 1 for x in bundle.splits[v][:j])
        for mm in range(c2 + 1):
            row = [Fraction(0)] * width
            for i in range(c + 1):
                if 0 <= mm - i < len(fc):
                    row[pos + i] = fc[mm - i]
            rows.append(row)
    return MatQ.from_rows(rows, cols=width)


def _ambient_lift(bundle, bundle2, delta):
    per = {
        v: _lift_matrix(bundle, bundle2, delta, v)
        for v in bundle.graph.vertex_ids
    }
    rows = []
    for v in bundle.graph.vertex_ids:
        start = bundle.block(v, 0)[0]
        width = _comp_width(bundle.splits[v])
        for row in per[v].data:
            full = [Fraction(0)] * bundle.ambient_dim
            full[start:start + width] = list(row)
            rows.append(full)
    return MatQ.from_rows(rows, cols=bundle.ambient_dim), per


def increase_b(obj, b2, dv2):
    """Raise the twist bound to b2 with component degrees dv2.

    Sections transport by multiplying with the node vanishing factors;
    a bundle, componentwise series, or multidegree family comes back as
    the same kind of object over the rebalanced bundle.  For families,
    multidegrees new to the larger window are filled in by transport
    from the nearest previously filled one.
    """
    if isinstance(obj, CurveBundle):
        return _rebalanced_bundle(obj, b2, dv2)[0]
    if isinstance(obj, EHTSeries):
        bundle2, delta = _rebalanced_bundle(obj.bundle, b2, dv2)
        _, per = _ambient_lift(obj.bundle, bundle2, delta)
        spaces = {
            v: per[v].image_of(obj.spaces[v])
            for v in obj.bundle.graph.vertex_ids
        }
        return EHTSeries(bundle2, spaces, require_condition_I=False)
    if isinstance(obj, LinkedSeries):
        if obj.variant != "II":
            raise ValueError("rebalancing needs the bounded-window family")
        bundle2, delta = _rebalanced_bundle(obj.bundle, b2, dv2)
        lift, _ = _ambient_lift(obj.bundle, bundle2, delta)
        cfg2 = bundle2.cfg
        filled = {}
        for w in obj.multidegrees:
            filled[cfg2.md(tuple(w))] = lift.image_of(obj.space(w))
        spaces = dict(filled)
        for w in _window_keys(cfg2, "II"):
            if w in spaces:
                continue
            best = None
            for w0 in filled:
                counts = minimal_path_II(cfg2, w0, w)
                key = (sum(counts.values()), tuple(w0))
                if best is None or key < best[0]:
                    best = (key, w0, counts)
            _, w0, counts = best
            verts = [u for u in sorted(counts) for _ in range(counts[u])]
            spaces[w] = path_image(bundle2, filled[w0], w0, verts)
        return LinkedSeries(bundle2, spaces, variant="II")
    raise TypeError("cannot rebalance %r" % type(obj).__name__)


def condition_I_target(bundle):
    """Smallest uniform rebalancing after which every splitting degree
    is bounded by the twist bound."""
    cfg = bundle.cfg
    worst = max(c for v in bundle.splits for c in bundle.splits[v])
    excess = max(0, worst - cfg.b)
    if excess == 0:
        return cfg.b, dict(cfg.dv)
    nv = len(cfg.graph.vertex_ids)
    b2 = cfg.b + nv * excess
    dv2 = {
        v: cfg.dv[v] + cfg.r * (nv - 1) * excess
        for v in cfg.graph.vertex_ids
    }
    return b2, dv2


# -------------------------------------------------------------- subcurves

def restrict_to_subcurve(s, vertices):
    """Componentwise series induced on a connected set of components."""
    cfg = s.cfg
    graph = cfg.graph
    keep = set(vertices)
    unknown = keep - set(graph.vertex_ids)
    if unknown:
        raise ValueError("unknown vertex %r" % sorted(unknown)[0])
    ids = [v for v in graph.vertex_ids if v in keep]
    if not ids:
        raise ValueError("empty subcurve")
    edges = [
        e for e in graph.edges if e.tail in keep and e.head in keep
    ]
    seen = {ids[0]}
    stack = [ids[0]]
    while stack:
        u = stack.pop()
        for e in edges:
            if u in (e.tail, e.head):
                x = e.other(u)
                if x not in seen:
                    seen.add(x)
                    stack.append(x)
    if seen != keep:
        raise ValueError("subcurve is not connected")
    g2 = DualGraph(
        [(v, graph.genus[v]) for v in ids],
        [(e.id, e.tail, e.head) for e in edges],
    )
    d2 = sum(cfg.dv[v] for v in ids) - len(edges) * cfg.r * cfg.b
    cfg2 = DegreeConfig(
        g2, cfg.r, d2, cfg.k, cfg.b, {v: cfg.dv[v] for v in ids}
    )
    bundle2 = CurveBundle(
        cfg2,
        {v: s.bundle.splits[v] for v in ids},
        {
            kk: s.bundle.nodes[kk]
            for kk in s.bundle.nodes
            if kk[0] in {e.id for e in edges}
        },
        {e.id: s.bundle.gluing(e.id) for e in edges},
    )
    return EHTSeries(
        bundle2,
        {v: s.spaces[v] for v in ids},
        require_condition_I=False,
    )
