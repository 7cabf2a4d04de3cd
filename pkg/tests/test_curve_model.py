import random
from fractions import Fraction

import pytest

from conftest import chain_graph, random_bundle, random_tree

from limitseries.curve_model import (
    CurveBundle,
    SectionTuple,
    apply_path,
    apply_step_I,
    apply_twist,
    condition_I_holds,
    determinant_data,
    global_sections,
    node_fiber_value,
    path_image,
    restriction_injective,
    same_determinant_class,
    section_order_at,
    stability_inequality,
)
from limitseries.degree_graph import (
    DegreeConfig,
    DualGraph,
    Multidegree,
    enumerate_bar_GII,
    extremal_vertex,
    minimal_path_II,
)
from limitseries.exactlinalg import Poly, Subspace


def one_vertex_bundle(c):
    g = DualGraph([("v1", 0)], [])
    cfg = DegreeConfig(g, r=1, d=c, k=1, b=0, dv={"v1": c})
    return cfg, CurveBundle(cfg, {"v1": (c,)}, {}, {})


# ------------------------------------------------------------ sections


def test_single_component_dimension():
    cfg, bundle = one_vertex_bundle(2)
    assert global_sections(bundle, Multidegree((2,))).dim == 3


def test_two_components_riemann_roch():
    g = chain_graph(2)
    cfg = DegreeConfig(g, r=1, d=2, k=1, b=0, dv={"v1": 1, "v2": 1})
    bundle = CurveBundle(
        cfg,
        {"v1": (1,), "v2": (1,)},
        {("e1", "v1"): 0, ("e1", "v2"): 1},
        {"e1": [[2]]},
    )
    assert global_sections(bundle, Multidegree((1, 1))).dim == 3


def test_two_components_twisted():
    g = chain_graph(2)
    cfg = DegreeConfig(g, r=1, d=1, k=1, b=1, dv={"v1": 1, "v2": 1})
    bundle = CurveBundle(
        cfg,
        {"v1": (1,), "v2": (1,)},
        {("e1", "v1"): 0, ("e1", "v2"): 1},
        {"e1": [[1]]},
    )
    assert global_sections(bundle, Multidegree((1, 0))).dim == 2
    assert global_sections(bundle, Multidegree((0, 1))).dim == 2


def test_bad_compare_dimensions(bad_compare):
    cfg, bundle = bad_compare
    for w in enumerate_bar_GII(cfg):
        assert global_sections(bundle, w).dim == 3


def test_bad_compare_vanishing_on_middle(bad_compare):
    cfg, bundle = bad_compare
    w = Multidegree((1, 0, 1))
    h0 = global_sections(bundle, w)
    # sections identically zero on the middle component form a plane
    # spanned by one section per outer component
    x1 = SectionTuple(
        bundle, w,
        {"v1": (Poly((0, 1)),), "v2": (Poly.zero(),), "v3": (Poly.zero(),)},
    )
    x3 = SectionTuple(
        bundle, w,
        {"v1": (Poly.zero(),), "v2": (Poly.zero(),), "v3": (Poly((0, 1)),)},
    )
    assert h0.contains(x1.vector())
    assert h0.contains(x3.vector())
    killed = Subspace.from_vectors(
        bundle.ambient_dim,
        [v for v in h0.basis
         if SectionTuple.from_vector(bundle, w, v).polys["v2"][0].is_zero()],
    )
    assert killed.dim == 2


def test_global_sections_outside_window(bad_compare):
    cfg, bundle = bad_compare
    with pytest.raises(ValueError):
        global_sections(bundle, Multidegree((-1, 2, 1)))


def test_section_validation(bad_compare):
    cfg, bundle = bad_compare
    w = Multidegree((0, 2, 0))
    with pytest.raises(ValueError):  # degree too high on v2
        SectionTuple(bundle, w, {
            "v1": (Poly.zero(),),
            "v2": (Poly((0, 0, 0, 1)),),
            "v3": (Poly.zero(),),
        })
    with pytest.raises(ValueError):  # missing divisibility at the node
        SectionTuple(bundle, w, {
            "v1": (Poly.one(),),
            "v2": (Poly.zero(),),
            "v3": (Poly.zero(),),
        })
    with pytest.raises(ValueError):  # gluing value mismatch
        SectionTuple(bundle, w, {
            "v1": (Poly((0, 1)),),
            "v2": (Poly.one(),),
            "v3": (Poly.zero(),),
        })


# ------------------------------------------------------------ twist maps


def test_twist_image_frozen(bad_compare):
    cfg, bundle = bad_compare
    w = Multidegree((0, 2, 0))
    q2 = Poly((6, -5, 1))  # (x-2)(x-3)
    s2 = SectionTuple(bundle, w, {
        "v1": (Poly((0, 6)),),   # q2(0) * x
        "v2": (q2,),
        "v3": (Poly((0, 2)),),   # q2(1) * x
    })
    out = apply_twist(bundle, s2, "v2")
    assert out.w == Multidegree((1, 0, 1))
    assert out.polys["v2"][0].is_zero()
    assert out.polys["v1"][0] == Poly((0, 6))
    assert out.polys["v3"][0] == Poly((0, 2))


def test_path_kernel_is_vanishing_locus(bad_compare):
    # sections killed by the move at v2 are those vanishing off {v2}
    cfg, bundle = bad_compare
    w = Multidegree((0, 2, 0))
    h0 = global_sections(bundle, w)
    killed = []
    for vec in h0.basis_combinations(range(-2, 3)):
        s = SectionTuple.from_vector(bundle, w, vec)
        if apply_twist(bundle, s, "v2").is_zero():
            killed.append(vec)
    ker = Subspace.from_vectors(bundle.ambient_dim, killed)
    assert ker.dim == 1
    s = SectionTuple.from_vector(bundle, w, ker.basis[0])
    assert s.polys["v1"][0].is_zero()
    assert s.polys["v3"][0].is_zero()
    assert not s.polys["v2"][0].is_zero()


def test_path_order_independence(bad_compare, rng):
    cfg, bundle = bad_compare
    w = Multidegree((0, 2, 0))
    h0 = global_sections(bundle, w)
    for _ in range(3):
        coeffs = [rng.randint(-3, 3) for _ in h0.basis]
        vec = h0.combine(coeffs)
        s = SectionTuple.from_vector(bundle, w, vec)
        verts = [rng.choice(cfg.graph.vertex_ids) for _ in range(4)]
        perm = list(verts)
        rng.shuffle(perm)
        a = apply_path(bundle, s, verts)
        b = apply_path(bundle, s, perm)
        assert a.w == b.w and a.polys == b.polys


def test_full_vertex_path_is_zero(bad_compare, rng):
    cfg, bundle = bad_compare
    w = Multidegree((0, 2, 0))
    h0 = global_sections(bundle, w)
    vec = h0.combine([1, 1, 1])
    s = SectionTuple.from_vector(bundle, w, vec)
    out = apply_path(bundle, s, list(cfg.graph.vertex_ids))
    assert out.is_zero()


def test_empty_path_is_identity(bad_compare):
    cfg, bundle = bad_compare
    w = Multidegree((0, 2, 0))
    s = SectionTuple.from_vector(
        bundle, w, global_sections(bundle, w).basis[0]
    )
    out = apply_path(bundle, s, [])
    assert out.w == w and out.polys == s.polys


def test_step_I_matches_component_path(bad_compare):
    cfg, bundle = bad_compare
    w = Multidegree((0, 2, 0))
    s = SectionTuple.from_vector(
        bundle, w, global_sections(bundle, w).basis[0]
    )
    out = apply_step_I(bundle, s, "e1", "v2")
    # decreasing side of e1 at v2 is the component {v2, v3}
    ref = apply_path(bundle, s, ["v2", "v3"])
    assert out.w == ref.w and out.polys == ref.polys
    assert out.w == Multidegree((1, 1, 0))


def test_path_image_subset_property(rng):
    for n in (2, 3):
        g = random_tree(rng, n)
        dv = {v: rng.randint(1, 2) for v in g.vertex_ids}
        d = sum(dv.values()) - len(g.edges)
        cfg = DegreeConfig(g, r=1, d=d, k=1, b=1, dv=dv)
        bundle = random_bundle(rng, cfg)
        bar = enumerate_bar_GII(cfg)
        w = rng.choice(bar)
        w2 = rng.choice(bar)
        ms = minimal_path_II(cfg, w, w2)
        verts = [v for v in sorted(ms) for _ in range(ms[v])]
        h0 = global_sections(bundle, w)
        img = path_image(bundle, h0, w, verts)
        assert global_sections(bundle, w2).contains_subspace(img)


def test_nonzero_path_image_means_nonvanishing(rng):
    # if the move sequence into the extremal multidegree at v does not
    # kill s, then s is not identically zero on component v; needs the
    # splitting-degree bound so that restriction at the extremes is
    # injective
    for _ in range(10):
        g = random_tree(rng, 3)
        dv = {v: 1 for v in g.vertex_ids}
        d = sum(dv.values()) - len(g.edges)
        cfg = DegreeConfig(g, r=1, d=d, k=1, b=1, dv=dv)
        bundle = random_bundle(rng, cfg, condition_I=True)
        bar = enumerate_bar_GII(cfg)
        w = rng.choice(bar)
        h0 = global_sections(bundle, w)
        vec = h0.combine([rng.randint(-2, 2) for _ in h0.basis])
        s = SectionTuple.from_vector(bundle, w, vec)
        for v in cfg.graph.vertex_ids:
            ms = minimal_path_II(cfg, w, extremal_vertex(cfg, v))
            verts = [u for u in sorted(ms) for _ in range(ms[u])]
            out = apply_path(bundle, s, verts)
            if not out.is_zero():
                assert not all(q.is_zero() for q in s.polys[v])


# ------------------------------------------------------------ conditions


def test_condition_I(bad_compare):
    g = chain_graph(2)
    cfg = DegreeConfig(g, r=1, d=0, k=1, b=1, dv={"v1": 1, "v2": 0})
    good = CurveBundle(
        cfg, {"v1": (1,), "v2": (0,)},
        {("e1", "v1"): 0, ("e1", "v2"): 0}, {"e1": [[1]]},
    )
    assert condition_I_holds(good)
    cfg2 = DegreeConfig(g, r=1, d=1, k=1, b=1, dv={"v1": 2, "v2": 0})
    bad = CurveBundle(
        cfg2, {"v1": (2,), "v2": (0,)},
        {("e1", "v1"): 0, ("e1", "v2"): 0}, {"e1": [[1]]},
    )
    assert not condition_I_holds(bad)
    assert not condition_I_holds(bad_compare[1])


def test_restriction_injective(bad_compare):
    cfg, bundle = bad_compare
    w2 = extremal_vertex(cfg, "v2")
    assert restriction_injective(bundle, w2, "v2")
    cfg1, b1 = one_vertex_bundle(2)
    assert restriction_injective(b1, Multidegree((2,)), "v1")


def test_restriction_injective_randomized(rng):
    # under the splitting-degree bound the restriction map never has
    # kernel at the extremal multidegree
    for _ in range(15):
        n = rng.randint(2, 3)
        r = rng.randint(1, 2)
        b = rng.randint(1, 2)
        g = random_tree(rng, n)
        dv = {v: r * b for v in g.vertex_ids}
        d = sum(dv.values()) - len(g.edges) * r * b
        cfg = DegreeConfig(g, r=r, d=d, k=1, b=b, dv=dv)
        bundle = random_bundle(rng, cfg, condition_I=True)
        assert condition_I_holds(bundle)
        for v in cfg.graph.vertex_ids:
            assert restriction_injective(bundle, extremal_vertex(cfg, v), v)


def test_dimension_invariances(bad_compare, rng):
    cfg, bundle = bad_compare
    w = Multidegree((1, 1, 0))
    base = global_sections(bundle, w).dim
    scaled = CurveBundle(
        cfg, bundle.splits,
        {k: v for k, v in bundle.nodes.items()},
        {"e1": [[5]], "e2": [[Fraction(-1, 3)]]},
    )
    assert global_sections(scaled, w).dim == base
    shifted = CurveBundle(
        cfg, bundle.splits,
        {k: v + 7 for k, v in bundle.nodes.items()},
        {"e1": [[1]], "e2": [[1]]},
    )
    assert global_sections(shifted, w).dim == base


# ------------------------------------------------------------ determinant


def test_determinant_rank_one(bad_compare):
    cfg, bundle = bad_compare
    det_b = determinant_data(bundle)
    assert det_b.splits == bundle.splits
    assert det_b.gluing("e1").data == bundle.gluing("e1").data
    assert same_determinant_class(det_b, bundle)


def test_determinant_rank_two():
    g = chain_graph(2)
    cfg = DegreeConfig(g, r=2, d=4, k=1, b=0, dv={"v1": 2, "v2": 2})
    bundle = CurveBundle(
        cfg, {"v1": (1, 1), "v2": (2, 0)},
        {("e1", "v1"): 0, ("e1", "v2"): 0},
        {"e1": [[1, 2], [3, 4]]},
    )
    det_b = determinant_data(bundle)
    assert det_b.splits == {"v1": (2,), "v2": (2,)}
    assert det_b.gluing("e1").data == ((Fraction(-2),),)


def test_determinant_rescale_invariance(rng):
    g = chain_graph(2)
    cfg = DegreeConfig(g, r=1, d=2, k=1, b=0, dv={"v1": 1, "v2": 1})
    nodes = {("e1", "v1"): 0, ("e1", "v2"): 1}
    b1 = CurveBundle(cfg, {"v1": (1,), "v2": (1,)}, nodes, {"e1": [[2]]})
    b2 = CurveBundle(cfg, {"v1": (1,), "v2": (1,)}, nodes, {"e1": [[7]]})
    assert same_determinant_class(determinant_data(b1), determinant_data(b2))


# ------------------------------------------------------------ stability


def test_stability_boundary(bad_compare):
    cfg, bundle = bad_compare
    chi = bundle.euler_characteristic()
    data = {"ranks": {v: 1 for v in cfg.graph.vertex_ids}, "chi": chi}
    assert stability_inequality(bundle, data, l_mode=True) == (
        "semistable-boundary"
    )


def test_stability_violating_line():
    g = chain_graph(2)
    cfg = DegreeConfig(g, r=2, d=0, k=1, b=0, dv={"v1": 0, "v2": 0})
    bundle = CurveBundle(
        cfg, {"v1": (0, 0), "v2": (0, 0)},
        {("e1", "v1"): 0, ("e1", "v2"): 0},
        {"e1": [[1, 0], [0, 1]]},
    )
    # chi(E) = 2+2 - 2 = 2; a line subsheaf with chi = 2 beats 2/2
    data = {"ranks": {"v1": 1, "v2": 1}, "chi": 2}
    assert stability_inequality(bundle, data, l_mode=True) == "violating"


def test_stability_polarization_validation(bad_compare):
    cfg, bundle = bad_compare
    data = {"ranks": {v: 1 for v in cfg.graph.vertex_ids}, "chi": 1}
    with pytest.raises(ValueError):
        stability_inequality(
            bundle, data,
            polarization={v: Fraction(1, 2) for v in cfg.graph.vertex_ids},
        )
    pol = {"v1": Fraction(1, 2), "v2": Fraction(1, 4), "v3": Fraction(1, 4)}
    assert stability_inequality(bundle, data, polarization=pol) in (
        "stable", "semistable-boundary", "violating"
    )


# ------------------------------------------------------------ misc


def test_node_fiber_and_orders(bad_compare):
    cfg, bundle = bad_compare
    w = Multidegree((0, 2, 0))
    q2 = Poly((6, -5, 1))
    s2 = SectionTuple(bundle, w, {
        "v1": (Poly((0, 6)),),
        "v2": (q2,),
        "v3": (Poly((0, 2)),),
    })
    assert node_fiber_value(bundle, s2, "e1", "v2") == (Fraction(6),)
    assert node_fiber_value(bundle, s2, "e1", "v1") == (Fraction(6),)
    assert section_order_at(bundle, s2, "v2", 5) == 0
    assert section_order_at(bundle, s2, "v2", 2) == 1
    zero = SectionTuple(bundle, w, {
        "v1": (Poly.zero(),), "v2": (Poly.zero(),), "v3": (Poly.zero(),),
    })
    assert section_order_at(bundle, zero, "v2", 2) is None
