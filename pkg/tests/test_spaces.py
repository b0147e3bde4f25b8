import math
import random
from fractions import Fraction

import pytest

from cat0lab import groups as G
from cat0lab import spaces as S


F2 = G.free_group(2)
UNIT = S.WeightedTree(F2, G.unit_weights(F2))
T21 = S.WeightedTree(F2, G.weights_from(F2, {"a": 2, "b": 1}))
ZZ_Z2 = G.FreeProduct((G.free_abelian(2), G.FiniteCyclic(2, "s")))
SIGMA = S.FreeProductComplex(ZZ_Z2, (S.flat_piece((1, 0), (0, 1)), S.IntervalPiece(Fraction(1))))


def w(text, fam=F2):
    return G.parse_element(fam, text)


def vp(tree, text):
    return S.vertex_point(tree, w(text, tree.group))


def rand_vertex(tree, rng, radius):
    codes = G.letter_codes(tree.group)
    g = G.identity(tree.group)
    for _ in range(rng.randrange(radius + 1)):
        g = G.append_letter(g, rng.choice(codes))
    return S.vertex_point(tree, g)


def rand_point(tree, rng, radius):
    v = rand_vertex(tree, rng, radius)
    if rng.random() < 0.4:
        return v
    code = rng.choice(G.letter_codes(tree.group))
    wgt = tree.letter_weight(code)
    off = Fraction(rng.randrange(1, 8), 8) * wgt
    return S.tree_point(tree, v.vertex, code, off)


# --- trees ------------------------------------------------------------


def test_tree_distance_examples():
    assert S.tree_distance(UNIT, vp(UNIT, "e"), vp(UNIT, "a b")) == 2
    assert S.tree_distance(T21, vp(T21, "e"), vp(T21, "a b")) == 3


def test_tree_point_canonical_orientation():
    # same mid-edge point described from both endpoints
    p1 = S.tree_point(UNIT, w("a"), 0, Fraction(1, 2))          # a-edge outward from a
    p2 = S.tree_point(UNIT, w("a^2"), 1, Fraction(1, 2))        # described from a^2 going back
    assert p1 == p2
    assert S.tree_point(UNIT, w("a"), 0, Fraction(0)) == vp(UNIT, "a")
    assert S.tree_point(UNIT, w("a"), 0, Fraction(1)) == vp(UNIT, "a^2")


def test_tree_metric_axioms_random():
    rng = random.Random(5)
    for _ in range(200):
        p, q, r = (rand_point(T21, rng, 4) for _ in range(3))
        dpq = S.tree_distance(T21, p, q)
        assert dpq == S.tree_distance(T21, q, p)
        assert (dpq == 0) == (p == q)
        assert S.tree_distance(T21, p, r) <= dpq + S.tree_distance(T21, q, r)


def test_tree_geodesic_eval_examples():
    assert S.tree_geodesic_eval(UNIT, vp(UNIT, "e"), vp(UNIT, "a b"), 0) == vp(UNIT, "e")
    mid = S.tree_geodesic_eval(UNIT, vp(UNIT, "e"), vp(UNIT, "a^2"), 1)
    assert mid == vp(UNIT, "a")
    # cumulative-weight walk: s = 2.5 on [e, ab] with weights a=2, b=1
    p = S.tree_geodesic_eval(T21, vp(T21, "e"), vp(T21, "a b"), Fraction(5, 2))
    assert p.vertex == w("a") and p.offset == Fraction(1, 2)
    assert G.letter_name(F2, p.edge) == ("b", 1)


def test_tree_geodesic_endpoint_and_unit_speed():
    rng = random.Random(9)
    for _ in range(60):
        p, q = rand_point(T21, rng, 4), rand_point(T21, rng, 4)
        d = S.tree_distance(T21, p, q)
        assert S.tree_geodesic_eval(T21, p, q, d) == q
        if d == 0:
            continue
        s1 = Fraction(rng.randrange(0, 16), 16) * d
        s2 = Fraction(rng.randrange(0, 16), 16) * d
        e1 = S.tree_geodesic_eval(T21, p, q, s1)
        e2 = S.tree_geodesic_eval(T21, p, q, s2)
        assert S.tree_distance(T21, e1, e2) == abs(s1 - s2)


def test_tree_out_of_range():
    with pytest.raises(S.SpaceError):
        S.tree_geodesic_eval(UNIT, vp(UNIT, "e"), vp(UNIT, "a"), 2)


# --- products ---------------------------------------------------------


X = S.ProductSpace(UNIT)


def pp(text, h):
    return S.ProductPoint(vp(UNIT, text), Fraction(h))


def test_product_distance_examples():
    assert S.product_distance(X, pp("e", 0), pp("e", 5)) == 5
    # (a^i b^i)^n has 2ni unit letters; with height 2ni the distance is 2ni*sqrt(2)
    for i, n in [(1, 3), (2, 2), (3, 1)]:
        g = G.power(w("a^%d b^%d" % (i, i)), n)
        d = S.product_distance(X, pp("e", 0), S.ProductPoint(S.vertex_point(UNIT, g), 2 * n * i))
        assert math.isclose(d, 2 * n * i * math.sqrt(2), rel_tol=1e-12)


def test_product_triangle_inequality_random():
    rng = random.Random(13)
    for _ in range(500):
        pts = [S.ProductPoint(rand_point(UNIT, rng, 3), Fraction(rng.randrange(-12, 13), 4))
               for _ in range(3)]
        a, b, c = pts
        assert S.product_distance(X, a, c) <= S.product_distance(X, a, b) + S.product_distance(X, b, c) + 1e-12


def test_product_geodesic_eval():
    p, q = pp("e", 0), pp("a^4", 4)
    L = S.product_distance(X, p, q)
    assert S.product_geodesic_eval(X, p, q, L) == q
    m = S.product_geodesic_eval(X, p, q, 2 * math.sqrt(2))
    assert m.tree_pt == vp(UNIT, "a^2") and math.isclose(m.height, 2)


def test_product_geodesic_projections():
    # tree projection of the product geodesic is the tree geodesic at speed cos(phi)
    rng = random.Random(17)
    for _ in range(100):
        p = S.ProductPoint(rand_point(UNIT, rng, 3), Fraction(rng.randrange(-8, 9), 2))
        q = S.ProductPoint(rand_point(UNIT, rng, 3), Fraction(rng.randrange(-8, 9), 2))
        dt = S.tree_distance(UNIT, p.tree_pt, q.tree_pt)
        L = S.product_distance(X, p, q)
        if L == 0 or dt == 0:
            continue
        s = rng.random() * L
        ev = S.product_geodesic_eval(X, p, q, s)
        cos_phi = float(dt) / L
        tree_ev = S.tree_geodesic_eval(UNIT, p.tree_pt, q.tree_pt, s * cos_phi)
        assert S.tree_distance(UNIT, ev.tree_pt, tree_ev) < 1e-9
        # height projection is affine in s
        expect_h = float(p.height) + s * float(q.height - p.height) / L
        assert abs(float(ev.height) - expect_h) < 1e-9


def test_midpoint_convexity_all_spaces():
    # CAT(0) convexity: d(m1, m2) <= (d(x1,y1) + d(x2,y2)) / 2
    rng = random.Random(23)
    for _ in range(100):
        x1 = S.ProductPoint(rand_point(UNIT, rng, 3), Fraction(rng.randrange(-6, 7)))
        y1 = S.ProductPoint(rand_point(UNIT, rng, 3), Fraction(rng.randrange(-6, 7)))
        x2 = S.ProductPoint(rand_point(UNIT, rng, 3), Fraction(rng.randrange(-6, 7)))
        y2 = S.ProductPoint(rand_point(UNIT, rng, 3), Fraction(rng.randrange(-6, 7)))
        m1 = S.product_geodesic_eval(X, x1, x2, S.product_distance(X, x1, x2) / 2)
        m2 = S.product_geodesic_eval(X, y1, y2, S.product_distance(X, y1, y2) / 2)
        lhs = S.product_distance(X, m1, m2)
        rhs = (S.product_distance(X, x1, y1) + S.product_distance(X, x2, y2)) / 2
        assert lhs <= rhs + 1e-9
    for _ in range(100):
        p, q, r, t = (rand_point(T21, rng, 4) for _ in range(4))
        m1 = S.tree_geodesic_eval(T21, p, r, S.tree_distance(T21, p, r) / 2)
        m2 = S.tree_geodesic_eval(T21, q, t, S.tree_distance(T21, q, t) / 2)
        assert S.tree_distance(T21, m1, m2) <= (S.tree_distance(T21, p, q) + S.tree_distance(T21, r, t)) / 2


# --- point to segment ---------------------------------------------------


def test_point_on_path_distance_zero():
    path = S.geodesic(X, pp("e", 0), pp("a^3", 0))
    x = pp("a", 0)
    d, foot = S.point_to_segment_distance(X, x, path)
    assert d == 0 and math.isclose(foot, 1)


def test_point_to_segment_tree_plus_height():
    # d((b,0), [(e,0),(a^3,0)]) = 1: tree distance from b to the arc is 1
    path = S.geodesic(X, pp("e", 0), pp("a^3", 0))
    d, foot = S.point_to_segment_distance(X, pp("b", 0), path)
    assert d == 1 and math.isclose(foot, 0)


def test_point_to_segment_matches_dense_sampling():
    # distance to a geodesic is convex, so any sampling that brackets the
    # minimum pins it down after golden-section refinement; run a 1e4 grid on
    # a slice of the instances and a 1e3 grid on the rest
    rng = random.Random(31)
    for case in range(100):
        p = S.ProductPoint(rand_point(UNIT, rng, 3), Fraction(rng.randrange(-6, 7), 2))
        q = S.ProductPoint(rand_point(UNIT, rng, 3), Fraction(rng.randrange(-6, 7), 2))
        x = S.ProductPoint(rand_point(UNIT, rng, 3), Fraction(rng.randrange(-6, 7), 2))
        path = S.geodesic(X, p, q)
        d, _ = S.point_to_segment_distance(X, x, path)
        L = path.total
        if L == 0:
            assert math.isclose(d, S.product_distance(X, x, p))
            continue
        n = 10000 if case < 10 else 1000
        samples = [i * L / n for i in range(n + 1)]
        vals = [S.product_distance(X, x, path.point_at(s)) for s in samples]
        k = min(range(len(vals)), key=vals.__getitem__)
        lo = samples[max(0, k - 1)]
        hi = samples[min(len(samples) - 1, k + 1)]
        refined, _ = S.bracketed_min(lambda s: S.product_distance(X, x, path.point_at(s)), lo, hi, 1e-12)
        assert abs(d - refined) < 1e-9


# --- complexes ----------------------------------------------------------


def cw(text):
    return G.parse_element(ZZ_Z2, text)


def test_complex_distance_examples():
    e = G.identity(ZZ_Z2)
    assert S.complex_distance(SIGMA, e, cw("s")) == 1
    d = S.complex_distance(SIGMA, e, cw("x y s x"))
    assert math.isclose(d, math.sqrt(2) + 1 + 1, rel_tol=1e-12)
    assert S.complex_distance(SIGMA, e, e) == 0


def test_complex_left_invariance():
    # enumerate elements with <= 3 syllables over small factor elements
    factor_elems = [cw(t) for t in ("x", "y", "x^-1", "x y")]
    elems = [G.identity(ZZ_Z2), cw("s")]
    for f in factor_elems:
        elems.append(f)
        elems.append(f * cw("s"))
        elems.append(cw("s") * f)
        elems.append(cw("s") * f * cw("s"))
    for g in elems:
        for h in elems:
            lhs = S.complex_distance(SIGMA, g, h)
            rhs = S.complex_distance(SIGMA, G.identity(ZZ_Z2), g.inverse() * h)
            assert math.isclose(lhs, rhs, rel_tol=0, abs_tol=1e-12)


def test_complex_geodesic_eval():
    e = G.identity(ZZ_Z2)
    g = cw("x^2 s")
    path = S.geodesic(SIGMA, S.glue_point(SIGMA, e), S.glue_point(SIGMA, g))
    assert path.point_at(0) == S.glue_point(SIGMA, e)
    # segment lengths 2 then 1: s=2 lands on the identified basepoint (2,0) x0
    assert path.point_at(2) == S.glue_point(SIGMA, cw("x^2"))
    assert path.point_at(path.total) == S.glue_point(SIGMA, g)


def test_complex_unit_speed_within_piece_and_global_contraction():
    e = G.identity(ZZ_Z2)
    g = cw("x y s x")
    path = S.geodesic(SIGMA, S.glue_point(SIGMA, e), S.glue_point(SIGMA, g))
    rng = random.Random(3)
    total = path.total
    for _ in range(50):
        s1, s2 = sorted(rng.random() * total for _ in range(2))
        p1, p2 = path.point_at(s1), path.point_at(s2)
        d = S.complex_point_distance(SIGMA, p1, p2)
        assert d <= (s2 - s1) + 1e-9
    # within the first flat piece the parameterization is unit speed
    s1, s2 = 0.3, 1.1
    d = S.complex_point_distance(SIGMA, path.point_at(s1), path.point_at(s2))
    assert math.isclose(d, s2 - s1, rel_tol=1e-9)


def test_complex_point_to_segment_center_on_path():
    e = G.identity(ZZ_Z2)
    path = S.geodesic(SIGMA, S.glue_point(SIGMA, e), S.glue_point(SIGMA, cw("x^2 s")))
    x = S.glue_point(SIGMA, cw("x"))
    dd, foot = S.complex_point_to_segment_sq(SIGMA, x, path)
    assert abs(dd) < 1e-12 and math.isclose(foot, 1)


def test_complex_piece_validation():
    with pytest.raises(S.SpaceError):
        S.FreeProductComplex(ZZ_Z2, (S.flat_piece((1, 0), (0, 1)),))
    with pytest.raises(S.SpaceError):
        S.FreeProductComplex(ZZ_Z2, (S.IntervalPiece(Fraction(1)), S.flat_piece((1,))))
    with pytest.raises(S.SpaceError):
        S.flat_piece((1, 0), (2, 0))


def test_cone_piece_distances():
    Z3 = G.FreeProduct((G.free_abelian(2), G.FiniteCyclic(3, "c")))
    CX = S.FreeProductComplex(Z3, (S.flat_piece((1, 0), (0, 1)), S.ConePiece(3, Fraction(1))))
    e = G.identity(Z3)
    c = G.generator(Z3, "c")
    # distinct orbit points in a cone piece are joined through the apex
    assert S.complex_distance(CX, e, c) == 2
    assert S.complex_distance(CX, e, c * c) == 2
    path = S.geodesic(CX, S.glue_point(CX, e), S.glue_point(CX, c))
    mid = path.point_at(1)
    assert mid.piece == 1 and mid.local[0] == -1  # the apex


def test_glue_point_canonicalization():
    # interior coordinates that happen to be a lattice point snap to the glue point
    p = S.complex_point(SIGMA, G.identity(ZZ_Z2), 0, (Fraction(2), Fraction(0)))
    assert p == S.glue_point(SIGMA, cw("x^2"))
    # trailing syllable of the prefix is absorbed into the piece coordinates
    q = S.complex_point(SIGMA, cw("x"), 0, (Fraction(1, 2), Fraction(0)))
    r = S.complex_point(SIGMA, G.identity(ZZ_Z2), 0, (Fraction(3, 2), Fraction(0)))
    assert q == r
