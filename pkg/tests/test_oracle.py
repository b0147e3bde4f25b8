import math
import random
from fractions import Fraction

from cat0lab import groups as G
from cat0lab import oracle as O
from cat0lab import spaces as S


F2 = G.free_group(2)
UNIT = S.WeightedTree(F2, G.unit_weights(F2))
T21 = S.WeightedTree(F2, G.weights_from(F2, {"a": 2, "b": 1}))
ZZ_Z2 = G.FreeProduct((G.free_abelian(2), G.FiniteCyclic(2, "s")))
SIGMA = S.FreeProductComplex(ZZ_Z2, (S.flat_piece((1, 0), (0, 1)), S.IntervalPiece(Fraction(1))))


def rand_point(tree, rng, radius):
    codes = G.letter_codes(tree.group)
    g = G.identity(tree.group)
    for _ in range(rng.randrange(radius + 1)):
        g = G.append_letter(g, rng.choice(codes))
    v = S.vertex_point(tree, g)
    if rng.random() < 0.5:
        return v
    code = rng.choice(codes)
    wgt = tree.letter_weight(code)
    return S.tree_point(tree, g, code, Fraction(rng.randrange(1, 4), 4) * wgt)


def test_tree_oracle_matches_exact_distance():
    rng = random.Random(42)
    for tree in (UNIT, T21):
        for _ in range(100):
            p, q = rand_point(tree, rng, 3), rand_point(tree, rng, 3)
            exact = float(S.tree_distance(tree, p, q))
            approx = O.tree_graph_distance(tree, p, q, mesh=Fraction(1, 4))
            assert abs(exact - approx) < 1e-9


def test_product_oracle_examples():
    X = S.ProductSpace(UNIT)
    e = S.vertex_point(UNIT, G.identity(F2))
    a2 = S.vertex_point(UNIT, G.parse_element(F2, "a^2"))
    p, q = S.ProductPoint(e, 0), S.ProductPoint(a2, 3)
    exact = S.product_distance(X, p, q)
    approx = O.product_graph_distance(X, p, q, mesh=Fraction(1, 100))
    assert abs(exact - approx) <= O.oracle_tolerance(Fraction(1, 100), 3)


def test_product_oracle_random():
    rng = random.Random(7)
    X = S.ProductSpace(T21)
    for _ in range(25):
        p = S.ProductPoint(rand_point(T21, rng, 3), Fraction(rng.randrange(-4, 5)))
        q = S.ProductPoint(rand_point(T21, rng, 3), Fraction(rng.randrange(-4, 5)))
        exact = S.product_distance(X, p, q)
        approx = O.product_graph_distance(X, p, q, mesh=Fraction(1, 100))
        segs = len(O._arc_vertices(T21, p.tree_pt, q.tree_pt)) + 1
        assert abs(exact - approx) <= O.oracle_tolerance(Fraction(1, 100), segs)
        assert approx >= exact - 1e-9  # graph paths cannot beat the metric


def test_complex_oracle_matches_chain_formula():
    e = G.identity(ZZ_Z2)
    cases = ["s", "x y s x", "x^2 s", "s x s", "x y s x^-1 y s"]
    for text in cases:
        u = G.parse_element(ZZ_Z2, text)
        exact = S.complex_distance(SIGMA, e, u)
        approx = O.complex_graph_distance(SIGMA, e, u)
        assert math.isclose(exact, approx, abs_tol=1e-9)


def test_complex_oracle_random_small():
    rng = random.Random(19)
    e = G.identity(ZZ_Z2)
    for _ in range(30):
        parts = []
        for k in range(rng.randrange(1, 4)):
            parts.append("x^%d y^%d" % (rng.randrange(-2, 3), rng.randrange(-2, 3)))
            parts.append("s")
        u = G.parse_element(ZZ_Z2, " ".join(parts))
        exact = S.complex_distance(SIGMA, e, u)
        approx = O.complex_graph_distance(SIGMA, e, u)
        assert math.isclose(exact, approx, abs_tol=1e-9)
