"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the lines and the
measured runtimes.
"""

import math
import random
import time
from fractions import Fraction

from cat0lab import actions as A
from cat0lab import boundary as B
from cat0lab import conditions as C
from cat0lab import groups as G
from cat0lab import oracle as O
from cat0lab import spaces as S
from cat0lab.config import build_config
from cat0lab.experiments import (bowers_ruane_actions, doubling_elements,
                                 doubling_length_recurrence, run_spectrum_scan,
                                 SPECTRUM_DISCLAIMER)


F2 = G.free_group(2)
F2xZ = G.DirectWithLine(F2)
UNIT = S.WeightedTree(F2, G.unit_weights(F2))
T21 = S.WeightedTree(F2, G.weights_from(F2, {"a": 2, "b": 1}))
HALF = Fraction(1, 2)


def _line(num, ok, detail):
    print(f"\nACCEPTANCE {num}: {'PASS' if ok else 'FAIL'} - {detail}")
    assert ok, detail


def test_criterion_1_twisted_pair_limits_and_discontinuity():
    t0 = time.monotonic()
    AX, AY = bowers_ruane_actions()
    bx, by = A.basepoint(AX), A.basepoint(AY)
    horizon = 200
    worst_angle_err = 0.0
    ends_ok = True
    for i in range(1, 9):
        gi = G.parse_element(F2, f"a^{i} b^{i}")
        elems = [G.GroupElement(F2xZ, (G.power(gi, n).word, 0)) for n in range(1, horizon + 1)]
        pts = [A.orbit_point(AY, g) for g in elems]
        radii = C.default_radii(S.distance(AY.space, by, pts[-1]))
        v = B.limit_point(AY.space, pts, radii, 1e-9, by)
        assert v.kind == "converges"
        worst_angle_err = max(worst_angle_err, abs(v.limit.angle - math.pi / 4))
        ends_ok &= v.limit.end_prefix.is_identity() and v.limit.end_period == gi
    # the untwisted a-power sequence converges to the horizontal a-end exactly
    a_elems = [G.GroupElement(F2xZ, (G.generator(F2, "a", n).word, 0)) for n in range(1, horizon + 1)]
    pts = [A.orbit_point(AX, g) for g in a_elems]
    va = B.limit_point(AX.space, pts, C.default_radii(float(horizon)), 1e-9, bx)
    a_exact = (va.kind == "converges" and va.limit.angle == 0.0
               and va.limit.end_prefix.is_identity()
               and va.limit.end_period == G.parse_element(F2, "a"))
    # discontinuity certificate at reference radius 8
    r_ref = 8.0
    gap0 = r_ref * math.sqrt(2 - math.sqrt(2))
    a_end = B.End(G.identity(F2), G.parse_element(F2, "a"))
    pre, img = [], []
    for i in range(1, 9):
        gi_end = B.End(G.identity(F2), G.parse_element(F2, f"a^{i} b^{i}"))
        pre.append(B.boundary_gap(AX.space, B.product_boundary_point(gi_end, 0),
                                  B.product_boundary_point(a_end, 0), r_ref, bx))
        img.append(B.boundary_gap(AY.space, B.product_boundary_point(gi_end, 1),
                                  B.product_boundary_point(a_end, 0), r_ref, by))
    cert = min(pre) < 0.2 and min(img) >= 0.8 * gap0
    elapsed = time.monotonic() - t0
    ok = worst_angle_err < 1e-9 and ends_ok and a_exact and cert and elapsed < 30
    _line(1, ok, f"image angles pi/4 err {worst_angle_err:.2e}, ends ok {ends_ok}, "
                 f"a-limit exact {a_exact}, certificate {cert}, {elapsed:.1f}s < 30s")


def test_criterion_2_doubling_family():
    t0 = time.monotonic()
    # independent oracle first: the weighted-length recurrence fixes the
    # subsequential slope targets before any tree geometry runs
    rec = doubling_length_recurrence(20, 2, 1)
    even_tail = 2 ** 20 / rec[19]
    odd_tail = 2 ** 19 / rec[18]
    assert abs(even_tail - 3 / 5) < 1e-3 and abs(odd_tail - 3 / 4) < 1e-3
    elems = doubling_elements(20)
    lengths_ok = all(G.letter_count(g) == 2 ** n for n, g in enumerate(elems[:10], start=1))
    weights_ok = all(int(G.weighted_length(g, T21.weights)) == rec[n - 1]
                     for n, g in enumerate(elems, start=1))
    X, Y = S.ProductSpace(UNIT), S.ProductSpace(T21)
    bx = S.ProductPoint(S.vertex_point(UNIT, G.identity(F2)), Fraction(0))
    by = S.ProductPoint(S.vertex_point(T21, G.identity(F2)), Fraction(0))
    pts_x = [S.ProductPoint(S.vertex_point(UNIT, g), Fraction(2 ** n))
             for n, g in enumerate(elems, start=1)]
    pts_y = [S.ProductPoint(S.vertex_point(T21, g), Fraction(2 ** n))
             for n, g in enumerate(elems, start=1)]
    radii = [4, 8, 16, 32, 64]
    vx = B.limit_point(X, pts_x, radii, 1e-6, bx)
    vy = B.limit_point(Y, pts_y, radii, 1e-3, by)
    x_ok = vx.kind == "converges" and abs(vx.limit.angle - math.pi / 4) < 1e-6
    y_ok = vy.kind == "divergent"
    if y_ok:
        angles = sorted(l.angle for l in vy.limits)
        y_ok = (abs(angles[0] - math.atan(3 / 5)) < 1e-3
                and abs(angles[1] - math.atan(3 / 4)) < 1e-3)
    elapsed = time.monotonic() - t0
    ok = lengths_ok and weights_ok and x_ok and y_ok and elapsed < 10
    _line(2, ok, f"lengths 2^n {lengths_ok}, recurrence {weights_ok}, "
                 f"x-limit pi/4 {x_ok}, y-clusters atan(3/4)/atan(3/5) {y_ok}, "
                 f"{elapsed:.1f}s < 10s")


def test_criterion_3_tracking_trend_separation():
    t0 = time.monotonic()
    AX, AY = bowers_ruane_actions()
    tab = C.tracking_radius_table(AX, AY, HALF, 12)
    growth = tab.value(12) / tab.value(6)
    Z2 = G.free_abelian(2)
    LAT = A.lattice_action(Z2, ((1, 0), (0, 1)))
    SHEAR = A.lattice_action(Z2, ((1, 0), (1, 1)))
    tab2 = C.tracking_radius_table(LAT, SHEAR, HALF, 16)
    stab = tab2.value_sq(12) == tab2.value_sq(16)
    elapsed = time.monotonic() - t0
    ok = growth >= 1.5 and stab and elapsed < 60
    _line(3, ok, f"twisted growth x{growth:.2f} >= 1.5, shear table exact "
                 f"M(12) == M(16) {stab}, {elapsed:.1f}s < 60s")


def test_criterion_4_constants_formulas_exact():
    rng = random.Random(2024)
    ok = True
    for _ in range(100):
        lam = Fraction(rng.randrange(1, 64), rng.randrange(1, 16))
        lam = max(lam, Fraction(1, 8))
        Cc = Fraction(rng.randrange(0, 50), rng.randrange(1, 11))
        N = Fraction(rng.randrange(1, 40), rng.randrange(1, 9))
        M = Fraction(rng.randrange(1, 40), rng.randrange(1, 9))
        Nt = Fraction(rng.randrange(1, 60), rng.randrange(1, 9))
        R = Fraction(rng.randrange(1, 30), rng.randrange(1, 7))
        cs = C.derive_constants(lam, Cc, N, M, Ntilde=Nt, R=R)
        ok &= cs.widened_cover_y == lam * (N + Nt) + Cc + M
        ok &= cs.cauchy_width == lam * (2 * N + 1) + 2 * M + Cc
        ok &= cs.transfer_radius == lam * (R + Cc + M) + N
    _line(4, ok, "100 random rational inputs reproduce the three constant formulas exactly")


def test_criterion_5_chain_bounds_horizon_50():
    t0 = time.monotonic()
    n_cover = Fraction(71, 100)  # just above sqrt(1/2)
    failures = []
    # identical tree x line actions
    DOT, _ = bowers_ruane_actions()
    qc = A.estimate_qi_constants(DOT, DOT, 2)
    cs = C.derive_constants(qc.lam, qc.C, n_cover, n_cover)
    for label, alpha in [
            ("a-end", B.product_boundary_point(B.End(G.identity(F2), G.parse_element(F2, "a")), 0)),
            ("ab-end-slope1", B.product_boundary_point(B.End(G.identity(F2), G.parse_element(F2, "a b")), 1))]:
        rep = C.check_tracking_chain(DOT, DOT, alpha, cs, 50)
        failures += [f"identical/{label}/{b.name}" for b in rep.bounds if not b.ok]
        if len(rep.bounds) < 6:
            failures.append(f"identical/{label}: only {len(rep.bounds)} bounds evaluated")
    # standard vs sheared lattice pair
    Z2 = G.free_abelian(2)
    LAT = A.lattice_action(Z2, ((1, 0), (0, 1)))
    SHEAR = A.lattice_action(Z2, ((1, 0), (1, 1)))
    qc = A.estimate_qi_constants(LAT, SHEAR, 3)
    cs = C.derive_constants(qc.lam, max(qc.C, Fraction(1, 8)), n_cover, n_cover)
    for label, alpha in [("(1,0)", B.flat_boundary_point((1, 0))),
                         ("(1,2)", B.flat_boundary_point((1, 2)))]:
        rep = C.check_tracking_chain(LAT, SHEAR, alpha, cs, 50)
        failures += [f"shear/{label}/{b.name}" for b in rep.bounds if not b.ok]
        if len(rep.bounds) < 6:
            failures.append(f"shear/{label}: only {len(rep.bounds)} bounds evaluated")
    elapsed = time.monotonic() - t0
    ok = not failures
    _line(5, ok, f"all six chain bounds hold at horizon 50 for both pairs "
                 f"(violations: {failures or 'none'}), {elapsed:.1f}s")


def _rand_tree_point(tree, rng, radius):
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


def test_criterion_6_metric_oracle_equivalence():
    t0 = time.monotonic()
    mesh = Fraction(1, 100)
    rng = random.Random(606)
    checked = 0
    bad = []
    # 70 tree instances, a few at the full radius
    for case in range(70):
        tree = UNIT if case % 2 else T21
        radius = 6 if case < 6 else rng.choice((2, 3, 4))
        p, q = _rand_tree_point(tree, rng, radius), _rand_tree_point(tree, rng, radius)
        exact = float(S.tree_distance(tree, p, q))
        approx = O.tree_graph_distance(tree, p, q, mesh)
        segs = 1
        if abs(exact - approx) > O.oracle_tolerance(mesh, segs):
            bad.append(("tree", case, exact, approx))
        checked += 1
    # 70 product instances
    for case in range(70):
        tree = UNIT if case % 2 else T21
        X = S.ProductSpace(tree)
        p = S.ProductPoint(_rand_tree_point(tree, rng, 3), Fraction(rng.randrange(-5, 6)))
        q = S.ProductPoint(_rand_tree_point(tree, rng, 3), Fraction(rng.randrange(-5, 6)))
        exact = S.product_distance(X, p, q)
        approx = O.product_graph_distance(X, p, q, mesh)
        segs = len(O._arc_vertices(tree, p.tree_pt, q.tree_pt)) + 1
        if abs(exact - approx) > O.oracle_tolerance(mesh, segs):
            bad.append(("product", case, exact, approx))
        checked += 1
    # 60 complex instances with at most 3 syllables
    fam = G.FreeProduct((G.free_abelian(2), G.FiniteCyclic(2, "s")))
    SIGMA = S.FreeProductComplex(fam, (S.flat_piece((1, 0), (0, 1)), S.IntervalPiece(Fraction(1))))
    e = G.identity(fam)
    for case in range(60):
        parts = []
        for _ in range(rng.randrange(1, 4)):
            parts.append(f"x^{rng.randrange(-2, 3)} y^{rng.randrange(-2, 3)}")
            parts.append("s")
        if rng.random() < 0.3:
            parts.pop()  # sometimes end inside the flat factor
        u = G.parse_element(fam, " ".join(parts))
        exact = S.complex_distance(SIGMA, e, u)
        approx = O.complex_graph_distance(SIGMA, e, u)
        segs = max(1, G.syllable_count(u))
        if abs(exact - approx) > O.oracle_tolerance(mesh, segs):
            bad.append(("complex", case, exact, approx))
        checked += 1
    elapsed = time.monotonic() - t0
    ok = checked == 200 and not bad
    _line(6, ok, f"{checked}/200 instances within 2*mesh*segments of the graph "
                 f"oracle (failures: {bad or 'none'}), {elapsed:.1f}s")


def test_criterion_7_cauchy_iff_limit_suite():
    t0 = time.monotonic()
    X = S.ProductSpace(UNIT)
    Y = S.ProductSpace(T21)
    bx = S.ProductPoint(S.vertex_point(UNIT, G.identity(F2)), Fraction(0))
    by = S.ProductPoint(S.vertex_point(T21, G.identity(F2)), Fraction(0))
    flat = S.FlatSpace(2)
    fb = (Fraction(0), Fraction(0))
    radii = [4, 8, 16, 32]
    suite = []
    # 16 rays at mixed slopes and ends
    for i in (1, 2, 3, 4):
        for slope in (0, 1, 2, Fraction(1, 2)):
            end = B.End(G.identity(F2), G.parse_element(F2, f"a^{i} b^{i}"))
            r = B.Ray(X, bx, B.product_boundary_point(end, slope))
            suite.append((X, bx, [r.point_at(1.3 * k) for k in range(1, 32)]))
    # 4 vertical lines
    for h0 in (0, 1, -2, 3):
        suite.append((X, bx, [S.ProductPoint(bx.tree_pt, Fraction(h0 + k)) for k in range(1, 32)]))
    # 12 generator-power lines
    for name in ("a", "b"):
        for k_h in (0, 1, 2):
            suite.append((X, bx, [S.ProductPoint(S.vertex_point(UNIT, G.generator(F2, name, n)),
                                                 Fraction(k_h * n)) for n in range(1, 32)]))
            suite.append((Y, by, [S.ProductPoint(S.vertex_point(T21, G.generator(F2, name, n)),
                                                 Fraction(k_h * n)) for n in range(1, 32)]))
    # doubling family on both sides (2 sequences)
    elems = doubling_elements(20)
    suite.append((X, bx, [S.ProductPoint(S.vertex_point(UNIT, g), Fraction(2 ** n))
                          for n, g in enumerate(elems, start=1)]))
    suite.append((Y, by, [S.ProductPoint(S.vertex_point(T21, g), Fraction(2 ** n))
                          for n, g in enumerate(elems, start=1)]))
    # 8 lattice lines
    for v in ((1, 0), (0, 1), (1, 2), (2, 1), (1, -1), (-2, 1), (3, 1), (1, 3)):
        suite.append((flat, fb, [(Fraction(v[0] * n), Fraction(v[1] * n)) for n in range(1, 32)]))
    # 8 two-direction alternating sequences (divergent)
    rng = random.Random(7)
    for j in range(8):
        a_dir = G.parse_element(F2, "a")
        b_dir = G.parse_element(F2, "b")
        pts = []
        for n in range(1, 32):
            g = G.power(a_dir if n % 2 else b_dir, n)
            pts.append(S.ProductPoint(S.vertex_point(UNIT, g), Fraction((j % 3) * n)))
        suite.append((X, bx, pts))
    assert len(suite) == 50
    disagreements = []
    for k, (space, base, pts) in enumerate(suite):
        rep = B.is_cauchy(space, pts, 1.0, radii, base)
        v = B.limit_point(space, pts, radii, 1e-6, base, eps0=1.0)
        if (rep.verdict == "cauchy") != (v.kind == "converges"):
            disagreements.append(k)
    elapsed = time.monotonic() - t0
    ok = not disagreements
    _line(7, ok, f"50 sequences, is_cauchy <=> limit-converges, "
                 f"disagreements: {disagreements or 'none'}, {elapsed:.1f}s")


def test_criterion_8_coxeter_family_refutation():
    t0 = time.monotonic()
    from cat0lab.experiments import run_coxeter_family
    cfg = build_config("coxeter_family", {"horizon": 20})
    rep = run_coxeter_family(cfg)
    sv = rep.verdicts["transfer"].streams[0]
    refuted = sv.x_verdict == "cauchy" and sv.y_verdict == "not_cauchy" \
        and sv.tag == "cauchy_image_diverges"
    elapsed = time.monotonic() - t0
    ok = refuted and not rep.violations and elapsed < 10
    _line(8, ok, f"reflection-tree pair verdict (cauchy, not_cauchy) at horizon 20: "
                 f"{refuted}, {elapsed:.1f}s < 10s")


def test_criterion_9_spectrum_separation():
    cfg = build_config("spectrum_scan", {"word_length_max": 6, "pq_list": "1,1 2,1"})
    rep = run_spectrum_scan(cfg)
    headers, rows = rep.tables["angle_spectrum"]
    i1, i2 = headers.index("angle_1_1"), headers.index("angle_2_1")
    max_diff = max(abs(r[i1] - r[i2]) for r in rows)
    entries = sum(1 for r in rows if abs(r[i1] - r[i2]) >= 0.1)
    disclaimed = SPECTRUM_DISCLAIMER in rep.notes
    ok = entries >= 1 and disclaimed and not rep.violations
    _line(9, ok, f"(1,1) vs (2,1): {entries} aligned entries differ by >= 0.1 rad "
                 f"(max {max_diff:.3f}); disclaimer attached: {disclaimed}")
