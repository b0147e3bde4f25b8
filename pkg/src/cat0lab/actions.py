"""Geometric actions of the group families on the model spaces.

Orbit maps, pointwise isometric actions, empirical quasi-isometry constants
for a pair of actions of the same group, and covering (cocompactness) radii.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

from . import groups as G
from . import spaces as S
from .groups import DirectWithLine, Family, FreeAbelian, FreeProduct, GroupElement
from .spaces import (ComplexPoint, FlatSpace, FreeProductComplex, ProductPoint,
                     ProductSpace, TreePoint, WeightedTree)


class ActionError(ValueError):
    pass


# ---------------------------------------------------------------------------
# action kinds
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TreeLineAction:
    """base x Z acting on tree x line; the line generator translates by
    ``line_unit`` and each base generator may carry an extra height shift
    (shift 0 everywhere is the natural action)."""

    group: DirectWithLine
    space: ProductSpace
    shifts: tuple[tuple[str, Fraction], ...] = ()
    line_unit: Fraction = Fraction(1)

    def __post_init__(self):
        if self.space.tree.group != self.group.base:
            raise ActionError("tree group must match the base factor")
        if self.line_unit <= 0:
            raise ActionError("line unit must be positive")
        names = G.generator_names(self.group.base)
        shift_map = dict(self.shifts)
        for n in shift_map:
            if n not in names:
                raise ActionError(f"shift for unknown generator {n!r}")
        if not isinstance(self.group.base, G.FreeGroup):
            # order-2 generators cannot shift: s^2 = e forces shift(s) = 0
            if any(v != 0 for v in shift_map.values()):
                raise ActionError("height shifts need infinite-order generators")

    def shift_of(self, name: str) -> Fraction:
        for n, v in self.shifts:
            if n == name:
                return v
        return Fraction(0)

    def shift_sum(self, base_elem: GroupElement) -> Fraction:
        base = self.group.base
        if not isinstance(base, G.FreeGroup):
            return Fraction(0)
        total = Fraction(0)
        for i, e in base_elem.word:
            total += self.shift_of(base.gens[i]) * e
        return total


@dataclass(frozen=True)
class TreeAction:
    """A tree family acting on its own weighted Cayley tree by left translation."""

    space: WeightedTree

    @property
    def group(self) -> Family:
        return self.space.group


@dataclass(frozen=True)
class LatticeAction:
    """Z^n acting on R^n through a rational basis (columns of the orbit map)."""

    group: FreeAbelian
    space: FlatSpace
    basis: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self):
        if len(self.basis) != self.group.rank or self.space.dim != self.group.rank:
            raise ActionError("basis must be rank x dim")
        if S._det(self.basis) == 0:
            raise ActionError("basis must be nonsingular")


@dataclass(frozen=True)
class ComplexAction:
    """Free product acting on its gluing complex by left translation."""

    space: FreeProductComplex

    @property
    def group(self) -> FreeProduct:
        return self.space.group


def lattice_action(group: FreeAbelian, basis) -> LatticeAction:
    rows = tuple(tuple(Fraction(v) for v in row) for row in basis)
    return LatticeAction(group, FlatSpace(group.rank), rows)


def basepoint(A):
    if isinstance(A, TreeLineAction):
        return ProductPoint(S.vertex_point(A.space.tree, G.identity(A.group.base)), Fraction(0))
    if isinstance(A, TreeAction):
        return S.vertex_point(A.space, G.identity(A.group))
    if isinstance(A, LatticeAction):
        return tuple(Fraction(0) for _ in range(A.space.dim))
    if isinstance(A, ComplexAction):
        return S.complex_basepoint(A.space)
    raise ActionError("unknown action")


def apply(A, g: GroupElement, x):
    """Isometric action of ``g`` on a point; apply(g, apply(h, x)) == apply(gh, x)."""
    if isinstance(A, TreeLineAction):
        if g.family != A.group:
            raise ActionError("element outside the acting group")
        base_payload, k = g.word
        w = GroupElement(A.group.base, base_payload)
        tp = S.tree_translate(A.space.tree, w, x.tree_pt)
        return ProductPoint(tp, x.height + k * A.line_unit + A.shift_sum(w))
    if isinstance(A, TreeAction):
        if g.family != A.group:
            raise ActionError("element outside the acting group")
        return S.tree_translate(A.space, g, x)
    if isinstance(A, LatticeAction):
        if g.family != A.group:
            raise ActionError("element outside the acting group")
        shift = [sum(Fraction(e) * row[k] for e, row in zip(g.word, A.basis))
                 for k in range(A.space.dim)]
        return tuple(a + b for a, b in zip(x, shift))
    if isinstance(A, ComplexAction):
        if g.family != A.group:
            raise ActionError("element outside the acting group")
        return S.complex_point(A.space, G.multiply(g, x.prefix), x.piece, x.local)
    raise ActionError("unknown action")


def orbit_point(A, g: GroupElement):
    """g applied to the basepoint, folding the action letter by letter."""
    return apply(A, g, basepoint(A))


def space_of(A):
    return A.space


def distance(A, x, y) -> float:
    return S.distance(A.space, x, y)


# ---------------------------------------------------------------------------
# nearby orbit points
# ---------------------------------------------------------------------------


def orbit_near(A, x, radius: float) -> list[GroupElement]:
    """All group elements whose orbit point lies within ``radius`` of ``x``."""
    out = []
    if isinstance(A, TreeLineAction):
        tree = A.space.tree
        for v, dt in _tree_vertices_near(tree, x.tree_pt, radius):
            if dt > radius:
                continue
            shift = A.shift_sum(v)
            rem_sq = radius * radius - float(dt) * float(dt)
            span = math.sqrt(max(rem_sq, 0.0)) / float(A.line_unit)
            center = (x.height - shift) / A.line_unit
            for k in range(math.floor(float(center) - span - 1), math.ceil(float(center) + span + 1) + 1):
                h = k * A.line_unit + shift
                if float(dt) ** 2 + float(x.height - h) ** 2 <= radius * radius + 1e-12:
                    out.append(GroupElement(A.group, (v.word, k)))
        return out
    if isinstance(A, TreeAction):
        return [v for v, dt in _tree_vertices_near(A.space, x, radius) if dt <= radius]
    if isinstance(A, LatticeAction):
        coeffs = S._solve(A.basis, x)
        lens = [math.sqrt(sum(float(v) ** 2 for v in row)) for row in A.basis]
        r = math.ceil(radius / min(lens)) + 1
        for delta in itertools.product(range(-r, r + 1), repeat=A.space.dim):
            cs = tuple(round(c) + d for c, d in zip(coeffs, delta))
            g = GroupElement(A.group, cs)
            if S.flat_distance_sq(A.space, orbit_point(A, g), x) <= radius * radius + 1e-12:
                out.append(g)
        return sorted(set(out), key=G._sort_key)
    if isinstance(A, ComplexAction):
        return _complex_orbit_near(A.space, x, radius)
    raise ActionError("unknown action")


def _tree_vertices_near(tree: WeightedTree, t: TreePoint, radius: float):
    """(vertex element, distance) pairs within ``radius`` of a tree point."""
    start: list[tuple[GroupElement, Fraction]] = []
    if t.is_vertex():
        start.append((t.vertex, Fraction(0)))
    else:
        w = tree.letter_weight(t.edge)
        start.append((t.vertex, t.offset))
        start.append((G.append_letter(t.vertex, t.edge), w - t.offset))
    seen = {}
    frontier = []
    for v, d in start:
        if float(d) <= radius and (v.word not in seen or seen[v.word] > d):
            seen[v.word] = d
            frontier.append((v, d))
    codes = G.letter_codes(tree.group)
    while frontier:
        nxt = []
        for v, d in frontier:
            for code in codes:
                u = G.append_letter(v, code)
                nd = d + tree.letter_weight(code)
                if float(nd) <= radius and (u.word not in seen or seen[u.word] > nd):
                    seen[u.word] = nd
                    nxt.append((u, nd))
        frontier = nxt
    fam = tree.group
    return [(GroupElement(fam, wd), d) for wd, d in seen.items()]


def _complex_orbit_near(cx: FreeProductComplex, x: ComplexPoint, radius: float):
    """Orbit points within ``radius``: any route out of the current piece runs
    through one of its glue points, which is itself an orbit point no nearer,
    so same-piece glue elements are a complete candidate set for interior
    points; glue points additionally see the adjacent pieces."""
    from . import oracle as O

    out = []
    if x.piece is None:
        out.append(x.prefix)
        for nb, d in O._glue_neighbors(cx, x.prefix, radius):
            if d <= radius + 1e-12:
                out.append(nb)
        return out
    idx = x.piece
    fac = cx.group.factors[idx]
    for f in O._factor_elements_near(cx, idx, _nearest_factor_anchor(cx, idx, x.local), radius + 1):
        d = S.piece_distance(cx, idx, x.local, S.piece_local_of(cx, idx, f))
        if d <= radius + 1e-12:
            out.append(G.multiply(x.prefix, G.embed_factor(cx.group, idx, f)))
    return out


def _nearest_factor_anchor(cx: FreeProductComplex, idx: int, local) -> GroupElement:
    fac = cx.group.factors[idx]
    piece = cx.pieces[idx]
    if isinstance(piece, S.FlatPiece):
        coeffs = S._solve(piece.basis, local)
        return GroupElement(fac, tuple(round(c) for c in coeffs))
    if isinstance(piece, (S.ConePiece, S.IntervalPiece)):
        return G.identity(fac)
    if isinstance(piece, S.TreeLinePiece):
        tp, h = local
        k = round(float(h) / float(piece.line_unit))
        return GroupElement(fac, (tp.vertex.word, k))
    raise ActionError("unknown piece")


def nearest_orbit(A, x) -> tuple[GroupElement, float]:
    """Closest orbit element to ``x`` (ties broken by canonical word order)."""
    r = _nearest_upper_bound(A, x)
    cands = orbit_near(A, x, r + 1e-9)
    best = None
    for g in sorted(cands, key=G._sort_key):
        d = S.distance(A.space, orbit_point(A, g), x)
        if best is None or d < best[1] - 1e-12:
            best = (g, d)
    if best is None:
        raise ActionError("no orbit point within the search bound (not cocompact?)")
    return best


def _nearest_upper_bound(A, x) -> float:
    if isinstance(A, TreeLineAction):
        tree = A.space.tree
        t = x.tree_pt
        dt = 0.0 if t.is_vertex() else float(min(t.offset, tree.letter_weight(t.edge) - t.offset))
        return math.sqrt(dt * dt + float(A.line_unit) ** 2 / 4) + 1e-9
    if isinstance(A, TreeAction):
        t = x
        return 0.0 if t.is_vertex() else float(min(t.offset, A.space.letter_weight(t.edge) - t.offset))
    if isinstance(A, LatticeAction):
        return sum(math.sqrt(sum(float(v) ** 2 for v in row)) for row in A.basis) / 2 + 1e-9
    if isinstance(A, ComplexAction):
        return float(max(_piece_reach(p) for p in A.space.pieces)) + 1e-9
    raise ActionError("unknown action")


def _piece_reach(piece) -> float:
    if isinstance(piece, S.FlatPiece):
        return sum(math.sqrt(sum(float(v) ** 2 for v in row)) for row in piece.basis) / 2
    if isinstance(piece, S.ConePiece):
        return float(piece.spoke)
    if isinstance(piece, S.IntervalPiece):
        return float(piece.length) / 2
    if isinstance(piece, S.TreeLinePiece):
        return math.sqrt(float(piece.tree.max_weight) ** 2 / 4 + float(piece.line_unit) ** 2 / 4)
    raise ActionError("unknown piece")


def validate_action(A, n_samples: int = 200, seed: int = 0) -> dict:
    """Sampled sanity checks of the action-spec invariants: generators act as
    isometries, and the orbit map is metrically proper (word length growth
    forces orbit distance growth).  A regression guard, not a proof."""
    import random

    rng = random.Random(seed)
    fam = A.group
    weights = G.unit_weights(fam)
    elems = G.ball_list(fam, weights, 3)
    bp = basepoint(A)
    pts = [orbit_point(A, rng.choice(elems)) for _ in range(24)] + [bp]
    gens = G.generators(fam)
    iso_worst = 0.0
    for _ in range(n_samples):
        g = rng.choice(gens)
        x, y = rng.choice(pts), rng.choice(pts)
        d0 = S.distance(A.space, x, y)
        d1 = S.distance(A.space, apply(A, g, x), apply(A, g, y))
        iso_worst = max(iso_worst, abs(d0 - d1))
    # properness probe: the set of elements whose orbit point stays inside a
    # fixed ball must stop growing once the word-length cutoff clears the
    # distortion (finitely many orbit points per ball)
    R = 1.5
    counts = []
    for L in (5, 7):
        counts.append(sum(1 for g in G.ball(fam, weights, L)
                          if S.distance(A.space, bp, orbit_point(A, g)) <= R + 1e-9))
    proper = counts[0] == counts[1] and counts[1] > 0
    return {"isometry_worst_defect": iso_worst, "isometry_ok": iso_worst < 1e-9,
            "proper_trend_ok": proper, "ball_orbit_counts": counts}


# ---------------------------------------------------------------------------
# quasi-isometry constants
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class QiConstants:
    """Certified on every pair g, h in the stated ball:
    (1/lam) d_Y(g y0, h y0) - C <= d_X(g x0, h x0) <= lam d_Y(g y0, h y0) + C."""

    lam: Fraction
    C: Fraction
    ball_radius: int
    pairs_certified: int

    def to_json(self):
        return {"lambda": str(self.lam), "C": str(self.C),
                "ball_radius": self.ball_radius, "pairs_certified": self.pairs_certified}


def estimate_qi_constants(AX, AY, ball_radius: int, *, grid=Fraction(1, 8),
                          lam_max=Fraction(16), c_max=Fraction(8)) -> QiConstants:
    """Smallest grid ``lam`` admitting a feasible additive constant below
    ``c_max``, then the smallest grid ``C``.  Both actions are by isometries,
    so pair distances reduce by left invariance to single elements of the
    doubled ball: every d(g x0, h x0) with g, h in ball(L) equals
    d(x0, u x0) for some u in ball(2L), and conversely."""
    if AX.group != AY.group:
        raise ActionError("actions of different groups")
    fam = AX.group
    weights = G.unit_weights(fam)
    bx, by = basepoint(AX), basepoint(AY)
    data = []
    for u in G.ball(fam, weights, 2 * ball_radius):
        dx = S.distance(AX.space, bx, orbit_point(AX, u))
        dy = S.distance(AY.space, by, orbit_point(AY, u))
        data.append((dx, dy))
    n_pairs = len(data)
    lam = Fraction(1)
    while lam <= lam_max:
        need = Fraction(0)
        lam_f = float(lam)
        worst = 0.0
        for dx, dy in data:
            worst = max(worst, dx - lam_f * dy, dy / lam_f - dx)
        if worst <= float(c_max) + 1e-12:
            steps = math.ceil(worst / float(grid) - 1e-12)
            C = max(Fraction(0), Fraction(steps) * grid)
            return QiConstants(lam, C, ball_radius, n_pairs)
        lam += grid
    raise ActionError(f"no feasible constants with lam <= {lam_max}, C <= {c_max}")


def qi_violations(AX, AY, qc: QiConstants, elements: Iterable[GroupElement]) -> list[GroupElement]:
    """Elements u = g^-1 h violating the sandwich for the given constants."""
    bx, by = basepoint(AX), basepoint(AY)
    lam, C = float(qc.lam), float(qc.C)
    bad = []
    for u in elements:
        dx = S.distance(AX.space, bx, orbit_point(AX, u))
        dy = S.distance(AY.space, by, orbit_point(AY, u))
        if not (dy / lam - C - 1e-9 <= dx <= lam * dy + C + 1e-9):
            bad.append(u)
    return bad


# ---------------------------------------------------------------------------
# covering (cocompactness) radius
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CocompactnessRadius:
    value: float
    value_sq: Fraction | None    # exact square when the model admits one
    sampled_max: float           # largest sampled distance to the orbit
    horizon: str

    def to_json(self):
        return {"value": self.value,
                "value_sq": str(self.value_sq) if self.value_sq is not None else None,
                "sampled_max": self.sampled_max, "horizon": self.horizon}


def covering_radius_exact_sq(A) -> Fraction:
    """Exact squared covering radius for the model actions."""
    if isinstance(A, TreeLineAction):
        w = A.space.tree.max_weight
        return (w / 2) ** 2 + (A.line_unit / 2) ** 2
    if isinstance(A, TreeAction):
        return (A.space.max_weight / 2) ** 2
    if isinstance(A, LatticeAction):
        return _lattice_covering_sq(A.basis)
    if isinstance(A, ComplexAction):
        return max(_piece_covering_sq(p) for p in A.space.pieces)
    raise ActionError("unknown action")


def _piece_covering_sq(piece) -> Fraction:
    if isinstance(piece, S.FlatPiece):
        return _lattice_covering_sq(piece.basis)
    if isinstance(piece, S.ConePiece):
        return Fraction(piece.spoke) ** 2   # the apex is spoke away from every orbit point
    if isinstance(piece, S.IntervalPiece):
        return (Fraction(piece.length) / 2) ** 2
    if isinstance(piece, S.TreeLinePiece):
        return (piece.tree.max_weight / 2) ** 2 + (piece.line_unit / 2) ** 2
    raise ActionError("unknown piece")


def _lattice_covering_sq(basis) -> Fraction:
    """Covering radius of a rational lattice, exact.

    dim 1: half the generator.  dim 2: the deepest hole is a vertex of the
    Voronoi cell, i.e. a circumcenter of 0 and two nearby lattice points;
    scan a small neighborhood exactly."""
    n = len(basis)
    if n == 1:
        return (abs(basis[0][0]) / 2) ** 2
    if n != 2:
        raise ActionError("exact covering radius implemented for dim <= 2")
    pts = []
    for a, b in itertools.product(range(-2, 3), repeat=2):
        if (a, b) != (0, 0):
            pts.append(tuple(a * basis[0][k] + b * basis[1][k] for k in range(2)))
    best = Fraction(0)
    for p, q in itertools.combinations(pts, 2):
        cc = _circumcenter(p, q)
        if cc is None:
            continue
        rr = cc[0] ** 2 + cc[1] ** 2
        # a Voronoi vertex of the origin cell: no lattice point strictly nearer
        if all((cc[0] - z[0]) ** 2 + (cc[1] - z[1]) ** 2 >= rr for z in pts):
            best = max(best, rr)
    return best


def _circumcenter(p, q):
    """Circumcenter of the origin, p, q (exact, None if collinear)."""
    d = 2 * (p[0] * q[1] - p[1] * q[0])
    if d == 0:
        return None
    pp = p[0] ** 2 + p[1] ** 2
    qq = q[0] ** 2 + q[1] ** 2
    ux = (q[1] * pp - p[1] * qq) / d
    uy = (p[0] * qq - q[0] * pp) / d
    return (ux, uy)


def cocompactness_radius(A, horizon: int = 3, samples_per_segment: int = 8,
                         seed: int = 0) -> CocompactnessRadius:
    """Exact model value plus a sampled certificate: subdivide geodesics
    between orbit points within the horizon and measure the farthest sample
    from the orbit."""
    import random

    rng = random.Random(seed)
    exact_sq = covering_radius_exact_sq(A)
    value = math.sqrt(float(exact_sq))
    fam = A.group
    weights = G.unit_weights(fam)
    elems = G.ball_list(fam, weights, horizon)
    bp = basepoint(A)
    worst = 0.0
    pairs = [(G.identity(fam), g) for g in elems]
    rng.shuffle(pairs)
    for g, h in pairs[: min(len(pairs), 60)]:
        pg, ph = orbit_point(A, g), orbit_point(A, h)
        if isinstance(A, ComplexAction):
            path = S.geodesic(A.space, pg, ph)
            evals = [path.point_at(k * path.total / samples_per_segment)
                     for k in range(samples_per_segment + 1)] if path.total else [pg]
        else:
            L = S.distance(A.space, pg, ph)
            evals = [S.geodesic_eval(A.space, pg, ph, k * L / samples_per_segment)
                     for k in range(samples_per_segment + 1)] if L else [pg]
        for x in evals:
            _, d = nearest_orbit(A, x)
            worst = max(worst, d)
    return CocompactnessRadius(value, exact_sq, worst, f"ball({horizon}) x {samples_per_segment} samples")
