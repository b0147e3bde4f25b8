"""Exact metric geometry on the model spaces.

Weighted Cayley trees, tree x line products (l2 metric), flat spaces, and
free-product gluing complexes whose pieces meet at identified orbit points.
Distances are exact rationals wherever the inputs are rational; square roots
appear only when a length is finally reported.  Squared distances are exposed
separately so containment tests can compare exact quantities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Union

from . import groups as G
from .groups import Family, FreeProduct, GroupElement, WeightAssignment


class SpaceError(ValueError):
    """Raised for points outside their space or out-of-range parameters."""


Number = Union[int, float, Fraction]

_SLOP = 1e-9  # tolerance for float arclength arguments


def _sqrt(x: Number) -> float:
    return math.sqrt(float(x))


# ---------------------------------------------------------------------------
# weighted trees
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class WeightedTree:
    """Cayley tree of a free group or a free product of order-2 cyclics."""

    group: Family
    weights: WeightAssignment
    _depths: dict = field(default_factory=dict, compare=False, repr=False, hash=False)
    _commons: dict = field(default_factory=dict, compare=False, repr=False, hash=False)

    def __post_init__(self):
        if not G.is_tree_family(self.group):
            raise SpaceError("Cayley graph of this family is not a tree")

    def depth(self, g: GroupElement) -> Fraction:
        d = self._depths.get(g.word)
        if d is None:
            d = G.weighted_length(g, self.weights)
            self._depths[g.word] = d
        return d

    def letter_weight(self, code: int) -> Fraction:
        return G.letter_weight(self.group, code, self.weights)

    @property
    def max_weight(self) -> Fraction:
        return max(w for _, w in self.weights.table)


@dataclass(frozen=True)
class TreePoint:
    """Point of a weighted tree: a vertex, or an offset along the edge from
    ``vertex`` to ``vertex * edge`` where ``vertex`` is the endpoint nearer
    the identity (canonical orientation)."""

    vertex: GroupElement
    edge: Optional[int]
    offset: Number

    def is_vertex(self) -> bool:
        return self.edge is None


def tree_point(tree: WeightedTree, vertex: GroupElement, edge: Optional[int] = None,
               offset: Number = 0) -> TreePoint:
    if vertex.family != tree.group:
        raise SpaceError("vertex belongs to a different group")
    if edge is None:
        if offset != 0:
            raise SpaceError("vertex points have offset 0")
        return TreePoint(vertex, None, Fraction(0))
    w = tree.letter_weight(edge)
    if isinstance(offset, float):
        w = float(w)
    if not (0 <= offset <= w):
        raise SpaceError("offset outside edge")
    other = G.append_letter(vertex, edge)
    if offset == 0:
        return TreePoint(vertex, None, Fraction(0))
    if offset == w:
        return TreePoint(other, None, Fraction(0))
    if tree.depth(other) > tree.depth(vertex):
        return TreePoint(vertex, edge, offset)
    # flip to the canonical outward orientation
    return TreePoint(other, G.letter_inverse(tree.group, edge), w - offset)


def vertex_point(tree: WeightedTree, g: GroupElement) -> TreePoint:
    return tree_point(tree, g)


def _path_word(tree: WeightedTree, p: TreePoint) -> GroupElement:
    """Vertex word extended by the (outward) edge letter; the point sits at
    weighted depth ``tree_depth(p)`` along this word's path from the identity."""
    if p.edge is None:
        return p.vertex
    return G.append_letter(p.vertex, p.edge)


def tree_depth(tree: WeightedTree, p: TreePoint) -> Number:
    return tree.depth(p.vertex) + p.offset


def _common_prefix_weight(tree: WeightedTree, a: GroupElement, b: GroupElement) -> Fraction:
    """Weighted length of the longest common prefix of two normal forms.
    Cached for short words (hashing giant words would cost more than the walk)."""
    wa, wb = a.word, b.word
    cacheable = len(wa) + len(wb) <= 256
    if cacheable:
        hit = tree._commons.get((wa, wb))
        if hit is not None:
            return hit
    total = _common_prefix_weight_raw(tree, a, b)
    if cacheable:
        tree._commons[(wa, wb)] = total
    return total


def _common_prefix_weight_raw(tree: WeightedTree, a: GroupElement, b: GroupElement) -> Fraction:
    fam = tree.group
    wa, wb = a.word, b.word
    total = Fraction(0)
    if isinstance(fam, G.FreeGroup):
        for (g1, e1), (g2, e2) in zip(wa, wb):
            wgt = tree.weights.of(fam.gens[g1])
            if g1 == g2 and e1 == e2:
                total += wgt * abs(e1)
                continue
            if g1 == g2 and (e1 > 0) == (e2 > 0):
                total += wgt * min(abs(e1), abs(e2))
            break
        return total
    for c1, c2 in zip(wa, wb):
        if c1 != c2:
            break
        total += tree.weights.of(fam.factors[c1].gen)
    return total


def _point_common(tree: WeightedTree, p: TreePoint, q: TreePoint) -> Number:
    c = _common_prefix_weight(tree, _path_word(tree, p), _path_word(tree, q))
    return min(c, tree_depth(tree, p), tree_depth(tree, q))


def tree_distance(tree: WeightedTree, p: TreePoint, q: TreePoint) -> Number:
    return tree_depth(tree, p) + tree_depth(tree, q) - 2 * _point_common(tree, p, q)


def _point_at_depth(tree: WeightedTree, word: GroupElement, s: Number) -> TreePoint:
    """Point at weighted arclength ``s`` from the identity along ``word``'s path."""
    if s < 0:
        raise SpaceError("negative arclength")
    fam = tree.group
    as_float = isinstance(s, float)
    acc = 0.0 if as_float else Fraction(0)
    prefix_blocks: list = []
    if isinstance(fam, G.FreeGroup):
        for gi, e in word.word:
            wgt = tree.weights.of(fam.gens[gi])
            if as_float:
                wgt = float(wgt)
            span = wgt * abs(e)
            if acc + span <= s:
                acc += span
                prefix_blocks.append((gi, e))
                if acc == s:
                    return TreePoint(GroupElement(fam, tuple(prefix_blocks)), None, Fraction(0))
                continue
            # lands inside this block
            k = int((s - acc) // wgt)        # whole letters consumed
            off = s - acc - k * wgt
            sign = 1 if e > 0 else -1
            if k:
                prefix_blocks.append((gi, sign * k))
            vertex = GroupElement(fam, tuple(prefix_blocks))
            code = 2 * gi + (0 if sign > 0 else 1)
            if off == 0:
                return TreePoint(vertex, None, Fraction(0))
            return tree_point(tree, vertex, code, off)
        if acc == s:
            return TreePoint(word, None, Fraction(0))
        raise SpaceError("arclength beyond the end of the word")
    # letter words (order-2 free products)
    for i, code in enumerate(word.word):
        wgt = tree.weights.of(fam.factors[code].gen)
        if as_float:
            wgt = float(wgt)
        if acc + wgt <= s:
            acc += wgt
            continue
        vertex = GroupElement(fam, word.word[:i])
        off = s - acc
        if off == 0:
            return TreePoint(vertex, None, Fraction(0))
        return tree_point(tree, vertex, code, off)
    if acc == s:
        return TreePoint(word, None, Fraction(0))
    raise SpaceError("arclength beyond the end of the word")


def tree_geodesic_eval(tree: WeightedTree, p: TreePoint, q: TreePoint, s: Number) -> TreePoint:
    d = tree_distance(tree, p, q)
    if s < -_SLOP or s > d + _SLOP:
        raise SpaceError(f"arclength {s} outside [0, {d}]")
    s = max(0, min(s, d))
    common = _point_common(tree, p, q)
    up = tree_depth(tree, p) - common
    if s <= up:
        return _point_at_depth(tree, _path_word(tree, p), tree_depth(tree, p) - s)
    return _point_at_depth(tree, _path_word(tree, q), common + (s - up))


def tree_gate(tree: WeightedTree, x: TreePoint, p: TreePoint, q: TreePoint) -> tuple[Number, Number]:
    """Distance from ``x`` to the arc [p, q] and the foot's arc position from
    ``p``; both exact (trees are 0-hyperbolic, so the Gromov product formulas
    are equalities)."""
    dxp = tree_distance(tree, x, p)
    dxq = tree_distance(tree, x, q)
    dpq = tree_distance(tree, p, q)
    c = (dxp + dxq - dpq) / 2
    u = (dxp + dpq - dxq) / 2
    return c, u


def tree_translate(tree: WeightedTree, g: GroupElement, p: TreePoint) -> TreePoint:
    v = G.multiply(g, p.vertex)
    if p.edge is None:
        return tree_point(tree, v)
    return tree_point(tree, v, p.edge, p.offset)


# ---------------------------------------------------------------------------
# tree x line products
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ProductSpace:
    """Tree x real line with the l2 product metric."""

    tree: WeightedTree


@dataclass(frozen=True)
class ProductPoint:
    tree_pt: TreePoint
    height: Number


def product_point(space: ProductSpace, tree_pt: TreePoint, height: Number = 0) -> ProductPoint:
    return ProductPoint(tree_pt, height)


def product_distance_sq(space: ProductSpace, p: ProductPoint, q: ProductPoint) -> Number:
    dt = tree_distance(space.tree, p.tree_pt, q.tree_pt)
    dh = p.height - q.height
    return dt * dt + dh * dh


def product_distance(space: ProductSpace, p: ProductPoint, q: ProductPoint) -> float:
    return _sqrt(product_distance_sq(space, p, q))


def product_geodesic_eval(space: ProductSpace, p: ProductPoint, q: ProductPoint, s: Number) -> ProductPoint:
    dt = tree_distance(space.tree, p.tree_pt, q.tree_pt)
    dh = q.height - p.height
    if dt == 0 and dh == 0:
        if abs(float(s)) > _SLOP:
            raise SpaceError("arclength outside degenerate segment")
        return p
    if dt == 0:
        # vertical segment
        L = abs(dh)
        if s < -_SLOP or s > L + _SLOP:
            raise SpaceError(f"arclength {s} outside [0, {L}]")
        s = max(0, min(s, L))
        sign = 1 if dh > 0 else -1
        return ProductPoint(p.tree_pt, p.height + sign * s)
    if dh == 0:
        return ProductPoint(tree_geodesic_eval(space.tree, p.tree_pt, q.tree_pt, s), p.height)
    L = _sqrt(dt * dt + dh * dh)
    if s < -_SLOP or s > L + _SLOP:
        raise SpaceError(f"arclength {s} outside [0, {L}]")
    s = max(0.0, min(float(s), L))
    u = s * float(dt) / L
    h = float(p.height) + s * float(dh) / L
    return ProductPoint(tree_geodesic_eval(space.tree, p.tree_pt, q.tree_pt, u), h)


def product_point_to_segment_sq(space: ProductSpace, x: ProductPoint,
                                p: ProductPoint, q: ProductPoint) -> tuple[Number, Number]:
    """Min squared distance from ``x`` to the geodesic [p, q] and the
    minimizing arclength from ``p``.  Exact for rational data: the segment and
    the excursion from ``x`` to the tree arc span a flat strip, and the
    squared distance is piecewise quadratic there."""
    tree = space.tree
    ell = tree_distance(tree, p.tree_pt, q.tree_pt)
    dh = q.height - p.height
    if ell == 0 and dh == 0:
        return product_distance_sq(space, x, p), 0
    c, ustar = (tree_distance(tree, x.tree_pt, p.tree_pt), 0) if ell == 0 \
        else tree_gate(tree, x.tree_pt, p.tree_pt, q.tree_pt)
    hx = x.height - p.height  # heights relative to p

    if ell == 0:
        # vertical segment: clamp the height
        t = min(max(hx / dh, 0), 1) if dh else 0
        dd = c * c + (hx - t * dh) ** 2
        return dd, t * abs(dh)

    # strip coordinates: path point at tree-parameter u has height (dh/ell)*u;
    # x sits at (ustar, hx) with an orthogonal excursion of length c.
    slope = Fraction(dh, ell) if isinstance(dh, (int, Fraction)) and isinstance(ell, (int, Fraction)) \
        else float(dh) / float(ell)

    best: tuple[Number, Number] | None = None

    def consider(u):
        nonlocal best
        du = u - ustar
        if du < 0:
            du = -du
        val = (c + du) ** 2 + (slope * u - hx) ** 2
        if best is None or val < best[0]:
            best = (val, u)

    # branch u >= ustar: f(u) = (c + u - ustar)^2 + (slope*u - hx)^2
    lo, hi = ustar, ell
    if lo <= hi:
        denom = 1 + slope * slope
        u_opt = (ustar - c + slope * hx) / denom
        consider(min(max(u_opt, lo), hi))
    # branch u <= ustar
    lo, hi = 0, min(ustar, ell)
    if lo <= hi:
        denom = 1 + slope * slope
        u_opt = (ustar + c + slope * hx) / denom
        consider(min(max(u_opt, lo), hi))

    assert best is not None
    val, u = best
    L_sq = ell * ell + dh * dh
    s_foot = float(u) / float(ell) * _sqrt(L_sq)
    return val, s_foot


# ---------------------------------------------------------------------------
# flat spaces
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FlatSpace:
    dim: int


FlatPoint = tuple  # tuple of Numbers, length == dim


def flat_distance_sq(space: FlatSpace, p: FlatPoint, q: FlatPoint) -> Number:
    return sum((a - b) ** 2 for a, b in zip(p, q))


def flat_point_to_segment_sq(x: FlatPoint, p: FlatPoint, q: FlatPoint) -> tuple[Number, Number]:
    pq = tuple(b - a for a, b in zip(p, q))
    xp = tuple(b - a for a, b in zip(p, x))
    den = sum(v * v for v in pq)
    if den == 0:
        return sum(v * v for v in xp), 0
    t = sum(a * b for a, b in zip(xp, pq)) / den
    t = min(max(t, 0), 1)
    foot = tuple(a + t * v for a, v in zip(p, pq))
    dd = sum((a - b) ** 2 for a, b in zip(x, foot))
    return dd, t * _sqrt(den)


def flat_eval(p: FlatPoint, q: FlatPoint, s: Number) -> FlatPoint:
    L = _sqrt(sum((b - a) ** 2 for a, b in zip(p, q)))
    if L == 0:
        return p
    if s < -_SLOP or s > L + _SLOP:
        raise SpaceError(f"arclength {s} outside [0, {L}]")
    t = min(max(float(s) / L, 0.0), 1.0)
    return tuple(a + t * (b - a) for a, b in zip(p, q))


# ---------------------------------------------------------------------------
# free-product gluing complexes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FlatPiece:
    """R^n copy carrying a lattice generated by rational basis vectors."""

    basis: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self):
        n = len(self.basis)
        if any(len(row) != n for row in self.basis):
            raise SpaceError("basis must be square")
        if _det(self.basis) == 0:
            raise SpaceError("basis must be nonsingular")

    @property
    def dim(self) -> int:
        return len(self.basis)


def _det(rows) -> Fraction:
    n = len(rows)
    m = [list(map(Fraction, r)) for r in rows]
    det = Fraction(1)
    for col in range(n):
        piv = next((r for r in range(col, n) if m[r][col] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != col:
            m[col], m[piv] = m[piv], m[col]
            det = -det
        det *= m[col][col]
        for r in range(col + 1, n):
            f = m[r][col] / m[col][col]
            for c in range(col, n):
                m[r][c] -= f * m[col][c]
    return det


def flat_piece(*basis_vectors) -> FlatPiece:
    return FlatPiece(tuple(tuple(Fraction(v) for v in row) for row in basis_vectors))


@dataclass(frozen=True)
class ConePiece:
    """Cone over an m-point orbit: spokes of equal length meeting at an apex."""

    orbit: int
    spoke: Fraction = Fraction(1)

    def __post_init__(self):
        if self.orbit < 2:
            raise SpaceError("cone orbit must have >= 2 points")
        if self.spoke <= 0:
            raise SpaceError("spoke length must be positive")


@dataclass(frozen=True)
class IntervalPiece:
    """Unit-interval style piece for an order-2 factor acting by reflection."""

    length: Fraction = Fraction(1)

    def __post_init__(self):
        if self.length <= 0:
            raise SpaceError("interval length must be positive")


@dataclass(frozen=True)
class TreeLinePiece:
    """Tree x line piece whose lattice is the vertex set times line_unit * Z."""

    tree: WeightedTree
    line_unit: Fraction = Fraction(1)


PieceSpec = Union[FlatPiece, ConePiece, IntervalPiece, TreeLinePiece]


@dataclass(frozen=True)
class FreeProductComplex:
    """Union of piece copies g*X_i over cosets, glued at identified orbit
    points; the nerve of the gluing is a tree, so geodesics run through
    consecutive coset basepoints."""

    group: FreeProduct
    pieces: tuple[PieceSpec, ...]

    def __post_init__(self):
        if len(self.pieces) != len(self.group.factors):
            raise SpaceError("one piece per free-product factor")
        for fac, piece in zip(self.group.factors, self.pieces):
            if isinstance(piece, FlatPiece):
                if not isinstance(fac, G.FreeAbelian) or fac.rank != piece.dim:
                    raise SpaceError("flat piece needs a free abelian factor of matching rank")
            elif isinstance(piece, ConePiece):
                if not isinstance(fac, G.FiniteCyclic) or fac.order != piece.orbit:
                    raise SpaceError("cone piece needs a finite cyclic factor of matching order")
            elif isinstance(piece, IntervalPiece):
                if not isinstance(fac, G.FiniteCyclic) or fac.order != 2:
                    raise SpaceError("interval piece needs an order-2 cyclic factor")
            elif isinstance(piece, TreeLinePiece):
                if not isinstance(fac, G.DirectWithLine) or fac.base != piece.tree.group:
                    raise SpaceError("tree-line piece needs a matching base-times-line factor")


@dataclass(frozen=True)
class ComplexPoint:
    """Point of a complex: a glue point (orbit point, piece None) or an
    interior point of the piece copy ``prefix * X_piece`` where ``prefix`` is
    the canonical shortest coset representative."""

    prefix: GroupElement
    piece: Optional[int]
    local: Optional[tuple]


def _factor_of(cx: FreeProductComplex, idx: int) -> Family:
    return cx.group.factors[idx]


def piece_local_of(cx: FreeProductComplex, idx: int, f: GroupElement) -> tuple:
    """Local coordinates of the glue point for factor element ``f``."""
    piece = cx.pieces[idx]
    fac = _factor_of(cx, idx)
    if f.family != fac:
        raise SpaceError("factor element of the wrong family")
    if isinstance(piece, FlatPiece):
        return tuple(sum((Fraction(e) * row[k] for e, row in zip(f.word, piece.basis)), Fraction(0))
                     for k in range(piece.dim))
    if isinstance(piece, ConePiece):
        return (f.word, piece.spoke)
    if isinstance(piece, IntervalPiece):
        return (piece.length if f.word else Fraction(0),)
    if isinstance(piece, TreeLinePiece):
        base_payload, k = f.word
        vert = GroupElement(piece.tree.group, base_payload)
        return (vertex_point(piece.tree, vert), k * piece.line_unit)
    raise SpaceError("unknown piece")


def _piece_glue_element(cx: FreeProductComplex, idx: int, local: tuple) -> Optional[GroupElement]:
    """Factor element whose glue point has these local coordinates, if any."""
    piece = cx.pieces[idx]
    fac = _factor_of(cx, idx)
    if isinstance(piece, FlatPiece):
        coeffs = _solve(piece.basis, local)
        if all(isinstance(c, Fraction) and c.denominator == 1 for c in coeffs):
            return GroupElement(fac, tuple(int(c) for c in coeffs))
        return None
    if isinstance(piece, ConePiece):
        branch, r = local
        if r == piece.spoke and branch >= 0:
            return GroupElement(fac, branch % fac.order)
        return None
    if isinstance(piece, IntervalPiece):
        (t,) = local
        if t == 0:
            return G.identity(fac)
        if t == piece.length:
            return GroupElement(fac, 1)
        return None
    if isinstance(piece, TreeLinePiece):
        tp, h = local
        if not tp.is_vertex():
            return None
        steps = Fraction(h) / piece.line_unit
        if steps.denominator != 1:
            return None
        return GroupElement(fac, (tp.vertex.word, int(steps)))
    raise SpaceError("unknown piece")


def _solve(basis, target):
    """Solve sum_i c_i basis_i = target exactly (basis rows independent)."""
    n = len(basis)
    m = [[Fraction(basis[r][c]) for r in range(n)] + [Fraction(target[c])] for c in range(n)]
    # forward elimination
    for col in range(n):
        piv = next(r for r in range(col, n) if m[r][col] != 0)
        m[col], m[piv] = m[piv], m[col]
        for r in range(col + 1, n):
            f = m[r][col] / m[col][col]
            for c in range(col, n + 1):
                m[r][c] -= f * m[col][c]
    out = [Fraction(0)] * n
    for r in range(n - 1, -1, -1):
        acc = m[r][n] - sum(m[r][c] * out[c] for c in range(r + 1, n))
        out[r] = acc / m[r][r]
    return out


def _piece_translate(cx: FreeProductComplex, idx: int, f: GroupElement, local: tuple) -> tuple:
    """Action of a factor element on piece-local coordinates."""
    piece = cx.pieces[idx]
    if isinstance(piece, FlatPiece):
        shift = piece_local_of(cx, idx, f)
        return tuple(a + b for a, b in zip(shift, local))
    if isinstance(piece, ConePiece):
        branch, r = local
        if branch < 0:
            return local  # apex fixed
        return ((branch + f.word) % piece.orbit, r)
    if isinstance(piece, IntervalPiece):
        (t,) = local
        return (piece.length - t,) if f.word else (t,)
    if isinstance(piece, TreeLinePiece):
        base_payload, k = f.word
        vert = GroupElement(piece.tree.group, base_payload)
        tp, h = local
        return (tree_translate(piece.tree, vert, tp), h + k * piece.line_unit)
    raise SpaceError("unknown piece")


def complex_point(cx: FreeProductComplex, prefix: GroupElement, piece: Optional[int] = None,
                  local: Optional[tuple] = None) -> ComplexPoint:
    """Canonicalizing constructor: snaps glue coordinates to glue points and
    shortens the coset prefix."""
    if prefix.family != cx.group:
        raise SpaceError("prefix belongs to a different group")
    if piece is None:
        return ComplexPoint(prefix, None, None)
    f = _piece_glue_element(cx, piece, local)
    if f is not None:
        return ComplexPoint(G.multiply(prefix, G.embed_factor(cx.group, piece, f)), None, None)
    syls = G.syllables(prefix)
    if syls and syls[-1][0] == piece:
        last = syls[-1][1]
        head = G.from_syllables(cx.group, syls[:-1])
        return ComplexPoint(head, piece, _piece_translate(cx, piece, last, local))
    return ComplexPoint(prefix, piece, local)


def glue_point(cx: FreeProductComplex, g: GroupElement) -> ComplexPoint:
    return complex_point(cx, g)


def complex_basepoint(cx: FreeProductComplex) -> ComplexPoint:
    return glue_point(cx, G.identity(cx.group))


# --- intra-piece metric ----------------------------------------------------


def piece_distance_sq(cx: FreeProductComplex, idx: int, a: tuple, b: tuple) -> Number:
    piece = cx.pieces[idx]
    if isinstance(piece, FlatPiece):
        return sum((x - y) ** 2 for x, y in zip(a, b))
    if isinstance(piece, ConePiece):
        # (branch, distance from apex); apex is (-1, 0)
        (ba, ra), (bb, rb) = a, b
        if ba == bb:
            return (ra - rb) ** 2
        return (ra + rb) ** 2
    if isinstance(piece, IntervalPiece):
        return (a[0] - b[0]) ** 2
    if isinstance(piece, TreeLinePiece):
        space = ProductSpace(piece.tree)
        return product_distance_sq(space, ProductPoint(*a), ProductPoint(*b))
    raise SpaceError("unknown piece")


def piece_distance(cx: FreeProductComplex, idx: int, a: tuple, b: tuple) -> float:
    return _sqrt(piece_distance_sq(cx, idx, a, b))


def piece_eval(cx: FreeProductComplex, idx: int, a: tuple, b: tuple, s: Number) -> tuple:
    piece = cx.pieces[idx]
    if isinstance(piece, FlatPiece):
        return flat_eval(a, b, s)
    if isinstance(piece, IntervalPiece):
        d = abs(b[0] - a[0])
        if d == 0:
            return a
        t = min(max(float(s) / float(d), 0.0), 1.0)
        return (a[0] + (b[0] - a[0]) * t,)
    if isinstance(piece, ConePiece):
        (ba, ra), (bb, rb) = a, b
        if ba == bb:
            d = abs(rb - ra)
            if d == 0:
                return a
            t = min(max(float(s) / float(d), 0.0), 1.0)
            r = ra + (rb - ra) * t
            return (-1, Fraction(0)) if r == 0 else (ba, r)
        d = ra + rb  # through the apex
        s = min(max(float(s), 0.0), float(d))
        if s < ra:
            return (ba, ra - s)
        if s == ra:
            return (-1, Fraction(0))
        return (bb, s - float(ra))
    if isinstance(piece, TreeLinePiece):
        space = ProductSpace(piece.tree)
        pt = product_geodesic_eval(space, ProductPoint(*a), ProductPoint(*b), s)
        return (pt.tree_pt, pt.height)
    raise SpaceError("unknown piece")


def piece_point_to_segment_sq(cx: FreeProductComplex, idx: int, x: tuple,
                              a: tuple, b: tuple) -> tuple[Number, Number]:
    piece = cx.pieces[idx]
    if isinstance(piece, FlatPiece):
        return flat_point_to_segment_sq(x, a, b)
    if isinstance(piece, IntervalPiece):
        lo, hi = min(a[0], b[0]), max(a[0], b[0])
        t = min(max(x[0], lo), hi)
        foot = abs(t - a[0])
        return (x[0] - t) ** 2, foot
    if isinstance(piece, TreeLinePiece):
        space = ProductSpace(piece.tree)
        return product_point_to_segment_sq(space, ProductPoint(*x), ProductPoint(*a), ProductPoint(*b))
    if isinstance(piece, ConePiece):
        # distance along the segment is piecewise linear: the minimum sits at
        # an endpoint, at the apex, or at the projection onto a shared branch
        (bx, rx) = x
        (ba, ra), (bb, rb) = a, b
        candidates = [(piece_distance_sq(cx, idx, x, a), Fraction(0)),
                      (piece_distance_sq(cx, idx, x, b), piece_distance(cx, idx, a, b))]
        if ba != bb:
            candidates.append((rx * rx, ra))  # apex at arclength ra
            if bx == ba and rx <= ra:
                candidates.append((Fraction(0), ra - rx))
            if bx == bb and rx <= rb:
                candidates.append((Fraction(0), ra + rx))
        elif bx == ba:
            lo, hi = min(ra, rb), max(ra, rb)
            t = min(max(rx, lo), hi)
            candidates.append(((rx - t) ** 2, abs(t - ra)))
        return min(candidates, key=lambda kv: (kv[0], kv[1]))
    raise SpaceError("unknown piece")


# --- orbit distances and geodesics ----------------------------------------


def _syllable_jump_sq(cx: FreeProductComplex, idx: int, f: GroupElement) -> Number:
    base = piece_local_of(cx, idx, G.identity(_factor_of(cx, idx)))
    return piece_distance_sq(cx, idx, base, piece_local_of(cx, idx, f))


def complex_distance(cx: FreeProductComplex, g: GroupElement, h: GroupElement) -> float:
    """Distance between orbit points g x0 and h x0: by left invariance the
    chain of identified basepoints of g^-1 h, summing intra-piece jumps."""
    u = G.multiply(G.inverse(g), h)
    total = 0.0
    for idx, f in G.syllables(u):
        total += _sqrt(_syllable_jump_sq(cx, idx, f))
    return total


@dataclass(frozen=True)
class PathSegment:
    start: object
    end: object
    length: float
    piece: Optional[int] = None        # complexes: which piece the segment crosses
    coset_prefix: Optional[GroupElement] = None


@dataclass(frozen=True)
class GeodesicPath:
    space: object
    segments: tuple[PathSegment, ...]

    @property
    def total(self) -> float:
        return sum(seg.length for seg in self.segments)

    def point_at(self, s: Number):
        if s < -_SLOP or s > self.total + _SLOP:
            raise SpaceError(f"arclength {s} outside [0, {self.total}]")
        s = max(0.0, min(float(s), self.total))
        acc = 0.0
        for seg in self.segments[:-1]:
            if s <= acc + seg.length:
                return _segment_eval(self.space, seg, s - acc)
            acc += seg.length
        return _segment_eval(self.space, self.segments[-1], s - acc)

    @property
    def start(self):
        return self.segments[0].start

    @property
    def end(self):
        return self.segments[-1].end


def _segment_eval(space, seg: PathSegment, s: Number):
    if isinstance(space, WeightedTree):
        return tree_geodesic_eval(space, seg.start, seg.end, s)
    if isinstance(space, ProductSpace):
        return product_geodesic_eval(space, seg.start, seg.end, s)
    if isinstance(space, FlatSpace):
        return flat_eval(seg.start, seg.end, s)
    if isinstance(space, FreeProductComplex):
        a = _local_in_coset(space, seg.start, seg.coset_prefix, seg.piece)
        b = _local_in_coset(space, seg.end, seg.coset_prefix, seg.piece)
        local = piece_eval(space, seg.piece, a, b, s)
        return complex_point(space, seg.coset_prefix, seg.piece, local)
    raise SpaceError("unknown space")


def _local_in_coset(cx: FreeProductComplex, p: ComplexPoint, coset_prefix: GroupElement,
                    idx: int) -> tuple:
    """Local coordinates of ``p`` inside the piece copy coset_prefix * X_idx."""
    if p.piece is None:
        f = G.multiply(G.inverse(coset_prefix), p.prefix)
        syls = G.syllables(f)
        if not syls:
            return piece_local_of(cx, idx, G.identity(_factor_of(cx, idx)))
        if len(syls) == 1 and syls[0][0] == idx:
            return piece_local_of(cx, idx, syls[0][1])
        raise SpaceError("glue point not on this piece copy")
    if p.piece != idx or p.prefix != coset_prefix:
        raise SpaceError("point not in this piece copy")
    return p.local


def complex_geodesic(cx: FreeProductComplex, g: GroupElement, h: GroupElement) -> GeodesicPath:
    """Geodesic between orbit points, one segment per piece crossed."""
    u = G.multiply(G.inverse(g), h)
    segs = []
    cur = g
    for idx, f in G.syllables(u):
        nxt = G.multiply(cur, G.embed_factor(cx.group, idx, f))
        length = _sqrt(_syllable_jump_sq(cx, idx, f))
        segs.append(PathSegment(glue_point(cx, cur), glue_point(cx, nxt), length,
                                piece=idx, coset_prefix=_coset_rep(cx, cur, idx)))
        cur = nxt
    if not segs:
        p = glue_point(cx, g)
        segs.append(PathSegment(p, p, 0.0, piece=0, coset_prefix=_coset_rep(cx, g, 0)))
    return GeodesicPath(cx, tuple(segs))


def _coset_rep(cx: FreeProductComplex, g: GroupElement, idx: int) -> GroupElement:
    """Canonical shortest representative of the coset g * factor_idx."""
    syls = G.syllables(g)
    if syls and syls[-1][0] == idx:
        return G.from_syllables(cx.group, syls[:-1])
    return g


def complex_geodesic_eval(cx: FreeProductComplex, g: GroupElement, h: GroupElement,
                          s: Number) -> ComplexPoint:
    return complex_geodesic(cx, g, h).point_at(s)


def _dist_to_orbit(cx: FreeProductComplex, p: ComplexPoint, g: GroupElement) -> float:
    """Distance from an arbitrary point to the orbit point g x0."""
    u = G.multiply(G.inverse(p.prefix), g)
    if p.piece is None:
        return complex_distance(cx, p.prefix, g)
    syls = G.syllables(u)
    idx = p.piece
    fac_id = G.identity(_factor_of(cx, idx))
    if syls and syls[0][0] == idx:
        first = syls[0][1]
        d0 = piece_distance(cx, idx, p.local, piece_local_of(cx, idx, first))
        rest = G.from_syllables(cx.group, syls[1:])
        return d0 + complex_distance(cx, G.identity(cx.group), rest)
    d0 = piece_distance(cx, idx, p.local, piece_local_of(cx, idx, fac_id))
    return d0 + complex_distance(cx, G.identity(cx.group), u)


def complex_point_distance(cx: FreeProductComplex, p: ComplexPoint, q: ComplexPoint) -> float:
    if q.piece is None:
        return _dist_to_orbit(cx, p, q.prefix)
    if p.piece is None:
        return _dist_to_orbit(cx, q, p.prefix)
    if p.prefix == q.prefix and p.piece == q.piece:
        return piece_distance(cx, p.piece, p.local, q.local)
    entry_elem, entry_local = _piece_entry(cx, p, q.prefix, q.piece)
    return _dist_to_orbit(cx, p, entry_elem) + piece_distance(cx, q.piece, entry_local, q.local)


def _piece_entry(cx: FreeProductComplex, p: ComplexPoint, c: GroupElement,
                 idx: int) -> tuple[GroupElement, tuple]:
    """Orbit point through which every route from ``p`` enters the piece copy
    c * X_idx, with its local coordinates (the gluing nerve is a tree, so the
    entry point is unique)."""
    u = G.multiply(G.inverse(p.prefix), c)
    syls = G.syllables(u)
    if syls and syls[-1][0] == idx:
        f_inv = G.inverse(syls[-1][1])
        entry = G.multiply(c, G.embed_factor(cx.group, idx, f_inv))
        return entry, piece_local_of(cx, idx, f_inv)
    return c, piece_local_of(cx, idx, G.identity(_factor_of(cx, idx)))


def complex_point_to_segment_sq(cx: FreeProductComplex, x: ComplexPoint,
                                path: GeodesicPath) -> tuple[float, float]:
    """(squared distance, foot arclength) from a point to a glue-chain path."""
    best = None
    acc = 0.0
    for seg in path.segments:
        a = _local_in_coset(cx, seg.start, seg.coset_prefix, seg.piece)
        b = _local_in_coset(cx, seg.end, seg.coset_prefix, seg.piece)
        if x.piece == seg.piece and x.prefix == seg.coset_prefix:
            dd, foot = piece_point_to_segment_sq(cx, seg.piece, x.local, a, b)
            dd = float(dd)
        elif x.piece is None and _on_coset(cx, x.prefix, seg.coset_prefix, seg.piece):
            loc = _local_in_coset(cx, x, seg.coset_prefix, seg.piece)
            dd, foot = piece_point_to_segment_sq(cx, seg.piece, loc, a, b)
            dd = float(dd)
        else:
            entry_elem, entry_local = _piece_entry(cx, x, seg.coset_prefix, seg.piece)
            d_route = _dist_to_orbit(cx, x, entry_elem)
            dd_in, foot = piece_point_to_segment_sq(cx, seg.piece, entry_local, a, b)
            dd = (d_route + _sqrt(dd_in)) ** 2
        if best is None or dd < best[0]:
            best = (dd, acc + float(foot))
        acc += seg.length
    return best


def _on_coset(cx: FreeProductComplex, g: GroupElement, coset_prefix: GroupElement, idx: int) -> bool:
    f = G.multiply(G.inverse(coset_prefix), g)
    syls = G.syllables(f)
    return len(syls) == 0 or (len(syls) == 1 and syls[0][0] == idx)


# ---------------------------------------------------------------------------
# uniform dispatch
# ---------------------------------------------------------------------------


def distance(space, p, q) -> float:
    if isinstance(space, WeightedTree):
        return float(tree_distance(space, p, q))
    if isinstance(space, ProductSpace):
        return product_distance(space, p, q)
    if isinstance(space, FlatSpace):
        return _sqrt(flat_distance_sq(space, p, q))
    if isinstance(space, FreeProductComplex):
        return complex_point_distance(space, p, q)
    raise SpaceError("unknown space")


def distance_sq(space, p, q) -> Number:
    """Squared distance, exact whenever the space supports it."""
    if isinstance(space, WeightedTree):
        d = tree_distance(space, p, q)
        return d * d
    if isinstance(space, ProductSpace):
        return product_distance_sq(space, p, q)
    if isinstance(space, FlatSpace):
        return flat_distance_sq(space, p, q)
    if isinstance(space, FreeProductComplex):
        d = complex_point_distance(space, p, q)
        return d * d
    raise SpaceError("unknown space")


def geodesic(space, p, q) -> GeodesicPath:
    if isinstance(space, (WeightedTree, ProductSpace, FlatSpace)):
        return GeodesicPath(space, (PathSegment(p, q, distance(space, p, q)),))
    if isinstance(space, FreeProductComplex):
        if p.piece is not None or q.piece is not None:
            raise SpaceError("complex geodesics are built between orbit points")
        return complex_geodesic(space, p.prefix, q.prefix)
    raise SpaceError("unknown space")


def geodesic_eval(space, p, q, s):
    if isinstance(space, WeightedTree):
        return tree_geodesic_eval(space, p, q, s)
    if isinstance(space, ProductSpace):
        return product_geodesic_eval(space, p, q, s)
    if isinstance(space, FlatSpace):
        return flat_eval(p, q, s)
    if isinstance(space, FreeProductComplex):
        return geodesic(space, p, q).point_at(s)
    raise SpaceError("unknown space")


def point_to_segment_distance(space, x, path: GeodesicPath) -> tuple[float, float]:
    """Min distance from ``x`` to a geodesic path and an attaining arclength.

    Closed forms for trees, products and flats (distance to a CAT(0) geodesic
    is convex, and these spaces admit exact piecewise-quadratic minimization);
    complexes minimize per crossed piece."""
    dd, foot = point_to_segment_sq(space, x, path)
    return _sqrt(dd), foot


def point_to_segment_sq(space, x, path: GeodesicPath) -> tuple[Number, float]:
    if isinstance(space, WeightedTree):
        best = None
        acc = 0.0
        for seg in path.segments:
            c, u = tree_gate(space, x, seg.start, seg.end)
            if best is None or c * c < best[0]:
                best = (c * c, acc + float(u))
            acc += seg.length
        return best
    if isinstance(space, ProductSpace):
        best = None
        acc = 0.0
        for seg in path.segments:
            dd, foot = product_point_to_segment_sq(space, x, seg.start, seg.end)
            if best is None or dd < best[0]:
                best = (dd, acc + float(foot))
            acc += seg.length
        return best
    if isinstance(space, FlatSpace):
        best = None
        acc = 0.0
        for seg in path.segments:
            dd, foot = flat_point_to_segment_sq(x, seg.start, seg.end)
            if best is None or dd < best[0]:
                best = (dd, acc + float(foot))
            acc += seg.length
        return best
    if isinstance(space, FreeProductComplex):
        return complex_point_to_segment_sq(space, x, path)
    raise SpaceError("unknown space")


def point_to_json(space, p) -> dict:
    if isinstance(space, WeightedTree):
        return {"vertex": G.format_element(p.vertex),
                "edge": None if p.edge is None else list(G.letter_name(space.group, p.edge)),
                "offset": str(p.offset) if isinstance(p.offset, Fraction) else float(p.offset)}
    if isinstance(space, ProductSpace):
        out = point_to_json(space.tree, p.tree_pt)
        out["height"] = str(p.height) if isinstance(p.height, Fraction) else float(p.height)
        return out
    if isinstance(space, FlatSpace):
        return {"coords": [str(c) if isinstance(c, Fraction) else float(c) for c in p]}
    if isinstance(space, FreeProductComplex):
        return {"prefix": G.format_element(p.prefix), "piece": p.piece,
                "local": None if p.local is None else repr(p.local)}
    raise SpaceError("unknown space")


def path_to_json(path: GeodesicPath) -> dict:
    """Segment endpoints and lengths, ready for report emission."""
    return {
        "total": float(path.total),
        "segments": [{
            "start": point_to_json(path.space, seg.start),
            "end": point_to_json(path.space, seg.end),
            "length": float(seg.length),
            "piece": seg.piece,
        } for seg in path.segments],
    }


def bracketed_min(fn, lo: float, hi: float, tol: float = 1e-9) -> tuple[float, float]:
    """Golden-section search for the minimum of a convex function; used as the
    generic fallback and by test oracles to refine coarse scans."""
    inv_phi = (math.sqrt(5) - 1) / 2
    a, b = lo, hi
    c = b - inv_phi * (b - a)
    d = a + inv_phi * (b - a)
    fc, fd = fn(c), fn(d)
    while (b - a) > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - inv_phi * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv_phi * (b - a)
            fd = fn(d)
    x = (a + b) / 2
    return fn(x), x
