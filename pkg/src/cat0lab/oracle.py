"""Independent graph oracles for the exact metrics.

Each oracle answers a distance query by shortest-path search on a subdivided
graph instead of the closed-form geometry, so the two can be compared in
tests and experiment reports.  Snapping junctions to mesh nodes costs at most
``2 * mesh`` per path segment, hence the agreement bound
``|d_exact - d_graph| <= 2 * mesh * (#segments)``.

Three constructions:

* trees: Dijkstra on the ball graph with every edge subdivided at the mesh
  (1-dimensional pieces, so the only error is endpoint snapping);
* tree x line products: the space is a union of edge strips glued along
  vertex lines, and any path crosses the lines of the tree arc in order (a
  backtracking path can be shortened by projecting onto the crossed strip),
  so Dijkstra on the subdivided vertex lines reduces to a layered relaxation
  with complete transitions between consecutive lines;
* gluing complexes: pieces meet at single identified orbit points, so every
  path is a chain of intra-piece segments through glue points; lazy Dijkstra
  over glue points with exact intra-piece edge weights searches all routes at
  bounded scale (the mesh plays no role because the gluing sets are points).
"""

from __future__ import annotations

import heapq
import itertools
import math
from fractions import Fraction

import numpy as np

from . import groups as G
from . import spaces as S
from .groups import GroupElement
from .spaces import (FreeProductComplex, ProductPoint, ProductSpace, TreePoint,
                     WeightedTree)


def oracle_tolerance(mesh, segments: int) -> float:
    return 2.0 * float(mesh) * max(1, segments)


# ---------------------------------------------------------------------------
# trees
# ---------------------------------------------------------------------------


def tree_graph_distance(tree: WeightedTree, p: TreePoint, q: TreePoint,
                        mesh=Fraction(1, 4)) -> float:
    """Dijkstra on the subdivided ball graph containing both points."""
    mesh = Fraction(mesh)
    # the ball must contain the full edges carrying the endpoints
    radius = max(tree.depth(S._path_word(tree, p)), tree.depth(S._path_word(tree, q)))
    adj: dict = {}

    def link(a, b, w):
        adj.setdefault(a, []).append((b, float(w)))
        adj.setdefault(b, []).append((a, float(w)))

    def vnode(g: GroupElement):
        return ("v", g.word)

    # enumerate ball vertices and subdivide outgoing edges
    verts = list(G.ball(tree.group, tree.weights, radius))
    vert_set = {g.word for g in verts}
    codes = G.letter_codes(tree.group)
    for g in verts:
        for code in codes:
            h = G.append_letter(g, code)
            if tree.depth(h) <= tree.depth(g) or h.word not in vert_set:
                continue  # one direction per edge, both endpoints in the ball
            w = tree.letter_weight(code)
            n = max(1, math.ceil(w / mesh))
            prev = vnode(g)
            for k in range(1, n):
                node = ("e", g.word, code, k)
                link(prev, node, w / n)
                prev = node
            link(prev, vnode(h), w / n)

    def splice(pt: TreePoint, label):
        if pt.is_vertex():
            return vnode(pt.vertex)
        w = tree.letter_weight(pt.edge)
        n = max(1, math.ceil(w / mesh))
        step = w / n
        j = int(pt.offset // step)
        node = (label,)
        lo = vnode(pt.vertex) if j == 0 else ("e", pt.vertex.word, pt.edge, j)
        hi = vnode(G.append_letter(pt.vertex, pt.edge)) if j + 1 == n \
            else ("e", pt.vertex.word, pt.edge, j + 1)
        link(lo, node, pt.offset - j * step)
        link(node, hi, (j + 1) * step - pt.offset)
        return node

    src, dst = splice(p, "p"), splice(q, "q")
    return _dijkstra(adj, src, dst)


def _dijkstra(adj, src, dst) -> float:
    dist = {src: 0.0}
    heap = [(0.0, src)]
    while heap:
        d, u = heapq.heappop(heap)
        if u == dst:
            return d
        if d > dist.get(u, math.inf):
            continue
        for v, w in adj.get(u, ()):
            nd = d + w
            if nd < dist.get(v, math.inf):
                dist[v] = nd
                heapq.heappush(heap, (nd, v))
    raise RuntimeError("target not reachable in oracle graph")


# ---------------------------------------------------------------------------
# tree x line products
# ---------------------------------------------------------------------------


def _arc_vertices(tree: WeightedTree, p: TreePoint, q: TreePoint):
    """Vertices strictly inside the arc [p, q] with their arc positions."""
    wp, wq = S._path_word(tree, p), S._path_word(tree, q)
    dp, dq = S.tree_depth(tree, p), S.tree_depth(tree, q)
    c = min(S._common_prefix_weight(tree, wp, wq), dp, dq)
    out = []
    # p-side: prefixes of wp at weighted depths in [c, dp)
    acc = Fraction(0)
    prefix: list = []
    depths = []
    for code in G.letters_of(wp):
        depths.append((acc, tuple(prefix)))
        acc += tree.letter_weight(code)
        prefix.append(code)
    depths.append((acc, tuple(prefix)))
    for depth, codes in depths:
        if c <= depth < dp and 0 < dp - depth:
            out.append((dp - depth, G.from_letters(tree.group, codes)))
    out.sort(key=lambda t: t[0])
    # q-side: prefixes of wq at depths in (c, dq)
    acc = Fraction(0)
    prefix = []
    depths = []
    for code in G.letters_of(wq):
        depths.append((acc, tuple(prefix)))
        acc += tree.letter_weight(code)
        prefix.append(code)
    depths.append((acc, tuple(prefix)))
    for depth, codes in depths:
        if c < depth < dq:
            out.append(((dp - c) + (depth - c), G.from_letters(tree.group, codes)))
    seen = set()
    uniq = []
    for pos, g in sorted(out, key=lambda t: t[0]):
        if g.word in seen:
            continue
        seen.add(g.word)
        uniq.append((pos, g))
    return uniq


def product_graph_distance(space: ProductSpace, p: ProductPoint, q: ProductPoint,
                           mesh=Fraction(1, 100)) -> float:
    """Layered shortest path over mesh-subdivided vertex lines along the arc."""
    tree = space.tree
    arc = _arc_vertices(tree, p.tree_pt, q.tree_pt)
    d_tree = S.tree_distance(tree, p.tree_pt, q.tree_pt)
    h_lo, h_hi = sorted((float(p.height), float(q.height)))
    grid = np.arange(h_lo, h_hi + float(mesh) / 2, float(mesh)) if h_hi > h_lo \
        else np.array([h_lo])
    grid = np.unique(np.concatenate([grid, [h_lo, h_hi]]))

    positions = [0.0] + [float(pos) for pos, _ in arc] + [float(d_tree)]
    layers = [np.array([float(p.height)])] + [grid] * len(arc) + [np.array([float(q.height)])]

    cost = np.array([0.0])
    for i in range(1, len(layers)):
        du = positions[i] - positions[i - 1]
        dh = layers[i][None, :] - layers[i - 1][:, None]
        step = np.sqrt(du * du + dh * dh)
        cost = np.min(cost[:, None] + step, axis=0)
    return float(cost[0])


# ---------------------------------------------------------------------------
# gluing complexes
# ---------------------------------------------------------------------------


def _glue_neighbors(cx: FreeProductComplex, g: GroupElement, budget: float):
    """Glue points reachable from g x0 inside one piece, with exact costs."""
    out = []
    for idx, fac in enumerate(cx.group.factors):
        rep = S._coset_rep(cx, g, idx)
        rel = G.multiply(G.inverse(rep), g)
        syls = G.syllables(rel)
        my = syls[0][1] if syls else G.identity(fac)
        piece = cx.pieces[idx]
        if isinstance(piece, S.FlatPiece):
            # float prefilter over coefficient deltas, exact only on survivors
            rows = [[float(v) for v in row] for row in piece.basis]
            n = piece.dim
            shortest = _min_jump(cx, idx)
            r = math.ceil(budget / max(shortest, 1e-9)) + 1
            for delta in itertools.product(range(-r, r + 1), repeat=n):
                if all(c == 0 for c in delta):
                    continue
                vec = [sum(c * row[k] for c, row in zip(delta, rows)) for k in range(n)]
                d = math.sqrt(sum(x * x for x in vec))
                if d <= budget + 1e-9:
                    f = GroupElement(fac, tuple(c + m for c, m in zip(delta, my.word)))
                    out.append((G.multiply(rep, G.embed_factor(cx.group, idx, f)), d))
            continue
        if isinstance(piece, S.TreeLinePiece):
            # BFS over tree vertices with float distances, height window per vertex
            tree = piece.tree
            unit = float(piece.line_unit)
            base_payload, k0 = my.word
            center = GroupElement(tree.group, base_payload)
            frontier = [(center, 0.0)]
            seen = {center.word: 0.0}
            codes = G.letter_codes(tree.group)
            while frontier:
                nxt = []
                for v, dv in frontier:
                    for code in codes:
                        u2 = G.append_letter(v, code)
                        nd = dv + float(tree.letter_weight(code))
                        if nd <= budget + 1e-9 and seen.get(u2.word, math.inf) > nd:
                            seen[u2.word] = nd
                            nxt.append((u2, nd))
                frontier = nxt
            for word, dt in seen.items():
                span = math.sqrt(max(budget * budget - dt * dt, 0.0)) / unit
                for k in range(k0 - math.floor(span) - 1, k0 + math.floor(span) + 2):
                    d = math.hypot(dt, (k - k0) * unit)
                    if d <= budget + 1e-9 and (word != base_payload or k != k0):
                        f = GroupElement(fac, (word, k))
                        out.append((G.multiply(rep, G.embed_factor(cx.group, idx, f)), d))
            continue
        for f in _factor_elements_near(cx, idx, my, budget):
            if f == my:
                continue
            d = S.piece_distance(cx, idx,
                                 S.piece_local_of(cx, idx, my),
                                 S.piece_local_of(cx, idx, f))
            if d <= budget + 1e-9:
                out.append((G.multiply(rep, G.embed_factor(cx.group, idx, f)), d))
    return out


def _factor_elements_near(cx: FreeProductComplex, idx: int, center: GroupElement, budget: float):
    fac = cx.group.factors[idx]
    piece = cx.pieces[idx]
    if isinstance(piece, (S.ConePiece, S.IntervalPiece)):
        return [GroupElement(fac, k) for k in range(fac.order)]
    if isinstance(piece, S.FlatPiece):
        # integer coefficient box around the center, wide enough for the budget
        lens = [math.sqrt(sum(float(v) ** 2 for v in row)) for row in piece.basis]
        shortest = min(lens)
        r = math.ceil(budget / max(shortest, 1e-9)) + 1
        ranges = [range(c - r, c + r + 1) for c in center.word]
        return [GroupElement(fac, tuple(cs)) for cs in itertools.product(*ranges)]
    if isinstance(piece, S.TreeLinePiece):
        tree = piece.tree
        base, k0 = center.word
        tree_ball = G.ball(tree.group, tree.weights, Fraction(math.ceil(budget)))
        kr = math.ceil(budget / float(piece.line_unit)) + 1
        out = []
        center_vert = GroupElement(tree.group, base)
        for v in tree_ball:
            vert = G.multiply(center_vert, v)
            for k in range(k0 - kr, k0 + kr + 1):
                out.append(GroupElement(fac, (vert.word, k)))
        return out
    raise S.SpaceError("unknown piece")


def _min_jump(cx: FreeProductComplex, idx: int) -> float:
    """Least distance between distinct glue points of one piece."""
    piece = cx.pieces[idx]
    if isinstance(piece, S.ConePiece):
        return 2.0 * float(piece.spoke)
    if isinstance(piece, S.IntervalPiece):
        return float(piece.length)
    if isinstance(piece, S.FlatPiece):
        # shortest nonzero lattice vector within a small coefficient box
        best = math.inf
        n = piece.dim
        for cs in itertools.product(range(-2, 3), repeat=n):
            if all(c == 0 for c in cs):
                continue
            v = [sum(c * float(row[k]) for c, row in zip(cs, piece.basis)) for k in range(n)]
            best = min(best, math.sqrt(sum(x * x for x in v)))
        return best
    if isinstance(piece, S.TreeLinePiece):
        wmin = min(float(w) for _, w in piece.tree.weights.table)
        return min(wmin, float(piece.line_unit))
    raise S.SpaceError("unknown piece")


def complex_graph_distance(cx: FreeProductComplex, g: GroupElement, h: GroupElement,
                           slack: float = 0.5, node_cap: int = 200_000) -> float:
    """A* over glue points with exact intra-piece edge weights.

    The heuristic sums, over the syllables of the remaining relative word, the
    least separation of glue points in that factor's piece: pieces meet only
    at identified orbit points, so every remaining syllable forces a transit
    through a piece of its factor.  That is an admissible and consistent lower
    bound independent of the chain formula under test.  The search is capped
    at the chain value plus ``slack``: any strictly shorter route would be
    found before the cap bites."""
    jumps = [_min_jump(cx, i) for i in range(len(cx.pieces))]

    def heur(payload) -> float:
        u = G.multiply(G.inverse(GroupElement(cx.group, payload)), h)
        return sum(jumps[i] for i, _ in G.syllables(u))

    budget = S.complex_distance(cx, g, h) + slack
    target = h.word
    dist = {g.word: 0.0}
    heap = [(heur(g.word), 0.0, g.word)]
    expanded = 0
    while heap:
        f, d, payload = heapq.heappop(heap)
        if payload == target:
            return d
        if d > dist.get(payload, math.inf) or f > budget:
            continue
        expanded += 1
        if expanded > node_cap:
            raise RuntimeError("oracle node cap exceeded")
        here = GroupElement(cx.group, payload)
        for nb, w in _glue_neighbors(cx, here, budget - d):
            nd = d + w
            if nd < dist.get(nb.word, math.inf) - 1e-15:
                dist[nb.word] = nd
                heapq.heappush(heap, (nd + heur(nb.word), nd, nb.word))
    raise RuntimeError("target not reached within budget")
