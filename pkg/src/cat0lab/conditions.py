"""Segment-tracking and Cauchy-transfer condition checkers.

The segment-tracking condition for a pair of actions of one group G on
spaces X and Y with basepoints x0, y0: there are constants N, M > 0 with
G B(x0, N) = X, G B(y0, M) = Y, and whenever the segment [x0, g x0] meets
B(a x0, N) in X, the segment [y0, g y0] meets B(a y0, M) in Y.  The checkers
certify it on finite balls only and report the certified radius together with
the growth trend of the minimal y-side tracking radius; the property itself
is not decidable from finite data.

The Cauchy-transfer condition: a sequence of orbit points is Cauchy in
X union its boundary iff the image sequence is Cauchy in Y union its
boundary.  Refutations carry the one-sided witness stream and both limit
estimates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from . import actions as A
from . import boundary as B
from . import groups as G
from . import spaces as S
from .actions import ComplexAction, LatticeAction, TreeAction, TreeLineAction
from .groups import GroupElement
from .spaces import GeodesicPath


class ConditionError(ValueError):
    pass


# ---------------------------------------------------------------------------
# constants
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConstantSet:
    """Derived constants of the boundary-transfer machinery, exact rationals.

    widened_cover_y = stretch*(cover_x + widened_cover_x) + additive + cover_y
    cauchy_width    = stretch*(2*cover_x + 1) + 2*cover_y + additive
    transfer_radius = stretch*(probe_radius + additive + cover_y) + cover_x
    """

    stretch: Fraction          # multiplicative quasi-isometry constant
    additive: Fraction         # additive quasi-isometry constant
    cover_x: Fraction          # covering radius on the X side
    cover_y: Fraction          # covering radius on the Y side
    widened_cover_x: Fraction
    widened_cover_y: Fraction
    cauchy_width: Fraction
    probe_radius: Fraction
    transfer_radius: Fraction

    def to_json(self):
        return {k: str(getattr(self, k)) for k in
                ("stretch", "additive", "cover_x", "cover_y", "widened_cover_x",
                 "widened_cover_y", "cauchy_width", "probe_radius", "transfer_radius")}


def derive_constants(lam, C, N, M, Ntilde=None, R=1) -> ConstantSet:
    lam, C, N, M, R = Fraction(lam), Fraction(C), Fraction(N), Fraction(M), Fraction(R)
    Ntilde = 2 * N if Ntilde is None else Fraction(Ntilde)
    for name, v in (("lam", lam), ("N", N), ("M", M), ("Ntilde", Ntilde), ("R", R)):
        if v <= 0:
            raise ConditionError(f"{name} must be positive")
    if C < 0:
        raise ConditionError("C must be nonnegative")
    return ConstantSet(
        stretch=lam, additive=C, cover_x=N, cover_y=M,
        widened_cover_x=Ntilde,
        widened_cover_y=lam * (N + Ntilde) + C + M,
        cauchy_width=lam * (2 * N + 1) + 2 * M + C,
        probe_radius=R,
        transfer_radius=lam * (R + C + M) + N,
    )


# ---------------------------------------------------------------------------
# segment-ball intersection
# ---------------------------------------------------------------------------


def segment_ball_intersects(space, path: GeodesicPath, center, radius) -> bool:
    """True iff the path meets the closed ball around ``center``; compared on
    squared quantities, exactly whenever the space yields exact squares."""
    dd, _ = S.point_to_segment_sq(space, center, path)
    rr = radius * radius
    if isinstance(dd, Fraction) and isinstance(rr, (int, Fraction)):
        return dd <= rr
    return float(dd) <= float(rr) + 1e-12


# ---------------------------------------------------------------------------
# tracking scan: shared result types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TrackingWitness:
    """A pair (g, a) whose x-side segment meets B(a x0, N) while the y-side
    distance from a y0 to [y0, g y0] exceeds M."""

    g: GroupElement
    a: GroupElement
    x_dist_sq: object          # exact when available
    x_foot: float
    y_dist: float

    def to_json(self):
        return {"g": G.format_element(self.g), "a": G.format_element(self.a),
                "x_dist_sq": str(self.x_dist_sq), "x_foot": self.x_foot,
                "y_dist": self.y_dist}


@dataclass(frozen=True)
class TrackingReport:
    holds_on_ball: bool
    ball_radius: int
    n_sq: Fraction
    m_sq: Fraction
    witness: Optional[TrackingWitness]
    covers_ok: bool
    pairs_checked: int
    engine: str

    def to_json(self):
        return {"holds_on_ball": self.holds_on_ball, "ball_radius": self.ball_radius,
                "N_sq": str(self.n_sq), "M_sq": str(self.m_sq),
                "witness": self.witness.to_json() if self.witness else None,
                "covers_ok": self.covers_ok, "pairs_checked": self.pairs_checked,
                "engine": self.engine}


@dataclass(frozen=True)
class TrackingTable:
    """Minimal y-side tracking radius per ball radius: row (L, M_hat) is the
    max over x-side hits with |g| <= L of d(a y0, [y0, g y0]).  Stabilization
    suggests the tracking condition; steady growth suggests failure."""

    rows: tuple[tuple[int, float], ...]
    rows_sq: tuple            # exact squared values where the engine has them
    n_sq: Fraction
    engine: str

    def value(self, L: int) -> float:
        for ell, v in self.rows:
            if ell == L:
                return v
        raise KeyError(L)

    def value_sq(self, L: int):
        for ell, v in zip((r[0] for r in self.rows), self.rows_sq):
            if ell == L:
                return v
        raise KeyError(L)

    def to_json(self):
        return {"rows": [[ell, v] for ell, v in self.rows],
                "rows_sq": [str(v) if v is not None else None for v in self.rows_sq],
                "N_sq": str(self.n_sq), "engine": self.engine}


# ---------------------------------------------------------------------------
# generic scan engine
# ---------------------------------------------------------------------------


def _min_step(AX) -> float:
    if isinstance(AX, TreeLineAction):
        wmin = min(float(w) for _, w in AX.space.tree.weights.table)
        return min(wmin, float(AX.line_unit))
    if isinstance(AX, TreeAction):
        return min(float(w) for _, w in AX.space.weights.table)
    if isinstance(AX, LatticeAction):
        return min(math.sqrt(sum(float(v) ** 2 for v in row)) for row in AX.basis)
    if isinstance(AX, ComplexAction):
        from . import oracle as O
        return min(O._min_jump(AX.space, i) for i in range(len(AX.space.pieces)))
    raise ConditionError("unknown action")


def _complex_path_candidates(AX, path_x, N: float) -> list[GroupElement]:
    """Hit candidates along a glue-chain path when N is at most the least glue
    separation: any orbit point outside the crossed pieces routes through one
    of their glue points, which costs at least one full jump, so the
    candidates are the crossed pieces' own glue elements near each segment
    plus one glue layer around the chain points."""
    import itertools

    from . import oracle as O

    cx = AX.space
    out: dict = {}
    for seg in path_x.segments:
        idx = seg.piece
        rep = seg.coset_prefix
        fac = cx.group.factors[idx]
        piece = cx.pieces[idx]
        a_loc = S._local_in_coset(cx, seg.start, rep, idx)
        b_loc = S._local_in_coset(cx, seg.end, rep, idx)
        if isinstance(piece, S.FlatPiece):
            # float tube prefilter over an integer coefficient box
            rows = [[float(v) for v in row] for row in piece.basis]
            n = piece.dim
            af = [float(v) for v in a_loc]
            bf = [float(v) for v in b_loc]
            ca = S._solve(piece.basis, a_loc)
            shortest = O._min_jump(cx, idx)
            r = math.ceil((seg.length + N + 1) / max(shortest, 1e-9)) + 1
            for delta in itertools.product(range(-r, r + 1), repeat=n):
                cs = tuple(int(round(c)) + d for c, d in zip(ca, delta))
                pos = [sum(ci * row[k] for ci, row in zip(cs, rows)) for k in range(n)]
                dd, _ = S.flat_point_to_segment_sq(tuple(pos), tuple(af), tuple(bf))
                if dd <= N * N + 1e-6:
                    g = G.multiply(rep, G.embed_factor(cx.group, idx, GroupElement(fac, cs)))
                    out[g.word] = g
        else:
            for f in O._factor_elements_near(cx, idx, G.identity(fac), seg.length + N + 1):
                dd, _ = S.piece_point_to_segment_sq(cx, idx, S.piece_local_of(cx, idx, f),
                                                    a_loc, b_loc)
                if float(dd) <= N * N + 1e-6:
                    g = G.multiply(rep, G.embed_factor(cx.group, idx, f))
                    out[g.word] = g
        for pt in (seg.start, seg.end):
            if pt.piece is None:
                out[pt.prefix.word] = pt.prefix
                for nb, d in O._glue_neighbors(cx, pt.prefix, N + 1e-9):
                    out[nb.word] = nb
    return list(out.values())


def _scan_generic(AX, AY, n_sq: Fraction, L: int, *, on_pair):
    """Enumerate g in ball(L); for each, find every a whose x-orbit point
    meets the segment within sqrt(n_sq) (complete: such a's lie within
    N + step/2 of a step/2-dense sample of the segment) and hand (g, a,
    exact x data, y distance) to the callback."""
    fam = AX.group
    weights = G.unit_weights(fam)
    bx, by = A.basepoint(AX), A.basepoint(AY)
    N = math.sqrt(float(n_sq))
    step = min(N, _min_step(AX)) / 2
    complex_fast = isinstance(AX, ComplexAction) and float(n_sq) <= _min_step(AX) ** 2 + 1e-12
    for g in G.ball(fam, weights, L):
        gx = A.orbit_point(AX, g)
        path_x = S.geodesic(AX.space, bx, gx)
        if complex_fast:
            cands = _complex_path_candidates(AX, path_x, N)
        else:
            total = path_x.total
            k = max(1, math.ceil(total / step))
            samples = [path_x.point_at(total * j / k) for j in range(k + 1)]
            seen = set()
            cands = []
            for pt in samples:
                for a in A.orbit_near(AX, pt, N + step / 2 + 1e-9):
                    if a.word not in seen:
                        seen.add(a.word)
                        cands.append(a)
        glen = int(G.word_length(g, weights))
        path_y = None
        for a in sorted(cands, key=G._sort_key):
            ax = A.orbit_point(AX, a)
            dd, foot = S.point_to_segment_sq(AX.space, ax, path_x)
            hit = dd <= n_sq if isinstance(dd, Fraction) else float(dd) <= float(n_sq) + 1e-12
            if not hit:
                continue
            if path_y is None:
                path_y = S.geodesic(AY.space, by, A.orbit_point(AY, g))
            ay = A.orbit_point(AY, a)
            dd_y, _ = S.point_to_segment_sq(AY.space, ay, path_y)
            if on_pair(glen, g, a, dd, foot, dd_y):
                return


def tracking_radius_table_generic(AX, AY, n_sq: Fraction, L: int) -> TrackingTable:
    best: dict[int, tuple[float, object]] = {}

    def on_pair(glen, g, a, dd, foot, dd_y):
        y = float(dd_y)
        cur = best.get(glen)
        if cur is None or y > cur[0]:
            best[glen] = (y, dd_y)
        return False

    _scan_generic(AX, AY, n_sq, L, on_pair=on_pair)
    rows = []
    rows_sq = []
    running = 0.0
    running_sq = Fraction(0)
    exact_ok = True
    for ell in range(0, L + 1):
        if ell in best:
            y, dsq = best[ell]
            if isinstance(dsq, Fraction):
                running_sq = max(running_sq, dsq)
            else:
                exact_ok = False
            running = max(running, y)
        rows.append((ell, math.sqrt(running)))
        rows_sq.append(running_sq if exact_ok else None)
    return TrackingTable(tuple(rows), tuple(rows_sq), n_sq, "generic")


def check_segment_tracking_generic(AX, AY, n_sq: Fraction, m_sq: Fraction, L: int) -> TrackingReport:
    found: list[TrackingWitness] = []
    count = [0]

    def on_pair(glen, g, a, dd, foot, dd_y):
        count[0] += 1
        miss = dd_y > m_sq if isinstance(dd_y, Fraction) else float(dd_y) > float(m_sq) + 1e-12
        if miss:
            found.append(TrackingWitness(g, a, dd, float(foot), math.sqrt(float(dd_y))))
            return True  # ball enumeration is nondecreasing, first hit is minimal
        return False

    covers = _covers_ok(AX, AY, n_sq, m_sq)
    _scan_generic(AX, AY, n_sq, L, on_pair=on_pair)
    w = found[0] if found else None
    return TrackingReport(w is None, L, n_sq, m_sq, w, covers, count[0], "generic")


def _covers_ok(AX, AY, n_sq, m_sq) -> bool:
    return A.covering_radius_exact_sq(AX) <= n_sq and A.covering_radius_exact_sq(AY) <= m_sq


# ---------------------------------------------------------------------------
# strip scan engine for tree x line pairs
# ---------------------------------------------------------------------------
#
# For two tree x line actions of F_k x Z over the same words, every x-side
# hit forces the a-orbit's tree vertex onto the tree path of g (off-path
# vertices are at least one full edge away, and the engine requires
# N < min edge weight).  Both sides then live in flat strips over the path,
# and the whole (g, a) scan becomes exact integer arithmetic over
# (word, height, prefix, height-offset) tuples, vectorized per word length.


def _strip_supported(AX, AY, n_sq) -> bool:
    if not (isinstance(AX, TreeLineAction) and isinstance(AY, TreeLineAction)):
        return False
    if AX.group != AY.group or not isinstance(AX.group.base, G.FreeGroup):
        return False
    wmin = min(AX.space.tree.weights.of(n) for n in AX.group.base.gens)
    return n_sq < wmin * wmin


def _scale_of(*fractions) -> int:
    d = 1
    for f in fractions:
        d = d * Fraction(f).denominator // math.gcd(d, Fraction(f).denominator)
    return d


def _words_by_length_fast(rank: int, L: int):
    """Reduced words over 2*rank signed letter codes, batched by length,
    lexicographic within each batch."""
    n_codes = 2 * rank
    yield 0, np.zeros((1, 0), dtype=np.int8)
    if L == 0:
        return
    cur = np.arange(n_codes, dtype=np.int8)[:, None]
    yield 1, cur
    # child codes per last letter, ordered: all codes except the inverse
    table = np.array([[c for c in range(n_codes) if c != v ^ 1] for v in range(n_codes)],
                     dtype=np.int8)
    for _ in range(2, L + 1):
        last = cur[:, -1].astype(np.int64)
        children = table[last]                      # [n, n_codes-1]
        n, ell = cur.shape
        rep = np.repeat(cur, n_codes - 1, axis=0)   # word-major, code-minor
        cur = np.column_stack([rep, children.reshape(-1)])
        yield ell + 1, cur


@dataclass
class _StripSide:
    weights: np.ndarray     # scaled int per letter code
    shifts: np.ndarray      # scaled int per letter code (signed)
    unit: int               # scaled line unit
    scale: int
    n_sq: Fraction | None   # hit radius squared (x side only)


def _strip_side(action: TreeLineAction, n_sq=None) -> _StripSide:
    base = action.group.base
    ws = [action.space.tree.weights.of(n) for n in base.gens]
    sh = [action.shift_of(n) for n in base.gens]
    scale = _scale_of(*(ws + sh + [action.line_unit]))
    weights = np.zeros(2 * base.rank, dtype=np.int64)
    shifts = np.zeros(2 * base.rank, dtype=np.int64)
    for i in range(base.rank):
        weights[2 * i] = weights[2 * i + 1] = int(ws[i] * scale)
        shifts[2 * i] = int(sh[i] * scale)
        shifts[2 * i + 1] = -int(sh[i] * scale)
    return _StripSide(weights, shifts, int(action.line_unit * scale), scale, n_sq)


def _seg_dist_sq_int(px, ph, sx, sh):
    """Squared distance (scaled) from integer points to the segment
    (0,0)->(sx,sh), elementwise; returns (num, den) with value num/den."""
    dot = px * sx + ph * sh
    ss = sx * sx + sh * sh
    pp = px * px + ph * ph
    cross = px * sh - ph * sx
    num = np.where(dot <= 0, pp * ss,
                   np.where(dot >= ss, (pp - 2 * dot + ss) * ss, cross * cross))
    den = np.where(ss > 0, ss, 1)
    num = np.where(ss > 0, num, pp)
    return num, den


def _scan_strip(AX, AY, n_sq: Fraction, L: int, *, on_batch):
    """Vectorized (g, a) scan; calls on_batch(length_of_g, hits...) with
    integer-exact hit masks and scaled squared y-distances."""
    X = _strip_side(AX, n_sq)
    Y = _strip_side(AY)
    rank = AX.group.base.rank
    pn, qn = n_sq.numerator, n_sq.denominator
    DX2 = X.scale * X.scale
    for ell, words in _words_by_length_fast(rank, L):
        if ell == 0:
            _strip_trivial_word(AX, AY, X, Y, n_sq, L, on_batch)
            continue
        n = words.shape[0]
        wx = X.weights[words]
        px = np.concatenate([np.zeros((n, 1), dtype=np.int64), np.cumsum(wx, axis=1)], axis=1)
        sxp = np.concatenate([np.zeros((n, 1), dtype=np.int64),
                              np.cumsum(X.shifts[words], axis=1)], axis=1)
        py = np.concatenate([np.zeros((n, 1), dtype=np.int64),
                             np.cumsum(Y.weights[words], axis=1)], axis=1)
        syp = np.concatenate([np.zeros((n, 1), dtype=np.int64),
                              np.cumsum(Y.shifts[words], axis=1)], axis=1)
        for k in range(-(L - ell), L - ell + 1):
            sx = px[:, ell]
            shx = k * X.unit + sxp[:, ell]
            sy = py[:, ell]
            shy = k * Y.unit + syp[:, ell]
            # conservative height window: |h - H(u)| <= N * sqrt(1 + slope^2)
            slope_bound = (abs(k) * X.unit + int(np.abs(X.shifts).max()) * ell) / max(
                float(px[:, ell].min()), 1.0)
            width = math.sqrt(float(n_sq)) * math.sqrt(1 + slope_bound ** 2) * X.scale
            mw = math.ceil(width / X.unit) + 1
            for u in range(0, ell + 1):
                pxa = px[:, u]
                base_h = sxp[:, u]
                with np.errstate(divide="ignore", invalid="ignore"):
                    h_seg = np.where(sx > 0, shx.astype(float) * pxa / np.maximum(sx, 1), 0.0)
                m0 = np.round((h_seg - base_h) / X.unit).astype(np.int64)
                for dm in range(-mw, mw + 1):
                    m = m0 + dm
                    ph = base_h + m * X.unit
                    num, den = _seg_dist_sq_int(pxa, ph, sx, shx)
                    hit = qn * num <= pn * DX2 * den
                    if not hit.any():
                        continue
                    idx = np.nonzero(hit)[0]
                    pya = py[idx, u]
                    phy = syp[idx, u] + m[idx] * Y.unit
                    ynum, yden = _seg_dist_sq_int(pya, phy, sy[idx], shy[idx])
                    on_batch(ell, k, u, words, idx, m[idx], num[idx], den[idx],
                             ynum, yden, Y.scale, X.scale)


def _strip_trivial_word(AX, AY, X, Y, n_sq, L, on_batch):
    """The empty tree word: both segments are vertical."""
    words = np.zeros((1, 0), dtype=np.int8)
    pn, qn = n_sq.numerator, n_sq.denominator
    for k in range(-L, L + 1):
        shx = np.array([k * X.unit], dtype=np.int64)
        shy = np.array([k * Y.unit], dtype=np.int64)
        mw = math.ceil(math.sqrt(float(n_sq)) * X.scale / X.unit) + 1
        lo = min(0, k) - mw
        hi = max(0, k) + mw
        for m in range(lo, hi + 1):
            ph = np.array([m * X.unit], dtype=np.int64)
            num, den = _seg_dist_sq_int(np.zeros(1, dtype=np.int64), ph,
                                        np.zeros(1, dtype=np.int64), shx)
            if not (qn * num <= pn * (X.scale * X.scale) * den)[0]:
                continue
            phy = np.array([m * Y.unit], dtype=np.int64)
            ynum, yden = _seg_dist_sq_int(np.zeros(1, dtype=np.int64), phy,
                                          np.zeros(1, dtype=np.int64), shy)
            on_batch(0, k, 0, words, np.array([0]), np.array([m]),
                     num, den, ynum, yden, Y.scale, X.scale)


def _word_element(family: G.FreeGroup, codes) -> GroupElement:
    return G.from_letters(family, [int(c) for c in codes])


def tracking_radius_table_strip(AX, AY, n_sq: Fraction, L: int) -> TrackingTable:
    best: dict[int, float] = {}
    best_sq: dict[int, Fraction] = {}

    def on_batch(ell, k, u, words, idx, m, num, den, ynum, yden, yscale, xscale):
        bucket = ell + abs(k)
        vals = ynum / (yden * float(yscale) ** 2)
        j = int(np.argmax(vals))
        v = float(vals[j])
        if v > best.get(bucket, -1.0):
            best[bucket] = v
            best_sq[bucket] = Fraction(int(ynum[j]), int(yden[j])) / (yscale * yscale)

    _scan_strip(AX, AY, n_sq, L, on_batch=on_batch)
    rows = []
    rows_sq = []
    run = 0.0
    run_sq = Fraction(0)
    for ell in range(0, L + 1):
        if ell in best:
            run = max(run, best[ell])
            run_sq = max(run_sq, best_sq[ell])
        rows.append((ell, math.sqrt(run)))
        rows_sq.append(run_sq)
    return TrackingTable(tuple(rows), tuple(rows_sq), n_sq, "strip")


def check_segment_tracking_strip(AX, AY, n_sq: Fraction, m_sq: Fraction, L: int) -> TrackingReport:
    pm, qm = m_sq.numerator, m_sq.denominator
    best: list = [None]  # (key, data) with key = (|g|, |a|, ell, k, word, u, m)
    count = [0]

    def on_batch(ell, k, u, words, idx, m, num, den, ynum, yden, yscale, xscale):
        count[0] += len(idx)
        miss = qm * ynum > pm * (yscale * yscale) * yden
        if not miss.any():
            return
        js = np.nonzero(miss)[0]
        j = js[int(np.lexsort((m[js], idx[js], np.abs(m[js]) + u))[0])]
        key = (ell + abs(k), u + abs(int(m[j])), ell, k, int(idx[j]), u, int(m[j]))
        if best[0] is None or key < best[0][0]:
            best[0] = (key, ell, k, u, words[idx[j]].copy(), int(m[j]),
                       Fraction(int(num[j]), int(den[j])) / (xscale * xscale),
                       math.sqrt(float(ynum[j]) / float(yden[j])) / yscale)

    covers = _covers_ok(AX, AY, n_sq, m_sq)
    _scan_strip(AX, AY, n_sq, L, on_batch=on_batch)
    witness = None
    if best[0] is not None:
        _, ell, k, u, codes, m, xdd, ydist = best[0]
        fam = AX.group
        base = AX.group.base
        w = _word_element(base, codes[:ell])
        g = GroupElement(fam, (w.word, k))
        aw = _word_element(base, codes[:u])
        a = GroupElement(fam, (aw.word, m))
        foot_sq, foot = S.point_to_segment_sq(
            AX.space, A.orbit_point(AX, a),
            S.geodesic(AX.space, A.basepoint(AX), A.orbit_point(AX, g)))
        witness = TrackingWitness(g, a, xdd, float(foot), ydist)
    return TrackingReport(witness is None, L, n_sq, m_sq, witness, covers, count[0], "strip")


# ---------------------------------------------------------------------------
# public dispatch
# ---------------------------------------------------------------------------


def tracking_radius_table(AX, AY, n_sq, L: int, engine: str = "auto") -> TrackingTable:
    """Table L' -> max over x-side hits with |g| <= L' of the y-side distance
    d(a y0, [y0, g y0]); nondecreasing in L'."""
    n_sq = Fraction(n_sq)
    if engine == "auto":
        engine = "strip" if _strip_supported(AX, AY, n_sq) else "generic"
    if engine == "strip":
        return tracking_radius_table_strip(AX, AY, n_sq, L)
    return tracking_radius_table_generic(AX, AY, n_sq, L)


def check_segment_tracking(AX, AY, n_sq, m_sq, L: int, engine: str = "auto") -> TrackingReport:
    """Scan all (g, a) with g in ball(L) and a ranging over every element
    whose x-orbit point can meet the segment (their word length is bounded by
    |g| plus the hit radius, so no enumeration of a larger ball is needed)."""
    n_sq, m_sq = Fraction(n_sq), Fraction(m_sq)
    if engine == "auto":
        engine = "strip" if _strip_supported(AX, AY, n_sq) else "generic"
    if engine == "strip":
        return check_segment_tracking_strip(AX, AY, n_sq, m_sq, L)
    return check_segment_tracking_generic(AX, AY, n_sq, m_sq, L)


def replay_witness(AX, AY, w: TrackingWitness, n_sq, m_sq) -> bool:
    """Independent recomputation through the generic geometry: the x side must
    hit and the y side must miss."""
    n_sq, m_sq = Fraction(n_sq), Fraction(m_sq)
    bx, by = A.basepoint(AX), A.basepoint(AY)
    path_x = S.geodesic(AX.space, bx, A.orbit_point(AX, w.g))
    dd, _ = S.point_to_segment_sq(AX.space, A.orbit_point(AX, w.a), path_x)
    hit = dd <= n_sq if isinstance(dd, Fraction) else float(dd) <= float(n_sq) + 1e-12
    path_y = S.geodesic(AY.space, by, A.orbit_point(AY, w.g))
    dd_y, _ = S.point_to_segment_sq(AY.space, A.orbit_point(AY, w.a), path_y)
    miss = dd_y > m_sq if isinstance(dd_y, Fraction) else float(dd_y) > float(m_sq) + 1e-12
    return hit and miss


# ---------------------------------------------------------------------------
# Cauchy transfer
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TransferStreamVerdict:
    label: str
    x_verdict: str
    y_verdict: str
    tag: str                     # consistent | cauchy_image_diverges | cauchy_preimage_diverges | bounded
    x_limit: object
    y_limit: object

    def to_json(self):
        def lim(v):
            if v is None:
                return None
            if isinstance(v, tuple):
                return [x.to_json() for x in v]
            return v.to_json()
        return {"label": self.label, "x_verdict": self.x_verdict, "y_verdict": self.y_verdict,
                "tag": self.tag, "x_limit": lim(self.x_limit), "y_limit": lim(self.y_limit)}


@dataclass(frozen=True)
class TransferReport:
    refuted: bool
    streams: tuple[TransferStreamVerdict, ...]
    eps0: float
    radii: tuple

    def to_json(self):
        return {"refuted": self.refuted, "eps0": self.eps0, "radii": list(self.radii),
                "streams": [s.to_json() for s in self.streams]}


def check_cauchy_transfer(AX, AY, streams: Sequence[tuple[str, Sequence[GroupElement]]],
                          eps0: float, radii: Sequence[float], tol: float = 1e-6) -> TransferReport:
    """Run the orbit-sequence Cauchy test on both sides of each stream.  The
    transfer condition is refuted on this family iff some stream is Cauchy on
    exactly one side; the tag records which side diverges."""
    bx, by = A.basepoint(AX), A.basepoint(AY)
    out = []
    refuted = False
    for label, elems in streams:
        pts_x = [A.orbit_point(AX, g) for g in elems]
        pts_y = [A.orbit_point(AY, g) for g in elems]
        vx = B.limit_point(AX.space, pts_x, radii, tol, bx, eps0=eps0)
        vy = B.limit_point(AY.space, pts_y, radii, tol, by, eps0=eps0)
        xv, yv = vx.cauchy.verdict, vy.cauchy.verdict
        if "bounded" in (xv, yv):
            tag = "bounded"
        elif xv == "cauchy" and yv == "not_cauchy":
            tag = "cauchy_image_diverges"
            refuted = True
        elif xv == "not_cauchy" and yv == "cauchy":
            tag = "cauchy_preimage_diverges"
            refuted = True
        else:
            tag = "consistent"
        out.append(TransferStreamVerdict(
            label, xv, yv, tag,
            vx.limit if vx.kind == "converges" else (vx.limits if vx.kind == "divergent" else None),
            vy.limit if vy.kind == "converges" else (vy.limits if vy.kind == "divergent" else None)))
    return TransferReport(refuted, tuple(out), float(eps0), tuple(float(r) for r in radii))


# ---------------------------------------------------------------------------
# boundary map along orbit chains
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BoundaryMapResult:
    chain: tuple[GroupElement, ...]
    image: object                     # ConvergenceVerdict on the y side
    max_ray_gap: float                # max over i of d(g_i x0, xi_alpha(i))

    def to_json(self):
        return {"chain_length": len(self.chain),
                "image": self.image.to_json(),
                "max_ray_gap": self.max_ray_gap}


def orbit_chain_along_ray(AX, alpha, N: float, horizon: int) -> tuple[list[GroupElement], float]:
    """Greedy N-tracking chain: g_i with d(g_i x0, xi_alpha(i)) <= N, ties by
    canonical word order.  Possible by cocompactness; failure to find one
    signals a misconfigured action."""
    bx = A.basepoint(AX)
    ray = B.Ray(AX.space, bx, alpha)
    chain = []
    worst = 0.0
    for i in range(1, horizon + 1):
        target = ray.point_at(i)
        cands = A.orbit_near(AX, target, float(N) + 1e-9)
        if not cands:
            raise ConditionError(
                f"no orbit point within N of the ray point at arclength {i}; "
                "N is below the covering radius or the action is misconfigured")
        best = min(((S.distance(AX.space, A.orbit_point(AX, a), target), G._sort_key(a), a)
                    for a in cands), key=lambda t: (t[0], t[1]))
        chain.append(best[2])
        worst = max(worst, best[0])
    return chain, worst


def default_radii(horizon: float) -> tuple[float, ...]:
    """Geometric test radii staying safely inside the probed range."""
    out = [2.0]
    while out[-1] * 2 <= max(4.0, horizon / 2):
        out.append(out[-1] * 2)
    return tuple(out)


def build_boundary_map(AX, AY, alpha, N, horizon: int, tol: float,
                       radii: Optional[Sequence[float]] = None) -> BoundaryMapResult:
    """Image of a boundary point under the orbit correspondence: track the ray
    by orbit points on the X side, push the chain through the Y action, and
    extract the limit."""
    chain, worst = orbit_chain_along_ray(AX, alpha, float(N), horizon)
    by = A.basepoint(AY)
    pts_y = [A.orbit_point(AY, g) for g in chain]
    if radii is None:
        reach = max(S.distance(AY.space, by, p) for p in pts_y)
        radii = default_radii(reach)
    verdict = B.limit_point(AY.space, pts_y, radii, tol, by)
    return BoundaryMapResult(tuple(chain), verdict, worst)


# ---------------------------------------------------------------------------
# tracking-chain bounds
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ChainBound:
    name: str
    bound: float
    worst: float
    ok: bool
    argmax: tuple

    def to_json(self):
        return {"name": self.name, "bound": self.bound, "worst": self.worst,
                "ok": self.ok, "argmax": list(self.argmax)}


@dataclass(frozen=True)
class ChainBoundReport:
    all_ok: bool
    bounds: tuple[ChainBound, ...]
    skipped: tuple[str, ...]
    horizon: int

    def to_json(self):
        return {"all_ok": self.all_ok, "horizon": self.horizon,
                "bounds": [b.to_json() for b in self.bounds], "skipped": list(self.skipped)}


def _dist_to_ray(space, pt, ray: B.Ray, t_hi: float) -> float:
    f = lambda t: S.distance(space, pt, ray.point_at(t))
    d, _ = S.bracketed_min(f, 0.0, t_hi, 1e-9)
    return min(d, f(0.0), f(t_hi))


def check_tracking_chain(AX, AY, alpha, constants: ConstantSet, horizon: int,
                         radii: Optional[Sequence[float]] = None) -> ChainBoundReport:
    """Certify the six chain bounds for the greedy tracking chain of ``alpha``:

    1. d_X(g_i x0, [x0, g_j x0]) <= widened_cover_x            (i < j)
    2. d_Y(g_i y0, [y0, g_j y0]) <= widened_cover_y            (i < j)
    3. d_Y(g_i y0, image ray)    <= widened_cover_y + 1
    4. d_X(g_i x0, g_{i+1} x0)   <= 2 cover_x + 1
    5. d_Y(g_i y0, g_{i+1} y0)   <= stretch (2 cover_x + 1) + additive
    6. the image ray stays within 3 (widened_cover_y + 1)
       + stretch (2 cover_x + 1) + additive of the chain points
    """
    N = float(constants.cover_x)
    chain, _ = orbit_chain_along_ray(AX, alpha, N, horizon)
    bx, by = A.basepoint(AX), A.basepoint(AY)
    pts_x = [A.orbit_point(AX, g) for g in chain]
    pts_y = [A.orbit_point(AY, g) for g in chain]
    bounds = []
    skipped = []

    def run_pairwise(space, pts, bound, name, base):
        worst, arg = -1.0, ()
        for j in range(1, len(pts)):
            path = S.geodesic(space, base, pts[j])
            for i in range(j):
                d, _ = S.point_to_segment_distance(space, pts[i], path)
                if d > worst:
                    worst, arg = d, (i + 1, j + 1)
        bounds.append(ChainBound(name, float(bound), worst, worst <= float(bound) + 1e-9, arg))

    run_pairwise(AX.space, pts_x, constants.widened_cover_x, "x_chain_to_segment", bx)
    run_pairwise(AY.space, pts_y, constants.widened_cover_y, "y_chain_to_segment", by)

    def run_consecutive(space, pts, bound, name):
        worst, arg = -1.0, ()
        for i in range(len(pts) - 1):
            d = S.distance(space, pts[i], pts[i + 1])
            if d > worst:
                worst, arg = d, (i + 1, i + 2)
        bounds.append(ChainBound(name, float(bound), worst, worst <= float(bound) + 1e-9, arg))

    run_consecutive(AX.space, pts_x, 2 * constants.cover_x + 1, "x_consecutive")
    run_consecutive(AY.space, pts_y, constants.stretch * (2 * constants.cover_x + 1)
                    + constants.additive, "y_consecutive")

    if radii is None:
        radii = default_radii(max(S.distance(AY.space, by, p) for p in pts_y))
    verdict = B.limit_point(AY.space, pts_y, radii, 1e-6, by)
    if verdict.kind == "converges" and verdict.limit.point is not None:
        image_ray = B.Ray(AY.space, by, verdict.limit.point)
        t_hi = max(S.distance(AY.space, by, p) for p in pts_y) + float(constants.widened_cover_y) + 5
        bound3 = float(constants.widened_cover_y) + 1
        worst, arg = -1.0, ()
        for i, p in enumerate(pts_y):
            d = _dist_to_ray(AY.space, p, image_ray, t_hi)
            if d > worst:
                worst, arg = d, (i + 1,)
        bounds.append(ChainBound("y_chain_to_image_ray", bound3, worst, worst <= bound3 + 1e-9, arg))
        bound6 = 3 * (float(constants.widened_cover_y) + 1) \
            + float(constants.stretch * (2 * constants.cover_x + 1) + constants.additive)
        t_max = S.distance(AY.space, by, pts_y[-1])
        worst, arg = -1.0, ()
        t = 0.0
        while t <= t_max:
            pt = image_ray.point_at(t)
            d = min(S.distance(AY.space, pt, p) for p in pts_y)
            if d > worst:
                worst, arg = d, (t,)
            t += 0.5
        bounds.append(ChainBound("image_ray_in_chain_tube", bound6, worst, worst <= bound6 + 1e-9, arg))
    else:
        skipped.append("image sequence has no converging limit; ray bounds not applicable")

    return ChainBoundReport(all(b.ok for b in bounds), tuple(bounds), tuple(skipped), horizon)
