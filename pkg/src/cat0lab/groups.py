"""Group families, normal forms and word arithmetic.

Supported families: free groups, free abelian groups, finite cyclic groups,
free products of those, and direct products with an infinite cyclic "line"
factor.  Every element is stored in a unique canonical form, so equality and
hashing are structural.  All lengths are exact ``Fraction`` values.
"""

from __future__ import annotations

import heapq
import itertools
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Sequence, Union


class GroupError(ValueError):
    """Raised for malformed families, unknown generators or family mismatches."""


# ---------------------------------------------------------------------------
# families
# ---------------------------------------------------------------------------

_DEFAULT_GENS = "abcdefghijklmnopqrstuvwxyz"


@dataclass(frozen=True)
class FreeGroup:
    gens: tuple[str, ...]

    def __post_init__(self):
        if len(self.gens) < 1:
            raise GroupError("free group needs rank >= 1")

    @property
    def rank(self) -> int:
        return len(self.gens)


@dataclass(frozen=True)
class FreeAbelian:
    gens: tuple[str, ...]

    def __post_init__(self):
        if len(self.gens) < 1:
            raise GroupError("free abelian group needs rank >= 1")

    @property
    def rank(self) -> int:
        return len(self.gens)


@dataclass(frozen=True)
class FiniteCyclic:
    order: int
    gen: str = "s"

    def __post_init__(self):
        if self.order < 2:
            raise GroupError("cyclic order must be >= 2")


@dataclass(frozen=True)
class FreeProduct:
    factors: tuple["Family", ...]

    def __post_init__(self):
        if len(self.factors) < 2:
            raise GroupError("free product needs >= 2 factors")
        for f in self.factors:
            if isinstance(f, FreeProduct):
                raise GroupError("nest free products by flattening the factor list")
        names = generator_names(self)
        if len(names) != len(set(names)):
            raise GroupError("generator names must be unique across factors")


@dataclass(frozen=True)
class DirectWithLine:
    """base x Z, the line factor generated by ``line_gen``."""

    base: "Family"
    line_gen: str = "t"

    def __post_init__(self):
        if isinstance(self.base, DirectWithLine):
            raise GroupError("only one line factor is supported")
        if self.line_gen in generator_names(self.base):
            raise GroupError(f"line generator {self.line_gen!r} clashes with base")


Family = Union[FreeGroup, FreeAbelian, FiniteCyclic, FreeProduct, DirectWithLine]


def free_group(rank: int, gens: Sequence[str] | None = None) -> FreeGroup:
    if gens is None:
        gens = _DEFAULT_GENS[:rank]
    return FreeGroup(tuple(gens))


def free_abelian(rank: int, gens: Sequence[str] | None = None) -> FreeAbelian:
    if gens is None:
        gens = tuple(f"x{i + 1}" for i in range(rank)) if rank > 2 else ("x", "y")[:rank]
    return FreeAbelian(tuple(gens))


def generator_names(family: Family) -> tuple[str, ...]:
    if isinstance(family, (FreeGroup, FreeAbelian)):
        return family.gens
    if isinstance(family, FiniteCyclic):
        return (family.gen,)
    if isinstance(family, FreeProduct):
        return tuple(itertools.chain.from_iterable(generator_names(f) for f in family.factors))
    if isinstance(family, DirectWithLine):
        return generator_names(family.base) + (family.line_gen,)
    raise GroupError(f"unknown family {family!r}")


def _all_z2(family: FreeProduct) -> bool:
    return all(isinstance(f, FiniteCyclic) and f.order == 2 for f in family.factors)


def is_tree_family(family: Family) -> bool:
    """True when the Cayley graph of the family is a tree."""
    if isinstance(family, FreeGroup):
        return True
    return isinstance(family, FreeProduct) and _all_z2(family)


# ---------------------------------------------------------------------------
# elements
# ---------------------------------------------------------------------------
#
# Canonical payloads per family:
#   FreeGroup      tuple[(gen_index, exponent)]  adjacent indices differ, exponent != 0
#   FreeAbelian    tuple[int, ...]               one exponent per generator
#   FiniteCyclic   int                           exponent mod order
#   FreeProduct    all-Z2: tuple[int, ...]       factor indices, adjacent differ
#                  general: tuple[(factor_index, payload)]  alternating, nontrivial
#   DirectWithLine (base_payload, int)


@dataclass(frozen=True)
class GroupElement:
    family: Family
    word: tuple

    def __mul__(self, other: "GroupElement") -> "GroupElement":
        return multiply(self, other)

    def inverse(self) -> "GroupElement":
        return inverse(self)

    def is_identity(self) -> bool:
        return self.word == _id_payload(self.family)

    def __repr__(self):
        return f"<{format_element(self)}>"


def _id_payload(family: Family) -> tuple | int:
    if isinstance(family, FreeGroup):
        return ()
    if isinstance(family, FreeAbelian):
        return (0,) * family.rank
    if isinstance(family, FiniteCyclic):
        return 0
    if isinstance(family, FreeProduct):
        return ()
    if isinstance(family, DirectWithLine):
        return (_id_payload(family.base), 0)
    raise GroupError(f"unknown family {family!r}")


def identity(family: Family) -> GroupElement:
    return GroupElement(family, _id_payload(family))


def _is_trivial(family: Family, payload) -> bool:
    return payload == _id_payload(family)


def _gen_payload(family: Family, name: str, exp: int):
    """Payload of ``name**exp`` inside ``family`` (single-generator words)."""
    if isinstance(family, FreeGroup):
        if name not in family.gens:
            raise GroupError(f"unknown generator {name!r}")
        i = family.gens.index(name)
        return ((i, exp),) if exp else ()
    if isinstance(family, FreeAbelian):
        if name not in family.gens:
            raise GroupError(f"unknown generator {name!r}")
        v = [0] * family.rank
        v[family.gens.index(name)] = exp
        return tuple(v)
    if isinstance(family, FiniteCyclic):
        if name != family.gen:
            raise GroupError(f"unknown generator {name!r}")
        return exp % family.order
    if isinstance(family, FreeProduct):
        for i, f in enumerate(family.factors):
            if name in generator_names(f):
                p = _gen_payload(f, name, exp)
                if _is_trivial(f, p):
                    return _id_payload(family)
                if _all_z2(family):
                    return (i,)
                return ((i, p),)
        raise GroupError(f"unknown generator {name!r}")
    if isinstance(family, DirectWithLine):
        if name == family.line_gen:
            return (_id_payload(family.base), exp)
        return (_gen_payload(family.base, name, exp), 0)
    raise GroupError(f"unknown family {family!r}")


def generator(family: Family, name: str, exp: int = 1) -> GroupElement:
    return GroupElement(family, _gen_payload(family, name, exp))


def generators(family: Family) -> list[GroupElement]:
    return [generator(family, n) for n in generator_names(family)]


# --- multiplication -----------------------------------------------------


def _free_mul(w1: tuple, w2: tuple) -> tuple:
    if not w1:
        return w2
    if not w2:
        return w1
    left = list(w1)
    i = 0
    while left and i < len(w2):
        g1, e1 = left[-1]
        g2, e2 = w2[i]
        if g1 != g2:
            break
        e = e1 + e2
        left.pop()
        i += 1
        if e:
            left.append((g1, e))
            break
    return tuple(left) + w2[i:]


def _z2_mul(w1: tuple, w2: tuple) -> tuple:
    k = 0
    n1, n2 = len(w1), len(w2)
    while k < n1 and k < n2 and w1[n1 - 1 - k] == w2[k]:
        k += 1
    return w1[: n1 - k] + w2[k:]


def _fp_mul(family: FreeProduct, w1: tuple, w2: tuple) -> tuple:
    if _all_z2(family):
        return _z2_mul(w1, w2)
    left = list(w1)
    i = 0
    while left and i < len(w2):
        f1, p1 = left[-1]
        f2, p2 = w2[i]
        if f1 != f2:
            break
        fac = family.factors[f1]
        p = _factor_mul(fac, p1, p2)
        left.pop()
        i += 1
        if not _is_trivial(fac, p):
            left.append((f1, p))
            break
    return tuple(left) + w2[i:]


def _factor_mul(fac: Family, p1, p2):
    if isinstance(fac, FreeGroup):
        return _free_mul(p1, p2)
    if isinstance(fac, FreeAbelian):
        return tuple(a + b for a, b in zip(p1, p2))
    if isinstance(fac, FiniteCyclic):
        return (p1 + p2) % fac.order
    if isinstance(fac, DirectWithLine):
        return (_factor_mul(fac.base, p1[0], p2[0]), p1[1] + p2[1])
    raise GroupError(f"unsupported factor {fac!r}")


def multiply(g: GroupElement, h: GroupElement) -> GroupElement:
    if g.family != h.family:
        raise GroupError("family mismatch")
    fam = g.family
    if isinstance(fam, FreeGroup):
        return GroupElement(fam, _free_mul(g.word, h.word))
    if isinstance(fam, FreeProduct):
        return GroupElement(fam, _fp_mul(fam, g.word, h.word))
    if isinstance(fam, (FreeAbelian, FiniteCyclic, DirectWithLine)):
        return GroupElement(fam, _factor_mul(fam, g.word, h.word))
    raise GroupError(f"unknown family {fam!r}")


def _factor_inv(fac: Family, p):
    if isinstance(fac, FreeGroup):
        return tuple((g, -e) for g, e in reversed(p))
    if isinstance(fac, FreeAbelian):
        return tuple(-a for a in p)
    if isinstance(fac, FiniteCyclic):
        return (-p) % fac.order
    if isinstance(fac, DirectWithLine):
        return (_factor_inv(fac.base, p[0]), -p[1])
    raise GroupError(f"unsupported factor {fac!r}")


def inverse(g: GroupElement) -> GroupElement:
    fam = g.family
    if isinstance(fam, FreeProduct):
        if _all_z2(fam):
            return GroupElement(fam, tuple(reversed(g.word)))
        w = tuple((f, _factor_inv(fam.factors[f], p)) for f, p in reversed(g.word))
        return GroupElement(fam, w)
    return GroupElement(fam, _factor_inv(fam, g.word))


def power(g: GroupElement, n: int) -> GroupElement:
    if n < 0:
        return power(inverse(g), -n)
    out = identity(g.family)
    base = g
    while n:
        if n & 1:
            out = multiply(out, base)
        base = multiply(base, base)
        n >>= 1
    return out


# --- reduce / parse -------------------------------------------------------


def reduce(family: Family, letters: Iterable[tuple[str, int]]) -> GroupElement:
    """Fold a raw generator word into its unique normal form.

    ``letters`` is a sequence of (generator name, exponent) pairs; exponents
    may be any integers.  Idempotent: feeding the letters of a normal form
    back in reproduces it.
    """
    out = identity(family)
    for name, exp in letters:
        out = multiply(out, generator(family, name, exp))
    return out


_TOKEN = re.compile(r"([A-Za-z_][A-Za-z_0-9]*)(?:\^(-?\d+))?")


def parse_element(family: Family, text: str) -> GroupElement:
    """Parse words like ``"a b^-2 a^3"`` (whitespace- or ``*``-separated)."""
    text = text.strip()
    if text in ("", "e", "1"):
        return identity(family)
    letters = []
    pos = 0
    for m in _TOKEN.finditer(text.replace("*", " ")):
        between = text.replace("*", " ")[pos:m.start()]
        if between.strip():
            raise GroupError(f"cannot parse {text!r} near {between!r}")
        letters.append((m.group(1), int(m.group(2) or 1)))
        pos = m.end()
    if pos != len(text.replace("*", " ")) and text[pos:].strip():
        raise GroupError(f"cannot parse {text!r}")
    return reduce(family, letters)


def format_element(g: GroupElement) -> str:
    fam = g.family
    parts: list[str] = []

    def emit(fac: Family, payload):
        if isinstance(fac, FreeGroup):
            for i, e in payload:
                parts.append(fac.gens[i] if e == 1 else f"{fac.gens[i]}^{e}")
        elif isinstance(fac, FreeAbelian):
            for name, e in zip(fac.gens, payload):
                if e:
                    parts.append(name if e == 1 else f"{name}^{e}")
        elif isinstance(fac, FiniteCyclic):
            if payload:
                parts.append(fac.gen if payload == 1 else f"{fac.gen}^{payload}")
        elif isinstance(fac, DirectWithLine):
            emit(fac.base, payload[0])
            if payload[1]:
                parts.append(fac.line_gen if payload[1] == 1 else f"{fac.line_gen}^{payload[1]}")

    if isinstance(fam, FreeProduct):
        if _all_z2(fam):
            for i in g.word:
                emit(fam.factors[i], 1)
        else:
            for i, p in g.word:
                emit(fam.factors[i], p)
    else:
        emit(fam, g.word)
    return " ".join(parts) if parts else "e"


# --- syllables ------------------------------------------------------------


def syllables(g: GroupElement) -> list[tuple[int, GroupElement]]:
    """Alternating free-product decomposition as (factor index, factor element)."""
    fam = g.family
    if not isinstance(fam, FreeProduct):
        raise GroupError("syllables need a free product family")
    if _all_z2(fam):
        return [(i, GroupElement(fam.factors[i], 1)) for i in g.word]
    return [(i, GroupElement(fam.factors[i], p)) for i, p in g.word]


def from_syllables(family: FreeProduct, syls: Iterable[tuple[int, GroupElement]]) -> GroupElement:
    out = identity(family)
    for i, s in syls:
        out = multiply(out, embed_factor(family, i, s))
    return out


def embed_factor(family: FreeProduct, index: int, s: GroupElement) -> GroupElement:
    if s.family != family.factors[index]:
        raise GroupError("factor element belongs to a different family")
    if s.is_identity():
        return identity(family)
    if _all_z2(family):
        return GroupElement(family, (index,))
    return GroupElement(family, ((index, s.word),))


def syllable_count(g: GroupElement) -> int:
    if not isinstance(g.family, FreeProduct):
        raise GroupError("syllable_count needs a free product family")
    return len(g.word)


# ---------------------------------------------------------------------------
# weights and lengths
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class WeightAssignment:
    """Positive length per generator name."""

    table: tuple[tuple[str, Fraction], ...]

    def __post_init__(self):
        for name, w in self.table:
            if w <= 0:
                raise GroupError(f"weight of {name!r} must be positive")

    def of(self, name: str) -> Fraction:
        for n, w in self.table:
            if n == name:
                return w
        raise GroupError(f"no weight for generator {name!r}")

    def mapping(self) -> dict[str, Fraction]:
        return dict(self.table)


def weights_from(family: Family, values: Mapping[str, object] | None = None) -> WeightAssignment:
    """Weights for all generators of ``family``; unspecified names default to 1."""
    values = dict(values or {})
    table = []
    for name in generator_names(family):
        v = values.pop(name, 1)
        table.append((name, Fraction(v)))
    if values:
        raise GroupError(f"weights for unknown generators: {sorted(values)}")
    return WeightAssignment(tuple(table))


def unit_weights(family: Family) -> WeightAssignment:
    return weights_from(family, {})


def word_length(g: GroupElement, weights: WeightAssignment) -> Fraction:
    """Weighted word length in the generating set (defined for every family)."""
    fam = g.family

    def fac_len(fac: Family, payload) -> Fraction:
        if isinstance(fac, FreeGroup):
            return sum((weights.of(fac.gens[i]) * abs(e) for i, e in payload), Fraction(0))
        if isinstance(fac, FreeAbelian):
            return sum((weights.of(n) * abs(e) for n, e in zip(fac.gens, payload)), Fraction(0))
        if isinstance(fac, FiniteCyclic):
            return weights.of(fac.gen) * min(payload, fac.order - payload)
        if isinstance(fac, DirectWithLine):
            return fac_len(fac.base, payload[0]) + weights.of(fac.line_gen) * abs(payload[1])
        raise GroupError(f"unsupported factor {fac!r}")

    if isinstance(fam, FreeProduct):
        if _all_z2(fam):
            # letter words can be huge; count per factor instead of iterating
            total = Fraction(0)
            for i, f in enumerate(fam.factors):
                c = g.word.count(i)
                if c:
                    total += weights.of(f.gen) * c
            return total
        return sum((fac_len(fam.factors[i], p) for i, p in g.word), Fraction(0))
    return fac_len(fam, g.word)


def weighted_length(g: GroupElement, weights: WeightAssignment) -> Fraction:
    """Weighted word length, guaranteed to equal the Cayley-tree distance
    from the identity vertex.  Only tree families and free products of
    finite cyclic groups qualify; anything else raises."""
    fam = g.family
    ok = isinstance(fam, FreeGroup) or (
        isinstance(fam, FreeProduct)
        and all(isinstance(f, FiniteCyclic) for f in fam.factors)
    )
    if not ok:
        raise GroupError(f"{type(fam).__name__} has no tree Cayley graph")
    return word_length(g, weights)


# ---------------------------------------------------------------------------
# letter-level access for tree families
# ---------------------------------------------------------------------------
#
# Signed letter codes: FreeGroup gen i maps to 2i (positive) and 2i+1
# (inverse); all-Z2 free products use the factor index (self-inverse).


def letter_codes(family: Family) -> list[int]:
    if isinstance(family, FreeGroup):
        return list(range(2 * family.rank))
    if isinstance(family, FreeProduct) and _all_z2(family):
        return list(range(len(family.factors)))
    raise GroupError("letter codes exist only for tree families")


def letter_name(family: Family, code: int) -> tuple[str, int]:
    if isinstance(family, FreeGroup):
        return family.gens[code // 2], (1 if code % 2 == 0 else -1)
    return family.factors[code].gen, 1


def letter_inverse(family: Family, code: int) -> int:
    if isinstance(family, FreeGroup):
        return code ^ 1
    return code


def letter_weight(family: Family, code: int, weights: WeightAssignment) -> Fraction:
    return weights.of(letter_name(family, code)[0])


def letters_of(g: GroupElement) -> Iterator[int]:
    """Signed letter codes of a tree-family normal form, left to right."""
    fam = g.family
    if isinstance(fam, FreeGroup):
        for i, e in g.word:
            code = 2 * i + (0 if e > 0 else 1)
            for _ in range(abs(e)):
                yield code
    elif isinstance(fam, FreeProduct) and _all_z2(fam):
        yield from g.word
    else:
        raise GroupError("letters exist only for tree families")


def letter_count(g: GroupElement) -> int:
    fam = g.family
    if isinstance(fam, FreeGroup):
        return sum(abs(e) for _, e in g.word)
    if isinstance(fam, FreeProduct) and _all_z2(fam):
        return len(g.word)
    raise GroupError("letters exist only for tree families")


def append_letter(g: GroupElement, code: int) -> GroupElement:
    fam = g.family
    if isinstance(fam, FreeGroup):
        i, e = code // 2, (1 if code % 2 == 0 else -1)
        return GroupElement(fam, _free_mul(g.word, ((i, e),)))
    return GroupElement(fam, _z2_mul(g.word, (code,)))


def from_letters(family: Family, codes: Iterable[int]) -> GroupElement:
    g = identity(family)
    for c in codes:
        g = append_letter(g, c)
    return g


def from_reduced_letters(family: Family, codes: Sequence[int]) -> GroupElement:
    """Build an element from letter codes known to be reduced already;
    linear time (``from_letters`` re-reduces and rebuilds per letter)."""
    if isinstance(family, FreeGroup):
        blocks: list[tuple[int, int]] = []
        for c in codes:
            gi, sign = c // 2, (1 if c % 2 == 0 else -1)
            if blocks and blocks[-1][0] == gi:
                prev = blocks[-1][1]
                if (prev > 0) != (sign > 0):
                    raise GroupError("letters are not reduced")
                blocks[-1] = (gi, prev + sign)
            else:
                blocks.append((gi, sign))
        return GroupElement(family, tuple(blocks))
    if isinstance(family, FreeProduct) and _all_z2(family):
        codes = tuple(int(c) for c in codes)
        for a, b in zip(codes, codes[1:]):
            if a == b:
                raise GroupError("letters are not reduced")
        return GroupElement(family, codes)
    raise GroupError("letters exist only for tree families")


# ---------------------------------------------------------------------------
# ball enumeration
# ---------------------------------------------------------------------------


def _step_generators(family: Family, weights: WeightAssignment):
    """(name, exponent step, weight) triples generating the Cayley graph."""
    steps = []

    def add(fac: Family):
        if isinstance(fac, (FreeGroup, FreeAbelian)):
            for n in fac.gens:
                steps.append((n, 1, weights.of(n)))
                steps.append((n, -1, weights.of(n)))
        elif isinstance(fac, FiniteCyclic):
            steps.append((fac.gen, 1, weights.of(fac.gen)))
            if fac.order > 2:
                steps.append((fac.gen, -1, weights.of(fac.gen)))
        elif isinstance(fac, FreeProduct):
            for f in fac.factors:
                add(f)
        elif isinstance(fac, DirectWithLine):
            add(fac.base)
            steps.append((fac.line_gen, 1, weights.of(fac.line_gen)))
            steps.append((fac.line_gen, -1, weights.of(fac.line_gen)))

    add(family)
    return steps


def _sort_key(g: GroupElement):
    """Deterministic tie-break: compare words letter-lexicographically."""
    fam = g.family

    def fac_key(fac: Family, payload):
        if isinstance(fac, FreeGroup):
            out = []
            for i, e in payload:
                out.extend([2 * i + (0 if e > 0 else 1)] * min(abs(e), 64))
                if abs(e) > 64:
                    out.append(abs(e))
            return tuple(out)
        if isinstance(fac, FreeAbelian):
            return tuple(x for a in payload for x in (abs(a), 0 if a >= 0 else 1))
        if isinstance(fac, FiniteCyclic):
            return (payload,)
        if isinstance(fac, DirectWithLine):
            k = payload[1]
            return fac_key(fac.base, payload[0]) + (abs(k), 0 if k >= 0 else 1)
        raise GroupError(f"unsupported factor {fac!r}")

    if isinstance(fam, FreeProduct):
        if _all_z2(fam):
            return tuple(g.word)
        out: tuple = ()
        for i, p in g.word:
            out = out + (i,) + fac_key(fam.factors[i], p)
        return out
    return fac_key(fam, g.word)


def ball(family: Family, weights: WeightAssignment, radius) -> Iterator[GroupElement]:
    """Yield every element of weighted word length <= radius exactly once,
    in nondecreasing length, ties broken by letter-lexicographic order."""
    radius = Fraction(radius)
    if radius < 0:
        return
    start = identity(family)
    steps = _step_generators(family, weights)
    heap: list[tuple[Fraction, tuple, tuple]] = [(Fraction(0), _sort_key(start), start.word)]
    seen = {start.word}
    while heap:
        dist, _, payload = heapq.heappop(heap)
        g = GroupElement(family, payload)
        yield g
        for name, exp, w in steps:
            nd = dist + w
            if nd > radius:
                continue
            h = multiply(g, generator(family, name, exp))
            if h.word in seen:
                continue
            actual = word_length(h, weights)
            if actual != nd:  # step did not increase length; reachable shorter
                continue
            seen.add(h.word)
            heapq.heappush(heap, (nd, _sort_key(h), h.word))


def ball_list(family: Family, weights: WeightAssignment, radius) -> list[GroupElement]:
    return list(ball(family, weights, radius))
