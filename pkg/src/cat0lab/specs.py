"""Model specs from key-value config text: groups, weights, spaces, actions.

Format: sections introduced by ``[name]`` lines, ``key = value`` entries,
``#`` comments.  Sections reference each other by name, so a full action pair
fits in one file:

    [group]
    kind = with_line
    base = base_group

    [base_group]
    kind = free
    rank = 2
    gens = a b

    [weights]
    a = 2/1
    b = 1

    [space]
    kind = tree_line
    group = group
    weights = weights

    [action]
    kind = tree_line
    space = space
    shifts = b:2
"""

from __future__ import annotations

from fractions import Fraction
from pathlib import Path

from . import actions as A
from . import groups as G
from . import spaces as S
from .config import ConfigError


def parse_sections(text: str) -> dict[str, dict[str, str]]:
    sections: dict[str, dict[str, str]] = {}
    current = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1].strip()
            if not current or current in sections:
                raise ConfigError(f"line {lineno}: bad or duplicate section {current!r}")
            sections[current] = {}
            continue
        if current is None or "=" not in line:
            raise ConfigError(f"line {lineno}: expected '[section]' or 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        sections[current][key.lower()] = value
    return sections


def load_spec_file(path: str | Path) -> dict[str, dict[str, str]]:
    return parse_sections(Path(path).read_text())


def _get(section: dict, key: str, default=None):
    if key in section:
        return section[key]
    if default is None:
        raise ConfigError(f"missing key {key!r}")
    return default


def build_family(sections: dict, name: str) -> G.Family:
    try:
        sec = sections[name]
    except KeyError:
        raise ConfigError(f"no section [{name}]") from None
    kind = _get(sec, "kind").lower()
    if kind == "free":
        if "gens" in sec:
            gens = sec["gens"].split()
        else:
            gens = list(G._DEFAULT_GENS[: int(_get(sec, "rank"))])
        if "rank" in sec and int(sec["rank"]) != len(gens):
            raise ConfigError("rank and generator list disagree")
        return G.FreeGroup(tuple(gens))
    if kind == "abelian":
        gens = sec["gens"].split() if "gens" in sec else None
        rank = int(sec["rank"]) if "rank" in sec else len(gens or ())
        if gens is not None and rank != len(gens):
            raise ConfigError("rank and generator list disagree")
        if rank < 1:
            raise ConfigError("abelian rank must be >= 1")
        return G.free_abelian(rank, gens)
    if kind == "cyclic":
        return G.FiniteCyclic(int(_get(sec, "order")), _get(sec, "gen", "s"))
    if kind == "product":
        factors = tuple(build_family(sections, n) for n in _get(sec, "factors").split())
        return G.FreeProduct(factors)
    if kind == "with_line":
        base = build_family(sections, _get(sec, "base"))
        return G.DirectWithLine(base, _get(sec, "line_gen", "t"))
    raise ConfigError(f"unknown group kind {kind!r}")


def build_weights(sections: dict, name: str, family: G.Family) -> G.WeightAssignment:
    sec = sections.get(name)
    if sec is None:
        raise ConfigError(f"no section [{name}]")
    try:
        return G.weights_from(family, {k: Fraction(v) for k, v in sec.items()})
    except (G.GroupError, ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"bad weights in [{name}]: {exc}") from exc


def _rows(text: str) -> tuple[tuple[Fraction, ...], ...]:
    return tuple(tuple(Fraction(v) for v in row.split()) for row in text.split(";"))


def build_space(sections: dict, name: str):
    sec = sections.get(name)
    if sec is None:
        raise ConfigError(f"no section [{name}]")
    kind = _get(sec, "kind").lower()
    if kind == "tree":
        fam = build_family(sections, _get(sec, "group"))
        wts = build_weights(sections, _get(sec, "weights"), fam) if "weights" in sec \
            else G.unit_weights(fam)
        return S.WeightedTree(fam, wts)
    if kind == "tree_line":
        grp = build_family(sections, _get(sec, "group"))
        if not isinstance(grp, G.DirectWithLine):
            raise ConfigError("tree_line spaces need a with_line group")
        wts = build_weights(sections, _get(sec, "weights"), grp.base) if "weights" in sec \
            else G.unit_weights(grp.base)
        return S.ProductSpace(S.WeightedTree(grp.base, wts))
    if kind == "flat":
        return S.FlatSpace(int(_get(sec, "dim")))
    if kind == "complex":
        fam = build_family(sections, _get(sec, "group"))
        if not isinstance(fam, G.FreeProduct):
            raise ConfigError("complexes need a free product group")
        pieces = tuple(build_piece(sections, n) for n in _get(sec, "pieces").split())
        try:
            return S.FreeProductComplex(fam, pieces)
        except S.SpaceError as exc:
            raise ConfigError(str(exc)) from exc
    raise ConfigError(f"unknown space kind {kind!r}")


def build_piece(sections: dict, name: str):
    sec = sections.get(name)
    if sec is None:
        raise ConfigError(f"no section [{name}]")
    kind = _get(sec, "kind").lower()
    if kind == "flat_piece":
        return S.FlatPiece(_rows(_get(sec, "basis")))
    if kind == "cone":
        return S.ConePiece(int(_get(sec, "orbit")), Fraction(_get(sec, "spoke", "1")))
    if kind == "interval":
        return S.IntervalPiece(Fraction(_get(sec, "length", "1")))
    if kind == "tree_line_piece":
        fam = build_family(sections, _get(sec, "group"))
        wts = build_weights(sections, _get(sec, "weights"), fam) if "weights" in sec \
            else G.unit_weights(fam)
        return S.TreeLinePiece(S.WeightedTree(fam, wts), Fraction(_get(sec, "line_unit", "1")))
    raise ConfigError(f"unknown piece kind {kind!r}")


def build_action(sections: dict, name: str):
    sec = sections.get(name)
    if sec is None:
        raise ConfigError(f"no section [{name}]")
    kind = _get(sec, "kind").lower()
    space = build_space(sections, _get(sec, "space"))
    try:
        if kind == "tree_line":
            grp_name = sec.get("group") or sections[_get(sec, "space")].get("group")
            grp = build_family(sections, grp_name)
            shifts = tuple((g, Fraction(v)) for g, v in
                           (tok.split(":") for tok in sec.get("shifts", "").split()))
            return A.TreeLineAction(grp, space, shifts,
                                    Fraction(_get(sec, "line_unit", "1")))
        if kind == "tree":
            return A.TreeAction(space)
        if kind == "lattice":
            grp = build_family(sections, _get(sec, "group"))
            return A.LatticeAction(grp, space, _rows(_get(sec, "basis")))
        if kind == "complex":
            return A.ComplexAction(space)
    except (A.ActionError, G.GroupError, S.SpaceError, ValueError) as exc:
        raise ConfigError(f"bad action spec [{name}]: {exc}") from exc
    raise ConfigError(f"unknown action kind {kind!r}")
