"""Finitely presented countable PO systems.

A presentation is a list of families (singletons and ω-chains ``x[0], x[1],
...``) plus shift rules such as ``x[2n+1] < y[n] if n >= 3``.  All queries work
on a truncation: elements with index ``<= B`` are the *visible* elements, and
the order among them is computed as the transitive closure of the rule
instances with indices ``<= C``, where ``C = B + slack`` leaves room for rule
paths that climb above the visible window before coming back.

Questions about infinite behaviour (suprema, separatedness, compactness) are
answered with :class:`TriBool`: a definite answer is given only when it is
stable between ``B`` and ``B + slack``; otherwise ``unknown`` with the bound.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import AntisymmetryViolation, DSLError, PostoneError, UndecidedContainment
from .poset import PoSystem, finite_foundation

DIRECTIONS = ("increasing", "decreasing", "none")


@dataclass(frozen=True)
class Family:
    name: str
    chain: bool = False
    direction: str = "none"
    reflexive: bool = False


@dataclass(frozen=True)
class Term:
    """``family``, ``family[k]`` or ``family[a*n + c]`` (``a > 0``)."""

    family: str
    a: int = 0
    c: int | None = None

    @property
    def uses_n(self) -> bool:
        return self.a != 0

    def index(self, n: int) -> int | None:
        if self.c is None:
            return None
        return self.a * n + self.c

    def __str__(self):
        if self.c is None:
            return self.family
        if not self.a:
            return f"{self.family}[{self.c}]"
        lead = "n" if self.a == 1 else f"{self.a}n"
        if self.c > 0:
            return f"{self.family}[{lead}+{self.c}]"
        if self.c < 0:
            return f"{self.family}[{lead}-{-self.c}]"
        return f"{self.family}[{lead}]"


@dataclass(frozen=True)
class Rule:
    left: Term
    right: Term
    guard: int = 0

    def __str__(self):
        g = f" if n >= {self.guard}" if self.guard else ""
        return f"rule {self.left} < {self.right}{g}"


def element_id(family: str, index: int | None) -> str:
    return family if index is None else f"{family}[{index}]"


_ELEMENT = re.compile(r"^\s*([A-Za-z_][\w']*)\s*(?:\[\s*(\d+)\s*\])?\s*$")


def parse_element(text: str) -> tuple[str, int | None]:
    m = _ELEMENT.match(text)
    if not m:
        raise PostoneError(f"bad element {text!r}")
    return m.group(1), (int(m.group(2)) if m.group(2) is not None else None)


class TriBool:
    """``true``, ``false`` or ``unknown`` at a bound, with an optional witness."""

    __slots__ = ("value", "bound", "witness")

    def __init__(self, value: str, bound: int | None = None, witness: Mapping | None = None):
        if value not in ("true", "false", "unknown"):
            raise ValueError(value)
        self.value = value
        self.bound = bound
        self.witness = dict(witness) if witness else None

    def __eq__(self, other):
        if isinstance(other, str):
            return self.value == other
        if isinstance(other, bool):
            return self.value == ("true" if other else "false")
        if isinstance(other, TriBool):
            return self.value == other.value
        return NotImplemented

    def __hash__(self):
        return hash(self.value)

    def __repr__(self):
        extra = f", bound={self.bound}" if self.value == "unknown" else ""
        return f"TriBool({self.value!r}{extra})"

    def to_json(self) -> dict:
        out = {"value": self.value}
        if self.value == "unknown":
            out["bound"] = self.bound
        if self.witness:
            out["witness"] = self.witness
        return out

    @staticmethod
    def all(values: Iterable[TriBool], bound: int) -> TriBool:
        unknown = None
        for v in values:
            if v.value == "false":
                return v
            if v.value == "unknown":
                unknown = v
        return unknown if unknown is not None else TriBool("true", bound)


# -- presentations ------------------------------------------------------------------


class PresentedPoSystem:
    def __init__(self, families: Sequence[Family], rules: Sequence[Rule] = (),
                 marks: Mapping[str, Sequence[str]] | None = None):
        self.families = tuple(families)
        self.rules = tuple(rules)
        self.marks = {k: tuple(v) for k, v in (marks or {}).items()}
        self.family = {f.name: f for f in self.families}
        if len(self.family) != len(self.families):
            raise PostoneError("duplicate family names")
        for r in self.rules:
            for t in (r.left, r.right):
                fam = self.family.get(t.family)
                if fam is None:
                    raise PostoneError(f"rule mentions unknown family {t.family}")
                if fam.chain != (t.c is not None):
                    kind = "chain" if fam.chain else "singleton"
                    raise PostoneError(f"term {t} does not fit {kind} family {fam.name}")
        for k, fams in self.marks.items():
            for f in fams:
                if f not in self.family:
                    raise PostoneError(f"mark {k} mentions unknown family {f}")
        self._cache: dict[int, Truncation] = {}

    @property
    def chains(self) -> tuple[Family, ...]:
        return tuple(f for f in self.families if f.chain)

    @property
    def is_finite(self) -> bool:
        return not self.chains

    @cached_property
    def slack(self) -> int:
        terms = [t for r in self.rules for t in (r.left, r.right) if t.uses_n]
        shift = max([abs(t.c) for t in terms] + [r.guard for r in self.rules] + [0])
        return max(4, 2 * (shift + 1) * min(len(self.chains), 4)) if self.chains else 0

    def cap(self, bound: int) -> int:
        mult = max([t.a for r in self.rules for t in (r.left, r.right)] + [1])
        return mult * bound + self.slack

    def truncation(self, bound: int) -> Truncation:
        if bound not in self._cache:
            self._cache[bound] = Truncation(self, bound)
        return self._cache[bound]

    def elements(self, bound: int, families: Iterable[str] | None = None) -> tuple[str, ...]:
        keep = None if families is None else set(families)
        out = []
        for f in self.families:
            if keep is not None and f.name not in keep:
                continue
            if f.chain:
                out.extend(element_id(f.name, i) for i in range(bound + 1))
            else:
                out.append(f.name)
        return tuple(out)

    def contains(self, x: str) -> bool:
        fam, idx = parse_element(x)
        f = self.family.get(fam)
        return f is not None and f.chain == (idx is not None)

    def mark(self, name: str) -> tuple[str, ...]:
        if name not in self.marks:
            raise PostoneError(f"no mark named {name!r}")
        return self.marks[name]

    def restrict(self, families: Iterable[str]) -> PresentedPoSystem:
        """Sub-presentation on ``families`` with only the rules among them.

        Note the induced order of a marked subset is obtained from the full
        truncation instead (see :meth:`Truncation.induced`).
        """
        keep = set(families)
        return PresentedPoSystem(
            [f for f in self.families if f.name in keep],
            [r for r in self.rules if r.left.family in keep and r.right.family in keep],
        )

    def to_dsl(self) -> str:
        lines = []
        for f in self.families:
            kind = f" chain {f.direction}" if f.chain else ""
            lines.append(f"family {f.name}{kind}")
        for f in self.families:
            if f.reflexive:
                lines.append(f"reflexive {f.name}")
        lines.extend(str(r) for r in self.rules)
        for k, v in self.marks.items():
            lines.append(f"mark {k} {' '.join(v)}")
        return "\n".join(lines) + "\n"

    # -- order queries ---------------------------------------------------

    def _index_of(self, x: str) -> int:
        return parse_element(x)[1] or 0

    def leq(self, x: str, y: str, bound: int | None = None) -> bool:
        if not (self.contains(x) and self.contains(y)):
            raise PostoneError(f"unknown element {x if not self.contains(x) else y}")
        b = max(self._index_of(x), self._index_of(y), bound or 0, 1)
        return x == y or self.truncation(b).lt(x, y)

    def lt(self, x: str, y: str, bound: int | None = None) -> bool:
        b = max(self._index_of(x), self._index_of(y), bound or 0, 1)
        return self.truncation(b).lt(x, y)


class Truncation:
    """Closure of the rule instances with indices ``<= cap``, exposing the part ``<= bound``."""

    def __init__(self, P: PresentedPoSystem, bound: int):
        self.P = P
        self.bound = bound
        self.cap = P.cap(bound)
        self.all = P.elements(self.cap)
        self.idx = {x: i for i, x in enumerate(self.all)}
        n = len(self.all)
        R = np.zeros((n, n), dtype=bool)
        cap = self.cap
        for f in P.families:
            if f.chain:
                ids = [self.idx[element_id(f.name, i)] for i in range(cap + 1)]
                if f.direction == "increasing":
                    R[ids[:-1], ids[1:]] = True
                elif f.direction == "decreasing":
                    R[ids[1:], ids[:-1]] = True
                if f.reflexive:
                    R[ids, ids] = True
            elif f.reflexive:
                i = self.idx[f.name]
                R[i, i] = True
        for r in P.rules:
            ns = range(r.guard, cap + 1) if (r.left.uses_n or r.right.uses_n) else [0]
            for k in ns:
                a, b = r.left.index(k), r.right.index(k)
                if (a is not None and not 0 <= a <= cap) or (b is not None and not 0 <= b <= cap):
                    continue
                R[self.idx[element_id(r.left.family, a)], self.idx[element_id(r.right.family, b)]] = True
        self.R = _closure(R)
        both = self.R & self.R.T
        np.fill_diagonal(both, False)
        if both.any():
            i, j = map(int, np.argwhere(both)[0])
            raise AntisymmetryViolation(self.all[i], self.all[j])
        self.visible = P.elements(bound)

    def lt(self, x: str, y: str) -> bool:
        return bool(self.R[self.idx[x], self.idx[y]])

    def le(self, x: str, y: str) -> bool:
        return x == y or self.lt(x, y)

    @cached_property
    def posystem(self) -> PoSystem:
        return self.induced(self.visible)

    def induced(self, elements: Sequence[str]) -> PoSystem:
        ids = [self.idx[x] for x in elements]
        sub = self.R[np.ix_(ids, ids)]
        pairs = [(elements[i], elements[j]) for i, j in np.argwhere(sub)]
        return PoSystem(elements, pairs)

    def down(self, xs: Iterable[str]) -> frozenset[str]:
        """Elements (up to the cap) below some member of ``xs``."""
        ids = [self.idx[x] for x in xs]
        if not ids:
            return frozenset()
        mask = self.R[:, ids].any(axis=1)
        mask[ids] = True
        return frozenset(self.all[i] for i in np.flatnonzero(mask))

    def upper_bounds(self, gens: Sequence[str], within: Sequence[str]) -> list[str]:
        ids = [self.idx[x] for x in gens]
        out = []
        for u in within:
            j = self.idx[u]
            col = self.R[ids, j].copy()
            col |= np.array(ids) == j
            if col.all():
                out.append(u)
        return out


def _closure(R: np.ndarray) -> np.ndarray:
    """Transitive closure by repeated boolean squaring."""
    M = R.astype(np.float32)
    while True:
        nxt = (M + M @ M) > 0
        if (nxt == (M > 0)).all():
            return nxt
        M = nxt.astype(np.float32)


# -- DSL --------------------------------------------------------------------------------

_TERM = re.compile(
    r"^\s*([A-Za-z_][\w']*)\s*(?:\[\s*(?:(\d+)|(\d*)\s*\*?\s*n\s*(?:([+-])\s*(\d+))?)\s*\])?\s*$"
)


def _parse_term(text: str, lineno: int) -> Term:
    m = _TERM.match(text)
    if not m:
        raise DSLError(lineno, f"bad term {text!r}")
    name, fixed, mult, sign, off = m.groups()
    if "[" not in text:
        return Term(name)
    if fixed is not None:
        return Term(name, 0, int(fixed))
    a = int(mult) if mult else 1
    if a < 1:
        raise DSLError(lineno, f"multiplier must be positive in {text!r}")
    c = int(off) if off else 0
    return Term(name, a, -c if sign == "-" else c)


def parse_dsl(text: str) -> PresentedPoSystem:
    families: list[Family] = []
    rules: list[Rule] = []
    marks: dict[str, list[str]] = {}
    reflexive: dict[str, int] = {}
    rule_lines: list[int] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        words = line.split()
        head = words[0]
        if head == "family":
            if len(words) == 2:
                families.append(Family(words[1]))
            elif len(words) == 4 and words[2] == "chain" and words[3] in DIRECTIONS:
                families.append(Family(words[1], True, words[3]))
            elif len(words) == 3 and words[2] == "chain":
                families.append(Family(words[1], True, "increasing"))
            else:
                raise DSLError(lineno, f"expected 'family NAME [chain increasing|decreasing|none]', got {line!r}")
        elif head == "reflexive":
            if len(words) < 2:
                raise DSLError(lineno, "reflexive needs at least one family")
            for w in words[1:]:
                reflexive.setdefault(w, lineno)
        elif head == "mark":
            if len(words) < 3:
                raise DSLError(lineno, "mark needs a name and at least one family")
            marks.setdefault(words[1], []).extend(words[2:])
        elif head == "rule":
            body = line[len("rule"):]
            guard = 0
            gm = re.search(r"\bif\s+n\s*>=\s*(\d+)\s*$", body)
            if gm:
                guard = int(gm.group(1))
                body = body[: gm.start()]
            if body.count("<") != 1:
                raise DSLError(lineno, f"rule needs exactly one '<': {line!r}")
            left, right = body.split("<")
            rules.append(Rule(_parse_term(left, lineno), _parse_term(right, lineno), guard))
            rule_lines.append(lineno)
        else:
            raise DSLError(lineno, f"unknown statement {head!r}")
    kinds = {f.name: f.chain for f in families}
    for name, lineno in reflexive.items():
        if name not in kinds:
            raise DSLError(lineno, f"reflexive mentions unknown family {name}")
    for r, lineno in zip(rules, rule_lines):
        for t in (r.left, r.right):
            if t.family not in kinds:
                raise DSLError(lineno, f"rule mentions unknown family {t.family}")
            if kinds[t.family] != (t.c is not None):
                kind = "chain" if kinds[t.family] else "singleton"
                raise DSLError(lineno, f"term {t} does not fit {kind} family {t.family}")
    families = [Family(f.name, f.chain, f.direction, f.name in reflexive) for f in families]
    try:
        return PresentedPoSystem(families, rules, marks)
    except DSLError:
        raise
    except PostoneError as exc:
        raise DSLError(0, str(exc)) from None


# -- ideals ---------------------------------------------------------------------------


@dataclass(frozen=True)
class IdealRef:
    """``principal(x)``, or the tail of ``family[step*n + residue]`` (a non-principal ideal)."""

    kind: str
    element: str | None = None
    family: str | None = None
    step: int = 1
    residue: int = 0
    aliases: tuple = ()

    @property
    def name(self) -> str:
        if self.kind == "principal":
            return self.element
        if self.step == 1:
            return f"tail:{self.family}"
        return f"tail:{self.family}:{self.step}:{self.residue}"

    @property
    def principal(self) -> bool:
        return self.kind == "principal"

    def generators(self, cap: int) -> list[str]:
        if self.principal:
            return [self.element]
        return [element_id(self.family, i) for i in range(self.residue, cap + 1, self.step)]

    def carrier(self, T: Truncation) -> frozenset[str]:
        return T.down(self.generators(T.cap))

    def to_json(self) -> dict:
        out = {"name": self.name, "kind": "principal" if self.principal else "chain_tail"}
        if self.aliases:
            out["equal_to_bound"] = list(self.aliases)
        return out


def chain_step(P: PresentedPoSystem, family: str, bound: int, max_step: int = 4) -> int | None:
    """Least ``s`` with ``x[n] < x[n+s]`` for every visible ``n``, if any."""
    T = P.truncation(bound)
    for s in range(1, max_step + 1):
        if s > bound:
            break
        if all(T.lt(element_id(family, n), element_id(family, n + s)) for n in range(bound - s + 1)):
            return s
    return None


def ideals(P: PresentedPoSystem, bound: int, families: Iterable[str] | None = None,
           principal: bool = True) -> list[IdealRef]:
    """Principal ideals of visible elements, then the detected chain-tail ideals.

    Chain tails with equal carriers (restricted to the visible window) are
    merged; the survivor lists the others under ``equal_to_bound``.
    """
    if bound < 1:
        raise PostoneError("bound must be >= 1")
    T = P.truncation(bound)
    fams = [f for f in P.families if families is None or f.name in set(families)]
    out: list[IdealRef] = []
    if principal:
        out.extend(IdealRef("principal", x) for x in P.elements(bound, [f.name for f in fams]))
    allowed = None if families is None else set(P.elements(T.cap, [f.name for f in fams]))
    tails: list[tuple[IdealRef, frozenset]] = []
    for f in fams:
        if not f.chain:
            continue
        s = chain_step(P, f.name, bound)
        if s is None:
            continue
        for k in range(s):
            J = IdealRef("chain_tail", family=f.name, step=s, residue=k)
            car = J.carrier(T)
            if allowed is not None:
                car = car & allowed
            for i, (K, kcar) in enumerate(tails):
                if _included(T, J, K, allowed) and _included(T, K, J, allowed):
                    tails[i] = (IdealRef(K.kind, K.element, K.family, K.step, K.residue,
                                         K.aliases + (J.name,)), kcar)
                    break
            else:
                tails.append((J, car))
    out.extend(J for J, _ in tails)
    return out


def _included(T: Truncation, J: IdealRef, K: IdealRef, allowed=None) -> bool:
    """``J ⊆ K``: generators of ``J`` a little past the bound lie in the carrier of ``K``."""
    reach = T.bound + max(T.P.slack // 2, 1)
    gens = [g for g in J.generators(reach) if g in T.idx and (allowed is None or g in allowed)]
    car = K.carrier(T)
    return all(g in car for g in gens)


def find_ideal(P: PresentedPoSystem, name: str, bound: int) -> IdealRef:
    for J in ideals(P, bound):
        if J.name == name or name in J.aliases:
            return J
    if P.contains(name):
        return IdealRef("principal", name)
    raise PostoneError(f"no detected ideal named {name!r} at bound {bound}")


def _sup_at(P: PresentedPoSystem, J: IdealRef, bound: int) -> str | None:
    T = P.truncation(bound)
    if J.principal:
        return J.element
    ub = T.upper_bounds(J.generators(T.cap), T.visible)
    least = [u for u in ub if all(T.le(u, v) for v in ub)]
    return least[0] if least else None


def sup(P: PresentedPoSystem, J: IdealRef, bound: int) -> TriBool:
    """``sup_P J``: ``true`` with witness ``{"sup": x}``, ``false`` if none, or ``unknown``."""
    a = _sup_at(P, J, bound)
    b = _sup_at(P, J, bound + max(P.slack, 1))
    if a != b:
        return TriBool("unknown", bound)
    if a is None:
        return TriBool("false", bound)
    return TriBool("true", bound, {"sup": a})


def _in_carrier(P: PresentedPoSystem, x: str, J: IdealRef, bound: int) -> bool:
    if J.principal:
        return P.leq(x, J.element, bound)
    T = P.truncation(max(bound, P._index_of(x)))
    return x in J.carrier(T)


# -- separation, compactness, rank ------------------------------------------------------


def is_separated(P: PresentedPoSystem, p: str, bound: int) -> TriBool:
    """``p`` is not the supremum of a strictly increasing sequence."""
    unknown = False
    for J in ideals(P, bound, principal=False):
        s = sup(P, J, bound)
        if s.value == "unknown":
            unknown = True
        elif s.value == "true" and s.witness["sup"] == p:
            return TriBool("false", bound, {"ideal": J.name, "sup": p})
    return TriBool("unknown", bound) if unknown else TriBool("true", bound)


def is_compact(P: PresentedPoSystem, p: str, bound: int) -> TriBool:
    """Every ideal whose supremum dominates ``p`` contains ``p``."""
    unknown = False
    for J in ideals(P, bound, principal=False):
        s = sup(P, J, bound)
        if s.value == "unknown":
            unknown = True
        elif s.value == "true":
            top = s.witness["sup"]
            if P.leq(p, top, bound) and not _in_carrier(P, p, J, bound):
                return TriBool("false", bound, {"element": p, "ideal": J.name, "sup": top})
    return TriBool("unknown", bound) if unknown else TriBool("true", bound)


def _hat_families(P: PresentedPoSystem, hat: str | Sequence[str]) -> tuple[str, ...]:
    if isinstance(hat, str):
        return P.mark(hat)
    return tuple(hat)


def weakly_separated(P: PresentedPoSystem, hat: str | Sequence[str], bound: int) -> TriBool:
    """No element of the marked subset is the supremum in P of a non-principal ideal of the subset."""
    fams = _hat_families(P, hat)
    inside = set(P.elements(P.truncation(bound).cap, fams))
    unknown = False
    for J in ideals(P, bound, families=fams, principal=False):
        s = sup(P, J, bound)
        if s.value == "unknown":
            unknown = True
        elif s.value == "true" and s.witness["sup"] in inside:
            return TriBool("false", bound, {"ideal": J.name, "sup": s.witness["sup"]})
    return TriBool("unknown", bound) if unknown else TriBool("true", bound)


def rank_criteria(P: PresentedPoSystem, hat: str | Sequence[str], bound: int) -> dict[str, TriBool]:
    fams = _hat_families(P, hat)
    sst = weakly_separated(P, fams, bound)
    rank = TriBool.all((is_compact(P, x, bound) for x in P.elements(bound, fams)), bound)
    return {"strongly_semi_trim": sst, "rank": rank}


def bounded_foundation(P: PresentedPoSystem, subset: Iterable[str], bound: int) -> TriBool:
    """A finite foundation of ``subset↓``, decided on the visible window.

    ``unknown`` when a minimal element sits within ``slack`` of the bound
    (a descending chain may continue past the window).
    """
    T = P.truncation(bound)
    sub = [x for x in subset if x in T.idx]
    F = finite_foundation(T.posystem, [x for x in sub if x in set(T.visible)])
    if F is None:
        return TriBool("false", bound)
    edge = bound - P.slack
    if any((parse_element(x)[1] or 0) > edge for x in F):
        return TriBool("unknown", bound)
    return TriBool("true", bound, {"foundation": T.posystem.ordered(F)})


# -- ideal completion -----------------------------------------------------------------


def _new_name(J: IdealRef, taken: set[str]) -> str:
    base = f"J_{J.family}" if J.step == 1 else f"J_{J.family}_{J.step}_{J.residue}"
    name = base
    while name in taken:
        name += "'"
    return name


def ideal_completion(P: PresentedPoSystem, bound: int) -> tuple[PresentedPoSystem, dict[str, str]]:
    """``id(P)``: one new reflexive singleton per non-principal ideal, ordered by inclusion.

    Returns the presentation and the names given to the detected ideals.
    """
    T = P.truncation(bound)
    T2 = P.truncation(bound + max(P.slack, 1))
    tails = ideals(P, bound, principal=False)
    taken = {f.name for f in P.families}
    names = {}
    for J in tails:
        names[J.name] = _new_name(J, taken)
        taken.add(names[J.name])
    families = list(P.families) + [Family(names[J.name], reflexive=True) for J in tails]
    rules = list(P.rules)
    for J in tails:
        nm = names[J.name]
        rules.append(Rule(Term(J.family, J.step, J.residue), Term(nm)))
        for f in P.families:
            rules.extend(_upper_bound_rules(P, J, f, nm, T, T2))
        for K in tails:
            if K is J:
                continue
            sub = _included(T, J, K) and not _included(T, K, J)
            sub2 = _included(T2, J, K) and not _included(T2, K, J)
            if sub != sub2:
                raise UndecidedContainment((J.name, K.name), bound)
            if sub:
                rules.append(Rule(Term(nm), Term(names[K.name])))
    marks = dict(P.marks)
    marks.setdefault("base", tuple(f.name for f in P.families))
    return PresentedPoSystem(families, rules, marks), names


def _upper_bound_rules(P, J: IdealRef, f: Family, nm: str, T: Truncation, T2: Truncation) -> list[Rule]:
    if not f.chain:
        ub = T.upper_bounds(J.generators(T.cap), [f.name])
        ub2 = T2.upper_bounds(J.generators(T2.cap), [f.name])
        if bool(ub) != bool(ub2):
            raise UndecidedContainment((J.name, f.name), T.bound)
        return [Rule(Term(nm), Term(f.name))] if ub else []
    idx = [parse_element(u)[1] for u in T.upper_bounds(J.generators(T.cap), P.elements(T.bound, [f.name]))]
    idx2 = [parse_element(u)[1] for u in T2.upper_bounds(J.generators(T2.cap), P.elements(T2.bound, [f.name]))]
    if not idx:
        if idx2:
            raise UndecidedContainment((J.name, f.name), T.bound)
        return []
    B, B2 = T.bound, T2.bound
    if idx == list(range(idx[0], B + 1)) and idx2 == list(range(idx[0], B2 + 1)):
        return [Rule(Term(nm), Term(f.name, 1, 0), guard=idx[0])]
    if idx2 == idx and idx[-1] < B - P.slack:
        return [Rule(Term(nm), Term(f.name, 0, i)) for i in idx]
    raise UndecidedContainment((J.name, f.name), T.bound)


# -- morphisms between presentations --------------------------------------------------


@dataclass(frozen=True)
class FamilyMap:
    """Map a source family onto a target singleton, or onto a target chain with an index offset."""

    target: str
    offset: int = 0


@dataclass
class PresentedMorphism:
    source: PresentedPoSystem
    target: PresentedPoSystem
    families: Mapping[str, FamilyMap] = field(default_factory=dict)

    def __call__(self, x: str) -> str:
        fam, i = parse_element(x)
        fm = self.families[fam]
        tf = self.target.family[fm.target]
        if not tf.chain:
            return tf.name
        j = (i or 0) + fm.offset
        if j < 0:
            raise PostoneError(f"{x} maps below index 0 of {tf.name}")
        return element_id(tf.name, j)

    def law_violations(self, bound: int) -> list[str]:
        """Morphism law ``{r > x}α = {y > xα}`` on visible elements, compared inside the visible target."""
        S = self.source.truncation(bound)
        Tt = self.target.truncation(bound)
        vis_t = set(Tt.visible)
        out = []
        for x in S.visible:
            lhs = set()
            for r in S.all:
                if S.lt(x, r):
                    try:
                        y = self(r)
                    except PostoneError:
                        continue
                    if y in vis_t:
                        lhs.add(y)
            fx = self(x)
            if fx not in vis_t:
                continue
            rhs = {y for y in Tt.visible if Tt.lt(fx, y)}
            if lhs != rhs:
                out.append(f"law fails at {x}: image of its up-set {sorted(lhs)} vs {sorted(rhs)}")
        return out

    @classmethod
    def from_json(cls, source, target, data: Mapping) -> PresentedMorphism:
        fams = {}
        for k, v in data.items():
            if isinstance(v, str):
                fams[k] = FamilyMap(v)
            else:
                fams[k] = FamilyMap(v["target"], int(v.get("offset", 0)))
        return cls(source, target, fams)


def id_morphism(alpha: PresentedMorphism, bound: int) -> dict[str, str]:
    """``J ↦ (Jα)↓`` on detected ideals, matched to detected ideals of the target.

    A chain tail whose image is eventually constant maps to the principal
    ideal of that constant; otherwise the image is matched by mutual inclusion
    against the target's chain tails.
    """
    bad = alpha.law_violations(bound)
    if bad:
        raise PostoneError("not a morphism at this bound: " + bad[0])
    Tt = alpha.target.truncation(bound)
    reach = bound + max(alpha.source.slack // 2, 1)
    tails = ideals(alpha.target, bound, principal=False)
    out = {}
    for J in ideals(alpha.source, bound):
        if J.principal:
            out[J.name] = alpha(J.element)
            continue
        image = [alpha(g) for g in J.generators(reach)]
        image = [y for y in image if y in Tt.idx]
        last = image[-1]
        if all(y == last for y in image[len(image) // 2:]) and all(Tt.le(y, last) for y in image):
            out[J.name] = last
            continue
        down = Tt.down(image)
        for K in tails:
            forward = all(y in K.carrier(Tt) for y in image[: len(image) // 2 + 1])
            backward = all(g in down for g in K.generators(bound))
            if forward and backward:
                out[J.name] = K.name
                break
        else:
            raise AssertionError(f"(Jα)↓ for {J.name} is not a detected ideal of the target")
    return out


# -- completion maps --------------------------------------------------------------------


def validate_completion_map(P: PresentedPoSystem, Q: PresentedPoSystem, beta: Mapping[str, str],
                            bound: int) -> dict:
    """Check a map ``β: id(P) → Q`` (P embedded in Q by element names) against conditions (1)-(4).

    ``beta`` names the image of each non-principal ideal; principal ``x↓`` maps
    to ``x`` unless overridden.  Also reports whether β satisfies the morphism
    law on non-principal ideals and the strongly-semi-trim / rank classification.
    """
    TP = P.truncation(bound)
    TQ = Q.truncation(bound)
    Js = ideals(P, bound)
    tails = [J for J in Js if not J.principal]
    img = {}
    for J in Js:
        key = J.name if J.name in beta else next((a for a in J.aliases if a in beta), None)
        if key is not None:
            img[J.name] = beta[key]
        elif J.principal:
            img[J.name] = J.element
        else:
            raise PostoneError(f"beta has no image for ideal {J.name}")
    Pvis = list(TP.visible)
    in_P = set(P.elements(TQ.cap))
    report = {}

    # (1) restriction to P is an isomorphism onto its image
    w1 = None
    for x in Pvis:
        for y in Pvis:
            if TP.lt(x, y) != TQ.lt(img[x], img[y]):
                w1 = {"pair": [x, y]}
                break
            if x != y and img[x] == img[y]:
                w1 = {"pair": [x, y], "detail": "not injective"}
                break
        if w1:
            break
    report["1"] = TriBool("false", bound, w1) if w1 else TriBool("true", bound)

    # (2) Jβ = sup_Q J
    results = []
    for J in tails:
        s = sup(Q, J, bound)
        if s.value == "unknown":
            results.append(s)
        elif s.value == "false" or s.witness["sup"] != img[J.name]:
            got = s.witness["sup"] if s.value == "true" else None
            results.append(TriBool("false", bound, {"ideal": J.name, "image": img[J.name], "sup": got}))
    report["2"] = TriBool.all(results, bound)

    # (3) p ≨ q with q outside P is reached by an ideal containing p
    results = []
    for p in Pvis:
        for q in TQ.visible:
            if q in in_P or not TQ.lt(p, q):
                continue
            if not any(img[J.name] == q and _in_carrier(P, p, J, bound) for J in tails):
                results.append(TriBool("false", bound, {"element": p, "target": q}))
                break
    report["3"] = TriBool.all(results, bound)

    # (4) a discrete p that is a supremum of J lies in J
    results = []
    discrete = {x for x in Pvis if not TP.lt(x, x)}
    for J in tails:
        s = sup(Q, J, bound)
        if s.value == "unknown":
            results.append(s)
        elif s.value == "true" and s.witness["sup"] in discrete:
            results.append(TriBool("false", bound, {"ideal": J.name, "sup": s.witness["sup"]}))
    report["4"] = TriBool.all(results, bound)

    # morphism law on the non-principal ideals
    witnesses = []
    for J in tails:
        above = set()
        for L in Js:
            if L.principal:
                ok = all(TP.le(x, L.element) for x in J.generators(TP.cap) if x in TP.idx)
                if ok:
                    above.add(img[L.name])
            else:
                if _included(TP, J, L):
                    above.add(img[L.name])
        want = {q for q in TQ.visible if TQ.lt(img[J.name], q)}
        for q in [y for y in TQ.visible if y in want - above]:
            witnesses.append(f"no ideal L with {J.name}<L and Lβ={q}")
    report["morphism"] = (TriBool("false", bound, {"witnesses": witnesses}) if witnesses
                          else TriBool("true", bound))

    sst = [TriBool("false", bound, {"ideal": J.name, "image": img[J.name]})
           for J in tails if img[J.name] in in_P]
    report["strongly_semi_trim"] = TriBool.all(sst, bound)
    images = [img[J.name] for J in Js]
    bijective = len(set(images)) == len(images) and set(TQ.visible) <= set(images)
    if not bijective:
        dup = sorted({x for x in images if images.count(x) > 1})
        report["rank"] = TriBool("false", bound, {"detail": "beta is not a bijection", "repeated": dup})
    else:
        report["rank"] = report["morphism"] if report["morphism"].value != "true" else TriBool("true", bound)
    return report


# -- corpus systems ------------------------------------------------------------------

PARTITION_TYPES = {
    "P": """\
family p chain increasing
family q chain increasing
family r
reflexive p q r
rule p[n] < r
mark base p q r
""",
    "Q1": """\
family p chain increasing
family q chain increasing
family r
family s
family t
reflexive p q r s t
rule p[n] < s
rule s < r
rule q[n] < t
mark base p q r
""",
    "Q2": """\
family p chain increasing
family q chain increasing
family r
family s
reflexive p q r s
rule p[n] < s
rule s < r
rule q[n] < s
mark base p q r
""",
    "Q3": """\
family p chain increasing
family q chain increasing
family r
family t
reflexive p q r t
rule p[n] < r
rule q[n] < t
mark base p q r
""",
}

ISO_P = """\
family a chain decreasing
family b chain none
family c
reflexive b
rule b[n] < a[n]
rule c < b[n]
"""

SEPARATION = {
    "P": "family r\n",
    "Q": "family j chain increasing\nfamily r\nrule j[n] < r\n",
    # the added supremum of a chain is reflexive in an ideal completion
    "S": "family j chain increasing\nfamily w\nfamily r\nreflexive w\nrule j[n] < w\nrule w < r\n",
}


def propn_maps_remark(columns: int) -> tuple[str, str]:
    """The two presentations of the completion-map counterexample, with ``columns`` copies of ℕ.

    Copy ``k`` is ``{p[k]} ∪ {ck[n]}`` with minimum ``p[k]``; the minima form the
    increasing chain ``p``.  Only finitely many copies fit in a presentation.
    """
    cols = [f"c{k}" for k in range(columns)]
    lines = ["family p chain increasing"] + [f"family {c} chain increasing" for c in cols]
    lines += [f"rule p[{k}] < {c}[0]" for k, c in enumerate(cols)]
    base = "\n".join(lines + ["reflexive p " + " ".join(cols), "mark base p " + " ".join(cols)]) + "\n"
    extra = ["family r", "family s", "rule p[n] < r", "rule r < s"] + [f"rule {c}[n] < s" for c in cols]
    full = "\n".join(lines + extra + ["reflexive p r s " + " ".join(cols),
                                      "mark base p " + " ".join(cols)]) + "\n"
    return base, full


def propn_maps_beta(columns: int) -> dict[str, str]:
    beta = {"tail:p": "r"}
    beta.update({f"tail:c{k}": "s" for k in range(columns)})
    return beta
