"""Morphisms, congruences, quotients and simple images of finite PO systems."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Sequence

from .errors import InvalidCongruence, NotAMorphism, NotSurjective, PostoneError, SizeLimit
from .poset import PoSystem, isomorphisms

#: exhaustive partition enumeration is refused above this size
EXHAUSTIVE_LIMIT = 9
#: simple_image cross-checks against the exhaustive oracle up to this size
VERIFY_THRESHOLD = 7


@dataclass(frozen=True, eq=False)
class Morphism:
    """A map ``source → target``; the morphism law is checked by :func:`is_morphism`."""

    source: PoSystem
    target: PoSystem
    mapping: Mapping[str, str] = field(default_factory=dict)

    def __call__(self, q: str) -> str:
        return self.mapping[q]

    def __eq__(self, other):
        if not isinstance(other, Morphism):
            return NotImplemented
        return (self.source == other.source and self.target == other.target
                and dict(self.mapping) == dict(other.mapping))

    def __repr__(self):
        return f"Morphism({dict(self.mapping)})"

    def image(self, subset: Iterable[str]) -> frozenset[str]:
        return frozenset(self.mapping[q] for q in subset)

    def fiber(self, p: str) -> tuple[str, ...]:
        """``Q(p)``: the preimage of ``p`` in source order."""
        return tuple(q for q in self.source.elements if self.mapping[q] == p)

    @property
    def is_surjective(self) -> bool:
        return set(self.mapping.values()) >= set(self.target.elements)

    def then(self, other: Morphism) -> Morphism:
        """Apply ``self`` first, then ``other`` (``q ↦ (qα)γ``)."""
        return Morphism(self.source, other.target,
                        {q: other.mapping[p] for q, p in self.mapping.items()})

    def to_json(self) -> dict:
        return {
            "source": self.source.to_json(),
            "target": self.target.to_json(),
            "map": {q: self.mapping[q] for q in self.source.elements},
        }

    @classmethod
    def from_json(cls, data: Mapping) -> Morphism:
        return cls(PoSystem.from_json(data["source"]), PoSystem.from_json(data["target"]),
                   dict(data["map"]))


def identity(P: PoSystem) -> Morphism:
    return Morphism(P, P, {p: p for p in P.elements})


def is_morphism(m: Morphism) -> bool:
    """``{r | r > q}α = {p | p > qα}`` at every source element."""
    src, tgt, a = m.source, m.target, m.mapping
    if set(a) != set(src.elements) or not set(a.values()) <= set(tgt.elements):
        return False
    for q in src.elements:
        if m.image(src.above(q)) != tgt.above(a[q]):
            return False
    return True


def check_surjective_morphism(m: Morphism) -> None:
    if not is_morphism(m):
        raise NotAMorphism(f"{m!r} violates the morphism law")
    if not m.is_surjective:
        raise NotSurjective(f"{m!r} is not surjective")


# -- congruences ------------------------------------------------------------


@dataclass(frozen=True)
class Congruence:
    classes: tuple[tuple[str, ...], ...]

    def class_of(self, p: str) -> tuple[str, ...]:
        for c in self.classes:
            if p in c:
                return c
        raise KeyError(p)

    @property
    def is_identity(self) -> bool:
        return all(len(c) == 1 for c in self.classes)


def _normalize_classes(P: PoSystem, classes: Iterable[Iterable[str]]) -> tuple[tuple[str, ...], ...]:
    out = [P.ordered(c) for c in classes]
    seen = [p for c in out for p in c]
    if sorted(seen) != sorted(P.elements) or len(seen) != len(set(seen)):
        raise InvalidCongruence("classes do not partition the elements")
    if any(not c for c in out):
        raise InvalidCongruence("empty class")
    return tuple(sorted(out, key=lambda c: P.index(c[0])))


def _is_congruence_labels(P: PoSystem, label: Sequence[int]) -> bool:
    """Lifting law on an index labelling: q<r, q~s ⟹ ∃t: r~t, s<t."""
    n = len(P)
    succ_labels = [frozenset(label[j] for j in P.succ_idx(i)) for i in range(n)]
    first = {}
    for i in range(n):
        c = label[i]
        if c in first:
            if succ_labels[i] != succ_labels[first[c]]:
                return False
        else:
            first[c] = i
    return True


def is_congruence(P: PoSystem, classes: Iterable[Iterable[str]]) -> bool:
    """True iff ``classes`` partition P and satisfy the lifting law."""
    try:
        classes = _normalize_classes(P, classes)
    except InvalidCongruence:
        return False
    label = [0] * len(P)
    for k, c in enumerate(classes):
        for p in c:
            label[P.index(p)] = k
    return _is_congruence_labels(P, label)


def quotient(P: PoSystem, c: Congruence | Iterable[Iterable[str]]) -> tuple[PoSystem, Morphism]:
    """``P/~`` with ``[q] < [r]`` iff some ``s ~ q``, ``t ~ r`` have ``s < t``.

    Each class is named by its first member in P order.
    """
    classes = c.classes if isinstance(c, Congruence) else _normalize_classes(P, c)
    if not is_congruence(P, classes):
        raise InvalidCongruence("not a congruence")
    rep = {p: cls[0] for cls in classes for p in cls}
    pairs = {(rep[s], rep[t]) for s, t in P.lt}
    Q = PoSystem([cls[0] for cls in classes], pairs)
    return Q, Morphism(P, Q, rep)


def kernel(m: Morphism) -> Congruence:
    groups: dict[str, list[str]] = {}
    for q in m.source.elements:
        groups.setdefault(m.mapping[q], []).append(q)
    return Congruence(_normalize_classes(m.source, groups.values()))


# -- exhaustive oracle -------------------------------------------------------


def set_partitions(n: int) -> Iterator[list[int]]:
    """Restricted growth strings of length n (each is a set partition of range(n))."""
    if n == 0:
        yield []
        return
    a = [0] * n

    def rec(i, m):
        if i == n:
            yield list(a)
            return
        for v in range(m + 2):
            a[i] = v
            yield from rec(i + 1, max(m, v))

    a[0] = 0
    yield from rec(1, 0)


def congruences(P: PoSystem) -> Iterator[Congruence]:
    """Every congruence of P, by filtering all set partitions."""
    n = len(P)
    if n > EXHAUSTIVE_LIMIT:
        raise SizeLimit(f"exhaustive congruence enumeration refused for |P|={n} > {EXHAUSTIVE_LIMIT}")
    for label in set_partitions(n):
        if _is_congruence_labels(P, label):
            yield _labels_to_congruence(P, label)


def _labels_to_congruence(P: PoSystem, label: Sequence[int]) -> Congruence:
    groups: dict[int, list[str]] = {}
    for i, c in enumerate(label):
        groups.setdefault(c, []).append(P.elements[i])
    return Congruence(_normalize_classes(P, groups.values()))


def _join(P: PoSystem, congs: Iterable[Congruence]) -> Congruence:
    parent = {p: p for p in P.elements}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for c in congs:
        for cls in c.classes:
            for p in cls[1:]:
                a, b = find(cls[0]), find(p)
                if a != b:
                    parent[b] = a
    groups: dict[str, list[str]] = {}
    for p in P.elements:
        groups.setdefault(find(p), []).append(p)
    return Congruence(_normalize_classes(P, groups.values()))


def _refine_bisimulation(P: PoSystem) -> list[int]:
    """Coarsest labelling stable under "set of successor labels" (largest bisimulation)."""
    n = len(P)
    label = [0] * n
    while True:
        sigs = {}
        new = [0] * n
        for i in range(n):
            sig = (label[i], frozenset(label[j] for j in P.succ_idx(i)))
            new[i] = sigs.setdefault(sig, len(sigs))
        if len(sigs) == len(set(label)):
            return new
        label = new


def max_congruence(P: PoSystem, method: str = "exhaustive") -> Congruence:
    """The coarsest congruence on P.

    ``exhaustive`` joins every congruence found by partition enumeration and
    asserts the join is itself a congruence; ``refine`` computes the largest
    bisimulation of ``<`` by partition refinement.
    """
    if method == "exhaustive":
        joined = _join(P, congruences(P))
        if not is_congruence(P, joined.classes):
            raise AssertionError(f"join of all congruences on {P!r} is not a congruence")
        return joined
    if method == "refine":
        return _labels_to_congruence(P, _refine_bisimulation(P))
    raise ValueError(f"unknown method {method!r}")


def simple_image(P: PoSystem, verify: bool | None = None) -> tuple[PoSystem, Morphism]:
    """``s(P)`` and the canonical projection ``P → s(P)``.

    Uses partition refinement; when ``verify`` is true (default: ``|P| <=
    VERIFY_THRESHOLD``) the result is checked against the exhaustive oracle.
    """
    cong = max_congruence(P, "refine")
    if verify is None:
        verify = len(P) <= VERIFY_THRESHOLD
    if verify:
        oracle = max_congruence(P, "exhaustive")
        if oracle != cong:
            raise AssertionError(f"fast path {cong} disagrees with exhaustive {oracle} on {P!r}")
    return quotient(P, cong)


def is_simple(P: PoSystem) -> bool:
    return max_congruence(P, "refine").is_identity


def simplicity_criterion(P: PoSystem) -> bool:
    """Each ``p↑`` is simple and ``p↑ ≅ q↑`` only for ``p = q``."""
    for p in P.elements:
        if not max_congruence(P.upset_system(p), "refine").is_identity:
            return False
    ups = [P.upset_system(p) for p in P.elements]
    for i in range(len(ups)):
        for j in range(i + 1, len(ups)):
            if next(isomorphisms(ups[i], ups[j]), None) is not None:
                return False
    return True


def merge_isomorphic_upsets(P: PoSystem) -> tuple[PoSystem, Morphism]:
    """Quotient by repeatedly merging along isomorphisms ``p↑ ≅ q↑``.

    Each merge is a congruence, so the result is a morphic image of P, but it
    can stop short of ``s(P)``: on a reflexive chain ``y < x`` no two up-sets
    are isomorphic although ``s(P)`` is a single point.
    """
    current, proj = P, Morphism(P, P, {p: p for p in P.elements})
    while True:
        pair = None
        els = current.elements
        for i in range(len(els)):
            for j in range(i + 1, len(els)):
                phi = next(isomorphisms(current.upset_system(els[i]),
                                        current.upset_system(els[j])), None)
                if phi is not None:
                    pair = phi
                    break
            if pair:
                break
        if pair is None:
            return current, proj
        parent = {p: p for p in els}

        def find(x):
            while parent[x] != x:
                x = parent[x]
            return x

        for x, y in pair.items():
            a, b = find(x), find(y)
            if a != b:
                if current.index(a) > current.index(b):
                    a, b = b, a
                parent[b] = a
        groups: dict[str, list[str]] = {}
        for p in els:
            groups.setdefault(find(p), []).append(p)
        nxt, step = quotient(current, groups.values())
        proj = proj.then(step)
        current = nxt


def factor_to_simple(beta: Morphism) -> Morphism:
    """The unique ``γ: Q → s(P)`` with ``β ∘ γ`` equal to the canonical projection."""
    check_surjective_morphism(beta)
    S, alpha = simple_image(beta.source, verify=False)
    gamma: dict[str, str] = {}
    for p in beta.source.elements:
        q = beta.mapping[p]
        if gamma.setdefault(q, alpha.mapping[p]) != alpha.mapping[p]:
            raise AssertionError(f"kernel of β is not inside the maximal congruence at {p}")
    g = Morphism(beta.target, S, gamma)
    if not is_morphism(g):
        raise AssertionError("factor map is not a morphism")
    return g


def surjective_morphisms(Q: PoSystem, P: PoSystem, limit: int | None = None) -> Iterator[Morphism]:
    """Enumerate surjective morphisms ``Q → P`` in a deterministic order.

    Source elements are assigned top-down along a linear extension of ``≥``,
    so the morphism law at ``q`` is checked as soon as ``q`` is assigned.
    """
    if len(Q) < len(P):
        return
    n = len(Q)
    order = sorted(range(n), key=lambda i: (_height(Q, i), i))
    image = [-1] * n
    count = 0

    def extend(pos):
        nonlocal count
        if limit is not None and count >= limit:
            return
        if pos == n:
            if len(set(image)) == len(P):
                count += 1
                yield Morphism(Q, P, {Q.elements[i]: P.elements[image[i]] for i in range(n)})
            return
        remaining = n - pos
        missing = len(P) - len(set(x for x in image if x >= 0))
        if missing > remaining:
            return
        i = order[pos]
        for j in range(len(P)):
            image[i] = j
            imgs = {image[k] for k in Q.succ_idx(i)}
            if imgs == set(P.succ_idx(j)):
                yield from extend(pos + 1)
            image[i] = -1

    yield from extend(0)


def _height(P: PoSystem, i: int) -> int:
    """Length of the longest strict chain above ``i`` (ignoring loops)."""
    memo = {}

    def h(k):
        if k not in memo:
            memo[k] = 1 + max((h(j) for j in P.succ_idx(k) if j != k), default=0)
        return memo[k]

    return h(i)
