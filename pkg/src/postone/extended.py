"""Extended PO systems ``(P, L, f)`` and the refinement quasi-order between them."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Mapping

from .congruence import Morphism, check_surjective_morphism, surjective_morphisms
from .errors import InvalidExtendedPoSystem, SizeLimit
from .poset import PoSystem, finite_foundation, isomorphisms

#: refines() refuses sources larger than this
REFINE_LIMIT = 12


@dataclass(frozen=True, eq=False)
class ExtendedPoSystem:
    """``L`` is a lower subset of P and ``f`` is defined exactly on ``L_min ∩ P^d``."""

    P: PoSystem
    L: frozenset = frozenset()
    f: Mapping[str, int] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "L", frozenset(self.L))
        object.__setattr__(self, "f", dict(self.f))

    def __eq__(self, other):
        if not isinstance(other, ExtendedPoSystem):
            return NotImplemented
        return self.P == other.P and self.L == other.L and self.f == other.f

    def __hash__(self):
        return hash((self.P, self.L, tuple(sorted(self.f.items()))))

    def __repr__(self):
        return f"ExtendedPoSystem({self.P!r}, L={sorted(self.L)}, f={dict(sorted(self.f.items()))})"

    @property
    def L_min_discrete(self) -> tuple[str, ...]:
        P = self.P
        return tuple(p for p in P.minimal(self.L) if not P.is_reflexive(p))

    @property
    def U(self) -> tuple[str, ...]:
        """The elements outside ``L``, in P order."""
        return tuple(p for p in self.P.elements if p not in self.L)

    def diagnostics(self) -> list[str]:
        P, out = self.P, []
        unknown = sorted(x for x in self.L if x not in P)
        if unknown:
            return [f"L mentions unknown elements {unknown}"]
        for p in P.ordered(self.L):
            missing = P.ordered(P.below(p) - self.L)
            if missing:
                out.append(f"L is not a lower subset: {missing[0]} < {p} but {missing[0]} not in L")
        want = set(self.L_min_discrete)
        have = set(self.f)
        for p in sorted(want - have):
            out.append(f"f is missing minimal discrete element {p}")
        for p in sorted(have - want):
            out.append(f"f is defined on {p}, which is not a minimal discrete element of L")
        for p, v in sorted(self.f.items()):
            if not isinstance(v, int) or isinstance(v, bool) or v < 1:
                out.append(f"f({p}) = {v!r} is not a positive integer")
        return out

    def is_valid(self) -> bool:
        return not self.diagnostics()

    def check(self) -> ExtendedPoSystem:
        d = self.diagnostics()
        if d:
            raise InvalidExtendedPoSystem(d)
        return self

    def relabel(self, mapping: Mapping[str, str]) -> ExtendedPoSystem:
        return ExtendedPoSystem(self.P.relabel(mapping), {mapping[p] for p in self.L},
                                {mapping[p]: v for p, v in self.f.items()})

    def to_json(self) -> dict:
        return {
            "poset": self.P.to_json(),
            "L": list(self.P.ordered(self.L)),
            "f": {p: self.f[p] for p in self.P.ordered(self.f)},
        }

    @classmethod
    def from_json(cls, data: Mapping) -> ExtendedPoSystem:
        return cls(PoSystem.from_json(data["poset"]), frozenset(data.get("L", ())),
                   {str(k): v for k, v in data.get("f", {}).items()})


def validate(e: ExtendedPoSystem) -> tuple[bool, list[str]]:
    d = e.diagnostics()
    return not d, d


def all_of(P: PoSystem) -> ExtendedPoSystem:
    """``(P, P, 1)``: every element relatively compact, unit sizes."""
    return ExtendedPoSystem(P, frozenset(P.elements), {p: 1 for p in P.minimal() if not P.is_reflexive(p)})


def iso_extended(e1: ExtendedPoSystem, e2: ExtendedPoSystem) -> dict[str, str] | None:
    """A PO-system isomorphism carrying ``L`` onto ``M`` and ``f`` onto ``g``."""
    if len(e1.L) != len(e2.L) or sorted(e1.f.values()) != sorted(e2.f.values()):
        return None
    for phi in isomorphisms(e1.P, e2.P):
        if {phi[p] for p in e1.L} != e2.L:
            continue
        if all(e2.f.get(phi[p]) == v for p, v in e1.f.items()):
            return phi
    return None


def pushforward(alpha: Morphism, src: ExtendedPoSystem) -> ExtendedPoSystem:
    """``L = {p | Q(p) ⊆ M}`` and ``f(p) = Σ_{q ∈ Q(p)} g(q)``."""
    check_surjective_morphism(alpha)
    if src.P != alpha.source:
        raise InvalidExtendedPoSystem(["source system does not match the morphism's source"])
    src.check()
    P = alpha.target
    fibers = {p: alpha.fiber(p) for p in P.elements}
    L = frozenset(p for p in P.elements if set(fibers[p]) <= src.L)
    out_f = {}
    for p in P.minimal(L):
        if P.is_reflexive(p):
            continue
        total = 0
        for q in fibers[p]:
            if q not in src.f:
                # fibers over L_min^d always sit inside M_min^d
                raise AssertionError(f"{q} over minimal discrete {p} carries no size")
            total += src.f[q]
        out_f[p] = total
    result = ExtendedPoSystem(P, L, out_f)
    result.check()
    return result


def refinement_witnesses(src: ExtendedPoSystem, dst: ExtendedPoSystem) -> Iterator[Morphism]:
    """Every surjective morphism ``α: Q → P`` whose pushforward of ``src`` is ``dst``."""
    Q, P = src.P, dst.P
    if len(Q) > REFINE_LIMIT:
        raise SizeLimit(f"refinement search refused for |Q|={len(Q)} > {REFINE_LIMIT}")
    for alpha in surjective_morphisms(Q, P):
        if any(alpha.mapping[q] in dst.L for q in Q.elements if q not in src.L):
            continue
        if pushforward(alpha, src) == dst:
            yield alpha


def refines(src: ExtendedPoSystem, dst: ExtendedPoSystem) -> Morphism | None:
    """A witness for ``[src] ≺ [dst]`` or ``None``."""
    return next(refinement_witnesses(src, dst), None)


def refinement_feasible(dst: ExtendedPoSystem, alpha: Morphism) -> tuple[bool, list[str]]:
    """Check that ``Lα⁻¹`` has a finite foundation and ``|Q(p)| <= f(p)`` on ``L_min^d``."""
    check_surjective_morphism(alpha)
    diags = []
    pre = [q for q in alpha.source.elements if alpha.mapping[q] in dst.L]
    if pre and finite_foundation(alpha.source, pre) is None:
        diags.append("preimage of L has no finite foundation")
    for p in dst.L_min_discrete:
        n = len(alpha.fiber(p))
        if n > dst.f[p]:
            diags.append(f"|Q({p})| = {n} exceeds f({p}) = {dst.f[p]}")
    return not diags, diags


def infeasible_elements(dst: ExtendedPoSystem, alpha: Morphism) -> tuple[str, ...]:
    return tuple(p for p in dst.L_min_discrete if len(alpha.fiber(p)) > dst.f[p])


def distribute(dst: ExtendedPoSystem, alpha: Morphism) -> ExtendedPoSystem:
    """The source ``(Q, M, g)`` used when refining ``dst`` along ``alpha``.

    ``M = Lα⁻¹``; ``f(p)`` is split evenly over ``Q(p)`` with the remainder
    going to the earliest fiber members, and ``g = 1`` on every other minimal
    discrete element of ``M``.
    """
    Q = alpha.source
    M = frozenset(q for q in Q.elements if alpha.mapping[q] in dst.L)
    g = {}
    for q in Q.minimal(M):
        if not Q.is_reflexive(q):
            g[q] = 1
    for p in dst.L_min_discrete:
        fiber = alpha.fiber(p)
        base, extra = divmod(dst.f[p], len(fiber))
        for k, q in enumerate(fiber):
            g[q] = base + (1 if k < extra else 0)
    return ExtendedPoSystem(Q, M, g).check()
