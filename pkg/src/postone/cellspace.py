"""A symbolic tree-of-cells model of a primitive ω-Stone space with a trim partition.

Every cell has a type ``t ∈ P``, one spine point of type ``t`` and, unless it
is an atom, an infinite sequence of child cells converging to the spine.
Child ``k`` (1-based) of a ``t``-cell has type ``schedule[t][(k-1) % len]``.
Points at the end of an infinite descent carry the type on which the descent
eventually stabilises (necessarily a reflexive type), so the partition is
complete and every point is clean.

The root level is a finite block of cells for ``L`` followed by an infinite
block cycling through ``U = P - L``.  Root ``i`` is 1-based.

Compact opens are finite unions of tails ``tail(c, m)``: the spine of ``c``
together with its children ``k >= m``.  Tails form a laminar family, which is
what makes relative complements cheap to compute exactly.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Mapping

from .congruence import Morphism, check_surjective_morphism, is_morphism, simple_image
from .errors import IncompatibleAmbient, Infeasible, InvalidExtendedPoSystem, PostoneError
from .extended import (
    ExtendedPoSystem,
    distribute,
    infeasible_elements,
    iso_extended,
    pushforward,
    refinement_feasible,
)
from .poset import PoSystem, ideal_completion_finite, iso

INF = float("inf")

Address = tuple  # (root, k1, k2, ...)


# -- the model ------------------------------------------------------------------


class CellModel:
    """Cells of a model over ``eps.P``, optionally viewed through a labelling ``λ: P → view``.

    ``schedule``, ``l_roots`` and ``u_cycle`` default to the canonical
    construction; hand-built (possibly defective) models pass them explicitly.
    """

    def __init__(self, eps: ExtendedPoSystem, schedule: Mapping[str, Iterable[str]] | None = None,
                 l_roots: Iterable[str] | None = None, u_cycle: Iterable[str] | None = None,
                 label: Mapping[str, str] | None = None, view: ExtendedPoSystem | None = None):
        P = eps.P
        self.eps = eps
        if schedule is None:
            schedule = {p: P.ordered(P.above(p)) for p in P.elements}
        self.schedule = {p: tuple(schedule.get(p, ())) for p in P.elements}
        if l_roots is None:
            l_roots = []
            for p in P.minimal(eps.L):
                l_roots.extend([p] * (eps.f[p] if p in eps.f else 1))
        self.l_roots = tuple(l_roots)
        self.u_cycle = tuple(eps.U if u_cycle is None else u_cycle)
        for t in list(self.schedule.values()) + [self.l_roots, self.u_cycle]:
            for x in t:
                if x not in P:
                    raise PostoneError(f"model mentions unknown type {x}")
        self.label = dict(label) if label is not None else {p: p for p in P.elements}
        # the view's extended system; for a plain model this is eps itself
        self.view = view if view is not None else eps

    @property
    def P(self) -> PoSystem:
        return self.eps.P

    @property
    def VP(self) -> PoSystem:
        """The PO system whose labels the view exposes."""
        return self.view.P

    def __repr__(self):
        return f"CellModel(l_roots={self.l_roots}, u_cycle={self.u_cycle})"

    # -- structure ---------------------------------------------------------

    def root_type(self, i: int) -> str:
        if i < 1:
            raise PostoneError(f"root index {i} must be >= 1")
        if i <= len(self.l_roots):
            return self.l_roots[i - 1]
        if not self.u_cycle:
            raise PostoneError(f"root {i} does not exist (the model has {len(self.l_roots)} roots)")
        return self.u_cycle[(i - len(self.l_roots) - 1) % len(self.u_cycle)]

    @property
    def n_roots(self) -> float:
        return INF if self.u_cycle else len(self.l_roots)

    def child_type(self, t: str, k: int) -> str:
        s = self.schedule[t]
        return s[(k - 1) % len(s)]

    def is_atom_type(self, t: str) -> bool:
        return not self.schedule[t]

    def ctype(self, addr: Address) -> str:
        t = self.root_type(addr[0])
        for k in addr[1:]:
            if self.is_atom_type(t):
                raise PostoneError(f"address {format_address(addr)} descends into an atom")
            if k < 1:
                raise PostoneError(f"child index {k} must be >= 1")
            t = self.child_type(t, k)
        return t

    @cached_property
    def _reach(self) -> dict[str, frozenset[str]]:
        out = {}
        for t in self.P.elements:
            seen, todo = {t}, [t]
            while todo:
                for s in self.schedule[todo.pop()]:
                    if s not in seen:
                        seen.add(s)
                        todo.append(s)
            out[t] = frozenset(seen)
        return out

    def reach(self, t: str) -> frozenset[str]:
        """Types present in a ``t``-cell."""
        return self._reach[t]

    def limit_types(self, t: str) -> frozenset[str]:
        """Types ``x`` such that the spine of a ``t``-cell is a limit of ``X_x``."""
        out = set()
        for s in self.schedule[t]:
            out |= self._reach[s]
        return frozenset(out)

    # -- views -------------------------------------------------------------

    def lam(self, types: Iterable[str]) -> frozenset[str]:
        return frozenset(self.label[t] for t in types)

    def relabeled(self, alpha: Morphism, view: ExtendedPoSystem) -> CellModel:
        m = CellModel(self.eps, self.schedule, self.l_roots, self.u_cycle,
                      {t: alpha.mapping[self.label[t]] for t in self.P.elements}, view)
        return m

    def partition_data(self) -> ExtendedPoSystem:
        """``(P, L, f)`` read off the view: ``L`` = relatively compact labels, ``f`` = sizes."""
        VP = self.VP
        unbounded = set()
        for u in self.u_cycle:
            unbounded |= self.lam(self._reach[u])
        L = frozenset(x for x in VP.elements if x not in unbounded)
        f = {}
        for x in VP.minimal(L):
            if VP.is_reflexive(x):
                continue
            total = 0
            for t in self.l_roots:
                total += _count(self, t, x)
            if total == INF:
                raise InvalidExtendedPoSystem([f"X_{x} is infinite although {x} is minimal in L"])
            f[x] = int(total)
        return ExtendedPoSystem(VP, L, f)

    # -- enumeration -------------------------------------------------------

    def cells(self, depth: int, horizon: int | None = None, width: int | None = None) -> Iterator[Address]:
        """Addresses breadth first: roots ``1..horizon`` and children ``1..width`` down to ``depth``."""
        if horizon is None:
            horizon = len(self.l_roots) + len(self.u_cycle)
        if self.n_roots != INF:
            horizon = min(horizon, len(self.l_roots))
        queue = deque((i,) for i in range(1, horizon + 1))
        while queue:
            addr = queue.popleft()
            yield addr
            if len(addr) > depth:
                continue
            t = self.ctype(addr)
            if self.is_atom_type(t):
                continue
            w = width if width is not None else len(self.schedule[t])
            for k in range(1, w + 1):
                queue.append(addr + (k,))

    def find_cell(self, t: str, depth: int = 8, avoid: Address | None = None) -> Address | None:
        """First cell of type ``t`` in breadth-first order, disjoint from ``avoid`` if given."""
        for addr in self.cells(depth):
            if len(addr) - 1 > depth:
                break
            if self.ctype(addr) != t:
                continue
            if avoid is not None and (_is_prefix(addr, avoid) or _is_prefix(avoid, addr)):
                continue
            return addr
        return None

    # -- compact opens -------------------------------------------------------

    def tail(self, addr: Address, m: int = 1) -> Tail:
        addr = tuple(addr)
        t = self.ctype(addr)
        if m < 1:
            raise PostoneError("tail index must be >= 1")
        if self.is_atom_type(t):
            m = 1
        return Tail(addr, m)

    def cell(self, addr: Address) -> CompactOpen:
        return CompactOpen((self.tail(addr),))

    def compact_open(self, tails: Iterable[Tail]) -> CompactOpen:
        return CompactOpen(self._normalize(set(self.tail(t.addr, t.m) for t in tails)))

    def _normalize(self, tails: set[Tail]) -> tuple[Tail, ...]:
        tails = {t for t in tails if not any(o != t and _contains(o, t) for o in tails)}
        changed = True
        while changed:
            changed = False
            for t in sorted(tails, key=lambda x: (-len(x.addr), x.addr, x.m)):
                if t.m > 1:
                    full = Tail(t.addr + (t.m - 1,), 1)
                    if full in tails:
                        tails.discard(t)
                        tails.discard(full)
                        tails.add(Tail(t.addr, t.m - 1))
                        changed = True
                        break
        return tuple(sorted(tails, key=lambda x: (x.addr, x.m)))

    def _tail_minus(self, t: Tail, others: list[Tail]) -> list[Tail]:
        inside = [o for o in others if _contains(t, o) or _contains(o, t)]
        if not inside:
            return [t]
        if any(_contains(o, t) for o in inside):
            return []
        same = [o for o in inside if o.addr == t.addr]
        if same:
            k = same[0].m
            out = []
            for j in range(t.m, k):
                out.extend(self._tail_minus(self.tail(t.addr + (j,)), inside))
            return out
        depth = len(t.addr)
        ks = sorted({o.addr[depth] for o in inside})
        out = [self.tail(t.addr, ks[-1] + 1)]
        for j in range(t.m, ks[-1] + 1):
            out.extend(self._tail_minus(self.tail(t.addr + (j,)), inside))
        return out

    def difference(self, a: CompactOpen, b: CompactOpen) -> CompactOpen:
        out = []
        for t in a.tails:
            out.extend(self._tail_minus(t, list(b.tails)))
        return self.compact_open(out)

    def union(self, a: CompactOpen, b: CompactOpen) -> CompactOpen:
        return self.compact_open(a.tails + self.difference(b, a).tails)

    def intersection(self, a: CompactOpen, b: CompactOpen) -> CompactOpen:
        return self.difference(a, self.difference(a, b))

    def subset(self, a: CompactOpen, b: CompactOpen) -> bool:
        return not self.difference(a, b).tails

    def disjoint(self, a: CompactOpen, b: CompactOpen) -> bool:
        return not self.intersection(a, b).tails

    # -- types -------------------------------------------------------------

    def type_of(self, a: CompactOpen) -> frozenset[str]:
        out = set()
        for t in a.tails:
            out |= self.lam(self._reach[self.ctype(t.addr)])
        return frozenset(out)

    def count(self, a: CompactOpen, x: str) -> float:
        """``|A ∩ X_x|`` (possibly infinite)."""
        return sum(_count(self, self.ctype(t.addr), x) for t in a.tails)

    def trim_type(self, a: CompactOpen) -> str | None:
        if not a.tails:
            return None
        T = self.type_of(a)
        VP = self.VP
        mins = VP.minimal(T)
        if len(mins) != 1:
            return None
        p = mins[0]
        if VP.up(p) != T:
            return None
        if not VP.is_reflexive(p) and self.count(a, p) != 1:
            return None
        return p


def _count(model: CellModel, t: str, x: str) -> float:
    n = 1 if model.label[t] == x else 0
    if x in model.lam(model.limit_types(t)):
        return INF
    return n


@dataclass(frozen=True, order=True)
class Tail:
    addr: tuple
    m: int = 1

    def __str__(self):
        return format_address(self.addr) + (f"/tail:{self.m}" if self.m != 1 else "")


@dataclass(frozen=True)
class CompactOpen:
    tails: tuple = ()

    def __str__(self):
        return ",".join(str(t) for t in self.tails)

    def to_json(self) -> list[str]:
        return [str(t) for t in self.tails]


def _is_prefix(a: tuple, b: tuple) -> bool:
    return len(a) <= len(b) and b[: len(a)] == a


def _contains(outer: Tail, inner: Tail) -> bool:
    if outer.addr == inner.addr:
        return inner.m >= outer.m
    n = len(outer.addr)
    return _is_prefix(outer.addr, inner.addr) and inner.addr[n] >= outer.m


def format_address(addr: Address) -> str:
    return "/".join([f"root:{addr[0]}"] + [f"child:{k}" for k in addr[1:]])


def parse_tail(text: str) -> Tail:
    """Parse ``root:3/child:2/tail:5`` (the ``tail`` part is optional)."""
    addr, m = [], 1
    for part in text.strip().split("/"):
        key, _, val = part.partition(":")
        try:
            n = int(val)
        except ValueError:
            raise PostoneError(f"bad path component {part!r}") from None
        if key == "root" and not addr:
            addr.append(n)
        elif key == "child" and addr:
            addr.append(n)
        elif key == "tail" and addr:
            m = n
        else:
            raise PostoneError(f"bad path component {part!r} in {text!r}")
    if not addr:
        raise PostoneError(f"path {text!r} names no root")
    return Tail(tuple(addr), m)


def parse_compact_open(model: CellModel, text: str) -> CompactOpen:
    return model.compact_open(parse_tail(s) for s in text.split(",") if s.strip())


# -- construction ---------------------------------------------------------------


def build_model(eps: ExtendedPoSystem) -> CellModel:
    eps.check()
    return CellModel(eps)


def model_from_json(data: Mapping) -> CellModel:
    """A model from ``{"poset", "L", "f"}`` plus optional ``schedule``/``l_roots``/``u_cycle``."""
    eps = ExtendedPoSystem.from_json(data).check()
    if not any(k in data for k in ("schedule", "l_roots", "u_cycle")):
        return build_model(eps)
    return CellModel(eps, data.get("schedule"), data.get("l_roots"), data.get("u_cycle"))


def model_to_json(model: CellModel, horizon: int | None = None) -> dict:
    P = model.P
    out = model.eps.to_json()
    out["schedule"] = {p: list(model.schedule[p]) for p in P.elements}
    out["l_roots"] = list(model.l_roots)
    out["u_cycle"] = list(model.u_cycle)
    if horizon is not None:
        n = horizon if model.n_roots == INF else min(horizon, len(model.l_roots))
        out["roots"] = [model.root_type(i) for i in range(1, n + 1)]
    return out


# -- TP5 and normal forms ------------------------------------------------------


def decompose_tp5(model: CellModel, a: CompactOpen) -> list[CompactOpen]:
    """Split ``A`` into trim sets with the census of TP5."""
    if not a.tails:
        return []
    VP = model.VP
    T = model.type_of(a)
    F = VP.minimal(T)
    typed = [(t, model.label[model.ctype(t.addr)]) for t in a.tails]
    groups: list[tuple[str, list[Tail]]] = []
    for p in F:
        members = [t for t, x in typed if x == p]
        if VP.is_reflexive(p):
            groups.append((p, members))
        else:
            groups.extend((p, [t]) for t in members)
    placed = {t for _, g in groups for t in g}
    for t, x in typed:
        if t in placed:
            continue
        for p, g in groups:
            if VP.is_le(p, x):
                g.append(t)
                break
        else:
            raise AssertionError(f"{t} has no group below its type {x}")
    return [model.compact_open(g) for _, g in groups]


@dataclass(frozen=True, eq=False)
class NormalForm:
    """Homeomorphism invariant of a compact open: its type with minimal discrete counts, simplified."""

    ambient: PoSystem
    T: frozenset
    counts: Mapping[str, int]
    simplified: ExtendedPoSystem = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "T", frozenset(self.T))
        object.__setattr__(self, "counts", dict(self.counts))
        object.__setattr__(self, "simplified", _simplify(self.ambient, self.T, self.counts))

    def equivalent(self, other: NormalForm) -> bool:
        return iso_extended(self.simplified, other.simplified) is not None

    def to_json(self) -> dict:
        s = self.simplified
        return {
            "type": list(self.ambient.ordered(self.T)),
            "counts": {p: self.counts[p] for p in self.ambient.ordered(self.counts)},
            "simplified": {"poset": s.P.to_json(), "f": {p: s.f[p] for p in s.P.ordered(s.f)}},
        }


def _simplify(ambient: PoSystem, T: frozenset, counts: Mapping[str, int]) -> ExtendedPoSystem:
    sub = ambient.sub(T)
    src = ExtendedPoSystem(sub, T, counts).check()
    _, proj = simple_image(sub, verify=False)
    return pushforward(proj, src)


def normal_form(model: CellModel, a: CompactOpen) -> NormalForm:
    if not a.tails:
        raise PostoneError("normal form of the empty set is undefined")
    VP = model.VP
    T = model.type_of(a)
    counts = {}
    for p in VP.minimal(T):
        if not VP.is_reflexive(p):
            c = model.count(a, p)
            if c == INF:
                raise AssertionError(f"minimal discrete type {p} occurs infinitely often")
            counts[p] = int(c)
    return NormalForm(VP, T, counts)


def disjoint_union_nf(a: NormalForm, b: NormalForm) -> NormalForm:
    if a.ambient != b.ambient:
        raise IncompatibleAmbient("normal forms come from different ambient systems")
    P = a.ambient
    T = a.T | b.T
    counts = {}
    for p in P.minimal(T):
        if not P.is_reflexive(p):
            counts[p] = a.counts.get(p, 0) + b.counts.get(p, 0)
    return NormalForm(P, T, counts)


def homeomorphic(model: CellModel, a: CompactOpen, b: CompactOpen) -> bool:
    return normal_form(model, a).equivalent(normal_form(model, b))


# -- canonical structure ----------------------------------------------------------


def structure_diagram(model: CellModel) -> tuple[PoSystem, Morphism]:
    """Homeomorphism classes of trim cells, with ``[A] < [B]`` iff ``[A]×[B] ≅ [A]``."""
    VP = model.VP
    reps = {}
    for p in VP.elements:
        addr = _first_cell_labelled(model, p)
        if addr is None:
            raise PostoneError(f"no cell labelled {p} found")
        reps[p] = normal_form(model, model.cell(addr))
    classes: list[list[str]] = []
    for p in VP.elements:
        for c in classes:
            if reps[c[0]].equivalent(reps[p]):
                c.append(p)
                break
        else:
            classes.append([p])

    def below(x, y):
        return disjoint_union_nf(reps[x], reps[y]).equivalent(reps[x])

    pairs = []
    for ca in classes:
        for cb in classes:
            answers = {below(x, y) for x in ca for y in cb}
            if len(answers) != 1:
                raise AssertionError(f"class relation depends on representatives {ca[0]}, {cb[0]}")
            if answers.pop():
                pairs.append((ca[0], cb[0]))
    S = PoSystem([c[0] for c in classes], pairs)
    labelling = Morphism(VP, S, {p: c[0] for c in classes for p in c})
    if not is_morphism(labelling):
        raise AssertionError("labelling onto the structure diagram is not a morphism")
    if iso(S, simple_image(VP, verify=False)[0]) is None:
        raise AssertionError("structure diagram is not isomorphic to the simple image")
    return S, labelling


def _first_cell_labelled(model: CellModel, x: str, depth: int = 8) -> Address | None:
    for addr in model.cells(depth):
        if len(addr) - 1 > depth:
            break
        if model.label[model.ctype(addr)] == x:
            return addr
    return None


def orbit_diagram(model: CellModel) -> PoSystem:
    S, _ = structure_diagram(model)
    return ideal_completion_finite(S)


def ideal_at_spine(model: CellModel, addr: Address) -> frozenset[str]:
    """``I_w`` for the spine ``w`` of ``addr``; each member comes with a verified trim witness."""
    addr = tuple(addr)
    p = model.ctype(addr)
    P = model.P
    found = set()
    for q in P.down(p):
        witness = None
        for n in range(len(addr), 0, -1):
            if model.ctype(addr[:n]) == q:
                witness = model.cell(addr[:n])
                break
        if witness is None:
            other = model.find_cell(q, depth=len(addr) + 4, avoid=addr)
            if other is None:
                raise AssertionError(f"no {q}-cell disjoint from {format_address(addr)}")
            witness = model.union(model.cell(addr), model.cell(other))
        if model.trim_type(witness) != q:
            raise AssertionError(f"witness for {q} at {format_address(addr)} is not {q}-trim")
        found.add(q)
    return frozenset(found)


# -- consolidation and refinement ---------------------------------------------------


def consolidate(model: CellModel, alpha: Morphism, depth: int = 3) -> CellModel:
    """The view ``Yα``: every cell relabelled through ``alpha``."""
    check_surjective_morphism(alpha)
    if alpha.source != model.VP:
        raise PostoneError("morphism source does not match the model's labels")
    target_eps = pushforward(alpha, model.view)
    view = model.relabeled(alpha, target_eps)
    for t, addr in _reachable_types(model, depth).items():
        for m in (1, 2):
            tail = CompactOpen((model.tail(addr, m),))
            q = model.trim_type(tail)
            if q is not None and view.trim_type(tail) != alpha.mapping[q]:
                raise AssertionError(
                    f"{tail} is {q}-trim but not {alpha.mapping[q]}-trim after consolidation")
    data = view.partition_data()
    if data != target_eps:
        raise AssertionError(f"consolidated partition data {data!r} differs from {target_eps!r}")
    return view


def refine(dst: CellModel | ExtendedPoSystem, alpha: Morphism) -> CellModel:
    """A model over ``alpha.source`` whose consolidation along ``alpha`` realises ``dst``."""
    eps = dst.view if isinstance(dst, CellModel) else dst
    ok, diags = refinement_feasible(eps, alpha)
    if not ok:
        raise Infeasible(diags, infeasible_elements(eps, alpha))
    result = build_model(distribute(eps, alpha))
    back = consolidate(result, alpha)
    if iso_extended(back.partition_data(), eps) is None:
        raise AssertionError("refined model does not consolidate back to the target")
    return result


# -- verification -----------------------------------------------------------------


def _reachable_types(model: CellModel, depth: int) -> dict[str, Address]:
    """First address (breadth first) of each type reachable within ``depth`` child steps."""
    out: dict[str, Address] = {}
    queue = deque()
    for i, t in enumerate(model.l_roots + model.u_cycle, start=1):
        if t not in out:
            out[t] = (i,)
            queue.append(t)
    while queue:
        t = queue.popleft()
        if len(out[t]) - 1 >= depth:
            continue
        for k, s in enumerate(model.schedule[t], start=1):
            if s not in out:
                out[s] = out[t] + (k,)
                queue.append(s)
    return out


def verify(model: CellModel, depth: int = 6) -> dict:
    """Symbolic check of the trim-partition axioms on every cell within ``depth``.

    Cells of equal type are isomorphic subtrees, so it suffices to check the
    first cell of each reachable type; violations name that cell's address.
    """
    if depth < 1:
        raise PostoneError("depth must be >= 1")
    P = model.P
    violations = []

    def report(axiom, addr, detail):
        violations.append({"axiom": axiom, "address": format_address(addr), "detail": detail})

    reps = _reachable_types(model, depth)
    for t in P.ordered(reps):
        addr = reps[t]
        for k, s in enumerate(model.schedule[t], start=1):
            if not P.is_lt(t, s):
                report("T1", addr + (k,), f"child of a {t}-cell has type {s}, which is not above {t}")
        for m in (1, 2):
            tail = model.tail(addr, m)
            got = model.trim_type(CompactOpen((tail,)))
            if got is None:
                report("T1", addr, f"{tail} is not trim (type {sorted(model.type_of(CompactOpen((tail,))))})")
            elif got != t:
                report("T2", addr, f"spine of type {t} has a {got}-trim neighbourhood base")
        limits = model.limit_types(t)
        if limits != P.above(t):
            missing = list(P.ordered(P.above(t) - limits))
            extra = list(P.ordered(limits - P.above(t)))
            report("partition-equation", addr,
                   f"spine of type {t} is a limit of {list(P.ordered(limits))}; "
                   f"expected {list(P.ordered(P.above(t)))}"
                   + (f" (missing {missing})" if missing else "") + (f" (extra {extra})" if extra else ""))
    covered = set(model.u_cycle)
    for u in model.eps.U:
        if u not in covered:
            report("partition-data", (len(model.l_roots) + 1,), f"unbounded block never contains type {u}")
    try:
        data = model.partition_data()
        if data != model.eps:
            report("partition-data", (1,), f"model realises {data!r}, declared {model.eps!r}")
    except InvalidExtendedPoSystem as exc:
        report("partition-data", (1,), str(exc))
    return {"depth": depth, "types_checked": list(P.ordered(reps)), "violations": violations}
