from __future__ import annotations

import itertools
from collections import defaultdict

import pytest

from postone.errors import AntisymmetryViolation, DSLError, PostoneError
from postone.poset import iso
from postone.presented import (
    ISO_P,
    PARTITION_TYPES,
    SEPARATION,
    PresentedMorphism,
    TriBool,
    element_id,
    ideal_completion,
    ideals,
    id_morphism,
    is_compact,
    is_separated,
    parse_dsl,
    propn_maps_beta,
    propn_maps_remark,
    rank_criteria,
    sup,
    validate_completion_map,
    weakly_separated,
)

SYSTEMS = {k: parse_dsl(v) for k, v in PARTITION_TYPES.items()}
FINITE = {
    "chain": "family x\nfamily y\nfamily z\nrule x < y\nrule y < z\n",
    "vee": "family a\nfamily b\nfamily c\nreflexive c\nrule a < c\nrule b < c\n",
    "point": "family p\nreflexive p\n",
}


def brute_lt(P, cap):
    """Reachability over the generating edges with indices <= cap, searched breadth first."""
    edges = defaultdict(set)
    for f in P.families:
        if f.chain:
            for i in range(cap):
                a, b = element_id(f.name, i), element_id(f.name, i + 1)
                if f.direction == "increasing":
                    edges[a].add(b)
                elif f.direction == "decreasing":
                    edges[b].add(a)
            if f.reflexive:
                for i in range(cap + 1):
                    edges[element_id(f.name, i)].add(element_id(f.name, i))
        elif f.reflexive:
            edges[f.name].add(f.name)
    for r in P.rules:
        ns = range(r.guard, cap + 1) if (r.left.uses_n or r.right.uses_n) else [0]
        for n in ns:
            a, b = r.left.index(n), r.right.index(n)
            if (a is not None and not 0 <= a <= cap) or (b is not None and not 0 <= b <= cap):
                continue
            edges[element_id(r.left.family, a)].add(element_id(r.right.family, b))
    out = set()
    for x in P.elements(cap):
        seen, todo = set(), list(edges[x])
        while todo:
            y = todo.pop()
            if y not in seen:
                seen.add(y)
                todo.extend(edges[y])
        out.update((x, y) for y in seen)
    return out


class TestOrder:
    def test_examples(self):
        assert SYSTEMS["Q1"].leq("p[3]", "r")
        iso_p = parse_dsl(ISO_P)
        assert iso_p.leq("b[7]", "a[5]")
        assert not iso_p.leq("a[5]", "b[7]")
        assert not parse_dsl("family x\nfamily y\n").leq("x", "y")

    @pytest.mark.parametrize("name", ["P", "Q1", "Q2", "Q3"])
    def test_closure_matches_search(self, name):
        P = SYSTEMS[name]
        T = P.truncation(6)
        pairs = {(x, y) for x in T.all for y in T.all if T.lt(x, y)}
        assert pairs == brute_lt(P, T.cap)

    def test_iso_p_closure(self):
        P = parse_dsl(ISO_P)
        T = P.truncation(5)
        assert {(x, y) for x in T.all for y in T.all if T.lt(x, y)} == brute_lt(P, T.cap)

    def test_partial_order_on_window(self):
        for P in list(SYSTEMS.values()) + [parse_dsl(ISO_P)]:
            T = P.truncation(5)
            vis = T.visible
            for x, y, z in itertools.product(vis, repeat=3):
                if T.lt(x, y) and T.lt(y, z):
                    assert T.lt(x, z)
            for x, y in itertools.combinations(vis, 2):
                assert not (T.lt(x, y) and T.lt(y, x))

    def test_cycle_detected(self):
        P = parse_dsl("family x\nfamily y\nrule x < y\nrule y < x\n")
        with pytest.raises(AntisymmetryViolation):
            P.truncation(2)

    def test_unknown_element(self):
        with pytest.raises(PostoneError):
            SYSTEMS["P"].leq("zz", "r")


class TestDSL:
    @pytest.mark.parametrize("text, lineno", [
        ("family p\nwibble p\n", 2),
        ("family p\nrule p < < p\n", 2),
        ("family p chain sideways\n", 1),
        ("family p chain\nrule p[0*n] < p[n]\n", 2),
        ("family p\nrule p[[n] < p\n", 2),
    ])
    def test_errors_carry_line(self, text, lineno):
        with pytest.raises(DSLError) as exc:
            parse_dsl(text)
        assert exc.value.lineno == lineno

    def test_semantic_errors(self):
        with pytest.raises(DSLError):
            parse_dsl("family p\nrule p < q\n")
        with pytest.raises(DSLError):
            parse_dsl("family p\nreflexive q\n")
        with pytest.raises(DSLError):
            parse_dsl("family p chain\nfamily r\nrule p < r\n")

    def test_round_trip(self):
        for text in list(PARTITION_TYPES.values()) + [ISO_P]:
            P = parse_dsl(text)
            again = parse_dsl(P.to_dsl())
            assert again.to_dsl() == P.to_dsl()
            assert again.truncation(5).posystem == P.truncation(5).posystem

    def test_guarded_shift_rule(self):
        P = parse_dsl("family x chain none\nfamily y chain none\nrule x[n] < y[2*n+1] if n >= 2\n")
        assert P.leq("x[2]", "y[5]")
        assert not P.leq("x[1]", "y[3]")


class TestIdeals:
    def test_finite_only_principal(self):
        P = parse_dsl(FINITE["chain"])
        assert [J.name for J in ideals(P, 5)] == ["x", "y", "z"]

    def test_partition_types_tails(self):
        names = [J.name for J in ideals(SYSTEMS["P"], 20, principal=False)]
        assert names == ["tail:p", "tail:q"]

    def test_increasing_chain_alone(self):
        P = parse_dsl("family j chain increasing\n")
        tails = ideals(P, 10, principal=False)
        assert [J.name for J in tails] == ["tail:j"]

    def test_step_two_tails_merge(self):
        # j[n] < j[n+2] only: the even and odd tails are different ideals
        P = parse_dsl("family j chain none\nrule j[n] < j[n+2]\n")
        assert [J.name for J in ideals(P, 10, principal=False)] == ["tail:j:2:0", "tail:j:2:1"]
        # with a common upper chain the two interleave and coincide
        Q = parse_dsl("family j chain none\nrule j[n] < j[n+2]\nrule j[n] < j[n+3]\n")
        tails = ideals(Q, 10, principal=False)
        assert len(tails) == 1

    def test_decreasing_chain_has_no_tail(self):
        assert ideals(parse_dsl(ISO_P), 10, principal=False) == []

    def test_sup(self):
        P = SYSTEMS["Q2"]
        (Jp, Jq) = ideals(P, 20, principal=False)
        assert sup(P, Jq, 20).witness == {"sup": "s"}
        assert sup(SYSTEMS["P"], Jq, 20) == "false"
        assert sup(SYSTEMS["P"], Jp, 20).witness == {"sup": "r"}


class TestSeparationAndCompactness:
    def test_separation_example(self):
        S = {k: parse_dsl(v) for k, v in SEPARATION.items()}
        assert is_separated(S["P"], "r", 20) == "true"
        q = is_separated(S["Q"], "r", 20)
        assert q == "false" and q.witness == {"ideal": "tail:j", "sup": "r"}
        assert is_separated(S["S"], "r", 20) == "true"

    def test_compact(self):
        c = is_compact(SYSTEMS["Q2"], "p[1]", 20)
        assert c == "false" and c.witness == {"element": "p[1]", "ideal": "tail:q", "sup": "s"}
        assert is_compact(parse_dsl(FINITE["point"]), "p", 20) == "true"

    def test_weakly_separated(self):
        w = weakly_separated(SYSTEMS["Q3"], "base", 20)
        assert w == "false" and w.witness == {"ideal": "tail:p", "sup": "r"}
        assert weakly_separated(SYSTEMS["Q1"], "base", 20) == "true"
        F = parse_dsl(FINITE["vee"])
        assert weakly_separated(F, ["a", "b", "c"], 20) == "true"

    def test_rank_table(self):
        got = {q: tuple(v.value for v in rank_criteria(SYSTEMS[q], "base", 20).values())
               for q in ("Q1", "Q2", "Q3")}
        assert got == {"Q1": ("true", "true"), "Q2": ("true", "false"), "Q3": ("false", "false")}

    @pytest.mark.parametrize("q", ["Q1", "Q2", "Q3"])
    def test_bound_monotone(self, q):
        seen = {}
        for B in (10, 15, 20, 25):
            for k, v in rank_criteria(SYSTEMS[q], "base", B).items():
                if v.value != "unknown":
                    assert seen.setdefault(k, v.value) == v.value

    def test_tribool(self):
        assert TriBool.all([TriBool("true"), TriBool("unknown", 3)], 3) == "unknown"
        assert TriBool.all([TriBool("unknown", 3), TriBool("false")], 3) == "false"
        assert TriBool("unknown", 7).to_json() == {"value": "unknown", "bound": 7}
        with pytest.raises(ValueError):
            TriBool("maybe")


class TestCompletion:
    @pytest.mark.parametrize("name", sorted(FINITE))
    def test_finite_is_unchanged(self, name):
        P = parse_dsl(FINITE[name])
        C, names = ideal_completion(P, 10)
        assert names == {}
        assert iso(C.truncation(10).posystem, P.truncation(10).posystem) is not None

    def test_partition_types(self):
        C, names = ideal_completion(SYSTEMS["P"], 20)
        assert names == {"tail:p": "J_p", "tail:q": "J_q"}
        assert iso(C.truncation(20).posystem, SYSTEMS["Q1"].truncation(20).posystem) is not None
        for x in SYSTEMS["P"].elements(20):
            assert is_compact(C, x, 20) == "true"

    def test_iso_p_adds_nothing(self):
        assert ideal_completion(parse_dsl(ISO_P), 10)[1] == {}

    def test_separation_completion(self):
        Q = parse_dsl(SEPARATION["Q"])
        C, _ = ideal_completion(Q, 20)
        S = parse_dsl(SEPARATION["S"])
        assert iso(C.truncation(20).posystem, S.truncation(20).posystem) is not None


class TestIdMorphism:
    def test_identity(self):
        P = SYSTEMS["Q1"]
        alpha = PresentedMorphism.from_json(P, P, {f.name: f.name for f in P.families})
        out = id_morphism(alpha, 8)
        assert all(k == v for k, v in out.items())

    def test_collapse_tops(self):
        src = SYSTEMS["Q1"]
        tgt = parse_dsl("family p chain increasing\nfamily q chain increasing\nfamily u\n"
                        "reflexive p q u\nrule p[n] < u\nrule q[n] < u\n")
        alpha = PresentedMorphism.from_json(src, tgt, {"p": "p", "q": "q", "r": "u", "s": "u", "t": "u"})
        out = id_morphism(alpha, 8)
        assert out["tail:p"] == "tail:p" and out["tail:q"] == "tail:q"
        assert out["s"] == "u"

    def test_finite(self):
        P = parse_dsl(FINITE["vee"])
        Q = parse_dsl("family a\nfamily c\nreflexive c\nrule a < c\n")
        alpha = PresentedMorphism.from_json(P, Q, {"a": "a", "b": "a", "c": "c"})
        assert id_morphism(alpha, 5) == {"a": "a", "b": "a", "c": "c"}

    def test_eventually_constant_image(self):
        P = parse_dsl(SEPARATION["S"])
        Q = parse_dsl("family w\nfamily r\nreflexive w\nrule w < r\n")
        alpha = PresentedMorphism.from_json(P, Q, {"j": "w", "w": "w", "r": "r"})
        assert id_morphism(alpha, 8)["tail:j"] == "w"

    def test_rejects_non_morphism(self):
        P = parse_dsl(FINITE["chain"])
        Q = parse_dsl("family x\n")
        alpha = PresentedMorphism.from_json(P, Q, {"x": "x", "y": "x", "z": "x"})
        with pytest.raises(PostoneError):
            id_morphism(alpha, 3)


class TestCompletionMaps:
    def test_inclusion_into_completion(self):
        P = SYSTEMS["P"]
        C, names = ideal_completion(P, 20)
        report = validate_completion_map(P, C, names, 20)
        assert {k: v.value for k, v in report.items()} == {
            "1": "true", "2": "true", "3": "true", "4": "true",
            "morphism": "true", "strongly_semi_trim": "true", "rank": "true"}

    def test_remark_counterexample(self):
        base, full = propn_maps_remark(7)
        report = validate_completion_map(parse_dsl(base), parse_dsl(full), propn_maps_beta(7), 6)
        assert [report[k].value for k in "1234"] == ["true"] * 4
        assert report["morphism"] == "false"
        assert "no ideal L with tail:p<L and Lβ=s" in report["morphism"].witness["witnesses"]

    def test_non_principal_onto_base_element(self):
        Q = parse_dsl(SEPARATION["Q"])
        report = validate_completion_map(Q, Q, {"tail:j": "r"}, 20)
        assert report["strongly_semi_trim"] == "false"
        assert report["strongly_semi_trim"].witness == {"ideal": "tail:j", "image": "r"}

    def test_missing_image(self):
        Q = parse_dsl(SEPARATION["Q"])
        with pytest.raises(PostoneError):
            validate_completion_map(Q, Q, {}, 10)
