"""Built-in worked examples, each run end-to-end against an expected table."""

from __future__ import annotations

from .errors import CorpusMismatch
from .extended import ExtendedPoSystem
from .poset import finite_foundation, iso, isomorphisms
from .presented import (
    ISO_P,
    PARTITION_TYPES,
    SEPARATION,
    bounded_foundation,
    ideal_completion,
    ideals,
    is_compact,
    is_separated,
    parse_dsl,
    propn_maps_beta,
    propn_maps_remark,
    rank_criteria,
    validate_completion_map,
)

#: name → (strongly semi-trim, rank) for each extension of the base system
RANK_TABLE = {
    "Q1": ("true", "true"),
    "Q2": ("true", "false"),
    "Q3": ("false", "false"),
}


def _check(name: str, got: dict, want: dict) -> dict:
    diff = {k: {"expected": want[k], "got": got.get(k)} for k in want if got.get(k) != want[k]}
    if diff:
        raise CorpusMismatch(name, diff)
    return got


def partition_types(bound: int = 20) -> dict:
    systems = {k: parse_dsl(v) for k, v in PARTITION_TYPES.items()}
    got, want, details = {}, {}, {}
    for q, (sst, rank) in RANK_TABLE.items():
        res = rank_criteria(systems[q], "base", bound)
        got[f"{q}.strongly_semi_trim"] = res["strongly_semi_trim"].value
        got[f"{q}.rank"] = res["rank"].value
        want[f"{q}.strongly_semi_trim"] = sst
        want[f"{q}.rank"] = rank
        details[q] = {k: v.to_json() for k, v in res.items()}
    completion, names = ideal_completion(systems["P"], bound)
    got["completion.new_elements"] = len(names)
    want["completion.new_elements"] = 2
    got["completion.iso_Q1"] = iso(completion.truncation(bound).posystem,
                                   systems["Q1"].truncation(bound).posystem) is not None
    want["completion.iso_Q1"] = True
    base = systems["P"].elements(bound)
    got["completion.base_compact"] = all(is_compact(completion, x, bound).value == "true" for x in base)
    want["completion.base_compact"] = True
    q2 = details["Q2"]["rank"].get("witness", {})
    got["Q2.rank.witness"] = (q2.get("ideal"), q2.get("sup"))
    want["Q2.rank.witness"] = ("tail:q", "s")
    q3 = details["Q3"]["strongly_semi_trim"].get("witness", {})
    got["Q3.sst.witness"] = (q3.get("ideal"), q3.get("sup"))
    want["Q3.sst.witness"] = ("tail:p", "r")
    _check("partition-types", got, want)
    return {"bound": bound, "checks": {k: _plain(v) for k, v in got.items()}, "details": details,
            "completion_names": names}


def iso_p(bound: int = 20, model_bound: int = 2) -> dict:
    P = parse_dsl(ISO_P)
    T = P.truncation(bound)
    L = [x for x in T.visible if x == "c" or x.startswith("b[")]
    Pfin = P.truncation(model_bound).posystem
    Lfin = frozenset(x for x in Pfin.elements if x == "c" or x.startswith("b["))
    eps = ExtendedPoSystem(Pfin, Lfin, {"c": 1})
    found = bounded_foundation(P, L, bound)
    ups = [Pfin.upset_system(x) for x in Pfin.elements]
    upset_iso = any(
        next(isomorphisms(ups[i], ups[j]), None) is not None
        for i in range(len(ups)) for j in range(i + 1, len(ups))
    )
    got = {
        "L_lower": T.posystem.is_lower(L),
        "foundation": list(found.witness["foundation"]) if found.value == "true" else found.value,
        "finite_foundation_truncated": sorted(finite_foundation(Pfin, Lfin) or ()),
        "eps_valid": eps.is_valid(),
        "f": dict(eps.f),
        "a5_above_b7": P.leq("b[7]", "a[5]"),
        "nonprincipal_ideals": [J.name for J in ideals(P, bound, principal=False)],
        "truncation_upset_isomorphisms": upset_iso,
    }
    want = {
        "L_lower": True,
        "foundation": ["c"],
        "finite_foundation_truncated": ["c"],
        "eps_valid": True,
        "f": {"c": 1},
        "a5_above_b7": True,
        "nonprincipal_ideals": [],
        "truncation_upset_isomorphisms": False,
    }
    _check("iso-p", got, want)
    return {"bound": bound, "checks": got, "eps": eps.to_json()}


def propn_maps(bound: int = 6) -> dict:
    base, full = propn_maps_remark(bound + 1)
    P, Q = parse_dsl(base), parse_dsl(full)
    report = validate_completion_map(P, Q, propn_maps_beta(bound + 1), bound)
    got = {k: v.value for k, v in report.items()}
    witnesses = (report["morphism"].witness or {}).get("witnesses", [])
    got["witness"] = "no ideal L with tail:p<L and Lβ=s" in witnesses
    want = {"1": "true", "2": "true", "3": "true", "4": "true", "morphism": "false", "witness": True}
    _check("propn-maps-remark", got, want)
    return {"bound": bound, "columns": bound + 1, "checks": got,
            "report": {k: v.to_json() for k, v in report.items()}}


def separation(bound: int = 20) -> dict:
    systems = {k: parse_dsl(v) for k, v in SEPARATION.items()}
    completion, _ = ideal_completion(systems["Q"], bound)
    got = {
        "P.r": is_separated(systems["P"], "r", bound).value,
        "Q.r": is_separated(systems["Q"], "r", bound).value,
        "S.r": is_separated(systems["S"], "r", bound).value,
        "S_is_id_Q": iso(completion.truncation(bound).posystem,
                         systems["S"].truncation(bound).posystem) is not None,
    }
    want = {"P.r": "true", "Q.r": "false", "S.r": "true", "S_is_id_Q": True}
    _check("separation", got, want)
    return {"bound": bound, "checks": got}


def _plain(v):
    return list(v) if isinstance(v, tuple) else v


CORPUS = {
    "partition-types": partition_types,
    "iso-p": iso_p,
    "propn-maps-remark": propn_maps,
    "separation": separation,
}


def run(name: str, bound: int | None = None) -> dict:
    if name not in CORPUS:
        raise KeyError(name)
    fn = CORPUS[name]
    report = fn() if bound is None else fn(bound)
    report["name"] = name
    report["match"] = True
    return report
