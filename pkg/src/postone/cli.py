"""``postone`` command line: JSON in, JSON out.

Exit status 0 on success, 1 on a domain error (the report carries the
diagnostics), 2 on a usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import cellspace as cs
from . import corpus as corpus_mod
from . import presented as pr
from .congruence import Morphism, is_simple, max_congruence, quotient, simple_image
from .errors import Infeasible, InvalidExtendedPoSystem, PostoneError
from .extended import (
    ExtendedPoSystem,
    iso_extended,
    pushforward,
    refinement_feasible,
    refines,
)
from .poset import PoSystem, iso


class DomainFailure(Exception):
    """A command finished with a negative domain answer that should exit 1."""

    def __init__(self, report):
        super().__init__(report)
        self.report = report


def _load_json(path: str):
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise PostoneError(f"{path}: invalid JSON ({exc})") from None
    except OSError as exc:
        raise PostoneError(f"{path}: {exc.strerror}") from None


def _load_poset(path):
    return PoSystem.from_json(_load_json(path))


def _load_eps(path):
    return ExtendedPoSystem.from_json(_load_json(path))


def _load_morphism(path):
    return Morphism.from_json(_load_json(path))


def _load_model(path):
    return cs.model_from_json(_load_json(path))


def _load_dsl(path):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise PostoneError(f"{path}: {exc.strerror}") from None
    return pr.parse_dsl(text)


# -- commands ---------------------------------------------------------------


def cmd_poset_validate(a):
    P = _load_poset(a.file)
    return {"valid": True, "elements": list(P.elements), "discrete": list(P.discrete),
            "reflexive": list(P.reflexive), "minimal": list(P.minimal()), "maximal": list(P.maximal())}


def cmd_poset_iso(a):
    phi = iso(_load_poset(a.first), _load_poset(a.second))
    return {"isomorphic": phi is not None, "map": phi}


def cmd_simple_image(a):
    P = _load_poset(a.file)
    if a.method == "exhaustive":
        S, proj = quotient(P, max_congruence(P, "exhaustive"))
    else:
        S, proj = simple_image(P)
    return {"simple_image": S.to_json(), "projection": {p: proj.mapping[p] for p in P.elements}}


def cmd_is_simple(a):
    return {"simple": is_simple(_load_poset(a.file))}


def cmd_eps_validate(a):
    e = _load_eps(a.file)
    d = e.diagnostics()
    report = {"valid": not d, "diagnostics": d}
    if d:
        raise DomainFailure(report)
    return report


def cmd_eps_iso(a):
    phi = iso_extended(_load_eps(a.first).check(), _load_eps(a.second).check())
    return {"isomorphic": phi is not None, "map": phi}


def cmd_eps_refines(a):
    w = refines(_load_eps(a.src).check(), _load_eps(a.dst).check())
    return {"refines": w is not None, "witness": None if w is None else dict(w.mapping)}


def cmd_eps_pushforward(a):
    return pushforward(_load_morphism(a.morphism), _load_eps(a.src)).to_json()


def cmd_eps_feasible(a):
    ok, d = refinement_feasible(_load_eps(a.dst).check(), _load_morphism(a.morphism))
    return {"feasible": ok, "diagnostics": d}


def cmd_space_build(a):
    model = cs.build_model(_load_eps(a.file))
    return cs.model_to_json(model, a.horizon)


def cmd_space_verify(a):
    report = cs.verify(_load_model(a.file), a.depth)
    if report["violations"]:
        raise DomainFailure(report)
    return report


def _sets(model, specs):
    return [cs.parse_compact_open(model, s) for s in specs]


def cmd_space_decompose(a):
    model = _load_model(a.file)
    (A,) = _sets(model, [a.set])
    parts = cs.decompose_tp5(model, A)
    return {"set": A.to_json(), "parts": [{"tails": p.to_json(), "trim_type": model.trim_type(p)} for p in parts]}


def cmd_space_nf(a):
    model = _load_model(a.file)
    (A,) = _sets(model, [a.set])
    out = cs.normal_form(model, A).to_json()
    out["set"] = A.to_json()
    out["trim_type"] = model.trim_type(A)
    return out


def cmd_space_homeo(a):
    model = _load_model(a.file)
    A, B = _sets(model, [a.first, a.second])
    return {"homeomorphic": cs.homeomorphic(model, A, B)}


def cmd_space_diagram(a):
    S, lab = cs.structure_diagram(_load_model(a.file))
    return {"diagram": S.to_json(), "labelling": dict(lab.mapping)}


def cmd_space_orbits(a):
    return {"orbit_diagram": cs.orbit_diagram(_load_model(a.file)).to_json()}


def cmd_space_consolidate(a):
    model = _load_model(a.file)
    view = cs.consolidate(model, _load_morphism(a.morphism), a.depth)
    return {"partition_data": view.partition_data().to_json(),
            "labels": {t: view.label[t] for t in model.P.elements}}


def cmd_space_refine(a):
    model = _load_model(a.file)
    try:
        result = cs.refine(model, _load_morphism(a.morphism))
    except Infeasible as exc:
        raise DomainFailure({"feasible": False, "diagnostics": exc.diagnostics,
                             "elements": list(exc.elements)}) from None
    return cs.model_to_json(result, a.horizon)


def cmd_inf_ideals(a):
    P = _load_dsl(a.file)
    out = []
    for J in pr.ideals(P, a.bound):
        item = J.to_json()
        if not J.principal:
            item["sup"] = pr.sup(P, J, a.bound).to_json()
        out.append(item)
    return {"bound": a.bound, "ideals": out}


def cmd_inf_complete(a):
    C, names = pr.ideal_completion(_load_dsl(a.file), a.bound)
    return {"bound": a.bound, "new_elements": names, "presentation": C.to_dsl()}


def cmd_inf_separated(a):
    return {"element": a.element, "separated": pr.is_separated(_load_dsl(a.file), a.element, a.bound).to_json()}


def cmd_inf_compact(a):
    return {"element": a.element, "compact": pr.is_compact(_load_dsl(a.file), a.element, a.bound).to_json()}


def cmd_inf_rank(a):
    res = pr.rank_criteria(_load_dsl(a.file), a.hat, a.bound)
    out = {k: v.value for k, v in res.items()}
    out["bound"] = a.bound
    out["details"] = {k: v.to_json() for k, v in res.items()}
    return out


def cmd_inf_idmorph(a):
    src, tgt = _load_dsl(a.source), _load_dsl(a.target)
    alpha = pr.PresentedMorphism.from_json(src, tgt, _load_json(a.map))
    return {"bound": a.bound, "map": pr.id_morphism(alpha, a.bound)}


def cmd_inf_checkmap(a):
    P, Q = _load_dsl(a.base), _load_dsl(a.extension)
    report = pr.validate_completion_map(P, Q, _load_json(a.beta), a.bound)
    return {"bound": a.bound, "conditions": {k: v.to_json() for k, v in report.items()}}


def cmd_corpus(a):
    return corpus_mod.run(a.name, a.bound)


# -- parser ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    # --pretty is accepted before or after the verb; the nested copy must not reset it
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--pretty", action="store_true", default=argparse.SUPPRESS,
                        help="indent the JSON report")

    parser = argparse.ArgumentParser(prog="postone",
                                     description="PO systems, trim partitions and ideal completions.")
    parser.add_argument("--pretty", action="store_true", help="indent the JSON report")
    sub = parser.add_subparsers(dest="verb", required=True)

    def add(group, name, fn, *args, **kw):
        p = group.add_parser(name, parents=[common], **kw)
        p.set_defaults(func=fn)
        for arg in args:
            p.add_argument(arg)
        return p

    poset = sub.add_parser("poset").add_subparsers(dest="action", required=True)
    add(poset, "validate", cmd_poset_validate, "file")
    add(poset, "iso", cmd_poset_iso, "first", "second")

    p = add(sub, "simple-image", cmd_simple_image, "file")
    p.add_argument("--method", choices=("refine", "exhaustive"), default="refine")
    add(sub, "is-simple", cmd_is_simple, "file")

    eps = sub.add_parser("eps").add_subparsers(dest="action", required=True)
    add(eps, "validate", cmd_eps_validate, "file")
    add(eps, "iso", cmd_eps_iso, "first", "second")
    add(eps, "refines", cmd_eps_refines, "src", "dst")
    add(eps, "pushforward", cmd_eps_pushforward, "morphism", "src")
    add(eps, "feasible", cmd_eps_feasible, "dst", "morphism")

    space = sub.add_parser("space").add_subparsers(dest="action", required=True)
    add(space, "build", cmd_space_build, "file").add_argument("--horizon", type=int, default=None)
    add(space, "verify", cmd_space_verify, "file").add_argument("--depth", type=int, default=6)
    add(space, "decompose", cmd_space_decompose, "file").add_argument("--set", required=True)
    add(space, "nf", cmd_space_nf, "file").add_argument("--set", required=True)
    p = add(space, "homeo", cmd_space_homeo, "file")
    p.add_argument("--set", dest="first", required=True)
    p.add_argument("--other", dest="second", required=True)
    add(space, "diagram", cmd_space_diagram, "file")
    add(space, "orbits", cmd_space_orbits, "file")
    add(space, "consolidate", cmd_space_consolidate, "file", "morphism").add_argument(
        "--depth", type=int, default=3)
    add(space, "refine", cmd_space_refine, "file", "morphism").add_argument(
        "--horizon", type=int, default=None)

    inf = sub.add_parser("inf").add_subparsers(dest="action", required=True)

    def add_inf(name, fn, *args):
        p = add(inf, name, fn, *args)
        p.add_argument("--bound", type=int, default=20)
        return p

    add_inf("ideals", cmd_inf_ideals, "file")
    add_inf("complete", cmd_inf_complete, "file")
    add_inf("separated", cmd_inf_separated, "file").add_argument("--element", required=True)
    add_inf("compact", cmd_inf_compact, "file").add_argument("--element", required=True)
    add_inf("rank", cmd_inf_rank, "file").add_argument("--hat", default="base")
    add_inf("idmorph", cmd_inf_idmorph, "source", "target", "map")
    add_inf("checkmap", cmd_inf_checkmap, "base", "extension", "beta")

    p = add(sub, "corpus", cmd_corpus)
    p.add_argument("name", choices=sorted(corpus_mod.CORPUS))
    p.add_argument("--bound", type=int, default=None)
    return parser


def _emit(report, pretty: bool, stream) -> None:
    if pretty:
        text = json.dumps(report, indent=2, sort_keys=True, ensure_ascii=False)
    else:
        text = json.dumps(report, sort_keys=True, separators=(",", ":"), ensure_ascii=False)
    stream.write(text + "\n")


def main(argv=None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        report = args.func(args)
        code = 0
    except DomainFailure as exc:
        report, code = exc.report, 1
    except InvalidExtendedPoSystem as exc:
        report, code = {"error": type(exc).__name__, "diagnostics": exc.diagnostics}, 1
    except PostoneError as exc:
        report, code = {"error": type(exc).__name__, "message": str(exc)}, 1
    _emit(report, args.pretty, stdout)
    return code


if __name__ == "__main__":
    sys.exit(main())
