"""Golden-file tests for every CLI verb.

Set ``POSTONE_REGEN_GOLDEN=1`` to rewrite the golden files after an
intentional output change; review the diff before committing.
"""

from __future__ import annotations

import io
import json
import os
import subprocess
import sys
from pathlib import Path

import pytest

from postone.cli import main

HERE = Path(__file__).parent
DATA = HERE / "data"
GOLDEN = HERE / "golden"

# (golden name, argv with data-relative paths, expected exit status)
CASES = [
    ("poset_validate", ["poset", "validate", "chain2.json"], 0),
    ("poset_validate_cycle", ["poset", "validate", "cycle.json"], 1),
    ("poset_iso", ["poset", "iso", "chain2.json", "chain2_renamed.json"], 0),
    ("poset_iso_none", ["poset", "iso", "chain2.json", "anti2.json"], 0),
    ("simple_image", ["simple-image", "anti2.json"], 0),
    ("simple_image_exhaustive", ["simple-image", "--method", "exhaustive", "refl_chain.json"], 0),
    ("is_simple", ["is-simple", "chain2.json"], 0),
    ("eps_validate", ["eps", "validate", "eps_chain.json"], 0),
    ("eps_validate_bad", ["eps", "validate", "eps_bad.json"], 1),
    ("eps_iso", ["eps", "iso", "eps_chain.json", "eps_chain_f2.json"], 0),
    ("eps_refines", ["eps", "refines", "eps_anti.json", "eps_point2.json"], 0),
    ("eps_pushforward", ["eps", "pushforward", "merge.json", "eps_anti.json"], 0),
    ("eps_feasible", ["eps", "feasible", "eps_point1.json", "merge.json"], 0),
    ("space_build", ["space", "build", "--horizon", "4", "eps_chain_f2.json"], 0),
    ("space_verify", ["space", "verify", "--depth", "6", "eps_chain.json"], 0),
    ("space_verify_bad_child", ["space", "verify", "model_bad_child.json"], 1),
    ("space_verify_missing", ["space", "verify", "model_missing_type.json"], 1),
    ("space_decompose", ["space", "decompose", "eps_chain_f2.json",
                         "--set", "root:1/tail:3,root:1/child:1,root:2"], 0),
    ("space_nf", ["space", "nf", "eps_chain_f2.json", "--set", "root:1,root:2"], 0),
    ("space_homeo", ["space", "homeo", "eps_anti.json", "--set", "root:1", "--other", "root:2"], 0),
    ("space_diagram", ["space", "diagram", "two_chains.json"], 0),
    ("space_orbits", ["space", "orbits", "two_chains.json"], 0),
    ("space_consolidate", ["space", "consolidate", "two_chains.json", "fold_chains.json"], 0),
    ("space_refine", ["space", "refine", "eps_point2.json", "merge.json"], 0),
    ("space_refine_infeasible", ["space", "refine", "eps_point1.json", "merge.json"], 1),
    ("inf_ideals", ["inf", "ideals", "--bound", "3", "p.pos"], 0),
    ("inf_complete", ["inf", "complete", "p.pos"], 0),
    ("inf_separated", ["inf", "separated", "sep_q.pos", "--element", "r"], 0),
    ("inf_compact", ["inf", "compact", "q2.pos", "--element", "p[1]"], 0),
    ("inf_rank_q2", ["inf", "rank", "--bound", "20", "q2.pos", "--hat", "base"], 0),
    ("inf_idmorph", ["inf", "idmorph", "--bound", "4", "q1.pos", "collapse.pos", "collapse_map.json"], 0),
    ("inf_checkmap", ["inf", "checkmap", "--bound", "8", "p.pos", "p_completion.pos",
                      "completion_beta.json"], 0),
    ("inf_checkmap_remark", ["inf", "checkmap", "--bound", "4", "remark_base.pos", "remark_full.pos",
                             "remark_beta.json"], 0),
    ("inf_dsl_error", ["inf", "ideals", "bad.pos"], 1),
    ("corpus_partition_types", ["corpus", "partition-types"], 0),
    ("corpus_iso_p", ["corpus", "iso-p"], 0),
    ("corpus_propn_maps_remark", ["corpus", "propn-maps-remark"], 0),
    ("corpus_separation", ["corpus", "separation"], 0),
]


def _resolve(argv):
    return [str(DATA / a) if (DATA / a).is_file() else a for a in argv]


def run(argv):
    out = io.StringIO()
    code = main(_resolve(argv), stdout=out)
    return code, out.getvalue()


@pytest.mark.parametrize("name, argv, code", CASES, ids=[c[0] for c in CASES])
def test_golden(name, argv, code):
    got_code, text = run(argv)
    assert got_code == code
    path = GOLDEN / f"{name}.json"
    if os.environ.get("POSTONE_REGEN_GOLDEN"):
        path.write_text(text)
    assert text == path.read_text()


def test_every_verb_is_covered():
    verbs = {tuple(argv[:2]) if argv[0] in {"poset", "eps", "space", "inf"} else (argv[0],)
             for _, argv, _ in CASES}
    expected = {("poset", v) for v in ("validate", "iso")}
    expected |= {("simple-image",), ("is-simple",), ("corpus",)}
    expected |= {("eps", v) for v in ("validate", "iso", "refines", "pushforward", "feasible")}
    expected |= {("space", v) for v in ("build", "verify", "decompose", "nf", "homeo", "diagram",
                                        "consolidate", "refine", "orbits")}
    expected |= {("inf", v) for v in ("ideals", "complete", "separated", "compact", "rank",
                                      "idmorph", "checkmap")}
    assert verbs == expected


def test_rank_report_matches_table():
    code, text = run(["inf", "rank", "--bound", "20", "q2.pos", "--hat", "base"])
    report = json.loads(text)
    assert (report["strongly_semi_trim"], report["rank"]) == ("true", "false")


def test_is_simple_chain():
    assert run(["is-simple", "chain2.json"]) == (0, '{"simple":true}\n')


def test_verify_report_is_empty():
    code, text = run(["space", "verify", "--depth", "6", "eps_chain.json"])
    assert code == 0 and json.loads(text)["violations"] == []


def test_output_is_deterministic():
    argv = ["corpus", "partition-types"]
    assert run(argv) == run(argv)


def test_pretty_is_same_document():
    code, plain = run(["eps", "refines", "eps_anti.json", "eps_point2.json"])
    code2, pretty = run(["--pretty", "eps", "refines", "eps_anti.json", "eps_point2.json"])
    assert json.loads(plain) == json.loads(pretty) and "\n  " in pretty


def test_missing_file_is_domain_error():
    code, text = run(["is-simple", "no-such-file.json"])
    assert code == 1 and json.loads(text)["error"] == "PostoneError"


@pytest.mark.parametrize("argv", [["frobnicate"], ["space"], ["inf", "rank"], ["corpus", "nope"]])
def test_usage_errors_exit_2(argv):
    with pytest.raises(SystemExit) as exc:
        main(argv, stdout=io.StringIO())
    assert exc.value.code == 2


def test_console_script():
    proc = subprocess.run([sys.executable, "-m", "postone.cli", "is-simple", str(DATA / "anti2.json")],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout == '{"simple":false}\n'
