import json
import math
import os

import pytest

from mcnn.pipeline import (
    PipelineOptions, pair_rows, parse_report, run_pipeline, serialize_report,
    summary_rows,
)

from conftest import FIXTURE_PARAMS, LAYER1

GOLDEN_DIR = os.path.join(os.path.dirname(__file__), "data", "golden")


def config_for(name):
    p = FIXTURE_PARAMS[name]
    return {"layers": [dict(LAYER1),
                       {"a": p["a"], "a_r": p["a_r"], "b": p["b"],
                        "b_r": p["b_r"], "z": p["z"]}]}


def test_report_roundtrip():
    report, _ = run_pipeline(config_for("fse_sft"))
    text = serialize_report(report)
    parsed = parse_report(text)
    assert serialize_report(parsed) == text


def test_report_deterministic():
    a, _ = run_pipeline(config_for("ito_sofic"))
    b, _ = run_pipeline(config_for("ito_sofic"))
    assert serialize_report(a) == serialize_report(b)


@pytest.mark.parametrize("name", sorted(FIXTURE_PARAMS))
def test_report_matches_golden(name):
    path = os.path.join(GOLDEN_DIR, name + ".json")
    report, _ = run_pipeline(config_for(name))
    with open(path) as fh:
        assert serialize_report(report) + "\n" == fh.read()


def test_run_pipeline_fse_sft_headlines():
    report, _ = run_pipeline(config_for("fse_sft"))
    g = (1 + math.sqrt(5)) / 2
    for entry in report["layers"]:
        assert abs(entry["entropy"] - math.log(g)) < 1e-9
    assert report["pairs"][0]["relation"] == "FSE-finite-to-one"
    dims = {round(entry["dimensions"]["cover"], 4) for entry in report["layers"]}
    dims |= {round(entry["dimensions"]["sofic"], 4) for entry in report["layers"]}
    assert dims == {round(2 * math.log(g) / math.log(2), 4),
                    round(2 * math.log(g) / math.log(3), 4)}


def test_run_pipeline_ito_sofic_headlines():
    report, _ = run_pipeline(config_for("ito_sofic"))
    h1 = report["layers"][0]["entropy"]
    h2 = report["layers"][1]["entropy"]
    assert abs(h1 - math.log(1.8393)) < 1e-4
    assert abs(h2 - math.log((1 + math.sqrt(5)) / 2)) < 1e-9
    got = [report["layers"][0]["dimensions"]["cover"],
           report["layers"][0]["dimensions"]["sofic"],
           report["layers"][1]["dimensions"]["cover"],
           report["layers"][1]["dimensions"]["sofic"]]
    for v, want in zip(got, (1.1094, 1.7582, 0.8760, 1.3884)):
        assert abs(v - want) < 1e-3
    assert report["pairs"][0]["relation"] == "infinite-to-one-exists"


def test_strict_boundary_raises():
    from mcnn.errors import BoundaryParameter

    with pytest.raises(BoundaryParameter):
        run_pipeline(config_for("fse_sft"), PipelineOptions(boundary="strict"))


def test_boundary_notes_present():
    report, _ = run_pipeline(config_for("fse_sft"))
    assert len(report["solution_space"]["boundary_notes"]) == 1
    report2, _ = run_pipeline(config_for("ito_sofic"))
    assert report2["solution_space"]["boundary_notes"] == []


def test_summary_rows_shape():
    report, _ = run_pipeline(config_for("fse_strict_sofic"))
    rows = summary_rows(report)
    assert [r["layer"] for r in rows] == [1, 2]
    assert rows[0]["cover_states"] == 3 and rows[1]["cover_states"] == 4
    prows = pair_rows(report)
    assert prows[0]["relation"] == "FSE-finite-to-one"
    assert prows[0]["evidence_kind"] == "incidence"


def test_single_layer_network():
    report, _ = run_pipeline({"layers": [dict(LAYER1)]})
    assert len(report["layers"]) == 1
    assert report["pairs"] == []
    assert abs(report["layers"][0]["entropy"] - math.log(2)) < 1e-9


def test_three_layer_network():
    p2 = FIXTURE_PARAMS["fse_sft"]
    p3 = FIXTURE_PARAMS["ito_sofic"]
    report, ctx = run_pipeline({"layers": [
        dict(LAYER1),
        {"a": p2["a"], "a_r": p2["a_r"], "b": p2["b"], "b_r": p2["b_r"],
         "z": p2["z"]},
        {"a": p3["a"], "a_r": p3["a_r"], "b": p3["b"], "b_r": p3["b_r"],
         "z": p3["z"]},
    ]})
    assert len(report["solution_space"]["states"]) == 8
    assert len(report["layers"]) == 3
    assert len(report["pairs"]) == 3
    for entry in report["layers"]:
        assert entry["entropy"] >= 0
    for pair in report["pairs"]:
        assert pair["relation"] in ("FSE-finite-to-one", "infinite-to-one-exists",
                                    "embedding-exists", "none-found")
