import json

import pytest

from src.cli import EXIT_NEGATIVE, EXIT_OK, EXIT_UNKNOWN, EXIT_USAGE, build_parser, dispatch
from src.services.graph_service import complete_blowup, save_graph
from src.services.report_service import file_digest
from tests.helpers import complete_graph, cycle_graph


@pytest.fixture
def out(tmp_path):
    return tmp_path / "out"


def _run(*argv) -> int:
    return dispatch([str(a) for a in argv])


def _manifest(out_dir) -> dict:
    return json.loads((out_dir / "manifest.json").read_text())


def test_parser_has_every_command():
    parser = build_parser()
    args = parser.parse_args(["pipeline", "run", "--config", "c.json", "--input", "g.json"])
    assert args.out == "certificate"
    assert str(args.out_dir) == "out"


def test_m2_prints_exact_value(tmp_path, out, capsys):
    path = save_graph(cycle_graph(4), tmp_path / "c4.json")
    assert _run("m2", "--input", path, "--out-dir", out) == EXIT_OK
    assert capsys.readouterr().out.strip() == "3/2"
    payload = json.loads((out / "m2.json").read_text())
    assert payload["value"] == "3/2"


def test_m2_exact_method(tmp_path, out, capsys):
    path = save_graph(complete_graph(4), tmp_path / "k4.json")
    assert _run("m2", "--input", path, "--method", "exact", "--out-dir", out) == EXIT_OK
    assert capsys.readouterr().out.strip() == "5/2"


def test_factor_solve_negative_verdicts(tmp_path, out, capsys):
    c6 = save_graph(cycle_graph(6), tmp_path / "c6.json")
    assert _run("factor", "solve", "--t", 3, "--input", c6, "--out-dir", out) == EXIT_NEGATIVE
    assert capsys.readouterr().out.strip() == "none"
    c5 = save_graph(cycle_graph(5), tmp_path / "c5.json")
    assert _run("factor", "solve", "--t", 3, "--input", c5, "--out-dir", out) == EXIT_NEGATIVE
    assert json.loads((out / "factor.json").read_text())["status"] == "none"


def test_factor_solve_and_verify(tmp_path, out):
    k6 = save_graph(complete_graph(6), tmp_path / "k6.json")
    assert _run("factor", "solve", "--t", 3, "--input", k6, "--out-dir", out) == EXIT_OK
    assert _run("factor", "verify", "--t", 3, "--input", k6, "--certificate", out / "factor.json",
                "--out-dir", out) == EXIT_OK
    assert json.loads((out / "verify.json").read_text())["valid"] is True


def test_factor_solve_out_of_budget(tmp_path, out, capsys):
    k30 = save_graph(complete_graph(30), tmp_path / "k30.json")
    assert _run("factor", "solve", "--t", 6, "--input", k30, "--budget-ms", 50, "--out-dir", out) == EXIT_UNKNOWN
    assert capsys.readouterr().out.strip() == "unknown"
    assert json.loads((out / "factor.json").read_text())["status"] == "unknown"


def test_factor_solve_ill_posed_queries(tmp_path, out):
    k4 = save_graph(complete_graph(4), tmp_path / "k4.json")
    assert _run("factor", "solve", "--t", 2, "--input", k4, "--out-dir", out) == EXIT_USAGE
    host = save_graph(complete_blowup(3, 4), tmp_path / "host.json")
    assert _run("factor", "solve", "--t", 4, "--parts", "--input", host, "--out-dir", out) == EXIT_USAGE


def test_usage_errors(tmp_path, out, capsys):
    assert _run("m2", "--bogus") == EXIT_USAGE
    assert _run("m2", "--input", tmp_path / "missing.json", "--out-dir", out) == EXIT_USAGE
    assert "[error]" in capsys.readouterr().err
    path = save_graph(cycle_graph(4), tmp_path / "c4.json")
    assert _run("m2", "--input", path, "--seed", -1, "--out-dir", out) == EXIT_USAGE
    assert _run("m2", "--input", path, "--format", "csv", "--out-dir", out) == EXIT_USAGE


def test_pipeline_run_writes_verifiable_certificate(tmp_path, out):
    host = save_graph(complete_blowup(3, 30), tmp_path / "host.json")
    config = tmp_path / "config.json"
    config.write_text(json.dumps({"t": 3, "k": 2, "rho": "1/10"}))
    assert _run("pipeline", "run", "--config", config, "--input", host, "--out-dir", out) == EXIT_OK
    result = json.loads((out / "certificate.json").read_text())
    assert result["status"] == "found"
    assert _run("factor", "verify", "--t", 3, "--input", host, "--certificate", out / "certificate.json",
                "--out-dir", tmp_path / "check") == EXIT_OK


def test_pipeline_out_accepts_a_suffix(tmp_path, out):
    host = save_graph(complete_blowup(3, 30), tmp_path / "host.json")
    config = tmp_path / "config.json"
    config.write_text(json.dumps({"t": 3, "k": 2}))
    assert _run("pipeline", "run", "--config", config, "--input", host, "--out", "cert.json",
                "--out-dir", out) == EXIT_OK
    assert (out / "cert.json").exists()
    assert not (out / "cert.json.json").exists()


def test_pipeline_failure_is_reported(tmp_path, out, capsys):
    host = save_graph(complete_blowup(3, 7), tmp_path / "host.json")
    config = tmp_path / "config.json"
    config.write_text(json.dumps({"t": 3, "k": 2}))
    assert _run("pipeline", "run", "--config", config, "--input", host, "--out-dir", out) == EXIT_NEGATIVE
    result = json.loads((out / "certificate.json").read_text())
    assert result["phase"] == "validate"
    assert "pipeline failed in validate" in capsys.readouterr().err


def test_gadget_dot_colours_roots(out):
    assert _run("gadget", "build", "--kind", "absorber", "--t", 3, "--k", 2, "--format", "dot",
                "--out-dir", out) == EXIT_OK
    dot = (out / "gadget.dot").read_text()
    assert dot.startswith("graph absorber {")
    assert dot.count('fillcolor="tomato"') == 3
    assert dot.count('fillcolor="gold"') == 3


def test_gadget_build_needs_parameters(out):
    assert _run("gadget", "build", "--kind", "ladder", "--out-dir", out) == EXIT_USAGE
    assert _run("gadget", "build", "--kind", "ladder", "--a", 2, "--b", 3, "--l", 7, "--out-dir", out) == EXIT_OK
    assert json.loads((out / "gadget.json").read_text())["n"] == 17


def test_tree_is_an_alias_for_ct_tree(out):
    assert _run("gadget", "build", "--kind", "tree", "--t", 3, "--k", 2, "--out-dir", out) == EXIT_OK
    assert json.loads((out / "gadget.json").read_text())["n"] == 15


def test_census_csv_has_one_row_per_vertex(tmp_path, out):
    host = save_graph(complete_blowup(3, 6), tmp_path / "host.json")
    assert _run("regcheck", "--input", host, "--t", 3, "--k", 2, "--census", "--format", "csv",
                "--out-dir", out) == EXIT_OK
    lines = (out / "census.csv").read_text().splitlines()
    assert lines[0] == "vertex,expanding_backward,expanding_forward,lower_regular,typical"
    assert len(lines) == 1 + 18


def test_regcheck_membership_exit_codes(tmp_path, out):
    host = save_graph(complete_blowup(3, 6), tmp_path / "host.json")
    assert _run("regcheck", "--input", host, "--t", 3, "--k", 2, "--out-dir", out) == EXIT_OK
    assert _run("regcheck", "--input", host, "--t", 3, "--k", 3, "--out-dir", out) == EXIT_USAGE


def test_attack_half_cut_on_k6(tmp_path, out):
    k6 = save_graph(complete_graph(6), tmp_path / "k6.json")
    assert _run("attack", "half-cut", "--input", k6, "--t", 3, "--out-dir", out) == EXIT_OK
    report = json.loads((out / "attack.json").read_text())
    assert report["post_status"] == "none"
    assert report["max_deleted_degree_fraction"] == "4/5"


def test_attack_needs_a_graph(out):
    assert _run("attack", "second-neighborhood", "--out-dir", out) == EXIT_USAGE
    assert _run("attack", "second-neighborhood", "--n", 40, "--p", "1/4", "--out-dir", out) == EXIT_OK


def test_template_build_then_verify(out):
    assert _run("template", "build", "--t", 3, "--m", 1, "--out-dir", out) == EXIT_OK
    assert _run("template", "verify", "--input", out / "template.json", "--out-dir", out) == EXIT_OK


def test_probe_csv_columns(out):
    assert _run("gnp", "probe", "--n", 100, "--p", "1/10", "--probe", "edge-bound", "--trials", 5,
                "--format", "csv", "--out-dir", out) == EXIT_OK
    lines = (out / "probe.csv").read_text().splitlines()
    assert lines[0] == "trial,quantity,threshold,pass"
    assert len(lines) == 6


def test_replay_is_byte_identical(tmp_path):
    first, second = tmp_path / "a", tmp_path / "b"
    for out_dir in (first, second):
        assert _run("gnp", "sample", "--n", 200, "--p", "n^-1/2", "--seed", 3, "--out-dir", out_dir) == EXIT_OK
    assert (first / "gnp.json").read_bytes() == (second / "gnp.json").read_bytes()
    assert _manifest(first)["outputs"] == _manifest(second)["outputs"]


def test_manifest_records_digests_and_seed(tmp_path, out):
    path = save_graph(cycle_graph(5), tmp_path / "c5.json")
    assert _run("m2", "--input", path, "--seed", 7, "--out-dir", out) == EXIT_OK
    manifest = _manifest(out)
    assert manifest["seed"] == 7
    assert manifest["exit_code"] == 0
    assert manifest["outputs"] == {"m2.json": file_digest(out / "m2.json")}
    assert manifest["command"][0] == "m2"
    assert len(manifest["config_hash"]) == 64
