import io
import json

import pytest

from app.cli import main
from app.services.report_writer import parse_csv, render_csv, render_json

ATOM_DOC = '{"atoms": [{"freq": 0.3, "mass": 0.5}]}'
BAND_DOC = '{"density": [{"from": 0.25, "to": 0.5, "height": 1.0}]}'


def _run(argv):
    out = io.StringIO()
    code = main(argv, stream=out)
    return code, out.getvalue()


# ============================================
# 명령별 실행
# ============================================
def test_estimate_json(measure_file):
    code, text = _run(["estimate", "--measure", measure_file(ATOM_DOC), "--L", "0.5", "--trials", "2000", "--seed", "3"])
    assert code == 0
    doc = json.loads(text)
    assert doc["command"] == "estimate"
    est = doc["result"]["estimate"]
    assert est["trials"] == 2000
    assert 0.0 <= est["p_hat"] <= 1.0
    assert "grid event" in doc["result"]["note"]


def test_estimate_csv_has_header(measure_file):
    code, text = _run(
        ["estimate", "--measure", measure_file(ATOM_DOC), "--L", "0.5", "--trials", "500", "--format", "csv"]
    )
    assert code == 0
    assert "\r" not in text
    columns, rows = parse_csv(text)
    assert columns[:3] == ["L", "step", "trials"]
    assert rows[0][2] == "500"


def test_outputs_do_not_depend_on_workers(measure_file):
    path = measure_file(BAND_DOC)
    base = ["sweep", "--measure", path, "--L-values", "0,0.5,1", "--trials", "2500", "--seed", "9", "--format", "csv"]
    code1, one = _run(base + ["--workers", "1"])
    code3, three = _run(base + ["--workers", "3"])
    assert code1 == code3 == 0
    assert one == three


def test_rho_table_for_example_measure():
    code, text = _run(["rho", "--example-measure", "5", "--n", "3", "--format", "csv"])
    assert code == 0
    columns, rows = parse_csv(text)
    assert columns == ["n", "rho2", "rho", "condition", "singular"]
    assert [r[0] for r in rows] == ["0", "1", "2", "3"]


def test_sigma_table(measure_file):
    code, text = _run(["sigma", "--measure", measure_file(ATOM_DOC), "--n", "2"])
    assert code == 0
    rows = json.loads(text)["result"]["sigma"]
    assert [r["N"] for r in rows] == [0, 1, 2]
    assert rows[2]["sigma2"] == 0.0


def test_lower_bound_command():
    code, text = _run(["lower", "--C", "1", "--L", "2", "--R", "0.15915494309189535"])
    assert code == 0
    trace = json.loads(text)["result"]["lower_bound"]
    assert trace["K"] >= 1
    assert trace["tail_ok"] is True


def test_certify_infeasible_plan_is_trivial(measure_file):
    code, text = _run(["certify", "--measure", measure_file(ATOM_DOC), "--L", "10", "--delta", "0.25"])
    assert code == 0
    result = json.loads(text)["result"]
    assert result["trivial"] is True
    assert result["total_bound"] == 0.5


def test_certify_feasible_plan(measure_file):
    code, text = _run(["certify", "--measure", measure_file(ATOM_DOC), "--L", "288", "--delta", "0.25"])
    assert code == 0
    result = json.loads(text)["result"]
    assert result["trivial"] is False
    assert result["total_bound"] == 0.0
    assert result["bands"][0]["n_a"] == 72


def test_sample_svg_and_out_file(measure_file, tmp_path):
    out = tmp_path / "path.svg"
    code, text = _run(
        ["sample", "--measure", measure_file(ATOM_DOC), "--L", "3", "--step", "0.1", "--format", "svg", "--out", str(out)]
    )
    assert code == 0
    assert text == ""
    svg = out.read_text(encoding="utf-8")
    assert svg.startswith("<svg") and "<polyline" in svg


def test_report_bundles_commands():
    code, text = _run(["report", "--example-measure", "4", "--L", "1", "--C", "1", "--trials", "300", "--n", "2"])
    assert code == 0
    bundle = json.loads(text)["result"]
    assert set(bundle) >= {"measure", "estimate", "certify", "lower", "rho", "sigma"}
    assert bundle["certify"]["trivial"] is True


# ============================================
# 종료 코드
# ============================================
def test_missing_required_flag_exits_2(measure_file):
    code, _ = _run(["estimate", "--measure", measure_file(ATOM_DOC)])
    assert code == 2


def test_measure_source_must_be_unique(measure_file):
    code, _ = _run(["rho", "--measure", measure_file(ATOM_DOC), "--example-measure", "4", "--n", "2"])
    assert code == 2


def test_unsupported_format_exits_2(measure_file):
    code, _ = _run(["certify", "--measure", measure_file(ATOM_DOC), "--L", "10", "--format", "csv"])
    assert code == 2


def test_invalid_measure_exits_2(measure_file):
    code, _ = _run(["rho", "--measure", measure_file('{"atoms": [{"freq": -1, "mass": 1}]}'), "--n", "1"])
    assert code == 2
    code, _ = _run(["rho", "--measure", "/nonexistent/measure.json", "--n", "1"])
    assert code == 2


def test_gap_violation_exits_2(measure_file):
    code, _ = _run(["certify", "--measure", measure_file(ATOM_DOC), "--L", "288", "--delta", "0.3"])
    assert code == 2


def test_conditioning_gate_exits_3(measure_file):
    code, _ = _run(["rho", "--measure", measure_file(ATOM_DOC), "--n", "13"])
    assert code == 3


def test_unknown_command_is_rejected_by_parser():
    with pytest.raises(SystemExit) as exc:
        main(["plot"])
    assert exc.value.code == 2


# ============================================
# 직렬화
# ============================================
def test_json_is_sorted_and_finite():
    text = render_json({"b": float("inf"), "a": [1.5, float("nan")]})
    assert json.loads(text) == {"a": [1.5, None], "b": None}
    assert text.index('"a"') < text.index('"b"')


def test_csv_cells():
    text = render_csv(["x", "flag", "missing"], [[0.1, True, None]])
    assert text == "x,flag,missing\n0.1,true,\n"


def test_estimate_matches_arc_length(measure_file):
    code, text = _run(["estimate", "--measure", measure_file(ATOM_DOC), "--L", "1", "--trials", "20000", "--format", "csv"])
    assert code == 0
    columns, rows = parse_csv(text)
    row = dict(zip(columns, rows[0]))
    # 1/2 − λL = 0.2
    assert abs(float(row["p_hat"]) - 0.2) <= 4 * (0.2 * 0.8 / 20000) ** 0.5 + 0.002


def test_sweep_csv_has_data_rows_and_fit_row(measure_file):
    code, text = _run(
        ["sweep", "--measure", measure_file(BAND_DOC), "--L-values", "0.5,1,1.5", "--trials", "1000", "--format", "csv"]
    )
    assert code == 0
    columns, rows = parse_csv(text)
    assert columns[:6] == ["kind", "L", "p_hat", "stderr", "upper_bound", "lower_bound_log10"]
    assert [r[0] for r in rows] == ["data", "data", "data", "fit"]
    assert rows[-1][columns.index("fit_slope_L2")] != ""


def test_gap_violation_message_names_gap_radius(measure_file, caplog):
    code, _ = _run(["certify", "--measure", measure_file(ATOM_DOC), "--L", "288", "--delta", "0.5"])
    assert code == 2
    assert "gap_radius" in caplog.text
    assert "[dyadic_assembly]" in caplog.text


def test_outputs_reserialize_to_themselves(measure_file):
    path = measure_file(ATOM_DOC)
    code, csv_text = _run(["rho", "--measure", path, "--n", "2", "--format", "csv"])
    assert code == 0
    assert render_csv(*parse_csv(csv_text)) == csv_text
    code, json_text = _run(["rho", "--measure", path, "--n", "2"])
    assert code == 0
    assert render_json(json.loads(json_text)) == json_text


def test_certify_with_oversized_cpp_falls_back_to_trivial(measure_file):
    code, text = _run(
        ["certify", "--measure", measure_file(ATOM_DOC), "--L", "1", "--delta", "0.25", "--cpp", "144"]
    )
    assert code == 0
    result = json.loads(text)["result"]
    assert result["trivial"] is True
    assert result["total_bound"] == 0.5
    assert result["plan"]["conditions"]["cond1_ok"] is False
    assert any("cond1" in d for d in result["diagnostics"])


def test_report_sigma_table_uses_its_own_degree_cap(monkeypatch):
    monkeypatch.setenv("PERSIST_SIGMA_MAX_DEGREE", "1")
    monkeypatch.setenv("PERSIST_LAGRANGE_MAX_DEGREE", "0")
    code, text = _run(["report", "--example-measure", "4", "--L", "1", "--trials", "300", "--n", "3"])
    assert code == 0
    bundle = json.loads(text)["result"]
    assert max(row["N"] for row in bundle["sigma"]) == 1
    assert max(row["n"] for row in bundle["rho"]) == 3
