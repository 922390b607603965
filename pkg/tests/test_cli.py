from __future__ import annotations

import shutil

from conftest import CHARTS, CORE, STEM123
from sseqkit.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_validate_core(capsys):
    code, out, err = run(capsys, "validate", "--data-dir", str(CORE))
    assert code == 0
    assert "0 findings" in out


def test_validate_empty_dir(tmp_path, capsys):
    code, out, err = run(capsys, "validate", "--data-dir", str(tmp_path))
    assert code == 0
    assert "nothing found" in out


def test_validate_corrupted_level(tmp_path, capsys):
    for p in STEM123.iterdir():
        shutil.copy(p, tmp_path / p.name)
    ss = tmp_path / "S0_AdamsE2_ss.csv"
    ss.write_text(ss.read_text().replace('123,11,"2,3,4",0,9993',
                                         '123,11,"2,3,4",0,6500'))
    code, out, err = run(capsys, "validate", "--data-dir", str(tmp_path))
    assert code == 1
    assert out.count("FINDING") == 1


def test_query_c2(capsys):
    code, out, err = run(capsys, "query", "C2", "2", "1",
                         "--data-dir", str(CORE))
    assert code == 0
    assert "(h_1[1])" in out


def test_query_with_index_vec(capsys):
    code, out, err = run(capsys, "query", "S0", "14", "3", "0",
                         "--data-dir", str(CORE))
    assert code == 0
    assert "h_0h_3^2" in out
    code, out, err = run(capsys, "query", "S0", "14", "3", "7",
                         "--data-dir", str(CORE))
    assert code == 1 and "NotFound" in err


def test_query_unknown_spectrum(capsys):
    code, out, err = run(capsys, "query", "Nope", "0", "0",
                         "--data-dir", str(CORE))
    assert code == 1
    assert "NotFound" in err


def test_chart_text_stdout(capsys):
    code, out, err = run(capsys, "chart", "S0", "--stem", "123",
                         "--s-range", "8:11", "--data-dir", str(STEM123))
    assert code == 0
    assert "d_{12} | ?" in out


def test_chart_csv_with_figure(tmp_path, capsys):
    out_file = tmp_path / "chart.csv"
    code, out, err = run(capsys, "chart", "S0", "--stem", "122:127",
                         "--format", "csv", "--out", str(out_file),
                         "--data-dir", str(CHARTS))
    assert code == 0
    assert out_file.exists()
    assert out_file.with_suffix(".svg").exists()
    header = out_file.read_text().splitlines()[0]
    assert header == "stem,s,element,d,value"


def test_chart_byte_stable_across_runs(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for path in (a, b):
        code, _, _ = run(capsys, "chart", "S0", "--stem", "122:127",
                         "--format", "csv", "--out", str(path), "--no-figure",
                         "--data-dir", str(CHARTS))
        assert code == 0
    assert a.read_bytes() == b.read_bytes()


def test_chart_missing_spectrum(capsys):
    code, out, err = run(capsys, "chart", "Nope", "--stem", "1",
                         "--data-dir", str(CORE))
    assert code == 1 and "NotFound" in err


def test_deduce_inconclusive(capsys):
    code, out, err = run(capsys, "deduce", "CW_nu_sigma", "112", "12", "0", "4",
                         "--data-dir", str(CORE))
    assert code == 3
    assert "inconclusive" in out


def test_check_proofs(capsys, tmp_path):
    report = tmp_path / "report.csv"
    code, out, err = run(capsys, "check-proofs",
                         str(CORE / "proofs-part1.csv"),
                         "--data-dir", str(CORE),
                         "--report-csv", str(report))
    assert code == 0
    assert "blocks: 4" in out
    assert report.exists()
    assert "reason:T,10" in report.read_text()


def test_config_file(tmp_path, capsys):
    cfg = tmp_path / "cfg.toml"
    cfg.write_text(f'[sseqkit]\ndata_dir = "{CORE}"\n')
    code, out, err = run(capsys, "query", "C2", "2", "1", "--config", str(cfg))
    assert code == 0 and "(h_1[1])" in out


def test_env_var_data_dir(monkeypatch, capsys):
    monkeypatch.setenv("SSEQKIT_DATA_DIR", str(CORE))
    code, out, err = run(capsys, "query", "C2", "2", "1")
    assert code == 0 and "(h_1[1])" in out


def test_error_paths_carry_file_context(tmp_path, capsys):
    bad = tmp_path / "S0_AdamsE2_generators.csv"
    bad.write_text("id,name,stem,s\n0,a,0,zero\n")
    for other in ("relations", "basis"):
        (tmp_path / f"S0_AdamsE2_{other}.csv").write_text(
            {"relations": "rel,stem,s\n", "basis": "index,mon,stem,s,d2\n"}[other])
    code, out, err = run(capsys, "validate", "--data-dir", str(tmp_path))
    assert code == 1
    assert "S0_AdamsE2_generators.csv:2" in err
