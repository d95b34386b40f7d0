import csv
import json

from constants import EXIT_CONFIG_ERROR, EXIT_FAIL, EXIT_PASS, VERSION
from main import parse_coeffs, parse_generator, run
from managers.sweep_manager import COLUMNS
from models.verify_report import FAIL, CaseResult, VerifyReport


def run_json(capsys, command):
    code = run(command.split())
    return code, json.loads(capsys.readouterr().out)


def test_polygon_arith_dk(capsys):
    code, document = run_json(
        capsys, "polygon arith-dk --p 11 --q 11 --d 2 --k 1 --u 1 --points 3"
    )
    assert code == EXIT_PASS
    assert document["result"]["slopes"] == ["1", "5", "11"]
    assert "wallTime" not in document


def test_polygon_arith_delta(capsys):
    code, document = run_json(
        capsys, "polygon arith-delta --p 7 --d 3 --u 2 --points 4"
    )
    assert code == EXIT_PASS
    assert document["result"]["slopes"] == ["1", "3", "4", "7"]


def test_polygon_hodge_to_file(tmp_path):
    out = tmp_path / "hodge.json"
    table = tmp_path / "hodge.csv"
    command = "polygon hodge --p 7 --d 3 --u 2 --points 3 --timing".split()
    code = run(command + ["--output", str(out), "--csv", str(table)])
    assert code == EXIT_PASS
    document = json.loads(out.read_text())
    assert document["result"]["slopes"] == ["1/9", "4/9", "7/9"]
    assert isinstance(document["wallTime"], str)
    rows = list(csv.reader(table.open()))
    assert rows[0] == ["m", "value", "slope"]
    assert rows[-1] == ["3", "4/3", ""]


def test_usage_error_is_config_error():
    assert run("polygon arith-dk --p 11".split()) == EXIT_CONFIG_ERROR
    assert run(["no-such-command"]) == EXIT_CONFIG_ERROR


def test_invalid_field_is_config_error():
    missing_k = "polygon arith-dk --p 11 --d 2 --points 3"
    assert run(missing_k.split()) == EXIT_CONFIG_ERROR
    bad_q = "polygon hodge --p 7 --q 50 --d 3 --points 2"
    assert run(bad_q.split()) == EXIT_CONFIG_ERROR


def test_job_file_overrides_flags(tmp_path, capsys):
    job = tmp_path / "job.json"
    job.write_text(json.dumps({"u": 1, "k": 1}))
    code, document = run_json(
        capsys, f"polygon arith-dk --p 11 --d 2 --u 5 --points 3 --config {job}"
    )
    assert code == EXIT_PASS
    assert document["result"]["slopes"] == ["1", "5", "11"]


def test_lfun_command(capsys):
    code, document = run_json(
        capsys, "lfun --p 11 --d 2 --k 1 --u 1 --coeffs a1=1,ad=1 --K 10"
    )
    assert code == EXIT_PASS
    assert document["result"]["degree"] == 2
    assert document["result"]["newton"]["points"][0] == [0, "0"]


def test_verify_command(tmp_path):
    out = tmp_path / "report.json"
    command = (
        "verify --suite dk-vs-delta --p 11 --d 2 --q-exponents 1 --u 1,9 --M 8 "
        f"--workers 1 --output {out}"
    )
    assert run(command.split()) == EXIT_PASS
    report = json.loads(out.read_text())
    assert report["totals"]["pass"] == report["totals"]["total"] == 9


def test_sweep_empty_grid_writes_header(tmp_path):
    out = tmp_path / "sweep.csv"
    assert run(["sweep", "--p", "", "--workers", "1", "--out", str(out)]) == EXIT_PASS
    assert out.read_text() == ",".join(COLUMNS) + "\n"


def test_sweep_single_row(tmp_path):
    out = tmp_path / "sweep.csv"
    command = (
        "sweep --p 11 --d 2 --k 1 --u 1,1 --samples 1 --M 2 --K 10 "
        f"--workers 1 --out {out}"
    )
    assert run(command.split()) == EXIT_PASS
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == 1
    assert rows[0]["arith_dk"] == "0;1;6"
    assert rows[0]["extent"] == "2"
    assert len(rows[0]["gap_dk"].split(";")) == 3
    assert rows[0]["l_newton"].startswith("0;")


def test_save_settings(tmp_path):
    out = tmp_path / "out.json"
    command = "polygon hodge --p 7 --d 3 --points 1 --K 33 --save-settings"
    command += f" --output {out}"
    assert run(command.split()) == EXIT_PASS
    assert "K=33" in (tmp_path / "TadicPolygons.ini").read_text()


def test_parse_coeffs():
    assert parse_coeffs("a1=3,ad=1+t") == {"a1": 3, "ad": "1+t"}
    assert parse_coeffs('{"ad": 2}') == {"ad": 2}
    assert parse_coeffs(None) is None


def test_lfun_generator_round_trips(tmp_path, capsys):
    job = tmp_path / "job.json"
    job.write_text(json.dumps({"generator": 7}))
    command = "lfun --p 11 --d 2 --k 1 --u 1 --coeffs a1=1,ad=1 --K 10"
    code, document = run_json(capsys, f"{command} --config {job}")
    assert code == EXIT_PASS
    field = document["result"]["field"]
    assert field == {"p": 11, "n": 1, "modulus": [0, 1], "generator": "7"}

    modulus = ",".join(str(c) for c in field["modulus"])
    again = f"{command} --modulus {modulus} --generator {field['generator']}"
    code, rerun = run_json(capsys, again)
    assert code == EXIT_PASS
    assert rerun["result"] == document["result"]


def test_non_primitive_generator_is_config_error():
    command = "lfun --p 11 --d 2 --k 1 --u 1 --coeffs a1=1,ad=1 --generator 3"
    assert run(command.split()) == EXIT_CONFIG_ERROR


def test_replay_single_row(tmp_path):
    case = {"p": 11, "b": 1, "d": 2, "k": 1, "u": 1, "m": 1}
    case.update(R=[[[0, 1]]], tau=[[[1, 1]]])
    failing = CaseResult(3, FAIL, case, {})
    report = tmp_path / "report.json"
    report.write_text(VerifyReport("key-estimate", VERSION, {}, [failing]).dumps())
    out = tmp_path / "row.json"
    command = f"verify --replay {report} --row 3 --output {out}"
    assert run(command.split()) == EXIT_FAIL
    replayed = json.loads(out.read_text())
    assert replayed["cases"][0]["index"] == 3
    assert replayed["cases"][0]["status"] == FAIL
    assert replayed["cases"][0]["config"] == case
    assert run(["verify", "--row", "3"]) == EXIT_CONFIG_ERROR


def test_parse_generator():
    assert parse_generator(" 7 ") == 7
    assert parse_generator("1+t") == "1+t"
    assert parse_generator(None) is None
