"""Command-line behavior: parsing, exit codes, and output formats."""

import csv
import io
import json

import pytest

from stabcover.cli import (
    EXIT_CHECK_FAILED,
    EXIT_INDETERMINATE,
    EXIT_OK,
    EXIT_PRECONDITION,
    WORKERS_ENV,
    main,
    parse_set_literal,
)
from stabcover.errors import DomainError
from stabcover.groups import make_group


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_parse_set_literal():
    C5 = make_group([5])
    assert parse_set_literal(C5, "1,4") == [1, 4]
    assert parse_set_literal(C5, "(1,),(4,)") == [1, 4]
    G = make_group([2, 4])
    assert parse_set_literal(G, "(1,0),(0,3)") == [4, 3]
    with pytest.raises(DomainError):
        parse_set_literal(G, "1,2")  # bare integers need a cyclic group
    with pytest.raises(DomainError):
        parse_set_literal(C5, "(1,2)")  # wrong arity
    with pytest.raises(DomainError):
        parse_set_literal(C5, "nonsense(")


def test_classify_stable(capsys):
    code, out, _ = run_cli(capsys, "classify", "C5", "1,4")
    assert code == EXIT_OK
    rec = json.loads(out)
    assert rec["stable"] is True and rec["in_s2"] is True


def test_classify_trivially_unstable_csv(capsys):
    code, out, _ = run_cli(capsys, "classify", "C4", "1,3", "--format", "csv")
    assert code == EXIT_OK
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0][0] == "group"
    rec = dict(zip(rows[0], rows[1]))
    assert rec["stable"] == "false"
    assert "bipartite" in rec["reasons"]


def test_classify_rejects_asymmetric_set(capsys):
    code, _, err = run_cli(capsys, "classify", "C5", "1")
    assert code == EXIT_PRECONDITION
    assert "inverse-closed" in err


def test_classify_symmetrize(capsys):
    code, out, _ = run_cli(capsys, "classify", "C5", "1", "--symmetrize")
    assert code == EXIT_OK
    assert json.loads(out)["set"] == "0x12"


def test_classify_strict_indeterminate(capsys):
    code, out, _ = run_cli(
        capsys, "classify", "C5", "1,2,3,4", "--enum-cap", "10", "--strict"
    )
    assert code == EXIT_INDETERMINATE
    assert json.loads(out)["in_s3"] == "indeterminate"
    code, _, _ = run_cli(capsys, "classify", "C5", "1,2,3,4", "--enum-cap", "10")
    assert code == EXIT_OK


def test_census_exhaustive(capsys):
    code, out, _ = run_cli(capsys, "census", "C7")
    assert code == EXIT_OK
    rep = json.loads(out)
    assert rep["total"] == 16 and rep["counts"]["stable"] == 13


def test_census_monte_carlo_requires_seed(capsys):
    code, _, err = run_cli(capsys, "census", "C7", "--samples", "10")
    assert code == EXIT_PRECONDITION
    assert "seed" in err


def test_census_monte_carlo(capsys):
    code, out, _ = run_cli(capsys, "census", "C7", "--samples", "16", "--seed", "7")
    assert code == EXIT_OK
    rep = json.loads(out)
    assert rep["mode"] == "monte-carlo" and rep["examined"] == 16


def test_census_unlabeled_jsonl(capsys):
    code, out, _ = run_cli(capsys, "census", "C5", "--unlabeled", "--format", "jsonl")
    assert code == EXIT_OK
    lines = [json.loads(line) for line in out.splitlines()]
    assert lines[0]["mode"] == "exhaustive"
    assert lines[1]["unlabeled_count"] == 6


def test_census_records_file(tmp_path, capsys):
    path = tmp_path / "records.jsonl"
    code, _, _ = run_cli(capsys, "census", "C5", "--records", str(path))
    assert code == EXIT_OK
    recs = [json.loads(line) for line in path.read_text().splitlines()]
    assert len(recs) == 8
    assert sum(r["stable"] for r in recs) == 5


def test_census_out_file(tmp_path, capsys):
    path = tmp_path / "report.json"
    code, _, _ = run_cli(capsys, "census", "C5", "--out", str(path))
    assert code == EXIT_OK
    assert json.loads(path.read_text())["total"] == 8


def test_workers_env_default(capsys, monkeypatch):
    monkeypatch.setenv(WORKERS_ENV, "2")
    code, out, _ = run_cli(capsys, "census", "C5")
    assert code == EXIT_OK
    assert json.loads(out)["counts"]["stable"] == 5
    monkeypatch.setenv(WORKERS_ENV, "zero")
    code, _, err = run_cli(capsys, "census", "C5")
    assert code == EXIT_PRECONDITION


def test_bounds_single_point(capsys):
    code, out, _ = run_cli(capsys, "bounds", "--r", "50000", "--delta", "0.001")
    assert code == EXIT_OK
    rows = list(csv.reader(io.StringIO(out)))
    rec = dict(zip(rows[0], rows[1]))
    assert float(rec["h_first_term"]) < float(rec["h_second_term"])
    assert rec["component_sum_le_h"] == "true"


def test_bounds_grid(capsys):
    code, out, _ = run_cli(capsys, "bounds", "--grid")
    assert code == EXIT_OK
    rows = list(csv.reader(io.StringIO(out)))
    assert len(rows) == 1 + 21 * 4
    col = rows[0].index("component_sum_le_h")
    assert all(row[col] == "true" for row in rows[1:])


def test_bounds_domain_error(capsys):
    code, _, err = run_cli(capsys, "bounds", "--r", "100", "--delta", "0.7")
    assert code == EXIT_PRECONDITION
    code, _, err = run_cli(capsys, "bounds")
    assert code == EXIT_PRECONDITION


def test_check_lemmas_small(capsys):
    # order four exercises the exponent-two degenerate paths
    code, out, _ = run_cli(capsys, "check-lemmas", "--order-limit", "4")
    assert code == EXIT_OK
    assert "FAIL" not in out
    assert "inverse-closed-count: pass" in out


def test_bad_group_spec(capsys):
    code, _, err = run_cli(capsys, "classify", "Q8", "1,2")
    assert code == EXIT_PRECONDITION
