import csv
import io
import json

import pytest

from relfreq.cli import main


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


def rows_of(text):
    return list(csv.DictReader(io.StringIO(text)))


@pytest.fixture()
def grid_doc(tmp_path, capsys):
    path = str(tmp_path / "grid.json")
    code, _ = run_cli(capsys, "gen-grid", "3", "3", "1e-3", "1.0", path)
    assert code == 0
    return path


@pytest.fixture()
def cycle_doc(tmp_path, capsys):
    path = str(tmp_path / "cycle.json")
    code, _ = run_cli(capsys, "gen-grid", "2", "2", "1e-2", "1.0", path)
    assert code == 0
    return path


@pytest.fixture()
def edge_doc(tmp_path):
    path = tmp_path / "edge.json"
    path.write_text(json.dumps({
        "version": 1,
        "nodes": [1, 2],
        "terminals": [1, 2],
        "edges": [{"u": 1, "v": 2, "p": 0.1, "mu": 9.0}],
    }))
    return str(path)


def test_gen_grid_round_trips(grid_doc):
    from relfreq import grid_system, load_system

    assert load_system(grid_doc) == grid_system(3, 3, 1e-3, 1.0)


def test_gen_grid_rejects_single_row(tmp_path, capsys):
    code, _ = run_cli(capsys, "gen-grid", "1", "3", "0.1", "1.0", str(tmp_path / "x.json"))
    assert code == 2


def test_estimate_exact(edge_doc, capsys):
    code, out = run_cli(capsys, "estimate", edge_doc, "--method", "exact")
    assert code == 0
    rows = rows_of(out)
    assert [r["quantity"] for r in rows] == ["pf", "ff"]
    assert float(rows[0]["value"]) == pytest.approx(0.1)
    assert float(rows[1]["value"]) == pytest.approx(0.9)


def test_estimate_bounds_pinned(grid_doc, capsys):
    code, out = run_cli(capsys, "estimate", grid_doc, "--method", "bounds", "--digits", "6")
    assert code == 0
    ff = rows_of(out)[1]
    assert ff["quantity"] == "ff"
    assert float(ff["lower"]) == pytest.approx(8.04785e-6, rel=1e-5)
    assert float(ff["upper"]) == pytest.approx(8.04807e-6, rel=1e-5)
    assert ff["matched_decimals"] == "8"
    assert float(ff["value"]) == pytest.approx(8.04e-6)  # truncated estimate


def test_estimate_estimator_needs_epsilon(grid_doc, capsys):
    code, _ = run_cli(capsys, "estimate", grid_doc, "--method", "exhaustive")
    assert code == 2


def test_estimate_missing_file(capsys):
    code, _ = run_cli(capsys, "estimate", "no-such.json", "--method", "exact")
    assert code == 2


def test_estimate_plan_invalid(tmp_path, capsys):
    path = str(tmp_path / "risky.json")
    run_cli(capsys, "gen-grid", "2", "2", "0.9", "1.0", path)
    with pytest.warns(UserWarning):
        code, _ = run_cli(capsys, "estimate", path, "--method", "exhaustive",
                          "--epsilon", "0.5")
    assert code == 3


def test_estimate_cap_exceeded(tmp_path, capsys):
    path = str(tmp_path / "big.json")
    run_cli(capsys, "gen-grid", "4", "5", "1e-3", "1.0", path)
    code, _ = run_cli(capsys, "estimate", path, "--method", "bounds")
    assert code == 4


def test_estimate_rejects_epsilon_conflict(grid_doc, capsys):
    with pytest.raises(SystemExit) as exc:
        main(["estimate", grid_doc, "--method", "exhaustive",
              "--epsilon", "0.5", "--epsilon-auto"])
    assert exc.value.code == 2
    capsys.readouterr()


def test_estimate_csv_deterministic(cycle_doc, tmp_path, capsys):
    args = ("estimate", cycle_doc, "--method", "exhaustive", "--epsilon", "0.5",
            "--seed", "7", "--no-runtime")
    _, first = run_cli(capsys, *args)
    _, second = run_cli(capsys, *args)
    assert first == second
    assert rows_of(first)[0]["runtime_seconds"] == ""


def test_estimate_json_format(cycle_doc, capsys):
    code, out = run_cli(capsys, "estimate", cycle_doc, "--method", "exact",
                        "--format", "json")
    assert code == 0
    rows = json.loads(out)
    assert rows[0]["method"] == "exact"
    assert isinstance(rows[0]["value"], float)


def test_estimate_seed_increments_per_system(cycle_doc, edge_doc, capsys):
    code, out = run_cli(capsys, "estimate", cycle_doc, edge_doc,
                        "--method", "mcs", "--trials", "1000", "--batches", "2",
                        "--seed", "9")
    assert code == 0
    rows = rows_of(out)
    assert [r["seed"] for r in rows] == ["9", "9", "10", "10"]


def test_estimate_jobs_matches_serial(cycle_doc, edge_doc, capsys):
    args = ("estimate", cycle_doc, edge_doc, "--method", "exact", "--no-runtime")
    _, serial = run_cli(capsys, *args)
    _, fanned = run_cli(capsys, *args, "--jobs", "2")
    assert serial == fanned


def test_estimate_all_terminal_aux_columns(grid_doc, capsys):
    code, out = run_cli(capsys, "estimate", grid_doc, "--method", "all-terminal",
                        "--epsilon", "0.9", "--seed", "2")
    assert code == 0
    row = rows_of(out)[1]
    assert float(row["min_cut_prob"]) == pytest.approx(1e-6)
    assert float(row["ratio"]) > 1.0
    assert int(row["near_min_count"]) >= 4


def test_report_merges_methods(grid_doc, tmp_path, capsys):
    b = str(tmp_path / "b.csv")
    e = str(tmp_path / "e.csv")
    x = str(tmp_path / "x.csv")
    run_cli(capsys, "estimate", grid_doc, "--method", "bounds", "--out", b)
    run_cli(capsys, "estimate", grid_doc, "--method", "exact", "--out", e)
    run_cli(capsys, "estimate", grid_doc, "--method", "exhaustive",
            "--epsilon", "0.23", "--seed", "3", "--out", x)
    code, out = run_cli(capsys, "report", b, e, x)
    assert code == 0
    rows = rows_of(out)
    assert [r["quantity"] for r in rows] == ["pf", "ff"]
    ff = rows[1]
    assert float(ff["lower"]) <= float(ff["exact_value"]) <= float(ff["upper"])
    # observed error factor vs the bounds stays under the theoretical 0.23
    assert float(ff["exhaustive_actual_error"]) < 0.23
    assert float(ff["exhaustive_epsilon"]) == 0.23


def test_report_renders_no_failure_as_dashes(grid_doc, tmp_path, capsys):
    b = str(tmp_path / "b.csv")
    m = str(tmp_path / "m.csv")
    run_cli(capsys, "estimate", grid_doc, "--method", "bounds", "--out", b)
    run_cli(capsys, "estimate", grid_doc, "--method", "mcs",
            "--trials", "200", "--batches", "2", "--seed", "1", "--out", m)
    code, out = run_cli(capsys, "report", b, m)
    assert code == 0
    for row in rows_of(out):
        assert row["mcs_actual_error"] == "--"
        assert row["mcs_value"] == "0"


def test_report_header_only_input(tmp_path, capsys):
    empty = tmp_path / "empty.csv"
    empty.write_text(
        "system,method,quantity,value,lower,upper,matched_decimals,epsilon,"
        "delta,seed,samples,runtime_seconds,min_cut_prob,ratio,near_min_count,"
        "no_failure\n"
    )
    code, out = run_cli(capsys, "report", str(empty))
    assert code == 0
    assert len(out.strip().split("\n")) == 1


def test_report_last_row_wins(grid_doc, tmp_path, capsys):
    e = str(tmp_path / "e.csv")
    run_cli(capsys, "estimate", grid_doc, "--method", "exact", "--out", e)
    code, out = run_cli(capsys, "report", e, e)
    assert code == 0
    assert len(rows_of(out)) == 2
