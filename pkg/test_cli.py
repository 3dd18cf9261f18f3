# test_cli.py

import io

import pandas as pd
import pytest
from click.testing import CliRunner

from orchestrator.cli import cli

TINY_TOML = """\
[network]
segments = 3
segment_length = 200.0

[demand]
arrival_rate = 0.1
horizon = 240.0

[comms]
beacon_interval = 1.0

[classifier]
spurious_rate = 0.0

[method]
name = "VP"

[[events]]
kind = "Incident"
segment = 2
position = "beginning"
start = 30.0
duration = 150.0
"""

M1_M2 = "# m1\nWe:0.4\nWe,Re:0.3\nOMEGA:0.3\n\n# m2\nWe:0.62\nWe,Re:0.3\nOMEGA:0.08\n"


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def tiny_toml(tmp_path):
    path = tmp_path / "tiny.toml"
    path.write_text(TINY_TOML, encoding="utf-8")
    return path


def frames(output: str):
    """Split the combine output into its mass and BetP tables."""
    blocks, current = [], []
    for line in output.splitlines():
        if line.startswith(("subset,", "cause,")) and current:
            blocks.append(current)
            current = []
        current.append(line)
    blocks.append(current)
    return [pd.read_csv(io.StringIO("\n".join(b))) for b in blocks]


# --- combine ---

def test_combine_prints_folded_mass(runner, tmp_path):
    print("\n" + "=" * 80)
    print("Testing CLI: combine")
    print("=" * 80)
    path = tmp_path / "masses.txt"
    path.write_text(M1_M2, encoding="utf-8")
    result = runner.invoke(cli, ["combine", "--masses", str(path)])
    print(result.output)
    assert result.exit_code == 0, result.output
    (table,) = frames(result.output)
    masses = dict(zip(table["subset"], table["mass"]))
    assert masses["We"] == pytest.approx(0.772)
    assert masses["We,Re"] == pytest.approx(0.204)
    assert masses["OMEGA"] == pytest.approx(0.024)

    result = runner.invoke(cli, ["combine", "--masses", str(path), "--betp"])
    assert result.exit_code == 0, result.output
    _, betp = frames(result.output)
    assert betp["cause"].tolist() == ["I", "Wo", "We", "SE", "Re"]
    assert betp["betp"].sum() == pytest.approx(1.0)
    assert betp.set_index("cause")["betp"].idxmax() == "We"


def test_combine_appends_belief_and_plausibility(runner, tmp_path):
    path = tmp_path / "masses.txt"
    path.write_text(M1_M2, encoding="utf-8")
    result = runner.invoke(cli, ["combine", "--masses", str(path), "--betp", "--support"])
    assert result.exit_code == 0, result.output
    _, _, support = frames(result.output)
    rows = support.set_index("subset")
    assert rows.loc["We", "bel"] == pytest.approx(0.772)
    assert rows.loc["We", "pl"] == pytest.approx(1.0)
    assert rows.loc["We,Re", "bel"] == pytest.approx(0.976)
    assert rows.loc["OMEGA", "bel"] == pytest.approx(1.0)
    assert (rows["bel"] <= rows["pl"] + 1e-12).all()


def test_combine_exit_codes(runner, tmp_path):
    conflict = tmp_path / "conflict.txt"
    conflict.write_text("I:1.0\n\nWe:1.0\n", encoding="utf-8")
    result = runner.invoke(cli, ["combine", "--masses", str(conflict), "--rule", "dempster"])
    assert result.exit_code == 1
    assert "K=1" in result.output

    short = tmp_path / "short.txt"
    short.write_text("We:0.5\nRe:0.4\n", encoding="utf-8")
    result = runner.invoke(cli, ["combine", "--masses", str(short)])
    assert result.exit_code == 2
    assert "mass 1 is not a valid mass function" in result.output

    garbled = tmp_path / "garbled.txt"
    garbled.write_text("Fog:1.0\n", encoding="utf-8")
    assert runner.invoke(cli, ["combine", "--masses", str(garbled)]).exit_code == 2


# --- mine ---

def test_mine(runner, tmp_path):
    data = tmp_path / "transactions.txt"
    data.write_text("I,SE\nWo,SE\nWe,Re\nRe,We\n", encoding="utf-8")
    result = runner.invoke(cli, ["mine", "--dataset", str(data), "--minsup", "1.0"])
    assert result.exit_code == 0, result.output
    assert result.output.splitlines() == ["antecedent,consequent,support,confidence"]

    result = runner.invoke(cli, ["mine", "--dataset", str(data), "--supervised"])
    assert result.exit_code == 2
    assert "unlabeled" in result.output

    labeled = tmp_path / "labeled.txt"
    labeled.write_text("Re,We|We\n" * 6 + "We,Re|We\n" * 4, encoding="utf-8")
    out = tmp_path / "rules"
    result = runner.invoke(cli, ["mine", "--dataset", str(labeled), "--supervised", "--out", str(out)])
    assert result.exit_code == 0, result.output
    assert '"We,Re",We' in result.output
    assert (out / "rulebook.csv").read_text(encoding="utf-8") == result.output


# --- flag validation ---

@pytest.mark.parametrize("args", [
    ["run", "--scenario", "incident_1.1", "--method", "XY"],
    ["sweep", "--scenario", "incident_1.1", "--rates", "0.5,1.2"],
    ["compare", "--scenario", "incident_1.1", "--seeds", "0"],
    ["run", "--scenario", "no_such_scenario"],
])
def test_bad_flags_exit_with_usage_code(runner, args, tmp_path):
    result = runner.invoke(cli, args + ["--out", str(tmp_path)])
    assert result.exit_code == 2, result.output


def test_unknown_method_is_named(runner, tmp_path):
    result = runner.invoke(cli, ["run", "--scenario", "incident_1.1", "--method", "XY", "--out", str(tmp_path)])
    assert "unknown method 'XY'" in result.output


# --- run / report ---

def test_run_is_reproducible_and_report_recomputes(runner, tiny_toml, tmp_path):
    print("\n" + "=" * 80)
    print("Testing CLI: run and report")
    print("=" * 80)
    first, second, recomputed = tmp_path / "a", tmp_path / "b", tmp_path / "c"
    for out in (first, second):
        result = runner.invoke(cli, ["run", "--scenario", str(tiny_toml), "--seed", "2", "--out", str(out)])
        assert result.exit_code == 0, result.output
    print(result.output)
    for name in ("events.csv", "metrics.csv", "accuracy.csv"):
        assert (first / name).read_bytes() == (second / name).read_bytes()

    result = runner.invoke(cli, [
        "report", "--log", str(first / "events.csv"), "--scenario", str(tiny_toml), "--out", str(recomputed),
    ])
    assert result.exit_code == 0, result.output
    original = pd.read_csv(first / "metrics.csv")
    again = pd.read_csv(recomputed / "metrics.csv")
    pd.testing.assert_frame_equal(original, again)


# --- compare / sweep ---

def test_batteries_do_not_depend_on_worker_count(runner, tiny_toml, tmp_path):
    serial, parallel = tmp_path / "serial", tmp_path / "parallel"
    for out, workers in ((serial, "1"), (parallel, "2")):
        result = runner.invoke(cli, [
            "compare", "--scenario", str(tiny_toml), "--methods", "BP,VP", "--seeds", "2",
            "--workers", workers, "--out", str(out),
        ])
        assert result.exit_code == 0, result.output
        result = runner.invoke(cli, [
            "sweep", "--scenario", str(tiny_toml), "--method", "VP", "--rates", "0.5,1.0", "--seeds", "2",
            "--workers", workers, "--out", str(out),
        ])
        assert result.exit_code == 0, result.output
    for name in ("summary.csv", "accuracy.csv", "sweep.csv", "sweep_summary.csv"):
        assert (serial / name).read_bytes() == (parallel / name).read_bytes()
    sweep = pd.read_csv(serial / "sweep.csv")
    assert list(zip(sweep["rate"], sweep["seed"])) == [(0.5, 0), (0.5, 1), (1.0, 0), (1.0, 1)]
