import csv
import json
import math

import pytest

from entropic.cli import build_parser, main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def printed(out, label):
    for line in out.splitlines():
        if line.startswith(label + ":"):
            return line.split(":", 1)[1].strip()
    raise AssertionError(f"{label!r} missing from output:\n{out}")


class TestEntropy:
    def test_fair_coin(self, capsys):
        code, out, _ = run(capsys, "entropy", "--probs", "0.5,0.5")
        assert code == 0 and out.strip() == "1.0"

    def test_certain_renyi(self, capsys):
        code, out, _ = run(capsys, "entropy", "--probs", "1.0", "--alpha", "2")
        assert code == 0 and out.strip() == "0.0"

    def test_nats(self, capsys):
        _, out, _ = run(capsys, "entropy", "--probs", "0.5,0.5", "--base", "e")
        assert float(out) == pytest.approx(math.log(2), abs=1e-15)

    @pytest.mark.parametrize(
        "argv",
        [
            ["--probs", "0.5,0.5", "--alpha", "1"],
            ["--probs", "0.5,0.6"],
            ["--probs", "1.5,-0.5"],
            ["--probs", "a,b"],
        ],
    )
    def test_rejects(self, capsys, argv):
        code, _, err = run(capsys, "entropy", *argv)
        assert code == 2 and "error" in err


class TestGenerate:
    def test_default300(self, capsys, tmp_path):
        out = tmp_path / "d.csv"
        assert run(capsys, "generate", "--default300", "--out", str(out))[0] == 0
        rows = read_rows(out)
        assert len(rows) == 300 and {len(r) for r in rows} == {4}
        assert sorted({r[3] for r in rows}) == ["0", "1", "2"]

    def test_noise_columns(self, capsys, tmp_path):
        out = tmp_path / "d.csv"
        run(capsys, "generate", "--default300", "--noise-dims", "4", "--out", str(out))
        rows = read_rows(out)
        assert {len(r) for r in rows} == {8}
        noise = [float(v) for r in rows for v in r[3:7]]
        assert min(noise) >= -1.0 and max(noise) <= 1.0

    def test_spec_zero_stddev(self, capsys, tmp_path):
        spec = tmp_path / "s.json"
        spec.write_text(json.dumps({"clusters": [{"center": [1.5, -2.0], "stddev": 0.0, "count": 5}], "seed": 3}))
        out = tmp_path / "d.csv"
        assert run(capsys, "generate", "--spec", str(spec), "--out", str(out))[0] == 0
        rows = read_rows(out)
        assert len(rows) == 5 and len({tuple(r[:2]) for r in rows}) == 1

    def test_bad_spec(self, capsys, tmp_path):
        spec = tmp_path / "s.json"
        spec.write_text(json.dumps({"clusters": []}))
        code, _, _ = run(capsys, "generate", "--spec", str(spec), "--out", str(tmp_path / "d.csv"))
        assert code == 2


class TestLearn:
    def test_identity_converges(self, capsys, tmp_path):
        out = tmp_path / "t.csv"
        code, stdout, _ = run(
            capsys, "learn", "--inputs", "3", "--outputs", "3", "--targets", "identity",
            "--rho", "0.5", "--iters", "2000", "--out", str(out),
        )
        assert code == 0
        assert float(printed(stdout, "final normalized entropy")) < 0.01
        header = read_rows(out)[0]
        assert header[:4] == ["t", "loss", "distance", "entropy_shannon"]

    def test_zero_iterations(self, capsys, tmp_path):
        out = tmp_path / "t.csv"
        code, stdout, _ = run(capsys, "learn", "--inputs", "2", "--outputs", "4", "--iters", "0", "--out", str(out))
        assert code == 0
        assert len(read_rows(out)) == 2  # header plus the initial record
        assert printed(stdout, "iterations") == "0"

    @pytest.mark.parametrize(
        "argv",
        [
            ["--inputs", "2", "--outputs", "3", "--targets", "0,5"],
            ["--inputs", "3", "--outputs", "3", "--targets", "0,1"],
            ["--inputs", "4", "--outputs", "3"],
            ["--inputs", "0", "--outputs", "3"],
        ],
    )
    def test_rejects(self, capsys, tmp_path, argv):
        code, _, _ = run(capsys, "learn", *argv, "--out", str(tmp_path / "t.csv"))
        assert code == 2


@pytest.fixture
def default300(capsys, tmp_path):
    path = tmp_path / "d300.csv"
    main(["generate", "--default300", "--out", str(path)])
    capsys.readouterr()
    return path


class TestCluster:
    def test_pure_tiny(self, capsys, tmp_path):
        data = tmp_path / "tiny.csv"
        data.write_text("0.0\n0.0\n1.0\n1.0\n")
        prefix = tmp_path / "c"
        code, out, _ = run(capsys, "cluster", "-f", str(data), "--k", "2", "--iterations", "50", "--out", str(prefix))
        assert code == 0
        assert float(printed(out, "final objective")) == 0.0
        rows = read_rows(f"{prefix}_assignments.csv")
        assert rows[0] == ["row_index", "cluster"]
        clusters = [int(r[1]) for r in rows[1:]]
        assert clusters[0] == clusters[1] != clusters[2] == clusters[3]
        trace = read_rows(f"{prefix}_trace.csv")
        assert trace[0] == ["generation", "best_objective"]

    def test_infeasible(self, capsys, default300, tmp_path):
        code, _, err = run(capsys, "cluster", "-f", str(default300), "--k", "200", "--labels-col", "3", "--out", str(tmp_path / "c"))
        assert code == 3 and "infeasible" in err

    def test_feasibility_boundary(self, capsys, default300, tmp_path):
        code, out, _ = run(
            capsys, "cluster", "-f", str(default300), "--k", "150", "--labels-col", "3",
            "--iterations", "3", "--out", str(tmp_path / "c"),
        )
        assert code == 0
        assert printed(out, "error rate").startswith("n/a")
        sizes = {}
        for r in read_rows(tmp_path / "c_assignments.csv")[1:]:
            sizes[r[1]] = sizes.get(r[1], 0) + 1
        assert len(sizes) == 150 and set(sizes.values()) == {2}

    def test_error_rate_printed(self, capsys, default300, tmp_path):
        code, out, _ = run(
            capsys, "cluster", "-f", str(default300), "--labels-col", "3",
            "--iterations", "200", "--out", str(tmp_path / "c"),
        )
        assert code == 0
        assert 0.0 <= float(printed(out, "error rate")) <= 1.0
        assert float(printed(out, "final objective")) <= float(printed(out, "initial objective"))

    @pytest.mark.parametrize("argv", [["--bins", "1"], ["--labels-col", "9"], ["--alpha", "1"]])
    def test_bad_flags(self, capsys, default300, tmp_path, argv):
        code, _, _ = run(capsys, "cluster", "-f", str(default300), *argv, "--out", str(tmp_path / "c"))
        assert code == 2

    def test_missing_file(self, capsys, tmp_path):
        assert run(capsys, "cluster", "-f", str(tmp_path / "nope.csv"))[0] == 2

    def test_seed_sweep_files(self, capsys, default300, tmp_path):
        prefix = tmp_path / "sw"
        code, out, _ = run(
            capsys, "cluster", "-f", str(default300), "--labels-col", "3", "--iterations", "20",
            "--seeds", "0..2", "--jobs", "2", "--out", str(prefix),
        )
        assert code == 0
        for s in range(3):
            assert (tmp_path / f"sw_seed{s}_assignments.csv").exists()
        assert out.count("final objective") == 3


class TestExplore:
    def test_random_baseline(self, capsys, tmp_path):
        prefix = tmp_path / "e"
        code, out, _ = run(
            capsys, "explore", "--policy", "random", "--steps", "1000", "--warmup", "1000",
            "--seed", "4", "--out", str(prefix),
        )
        assert code == 0
        rows = read_rows(f"{prefix}_trace.csv")
        assert rows[0] == ["t", "x", "y", "z", "entropy"] and len(rows) == 1001
        hist = json.loads((tmp_path / "e_histogram.json").read_text())
        assert sum(hist["counts"]) == 1000
        assert printed(out, "warmup entropy") == printed(out, "final entropy")

    def test_byte_identical(self, capsys, tmp_path):
        argv = ["explore", "--surface", "2", "--steps", "3000", "--warmup", "200", "--alpha", "0.5", "--seed", "9"]
        for name in ("a", "b"):
            assert run(capsys, *argv, "--out", str(tmp_path / name))[0] == 0
        for suffix in ("_trace.csv", "_histogram.json"):
            assert (tmp_path / f"a{suffix}").read_bytes() == (tmp_path / f"b{suffix}").read_bytes()

    @pytest.mark.parametrize(
        "argv",
        [
            ["--steps", "10", "--warmup", "20"],
            ["--bins", "1"],
            ["--epsilon", "0,0.1"],
            ["--bounds", "1,-1,0,1"],
            ["--start", "50,50"],
        ],
    )
    def test_bad_flags(self, capsys, tmp_path, argv):
        assert run(capsys, "explore", *argv, "--out", str(tmp_path / "e"))[0] == 2


@pytest.mark.parametrize("command", ["entropy", "cluster", "generate", "learn", "explore"])
def test_help_lists_defaults(capsys, command):
    with pytest.raises(SystemExit) as exc:
        main([command, "--help"])
    assert exc.value.code == 0
    out = capsys.readouterr().out
    sub = build_parser()._subparsers._group_actions[0].choices[command]
    flags = [a for a in sub._actions if a.option_strings and a.help != "==SUPPRESS==" and "-h" not in a.option_strings]
    for action in flags:
        assert action.option_strings[-1] in out
    assert out.count("(default:") == len(flags)


def test_bad_flag_value_exits_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["explore", "--seed", "-1"])
    assert exc.value.code == 2


def test_version(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
    assert "entropic" in capsys.readouterr().out
