"""Command-line interface: outputs, exit codes, determinism, schema."""

import io
import json
from importlib import resources

import jsonschema
import pytest

from depthlab.cli import run


def run_cli(argv):
    buf = io.StringIO()
    code = run(argv, out=buf)
    return code, buf.getvalue()


@pytest.fixture(scope="module")
def schema():
    with resources.files("depthlab").joinpath("schema.json").open() as fh:
        return json.load(fh)


def validate(text, schema):
    doc = json.loads(text)
    jsonschema.validate(doc, schema)
    return doc


# ------------------------------------------------------------- exact


def test_exact_json(schema):
    code, out = run_cli(["exact", "--n", "3", "--l", "2"])
    assert code == 0
    doc = validate(out, schema)
    assert doc["pmf"]["masses"] == pytest.approx([1 / 3, 1 / 3, 1 / 3])
    assert doc["mean"] == pytest.approx(1.0)
    assert doc["variance"] == pytest.approx(2 / 3)


def test_exact_trivial_and_csv():
    code, out = run_cli(["exact", "--n", "1", "--l", "1", "--format", "csv"])
    assert code == 0
    assert out.splitlines() == ["k,mass", "0,1"]


def test_exact_domain_error_exit_2(capsys):
    code, _ = run_cli(["exact", "--n", "0", "--l", "1"])
    assert code == 2
    assert "error" in capsys.readouterr().err


def test_exact_over_cap_exit_3():
    code, _ = run_cli(["exact", "--n", "40000", "--l", "1"])
    assert code == 3
    code, _ = run_cli(["exact", "--n", "600", "--l", "1", "--cap", "500"])
    assert code == 3


def test_unknown_command_usage_exit():
    with pytest.raises(SystemExit) as err:
        run(["frobnicate"])
    assert err.value.code == 2


# ------------------------------------------------------------- approx


def test_approx_with_l(schema):
    code, out = run_cli(["approx", "--n", "50", "--l", "10"])
    assert code == 0
    doc = validate(out, schema)
    assert doc["poisson"]["holds"] is True
    assert "mixpo" not in doc


def test_approx_with_t(schema):
    code, out = run_cli(["approx", "--n", "64", "--t", "0.5"])
    assert code == 0
    doc = validate(out, schema)
    assert doc["mixpo"]["d_w"] > 0
    assert doc["mixpo"]["d_w_scaled_by_sqrt_log_n"] > 0


def test_approx_requires_exactly_one_of_l_t():
    with pytest.raises(SystemExit) as err:
        run(["approx", "--n", "10", "--l", "3", "--t", "0.5"])
    assert err.value.code == 2
    with pytest.raises(SystemExit) as err:
        run(["approx", "--n", "10"])
    assert err.value.code == 2


# ------------------------------------------------------------- verify


def test_verify_lemma2_small(schema):
    code, out = run_cli(["verify", "--suite", "lemma2", "--n-max", "40"])
    assert code == 0
    doc = validate(out, schema)
    assert doc["failures"] == 0
    assert doc["checks"] == sum(n for n in range(1, 41))


def test_verify_oracle_exit_0():
    code, _ = run_cli(["verify", "--suite", "oracle", "--n-max", "6"])
    assert code == 0


def test_verify_theorem3_rejects_n1():
    code, _ = run_cli(["verify", "--suite", "theorem3", "--n", "1"])
    assert code == 2


def test_verify_theorem3_single_point(schema):
    code, out = run_cli(["verify", "--suite", "theorem3", "--n", "30", "--all-rows"])
    assert code == 0
    doc = validate(out, schema)
    assert doc["checks"] == 4
    assert all(row["holds"] for row in doc["rows"])


def test_verify_metrics_and_lemma4b_reduced_trials():
    code, _ = run_cli(["verify", "--suite", "metrics", "--trials", "50"])
    assert code == 0
    code, _ = run_cli(["verify", "--suite", "lemma4b", "--trials", "25"])
    assert code == 0


def test_verify_find_and_moves():
    code, _ = run_cli(["verify", "--suite", "find", "--n-max", "5"])
    assert code == 0
    code, _ = run_cli(["verify", "--suite", "moves", "--n-max", "10"])
    assert code == 0


def test_verify_csv_rows():
    code, out = run_cli(
        ["verify", "--suite", "oracle", "--n-max", "3", "--all-rows", "--format", "csv"]
    )
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "suite,params,lhs,rhs,holds"
    assert len(lines) == 1 + 6  # (1,1) (2,1) (2,2) (3,1) (3,2) (3,3)


# ------------------------------------------------------------- simulate


def test_simulate_find_route(schema):
    code, out = run_cli(
        ["simulate", "--route", "find", "--n", "3", "--l", "2",
         "--samples", "20000", "--seed", "1"]
    )
    assert code == 0
    doc = validate(out, schema)
    assert doc["d_tv_vs_exact"] < 0.02


def test_simulate_bst_trivial(schema):
    code, out = run_cli(
        ["simulate", "--route", "bst", "--n", "1", "--l", "1",
         "--samples", "10", "--seed", "0"]
    )
    assert code == 0
    doc = validate(out, schema)
    assert doc["empirical"]["masses"] == [1.0]
    assert doc["empirical"]["offset"] == 0


def test_simulate_byte_identical_repeat():
    argv = ["simulate", "--route", "representation", "--n", "40", "--l", "7",
            "--samples", "5000", "--seed", "9"]
    _, out1 = run_cli(argv)
    _, out2 = run_cli(argv)
    assert out1 == out2


def test_simulate_env_seed(monkeypatch):
    argv = ["simulate", "--route", "find", "--n", "5", "--l", "3", "--samples", "50"]
    monkeypatch.setenv("DEPTHLAB_SEED", "77")
    _, out_env = run_cli(argv)
    monkeypatch.delenv("DEPTHLAB_SEED")
    _, out_flag = run_cli(argv + ["--seed", "77"])
    assert json.loads(out_env)["empirical"] == json.loads(out_flag)["empirical"]
    monkeypatch.setenv("DEPTHLAB_SEED", "notanumber")
    code, _ = run_cli(argv)
    assert code == 2


def test_simulate_requires_l_for_fixed_key_routes():
    code, _ = run_cli(["simulate", "--route", "bst", "--n", "5", "--samples", "10"])
    assert code == 2


def test_simulate_unknown_route_usage():
    with pytest.raises(SystemExit) as err:
        run(["simulate", "--route", "quantum", "--n", "3", "--l", "1", "--samples", "5"])
    assert err.value.code == 2


def test_simulate_raw_samples():
    code, out = run_cli(
        ["simulate", "--route", "find", "--n", "4", "--l", "2",
         "--samples", "25", "--seed", "2", "--raw"]
    )
    assert code == 0
    values = [int(line) for line in out.strip().splitlines()]
    assert len(values) == 25
    assert all(0 <= v <= 3 for v in values)


def test_output_path_option(tmp_path):
    target = tmp_path / "out.json"
    code, captured = run_cli(
        ["exact", "--n", "3", "--l", "2", "--output", str(target)]
    )
    assert code == 0
    assert captured == ""
    doc = json.loads(target.read_text())
    assert doc["mean"] == pytest.approx(1.0)

    code, _ = run_cli(
        ["exact", "--n", "3", "--l", "2", "--output", str(tmp_path / "no" / "dir.json")]
    )
    assert code == 2


def test_simulate_key_route(schema):
    code, out = run_cli(
        ["simulate", "--route", "key", "--n", "30", "--samples", "2000", "--seed", "4"]
    )
    assert code == 0
    validate(out, schema)


# ------------------------------------------------------------- depth-plot


def test_depth_plot_from_file(tmp_path, schema):
    path = tmp_path / "perm.txt"
    path.write_text("2 1 3\n")
    code, out = run_cli(["depth-plot", "--perm-file", str(path), "--format", "csv"])
    assert code == 0
    assert out.splitlines() == ["l,depth", "1,1", "2,0", "3,1"]

    code, out = run_cli(["depth-plot", "--perm-file", str(path)])
    doc = validate(out, schema)
    assert doc["depths"] == [1, 0, 1]


def test_depth_plot_random_single(schema):
    code, out = run_cli(["depth-plot", "--n", "1", "--seed", "7"])
    assert code == 0
    doc = validate(out, schema)
    assert doc["depths"] == [0]


def test_depth_plot_bad_file(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("2 2 3\n")
    code, _ = run_cli(["depth-plot", "--perm-file", str(path)])
    assert code == 2
    path.write_text("2 x 3\n")
    code, _ = run_cli(["depth-plot", "--perm-file", str(path)])
    assert code == 2
    code, _ = run_cli(["depth-plot", "--perm-file", str(tmp_path / "missing.txt")])
    assert code == 2


def test_depth_plot_needs_source():
    code, _ = run_cli(["depth-plot"])
    assert code == 2
