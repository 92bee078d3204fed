"""Command-line contract: specs, formats, exit codes, determinism."""

import json
import os

import numpy as np
import pytest

from bfstab.cli import main, parse_density_spec, parse_g_spec
from bfstab.density1d import GaussianMixture1D
from bfstab.densitynd import GaussianMixtureND, ProductFunction
from bfstab.errors import ParseError


@pytest.fixture
def mix2d_file(tmp_path):
    path = tmp_path / "mix2d.json"
    path.write_text(json.dumps({
        "weights": [1.0],
        "means": [[0.0, 0.0]],
        "covs": [[[4.0, 0.0], [0.0, 1.0]]],
    }))
    return str(path)


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


# ---------------------------------------------------------------------------
# density / g spec mini-language


def test_parse_gauss_spec():
    d = parse_density_spec("gauss:0.5,4")
    assert isinstance(d, GaussianMixture1D)
    assert abs(d.mean() - 0.5) < 1e-15
    assert abs(d.variance() - 4.0) < 1e-12


def test_parse_mix_spec_normalizes_weights():
    d = parse_density_spec("mix:[1,0,1;3,1,4]")
    assert isinstance(d, GaussianMixture1D)
    assert np.allclose(d.weights, [0.25, 0.75])


def test_parse_file_specs(tmp_path, mix2d_file):
    assert isinstance(parse_density_spec(f"file:{mix2d_file}"),
                      GaussianMixtureND)
    prod = tmp_path / "prod.json"
    prod.write_text(json.dumps({"factors": [
        {"weights": [1.0], "means": [0.0], "stds": [2.0]},
        {"weights": [1.0], "means": [0.3], "stds": [1.0]},
    ]}))
    assert isinstance(parse_density_spec(f"file:{prod}"), ProductFunction)


def test_parse_spec_errors():
    for bad in ("gauss:1", "gauss:0,-2", "mix:[]", "mix:[1,0]", "nope:1",
                "file:/does/not/exist.json", "plain"):
        with pytest.raises(ParseError):
            parse_density_spec(bad)


def test_parse_g_specs():
    assert parse_g_spec("zero").kind == "const"
    assert parse_g_spec("linear:1.5").slope == 1.5
    g = parse_g_spec("quad:0.5,0.1,-0.2")
    assert (g.curvature, g.slope, g.offset) == (0.5, 0.1, -0.2)
    assert parse_g_spec("bump").kind == "generic"
    with pytest.raises(ParseError):
        parse_g_spec("cubic:1")


# ---------------------------------------------------------------------------
# single-value commands


def test_distance_known_value(capsys):
    code, out, _ = run_cli(capsys, "distance", "--u", "gauss:0,4",
                           "--v", "gauss:0,1")
    assert code == 0
    payload = json.loads(out)
    assert abs(payload["value"] - 0.5) < 1e-7
    assert payload["version"]
    assert payload["config"]["u"] == "gauss:0,4"


def test_distance_rejects_nd_inputs(capsys, mix2d_file):
    code, _, err = run_cli(capsys, "distance", "--u", f"file:{mix2d_file}",
                           "--v", "gauss:0,1")
    assert code == 1
    assert "1-D" in err


def test_deficit_main_example(capsys, mix2d_file):
    code, out, _ = run_cli(capsys, "deficit", "--measure",
                           f"file:{mix2d_file}", "--theorem", "main")
    assert code == 0
    rep = json.loads(out)["report"]
    assert abs(rep["margin"] - 0.1931471805599453) < 1e-6
    assert rep["status"] == "pass"


def test_deficit_pl_via_flags(capsys):
    code, out, _ = run_cli(capsys, "deficit", "--theorem", "pl",
                           "--g", "quad:0.5", "--lam", "0.3")
    assert code == 0
    assert json.loads(out)["report"]["theorem"] == "pl"


def test_talagrand_sampled_nd_inconclusive_exit(capsys, mix2d_file):
    code, out, _ = run_cli(capsys, "talagrand", "--measure",
                           f"file:{mix2d_file}", "--mode", "sampled-nd",
                           "--m-samples", "64", "--repeats", "2")
    assert code == 3
    assert json.loads(out)["report"]["status"] == "inconclusive"


def test_pl_check_with_diagnostics(capsys):
    code, out, _ = run_cli(capsys, "pl-check", "--g", "linear:1",
                           "--lam", "0.25", "--diagnostics")
    assert code == 0
    payload = json.loads(out)
    assert payload["report"]["status"] == "pass"
    lams = [row["lam"] for row in payload["diagnostics"]]
    assert lams == sorted(lams, reverse=True)


# ---------------------------------------------------------------------------
# suites, sweeps, formats


def test_verify_suite_and_jobs_determinism(tmp_path, capsys):
    out1 = tmp_path / "r1.json"
    out2 = tmp_path / "r2.json"
    code1, _, _ = run_cli(capsys, "verify", "--suite", "talagrand-1d",
                          "--seed", "0", "--jobs", "1", "--out", str(out1))
    code2, _, _ = run_cli(capsys, "verify", "--suite", "talagrand-1d",
                          "--seed", "0", "--jobs", "2", "--out", str(out2))
    assert code1 == 0 and code2 == 0
    assert out1.read_bytes() == out2.read_bytes()
    payload = json.loads(out1.read_text())
    assert payload["summary"]["pass"] == 30
    assert len(payload["reports"]) == 30
    # config captures science knobs, never the worker count
    assert "jobs" not in payload["config"]


def test_verify_unknown_suite_exits_one(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["verify", "--suite", "made-up"])
    assert exc.value.code == 1


def test_sweep_sigma_csv_format(capsys):
    code, out, _ = run_cli(capsys, "sweep", "--kind", "sigma",
                           "--values", "0.5,2", "--format", "csv")
    assert code == 0
    lines = out.split("\n")
    assert lines[0] == ("case_id,theorem,deficit,lower_bound,margin,"
                        "error_estimate,status,method")
    assert lines[1].startswith("sigma-0.5,main,")
    assert lines[2].startswith("sigma-2,main,")
    assert out.endswith("\n") and "\r" not in out
    deficit = float(lines[1].split(",")[2])
    assert abs(deficit - 0.8068528194400546) < 1e-9


def test_sweep_continues_past_case_errors(capsys):
    code, out, _ = run_cli(capsys, "sweep", "--kind", "sigma",
                           "--values", "1,2", "--theorem", "corollary",
                           "--format", "csv")
    assert code == 2
    lines = [l for l in out.strip().split("\n")[1:] if l]
    assert len(lines) == 2
    assert all(",error," in l for l in lines)


def test_sweep_lambda_default_g(capsys):
    code, out, _ = run_cli(capsys, "sweep", "--kind", "lambda",
                           "--values", "0.2,0.5")
    assert code == 0
    payload = json.loads(out)
    assert [r["case_id"] for r in payload["reports"]] == ["lambda-0.2",
                                                          "lambda-0.5"]
    assert payload["summary"]["pass"] == 2


def test_sweep_rejects_bad_values(capsys):
    code, _, err = run_cli(capsys, "sweep", "--kind", "sigma",
                           "--values", "0,1")
    assert code == 1 and "positive" in err
    code, _, _ = run_cli(capsys, "sweep", "--kind", "lambda",
                         "--values", "1.5")
    assert code == 1


# ---------------------------------------------------------------------------
# output plumbing


def test_atomic_write_leaves_no_temp_files(tmp_path, capsys):
    out = tmp_path / "res.json"
    code, _, _ = run_cli(capsys, "distance", "--u", "gauss:0,1",
                         "--v", "gauss:0,1", "--out", str(out))
    assert code == 0
    assert json.loads(out.read_text())["value"] < 1e-9
    assert os.listdir(tmp_path) == ["res.json"]


def test_csv_single_report(capsys):
    code, out, _ = run_cli(capsys, "deficit", "--measure", "gauss:0,4",
                           "--format", "csv")
    assert code == 0
    lines = out.strip().split("\n")
    assert len(lines) == 2
    assert lines[1].split(",")[1] == "main"


def test_bad_flags_exit_one(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["deficit", "--no-such-flag"])
    assert exc.value.code == 1
    with pytest.raises(SystemExit) as exc:
        main(["not-a-command"])
    assert exc.value.code == 1
