"""End-to-end command-line checks, run in process through ``main(argv)``.

Exit-code contract: 0 on success, 2 for invalid input (with the offending
field named on stderr), 1 for runtime failures.  Outputs written twice with
the same arguments must be byte-identical.
"""

import json
import math

import pytest

from qdim.cli import main
from qdim.ifs import WIFS, similitude_1d, wifs_to_json_obj
from qdim.instances import cantor, quarter_maps, uniform_halves
from qdim.measures import DiscreteMeasure, measure_to_csv
from qdim.quantize import ladder_seed

SEPARATED_WORDS = "11,21,31"  # level-2 family glued by suffix 1


@pytest.fixture(scope="module")
def wifs_files(tmp_path_factory):
    root = tmp_path_factory.mktemp("wifs")
    paths = {}
    for name, w in [("cantor", cantor()), ("t02", quarter_maps(0.2)),
                    ("uniform", uniform_halves()),
                    ("single", WIFS(maps=(similitude_1d(1 / 3, 0.0),), probs=(1.0,)))]:
        p = root / f"{name}.json"
        p.write_text(json.dumps(wifs_to_json_obj(w)))
        paths[name] = str(p)
    return paths


@pytest.fixture(scope="module")
def measure_files(tmp_path_factory):
    root = tmp_path_factory.mktemp("measures")
    mu = root / "mu.csv"   # (delta_0 + delta_1) / 2
    nu = root / "nu.csv"   # delta_{1/2}
    mu.write_text(measure_to_csv(DiscreteMeasure([[0.0], [1.0]], [0.5, 0.5])))
    nu.write_text(measure_to_csv(DiscreteMeasure([[0.5]], [1.0])))
    return str(mu), str(nu)


# ---------------------------------------------------------------------------
# dim
# ---------------------------------------------------------------------------


def test_dim_single_r(wifs_files, capsys):
    assert main(["dim", "--wifs", wifs_files["cantor"], "--r", "2"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "r,kappa_r,d_r,theta,residual,iterations"
    fields = lines[1].split(",")
    assert len(lines) == 2 and len(fields) == 6
    assert float(fields[0]) == 2.0
    # uniform weights on equal ratios: kappa_r = log 2 / log 3 for every r
    assert float(fields[1]) == pytest.approx(math.log(2) / math.log(3), abs=1e-8)
    assert float(fields[4]) < 1e-9 and int(fields[5]) > 0


def test_dim_grid_with_d0(wifs_files, capsys):
    assert main(["dim", "--wifs", wifs_files["cantor"],
                 "--r-grid", "0.5,1,2", "--with-d0"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 5
    first = lines[1].split(",")
    assert float(first[0]) == 0.0
    assert float(first[1]) == pytest.approx(math.log(2) / math.log(3), abs=1e-12)
    # the whole spectrum is flat at log2/log3 for this measure
    for ln in lines[1:]:
        assert float(ln.split(",")[1]) == pytest.approx(math.log(2) / math.log(3), abs=1e-8)


def test_dim_requires_some_r(wifs_files, capsys):
    assert main(["dim", "--wifs", wifs_files["cantor"]]) == 2
    assert "error: r:" in capsys.readouterr().err


def test_dim_rejects_nonpositive_r(wifs_files, capsys):
    assert main(["dim", "--wifs", wifs_files["cantor"], "--r", "-1"]) == 2
    assert "error: r" in capsys.readouterr().err


def test_dim_missing_wifs_file(tmp_path, capsys):
    assert main(["dim", "--wifs", str(tmp_path / "nope.json"), "--r", "2"]) == 2
    assert "error: wifs" in capsys.readouterr().err


def test_dim_malformed_wifs_file(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["dim", "--wifs", str(bad), "--r", "2"]) == 2
    assert "error: wifs" in capsys.readouterr().err


def test_argparse_missing_required_flag_exits_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["dim"])
    assert exc.value.code == 2


def test_unknown_command_exits_2():
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2


# ---------------------------------------------------------------------------
# check-sep / subifs-search
# ---------------------------------------------------------------------------


def test_check_sep_level2_certificate(wifs_files, capsys):
    assert main(["check-sep", "--wifs", wifs_files["t02"],
                 "--words", SEPARATED_WORDS]) == 0
    obj = json.loads(capsys.readouterr().out)
    assert obj["condition"] == "SSC" and obj["status"] == "Satisfied"
    assert obj["min_gap"] == 0.1375
    assert obj["members"] == ["11", "21", "31"] and len(obj["images"]) == 3
    assert obj["hull"] == {"lo": [0.0], "hi": [1.0]}


def test_check_sep_level1_is_unknown(wifs_files, capsys):
    assert main(["check-sep", "--wifs", wifs_files["t02"]]) == 0
    obj = json.loads(capsys.readouterr().out)
    assert obj["status"] == "Unknown"
    assert obj["overlapping_pair"] == ["1", "2"]


def test_check_sep_osc_accepts_touching(wifs_files, capsys):
    assert main(["check-sep", "--wifs", wifs_files["uniform"], "--condition", "osc"]) == 0
    obj = json.loads(capsys.readouterr().out)
    assert obj["condition"] == "OSC" and obj["status"] == "Satisfied"


def test_check_sep_rejects_bad_word(wifs_files, capsys):
    assert main(["check-sep", "--wifs", wifs_files["cantor"], "--words", "1,4"]) == 2
    assert "error: words" in capsys.readouterr().err


def test_subifs_search_empty_suffix(wifs_files, capsys):
    assert main(["subifs-search", "--wifs", wifs_files["t02"]]) == 0
    obj = json.loads(capsys.readouterr().out)
    assert obj["found"] is True
    assert obj["level"] == 1 and obj["suffix"] == ""
    assert obj["selection"] == ["1", "3"]
    assert obj["status"] == "Satisfied" and obj["min_gap"] > 0


def test_subifs_search_with_suffix(wifs_files, capsys):
    assert main(["subifs-search", "--wifs", wifs_files["t02"], "--suffix", "1"]) == 0
    obj = json.loads(capsys.readouterr().out)
    assert obj["selection"] == ["1", "2"]
    assert obj["scales"] == [0.0625, 0.0625]
    assert sum(obj["probs"]) == pytest.approx(1.0, abs=1e-12)


# ---------------------------------------------------------------------------
# quantize / estimate
# ---------------------------------------------------------------------------


def test_quantize_output_and_rerun_bytes(wifs_files, tmp_path):
    out1, out2 = tmp_path / "a.json", tmp_path / "b.json"
    argv = ["quantize", "--wifs", wifs_files["cantor"], "--n", "4", "--r", "2",
            "--samples", "2000", "--seed", "5"]
    assert main(argv + ["--out", str(out1)]) == 0
    assert main(argv + ["--out", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()
    obj = json.loads(out1.read_text())
    assert obj["n"] == 4 and obj["seed"] == 5
    assert obj["distortion"] > 0
    xs = [row[0] for row in obj["points"]]
    assert xs == sorted(xs)


def test_quantize_rejects_bad_n(wifs_files, capsys):
    assert main(["quantize", "--wifs", wifs_files["cantor"], "--n", "0", "--r", "2",
                 "--samples", "100", "--seed", "1"]) == 2
    assert "error: n" in capsys.readouterr().err


def test_estimate_csv_layout(wifs_files, tmp_path):
    out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
    argv = ["estimate", "--wifs", wifs_files["cantor"], "--r", "2",
            "--n-list", "4,8", "--samples", "1000", "--seed", "7", "--restarts", "2"]
    assert main(argv + ["--out", str(out1)]) == 0
    assert main(argv + ["--out", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()
    lines = out1.read_text().strip().splitlines()
    assert lines[0] == "n,r,distortion,log_n,neg_log_V,seed"
    assert len(lines) == 4
    row4 = lines[1].split(",")
    assert int(row4[0]) == 4
    assert int(row4[5]) == ladder_seed(7, 4)
    assert float(row4[4]) == pytest.approx(-math.log(float(row4[2])), rel=1e-12)
    final = lines[3].split(",")
    assert final[0] == "estimate" and float(final[1]) == 2.0
    assert float(final[2]) > 0  # the dimension estimate itself
    assert int(final[5]) == 7


def test_estimate_rejects_bad_ladder(wifs_files, capsys):
    base = ["estimate", "--wifs", wifs_files["cantor"], "--r", "2",
            "--samples", "2000", "--seed", "1"]
    assert main(base + ["--n-list", "8,4"]) == 2
    assert main(base + ["--n-list", "8,1600"]) == 2
    err = capsys.readouterr().err
    assert err.count("error: n-list") == 2


def test_estimate_degenerate_system_is_runtime_error(wifs_files, capsys):
    # one map: every sample collapses onto the fixed point, all distortions
    # vanish, and no slope can be fitted
    assert main(["estimate", "--wifs", wifs_files["single"], "--r", "2",
                 "--n-list", "2,4", "--samples", "500", "--seed", "3"]) == 1
    assert "runtime error" in capsys.readouterr().err


# ---------------------------------------------------------------------------
# measure
# ---------------------------------------------------------------------------


def test_measure_convolve(measure_files, capsys):
    mu, _ = measure_files
    assert main(["measure", "--op", "convolve", "--a", mu, "--b", mu]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    rows = [ln.split(",") for ln in lines[1:]]
    assert [float(a) for a, _ in rows] == [0.0, 1.0, 2.0]
    assert [float(w) for _, w in rows] == [0.25, 0.5, 0.25]


def test_measure_translate_convention(measure_files, capsys):
    # (mu + x)(E) = mu(E + x): atoms shift by -x
    mu, _ = measure_files
    assert main(["measure", "--op", "translate", "--a", mu, "--x", "0.5"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert [float(ln.split(",")[0]) for ln in lines[1:]] == [-0.5, 0.5]


def test_measure_translate_needs_matching_x(measure_files, capsys):
    mu, _ = measure_files
    assert main(["measure", "--op", "translate", "--a", mu, "--x", "1,2"]) == 2
    assert "error: x" in capsys.readouterr().err


def test_measure_dl_value(measure_files, capsys):
    mu, nu = measure_files
    assert main(["measure", "--op", "dl", "--a", mu, "--b", nu]) == 0
    assert float(capsys.readouterr().out) == pytest.approx(0.5, abs=1e-12)


def test_measure_tv_value(measure_files, capsys):
    mu, nu = measure_files
    assert main(["measure", "--op", "tv", "--a", mu, "--b", nu]) == 0
    assert float(capsys.readouterr().out) == pytest.approx(1.0, abs=1e-12)


def test_measure_box_mass_half_open(measure_files, capsys):
    mu, _ = measure_files
    assert main(["measure", "--op", "box-mass", "--a", mu,
                 "--box-lo", "0", "--box-hi", "0.75"]) == 0
    assert float(capsys.readouterr().out) == 0.5


def test_measure_mix_validates_alpha(measure_files, capsys):
    mu, nu = measure_files
    assert main(["measure", "--op", "mix", "--a", mu, "--b", nu, "--alpha", "1.5"]) == 2
    assert "error: alpha" in capsys.readouterr().err


def test_measure_requires_b(measure_files, capsys):
    mu, _ = measure_files
    assert main(["measure", "--op", "dl", "--a", mu]) == 2
    assert "error: b" in capsys.readouterr().err


def test_measure_json_output(measure_files, tmp_path):
    mu, nu = measure_files
    out = tmp_path / "mixed.json"
    assert main(["measure", "--op", "mix", "--a", mu, "--b", nu,
                 "--alpha", "0.5", "--out", str(out)]) == 0
    obj = json.loads(out.read_text())
    assert [a["weight"] for a in obj["atoms"]] == [0.25, 0.5, 0.25]


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------


def test_verify_quick_suite_passes(capsys):
    assert main(["verify"]) == 0
    out = capsys.readouterr().out
    assert "all checks passed" in out
    assert "FAIL" not in out


def test_verify_single_criterion(capsys):
    assert main(["verify", "--criteria", "--only", "1,4"]) == 0
    out = capsys.readouterr().out
    assert out.count("PASS") == 2 and "all checks passed" in out


def test_verify_rejects_unknown_id(capsys):
    assert main(["verify", "--criteria", "--only", "99"]) == 2
    assert "error: only" in capsys.readouterr().err
