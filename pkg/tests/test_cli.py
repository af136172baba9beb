import json

import numpy as np
import pytest

from opensys.cli import EXIT_OK, EXIT_USAGE, EXIT_VERIFICATION, main
from opensys.systems import load_system


@pytest.fixture
def sys_file(tmp_path):
    path = tmp_path / "sys.json"
    assert main(["gen-random", "--d1", "4", "--d2", "6", "--rank", "2",
                 "--seed", "7", "--output", str(path)]) == EXIT_OK
    return path


def test_gen_random_roundtrip(sys_file):
    sys = load_system(str(sys_file))
    assert sys.d1 == 4 and sys.d2 == 6


def test_gen_random_deterministic(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    args = ["gen-random", "--d1", "3", "--d2", "3", "--rank", "1", "--seed", "5"]
    main(args + ["--output", str(a)])
    main(args + ["--output", str(b)])
    assert a.read_bytes() == b.read_bytes()


def test_decompose_zero_coupling(tmp_path, capsys):
    path = tmp_path / "s.json"
    main(["gen-random", "--d1", "3", "--d2", "5", "--rank", "0",
          "--seed", "1", "--output", str(path)])
    out = tmp_path / "dec.json"
    code = main(["decompose", "--input", str(path), "--tol", "1e-10",
                 "--output", str(out)])
    assert code == EXIT_OK
    report = json.loads(out.read_text())
    assert report["dims"] == {"h1d": 3, "h1c": 0, "h2c": 0, "h2d": 5}
    assert "h1d=3" in capsys.readouterr().out


def test_verify_theorem_passes(sys_file, capsys):
    code = main(["verify-theorem", "--input", str(sys_file),
                 "--distance-tol", "1e-8"])
    assert code == EXIT_OK
    out = capsys.readouterr().out
    assert "multiplicity(core)" in out


def test_kernel_export(sys_file, tmp_path):
    out = tmp_path / "k.csv"
    code = main(["kernel", "--input", str(sys_file), "--output", str(out),
                 "--t-max", "5", "--steps", "50"])
    assert code == EXIT_OK
    lines = out.read_text().splitlines()
    assert len(lines) == 52  # header + 51 points


def test_simulate_and_compare(sys_file, tmp_path, capsys):
    full_csv = tmp_path / "full.csv"
    red_csv = tmp_path / "red.csv"
    assert main(["simulate-full", "--input", str(sys_file), "--output",
                 str(full_csv), "--steps", "200"]) == EXIT_OK
    assert main(["simulate-reduced", "--input", str(sys_file), "--output",
                 str(red_csv), "--steps", "200"]) == EXIT_OK
    out = tmp_path / "cmp.json"
    assert main(["compare", "--input", str(sys_file), "--steps", "400",
                 "--output", str(out)]) == EXIT_OK
    result = json.loads(out.read_text())
    assert 1.5 <= result["order"] <= 2.5
    assert "convergence order" in capsys.readouterr().out


def test_no_gain(sys_file):
    assert main(["no-gain", "--input", str(sys_file), "--trials", "5",
                 "--steps", "150", "--t-max", "10"]) == EXIT_OK


def test_gen_lattice_metadata(tmp_path):
    path = tmp_path / "lat.json"
    code = main(["gen-lattice", "--dims", "1", "--box", "8", "--cube", "2",
                 "--output", str(path)])
    assert code == EXIT_OK
    data = json.loads(path.read_text())
    assert data["lattice"]["surface_count"] == 2
    assert data["lattice"]["multiplicity_bound"] == 4
    sys = load_system(str(path))  # consumable as a plain system file
    assert sys.d1 == 2 and sys.d2 == 6


def test_lattice_then_verify(tmp_path):
    path = tmp_path / "lat.json"
    main(["gen-lattice", "--dims", "2", "--box", "5", "--cube", "2",
          "--output", str(path)])
    assert main(["verify-theorem", "--input", str(path)]) == EXIT_OK


def test_malformed_input_is_usage_error(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"d1": 2}')
    assert main(["decompose", "--input", str(bad)]) == EXIT_USAGE
    notjson = tmp_path / "notjson.json"
    notjson.write_text("{]")
    assert main(["decompose", "--input", str(notjson)]) == EXIT_USAGE


def test_missing_file_is_usage_error(tmp_path):
    assert main(["decompose", "--input", str(tmp_path / "nope.json")]) \
        == EXIT_USAGE


def test_bad_flags_are_usage_error():
    assert main(["decompose"]) == EXIT_USAGE
    assert main(["no-such-command"]) == EXIT_USAGE


def test_env_var_tolerance(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("OPENSYS_TOL", "1e-9")
    path = tmp_path / "s.json"
    main(["gen-random", "--d1", "2", "--d2", "2", "--rank", "1",
          "--seed", "0", "--output", str(path)])
    assert load_system(str(path)).tol == 1e-9
