import csv
import io
import json
import subprocess
import sys
from fractions import Fraction

import pytest

from berezin_kit import errors
from berezin_kit.cli import (
    EXAMPLES,
    EXIT_CODES,
    UsageError,
    check_document,
    exit_code_for,
    main,
    parse_args,
    parse_complex,
    parse_pair,
    render,
)


def run_cli(argv):
    out, err = io.StringIO(), io.StringIO()
    code = main(list(argv), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def test_parse_valid_gram():
    cfg = parse_args(["gram", "--space", "sphere", "--inv-hbar", "4", "--max-degree", "4"])
    assert cfg.command == "gram" and cfg.space == "sphere"
    assert cfg.inv_hbar == Fraction(4) and cfg.max_degree == 4


def test_parse_sphere_non_integer_rejected():
    with pytest.raises(errors.ConstraintError, match="must be an integer"):
        parse_args(["gram", "--space", "sphere", "--inv-hbar", "4.5", "--max-degree", "4"])


def test_parse_valid_sweep():
    cfg = parse_args(["sweep", "--space", "disc", "--inv-hbar-list", "4,8,16", "--pair", "0,0.5"])
    assert cfg.inv_hbar_list == (4, 8, 16)
    assert cfg.pairs == ((0j, 0.5 + 0j),)


def test_parse_rational_inv_hbar():
    assert parse_args(["gram", "--inv-hbar", "1/2"]).inv_hbar == Fraction(1, 2)


@pytest.mark.parametrize("argv", [
    ["gram", "--bogus"],
    ["frobnicate"],
    ["gram", "--inv-hbar", "abc"],
    ["gram", "--max-degree", "-1"],
    ["sweep", "--space", "disc", "--inv-hbar-list", "4,8", "--pair", "0,0.5"],
    ["sweep", "--space", "disc", "--inv-hbar-list", "8,4,16", "--pair", "0,0.5"],
    ["sweep", "--space", "disc", "--inv-hbar-list", "4,8,16"],
    ["gram", "--pair", "0,1"],
    ["kernel", "--label", "0.1"],
    ["coherent"],
    ["gram", "--label", "1,2,3"],
])
def test_usage_errors(argv):
    with pytest.raises(UsageError):
        parse_args(argv)
    assert run_cli(argv)[0] == 2


def test_complex_syntax():
    assert parse_complex("0.5") == 0.5
    assert parse_complex("0.5,-1") == 0.5 - 1j
    assert parse_pair("0,0.5") == (0, 0.5)
    assert parse_pair("0,1,0.5,0") == (1j, 0.5)


@pytest.mark.parametrize("argv", [list(e) for e in EXAMPLES], ids=lambda a: " ".join(a[:3]))
def test_config_round_trip(argv):
    cfg = parse_args(argv)
    again = parse_args(cfg.to_argv())
    assert again == cfg
    assert again.to_argv() == cfg.to_argv()


def test_gram_plane_degree3():
    code, out, _ = run_cli(["gram", "--space", "plane", "--max-degree", "3"])
    assert code == 0
    assert json.loads(out)["diagonal"] == [1.0, 1.0, 2.0, 6.0]


def test_dimension_sphere():
    doc = json.loads(run_cli(["dimension", "--space", "sphere", "--inv-hbar", "4"])[1])
    assert doc["dimension"] == 5 and doc["paper_stated"] == 4 and doc["note"] == "cutoff discrepancy"


def test_dimension_plane_is_infinite():
    assert json.loads(run_cli(["dimension"])[1])["dimension"] == "infinite"


def test_duality_s_residual():
    doc = json.loads(run_cli(["duality", "--map", "S", "--label", "0.5"])[1])
    assert doc["residual"] > 0.05
    assert doc["classification"] == "DualityS"


def test_duality_several_labels():
    doc = json.loads(run_cli(["duality", "--map", "T:0.5", "--label", "0.3", "--label", "0.8"])[1])
    check_document("duality", doc)
    assert [r["residual"] < 1e-6 for r in doc["reports"]] == [True, True]


def test_duality_on_sphere_is_constraint():
    assert run_cli(["duality", "--space", "sphere", "--inv-hbar", "4", "--label", "0.5"])[0] == 3


def test_constraint_exit_code_and_message():
    code, out, err = run_cli(["gram", "--space", "sphere", "--inv-hbar", "4.5"])
    assert code == 3 and out == "" and "must be an integer" in err


def test_finite_norm_is_structured_error():
    code, out, err = run_cli(["gram", "--space", "sphere", "--inv-hbar", "4", "--max-degree", "5"])
    assert code == 3 and out == ""
    doc = json.loads(err)
    assert doc["error"] == "FiniteNormError" and doc["exit_code"] == 3


def test_label_outside_disc():
    assert run_cli(["kernel", "--space", "disc", "--inv-hbar", "4", "--label", "1.5", "--label", "0"])[0] == 3


def test_numerical_failure_exit_code(monkeypatch):
    import berezin_kit.cli as cli

    def boom(cfg):
        raise errors.PoleProximityError([0j], 0.0)

    monkeypatch.setitem(cli._DISPATCH, "gram", boom)
    code, out, err = run_cli(["gram"])
    assert code == 4 and out == "" and json.loads(err)["error"] == "PoleProximityError"


def test_every_error_class_has_one_code():
    classes = [c for c in vars(errors).values() if isinstance(c, type) and issubclass(c, errors.BerezinError)]
    for cls in classes:
        if cls is errors.BerezinError:
            continue
        assert exit_code_for(cls.__new__(cls)) in (3, 4)
    assert set(EXIT_CODES.values()) == {3, 4}


def test_csv_output_has_header():
    code, out, _ = run_cli(["gram", "--space", "disc", "--inv-hbar", "4", "--max-degree", "2", "--format", "csv"])
    rows = list(csv.reader(io.StringIO(out)))
    assert code == 0 and rows[0] == ["m", "n", "re", "im"] and len(rows) == 10


def test_output_file(tmp_path):
    path = tmp_path / "g.json"
    code, out, _ = run_cli(["gram", "--max-degree", "2", "--output", str(path)])
    assert code == 0 and out == ""
    assert json.loads(path.read_text())["schema"] == "berezin-kit/1"


@pytest.mark.parametrize("argv", [list(e) for e in EXAMPLES], ids=lambda a: " ".join(a[:3]))
def test_examples_deterministic(argv):
    cfg = parse_args(argv)
    first, second = render(cfg), render(cfg)
    assert first == second
    if cfg.output_format == "json":
        doc = json.loads(first)
        check_document(cfg.command, doc)
        assert json.dumps(doc, indent=2) + "\n" == first


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "berezin_kit.cli", "gram", "--max-degree", "1"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["diagonal"] == [1.0, 1.0]
