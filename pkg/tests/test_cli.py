import json

import pytest

from gevrey_calculus import main
from gevrey_calculus.config import EngineConfig
from gevrey_calculus.models import from_model, parse_document
from gevrey_calculus.rings import GaussianRational


def run_cli(tmp_path, *argv):
    return main.main([*argv, "--output", str(tmp_path)])


def read(path):
    return json.loads(path.read_text())


def test_parametrix_of_a_constant_symbol(tmp_path, fixtures_dir):
    code = run_cli(tmp_path, "parametrix", "--input", str(fixtures_dir / "constant_symbol.json"))
    assert code == 0
    q = from_model(parse_document(read(tmp_path / "q.json")))
    assert q[0].coefficient((0, 0)) == GaussianRational("2/5", "-1/5")
    assert q[1].is_zero() and q[2].is_zero()
    report = read(tmp_path / "parametrix.json")
    assert report["schema_version"] == "1"
    assert report["results"]["residual"] == [0.0, 0.0, 0.0]


def test_reruns_are_byte_identical(tmp_path, fixtures_dir):
    for name in ("a", "b"):
        out = tmp_path / name
        assert run_cli(out, "parametrix", "--input", str(fixtures_dir / "elliptic_symbol.json")) == 0
    assert (tmp_path / "a" / "q.json").read_bytes() == (tmp_path / "b" / "q.json").read_bytes()


def test_sharp_of_xi_and_x(tmp_path, fixtures_dir):
    code = run_cli(tmp_path, "sharp", "--input",
                   str(fixtures_dir / "xi_symbol.json"), str(fixtures_dir / "x_symbol.json"))
    assert code == 0
    r = from_model(parse_document(read(tmp_path / "r.json")))
    assert r[1].coefficient((0, 0)) == GaussianRational(0, -1)


def test_certify_writes_a_readable_certificate(tmp_path, fixtures_dir):
    csv_path = tmp_path / "growth.csv"
    code = run_cli(tmp_path, "certify", "--input", str(fixtures_dir / "elliptic_symbol.json"),
                   "--report", str(csv_path))
    assert code == 0
    lines = csv_path.read_text().splitlines()
    assert lines[0] == "k,norm,envelope,ratio" and len(lines) == 5
    report = read(tmp_path / "certify.json")
    assert report["results"]["check"]["holds"]
    cert = from_model(parse_document(read(tmp_path / "certificate.json")))
    assert len(cert.f_seq) == 4


def test_adiabatic_run_with_report(tmp_path, fixtures_dir):
    csv_path = tmp_path / "norms.csv"
    code = run_cli(tmp_path, "adiabatic", "--order", "2", "--method", "recursive",
                   "--input", str(fixtures_dir / "rotating_two_level.json"), "--report", str(csv_path))
    assert code == 0
    results = read(tmp_path / "adiabatic.json")["results"]
    assert results["fit"] is None
    assert results["projector_identity"]["max_residual"] < 1e-7
    assert csv_path.read_text().splitlines()[0] == "j,norm"
    assert (tmp_path / "expansion.json").is_file()


def test_selftest_passes(tmp_path, capsys):
    assert run_cli(tmp_path, "selftest") == 0
    out = capsys.readouterr().out
    assert "FAIL" not in out
    assert "parametrix-identity" in out


@pytest.mark.parametrize(
    "argv, expected",
    [
        (["parametrix", "--input", "missing.json"], 2),
        (["parametrix", "--input", "{fixtures}/x_symbol.json"], 3),
        (["fit", "--input", "{fixtures}/elliptic_symbol.json"], 3),
        (["resum", "--input", "{fixtures}/constant_symbol.json"], 4),
        (["sharp", "--input", "{fixtures}/constant_symbol.json"], 2),
        (["adiabatic", "--input", "{fixtures}/constant_symbol.json"], 2),
    ],
)
def test_exit_codes(tmp_path, fixtures_dir, argv, expected):
    argv = [a.format(fixtures=fixtures_dir) for a in argv]
    assert run_cli(tmp_path, *argv) == expected


def test_unknown_subcommand_is_a_usage_error(tmp_path):
    with pytest.raises(SystemExit) as exc:
        run_cli(tmp_path, "launch")
    assert exc.value.code == 2


def test_malformed_json_exits_with_two(tmp_path, fixtures_dir):
    truncated = tmp_path / "truncated.json"
    truncated.write_text((fixtures_dir / "constant_symbol.json").read_text()[:40])
    assert run_cli(tmp_path, "parametrix", "--input", str(truncated)) == 2


def test_unwritable_output_exits_with_two(tmp_path, fixtures_dir):
    blocker = tmp_path / "blocker"
    blocker.write_text("")
    config = EngineConfig(command="parametrix", input=[str(fixtures_dir / "constant_symbol.json")],
                          output=str(blocker))
    assert main.run(config) == 2


def test_tolerance_flags_reach_the_config(tmp_path, fixtures_dir):
    code = run_cli(tmp_path, "certify", "--input", str(fixtures_dir / "elliptic_symbol.json"),
                   "--inequality-slack", "0.5", "--inverse-residual", "1e-9")
    assert code == 0
    config = read(tmp_path / "certify.json")["config"]
    assert config["command"] == "certify"
    assert config["inequality_slack"] == 0.5
    assert config["inverse_residual"] == 1e-9


def test_schema_violation_exits_with_two(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"kind": "symbol", "coeffs": [], "extra": 1}))
    assert run_cli(tmp_path, "parametrix", "--input", str(bad)) == 2


def test_run_with_a_config_object(tmp_path, fixtures_dir):
    config = EngineConfig(command="parametrix", input=[str(fixtures_dir / "elliptic_symbol.json")],
                          output=str(tmp_path), backend="float", method="recursive", side="right")
    assert main.run(config) == 0
    report = read(tmp_path / "parametrix.json")
    assert report["config"]["backend"] == "float"
    assert max(report["results"]["residual"]) < 1e-12


def test_jet_order_caps_the_input_depth(tmp_path, fixtures_dir):
    config = EngineConfig(command="parametrix", input=[str(fixtures_dir / "elliptic_symbol.json")],
                          output=str(tmp_path), jet_order=4)
    assert main.run(config) == 0
    q = from_model(parse_document(read(tmp_path / "q.json")))
    assert max(q.per_order_valid) <= 4


@pytest.mark.parametrize("field, value", [("backend", "quad"), ("side", "both"), ("method", "newton")])
def test_bad_choices_exit_with_two(tmp_path, field, value):
    config = EngineConfig(command="selftest", output=str(tmp_path), **{field: value})
    assert main.run(config) == 2
