import json
import os
from fractions import Fraction as F

import jsonschema
import pytest

from pwlsds.cli import COMMANDS, load_schema, run
from pwlsds.constructions import prop42
from pwlsds.io import load_system, parse_measure, parse_system, serialize_system
from pwlsds.measures import ETA, LEBESGUE, AtomicMeasure, PwcDensity
from pwlsds.rational import ValidationError

SAMPLE_ARGS = {
    "simulate": ["--system", "builtin:prop42?p=3/5", "--steps", "50", "--x0", "1/7"],
    "cesaro": ["--system", "builtin:ifs-cantor", "--steps", "500", "--bins", "3"],
    "invariance": ["--system", "builtin:example34", "--partition", "dyadic:3"],
    "entropy": ["--system", "builtin:example34", "--measure", "lebesgue"],
    "injectivity": ["--system", "builtin:prop42?p=3/5"],
    "contraction": ["--system", "builtin:ifs-cantor", "--x0", "0"],
    "certify": ["--system", "builtin:ifs-cantor", "--measure", "eta"],
    "diagnose": ["--system", "builtin:ifs-cantor", "--steps", "2000", "--depth", "3"],
    "ulam": ["--system", "builtin:example34", "--bins", "8", "--grid", "dyadic", "--emit-matrix"],
    "construct": ["nu2", "--p", "3/5", "--depth", "4", "--check-invariance", "--partition", "ternary:3"],
}


def invoke(capsys, argv):
    code = run(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.mark.parametrize("cmd", COMMANDS)
def test_outputs_validate_against_schema(cmd, capsys):
    code, out, _ = invoke(capsys, [cmd] + SAMPLE_ARGS[cmd])
    assert code == 0
    doc = json.loads(out)
    jsonschema.validate(doc, load_schema(cmd))
    # the echoed config is complete: every flag appears, defaults included
    for key in ("system", "measure", "seed", "steps", "bins", "depth", "tol", "grid", "out", "emit", "p", "x0", "eps", "partition"):
        assert key in doc["config"]


@pytest.mark.parametrize("cmd", ["simulate", "cesaro", "diagnose", "entropy"])
def test_byte_identical_reruns(cmd, capsys):
    args = [cmd] + SAMPLE_ARGS[cmd] + ["--seed", "17"]
    _, a, _ = invoke(capsys, args)
    _, b, _ = invoke(capsys, args)
    assert a == b


def test_mc_entropy_worker_invariant(capsys):
    base = ["entropy", "--system", "builtin:ifs-cantor", "--measure", "nu2:p=3/5,depth=3", "--steps", "3000", "--replicas", "8", "--seed", "5"]
    outs = []
    for w in ("1", "4", "8"):
        _, out, _ = invoke(capsys, base + ["--workers", w])
        doc = json.loads(out)
        doc["config"].pop("workers")
        outs.append(json.dumps(doc))
    assert outs[0] == outs[1] == outs[2]


def test_entropy_prints_exact_zero(capsys):
    _, out, _ = invoke(capsys, SAMPLE_ARGS["entropy"] and ["entropy"] + SAMPLE_ARGS["entropy"])
    r = json.loads(out)["result"]
    assert r["value"] == "0" and r["symbolic"] == [] and r["method"] == "exact-density"


def test_entropy_symbolic_and_decimal(capsys):
    _, out, _ = invoke(capsys, ["entropy", "--system", "builtin:prop42?p=3/5"])
    r = json.loads(out)["result"]
    assert r["symbolic"] == [{"coeff": "-1/5", "log_of": "3"}]
    assert r["value"] == "-0.219722457733622"  # 15 significant digits


def test_injectivity_message(capsys):
    _, out, err = invoke(capsys, SAMPLE_ARGS["injectivity"] and ["injectivity"] + SAMPLE_ARGS["injectivity"])
    assert "violated on (0,1); min ∫n dμ = 9/5" in err
    assert json.loads(out)["result"]["summary"] == "violated on (0,1); min ∫n dμ = 9/5"


def test_construct_nu2_residual(capsys):
    _, out, _ = invoke(capsys, ["construct", "nu2", "--p", "3/5", "--depth", "8", "--check-invariance", "--partition", "ternary:6"])
    r = json.loads(out)["result"]
    assert F(r["residual"]["hi"]) <= 2 * F(2, 3) ** 9
    assert r["residual_within_bound"] is True


def test_csv_header_and_config(capsys):
    _, out, _ = invoke(capsys, ["ulam", "--system", "builtin:example34", "--bins", "8", "--grid", "dyadic", "--emit", "csv"])
    lines = out.splitlines()
    assert lines[0].startswith("# config: ")
    json.loads(lines[0][len("# config: ") :])
    assert lines[1] == "class,bin,mass"
    assert "0,0,1/2" in lines


def test_atomic_out_file(tmp_path, capsys):
    target = tmp_path / "res.json"
    code, out, _ = invoke(capsys, ["injectivity", "--system", "builtin:example34", "--out", str(target)])
    assert code == 0 and out == ""
    assert json.loads(target.read_text())["result"]["injective"] is True
    assert [p.name for p in tmp_path.iterdir()] == ["res.json"]


def test_exit_codes(tmp_path, capsys, monkeypatch):
    bad = tmp_path / "bad.json"
    bad.write_text('{"maps": [{"breakpoints": ["0","1"], "values": ["0","1"], "prob": "1/2"},\n {"breakpoints": ["0","1"], "values": ["1","0"], "prob": "1/3"}]}')
    code, _, err = invoke(capsys, ["simulate", "--system", str(bad)])
    assert code == 2 and "probabilities sum 5/6 ≠ 1" in err
    code, _, _ = invoke(capsys, ["simulate", "--no-such-flag"])
    assert code == 2
    code, _, _ = invoke(capsys, ["entropy", "--system", "builtin:prop42?p=2"])
    assert code == 2
    monkeypatch.setenv("SDS_MAX_SEMIGROUP", "4")
    code, _, err = invoke(capsys, ["diagnose", "--system", "builtin:prop42"])
    assert code == 3 and "exceeded" in err


def test_parse_errors_have_locations():
    with pytest.raises(ValidationError, match="line 2"):
        parse_system('{"maps": [\n  {"breakpoints": ["0", "1"],, }]}')
    with pytest.raises(ValidationError, match=r"maps\[1\]\.values"):
        parse_system('{"maps": [{"breakpoints": ["0","1"], "values": ["0","1"], "prob": "1/2"}, {"breakpoints": ["0","1"], "values": ["0","x"], "prob": "1/2"}]}')
    with pytest.raises(ValidationError, match="ascending"):
        parse_system('{"maps": [{"breakpoints": ["0","2/3","1/3","1"], "values": ["0","1","0","1"], "prob": "1"}]}')
    with pytest.raises(ValidationError, match="outside"):
        parse_system('{"maps": [{"breakpoints": ["0","1"], "values": ["0","3/2"], "prob": "1"}]}')
    with pytest.raises(ValidationError, match="equal consecutive"):
        parse_system('{"maps": [{"breakpoints": ["0","1/2","1"], "values": ["0","0","1"], "prob": "1"}]}')


def test_round_trip(tmp_path):
    text = serialize_system(prop42(F(3, 5)))
    assert serialize_system(parse_system(text)) == text
    path = tmp_path / "p.json"
    path.write_text(text)
    sys_ = load_system(str(path))
    assert sys_.probs == (F(3, 5), F(1, 5), F(1, 5))
    jsonschema.validate(json.loads(text), load_schema("system"))


def test_canonical_example34_file(tmp_path):
    text = serialize_system(load_system("builtin:example34"))
    sys_ = parse_system(text)
    assert len(sys_) == 2


def test_measure_literals(tmp_path):
    assert parse_measure("lebesgue") == LEBESGUE
    assert parse_measure("eta") is ETA
    assert parse_measure("uniform:1/4,3/4") == PwcDensity.uniform(F(1, 4), F(3, 4))
    at = parse_measure("atoms:(3/10,1/2);(7/10,1/2)")
    assert isinstance(at, AtomicMeasure) and at.interval_mass((0, F(1, 2))).lo == F(1, 2)
    assert parse_measure("nu1:p=3/5,depth=3").tail == F(2, 3) ** 4
    f = tmp_path / "d.json"
    f.write_text('{"breakpoints": ["0", "1/2", "1"], "densities": ["3/2", "1/2"]}')
    assert parse_measure(str(f)).interval_mass((0, F(1, 2))).lo == F(3, 4)
    for bad in ("gauss", "uniform:1", "atoms:(1,2,3)", "nu1:q=3"):
        with pytest.raises(ValidationError):
            parse_measure(bad)
