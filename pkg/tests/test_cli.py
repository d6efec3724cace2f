import json
from importlib import resources

import jsonschema
from lattperm.cli import main

SCHEMA = json.loads(resources.files("lattperm").joinpath("schema/report.schema.json").read_text())


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_small_side_is_usage_error(capsys):
    code, _, err = run(capsys, "dimer", "count", "--d", "2", "--L", "2")
    assert code == 2 and "L >= 4" in err


def test_dimer_count_json(capsys):
    code, out, _ = run(capsys, "dimer", "count", "--d", "2", "--L", "4")
    rep = json.loads(out)
    jsonschema.validate(rep, SCHEMA)
    assert code == 0 and rep["count"] == 272
    code, out, _ = run(capsys, "dimer", "count", "--d", "2", "--L", "4", "--remove", "0,0", "--remove", "1,1")
    assert json.loads(out)["count"] == 0


def test_bad_site_is_usage_error(capsys):
    code, _, err = run(capsys, "dimer", "count", "--d", "2", "--L", "4", "--remove", "0")
    assert code == 2 and err


def test_outputs_byte_identical(capsys):
    argv = ("perm", "g", "--d", "2", "--L", "4", "--N", "2", "--rho", "0")
    _, a, _ = run(capsys, *argv)
    _, b, _ = run(capsys, *argv)
    assert a == b
    assert a.splitlines()[0] == "x_1,x_2,g_num,g_den"
    argv = ("spec", "dft", "--d", "2", "--L", "4", "--N", "2", "--rho", "1/2")
    assert run(capsys, *argv)[1] == run(capsys, *argv)[1]


def test_rational_arguments(capsys):
    code, _, err = run(capsys, "perm", "zf", "--d", "1", "--L", "4", "--N", "2", "--rho", "0.5")
    assert code == 2 and "p/q" in err
    code, out, _ = run(capsys, "perm", "zf", "--d", "1", "--L", "4", "--N", "2", "--rho", "1")
    assert json.loads(out)["Z_loop"] == "9/1"


def test_spec_il_keys(capsys):
    code, out, _ = run(capsys, "spec", "il", "--d", "3", "--L", "16")
    rep = json.loads(out)
    jsonschema.validate(rep, SCHEMA)
    assert {"I_L", "r_d_over_4d", "gap"} <= set(rep)


def test_verification_commands(capsys):
    code, out, _ = run(capsys, "spec", "verify", "--check", "hf", "--d", "2", "--L", "4", "--N", "2")
    rep = json.loads(out)
    jsonschema.validate(rep, SCHEMA)
    assert code == 0 and rep["pass"]
    code, out, _ = run(capsys, "pathweb", "verify", "--check", "components", "--d", "1", "--L", "4", "--N", "1")
    assert code == 0 and json.loads(out)["pass"]
    code, _, _ = run(capsys, "pathweb", "verify", "--check", "rp", "--d", "1", "--L", "6", "--N", "1")
    assert code == 2


def test_rwalk_and_worm(capsys, tmp_path):
    code, out, _ = run(capsys, "rwalk", "r", "--d", "3", "--grid", "128")
    rep = json.loads(out)
    assert code == 0 and {"d", "value", "err", "method"} <= set(rep)
    out_csv = tmp_path / "xi.csv"
    code, _, _ = run(capsys, "worm", "xi", "--d", "2", "--L", "6", "--sweeps", "200", "--seed", "1",
                     "--out", str(out_csv))
    assert code == 0
    meta = json.loads((tmp_path / "xi.csv.json").read_text())
    assert meta["seed"] == 1
    first = out_csv.read_text()
    run(capsys, "worm", "xi", "--d", "2", "--L", "6", "--sweeps", "200", "--seed", "1", "--out", str(out_csv))
    assert out_csv.read_text() == first


def test_verify_all_fast(capsys):
    code, out, _ = run(capsys, "verify", "all", "--tier", "fast")
    rep = json.loads(out)
    jsonschema.validate(rep, SCHEMA)
    assert code == 0 and all(c["pass"] for c in rep["checks"])
