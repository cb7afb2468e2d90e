import io
import json
import math

import pytest

from qutrit_schmidt import core
from qutrit_schmidt.cli import (
    QutritSpec,
    _parse_complex,
    cmd_canonicalize,
    cmd_decompose,
    cmd_simulate,
    golden_fixtures,
    main,
    run_selftest,
    spec_from_json,
)
from qutrit_schmidt.errors import InvalidTrials, ParseError


def _all_ok(rep):
    return all(c["ok"] for c in rep["checks"])


@pytest.mark.parametrize("tok, expected", [
    ([0.6, -0.8], 0.6 - 0.8j),
    ({"mag": 2.0, "phase_deg": 90.0}, 2j),
    (0.5, 0.5),
    ("0.6,-0.8", 0.6 - 0.8j),
    ("1@180", -1),
    ("1+2i", 1 + 2j),
])
def test_parse_complex(tok, expected):
    assert _parse_complex(tok) == pytest.approx(expected, abs=1e-15)


@pytest.mark.parametrize("tok", ["abc", [1, 2, 3], {"re": 1}, None])
def test_parse_complex_rejects(tok):
    with pytest.raises(ParseError):
        _parse_complex(tok)


def test_decompose_hv_report():
    rep = cmd_decompose(QutritSpec(family="hv"))
    d = rep["decomposition"]
    assert d["lambda_plus"] == pytest.approx(0.5, abs=1e-12)
    assert d["concurrence"] == pytest.approx(1.0, abs=1e-12)
    assert d["schmidt_number"] == pytest.approx(2.0, abs=1e-12)
    assert _all_ok(rep)


def test_decompose_product_report():
    rep = cmd_decompose(QutritSpec(amplitudes=(1, 0, 0)))
    d = rep["decomposition"]
    assert (d["lambda_plus"], d["lambda_minus"]) == (1.0, 0.0)
    assert d["concurrence"] == 0.0 and d["schmidt_number"] == 1.0
    assert d["mode_minus_null"]
    assert _all_ok(rep)


def test_decompose_c3zero_report():
    spec = spec_from_json({"family": "c3zero", "params": [60, math.degrees(0.7)]})
    rep = cmd_decompose(spec)
    d = rep["decomposition"]
    assert (d["lambda_plus"], d["lambda_minus"]) == pytest.approx((0.9, 0.1), abs=1e-12)
    assert d["mode_plus"]["beta"]["phase"] == pytest.approx(0.7, abs=1e-12)
    assert _all_ok(rep)


def test_canonicalize_reports():
    rep = cmd_canonicalize(QutritSpec(family="hv"))
    assert rep["canonical"]["lambda_plus"] == pytest.approx(0.5, abs=1e-12)
    assert _all_ok(rep)
    rep = cmd_canonicalize(QutritSpec(amplitudes=(0.8, 0, 0.6)))
    assert rep["canonical"]["phi"] == pytest.approx(0.0, abs=1e-15)
    u = rep["canonical"]["unitary"]
    # identity up to a phase
    assert abs(complex(*u[0][1])) <= 1e-15 and abs(complex(*u[1][0])) <= 1e-15


def test_simulate_hv():
    rep = cmd_simulate(QutritSpec(family="hv"), 10**6, seed=1)
    est = rep["estimate"]
    assert est["lambda_plus_hat"] == pytest.approx(0.5, abs=3 * 0.5 / 1000)
    dphi = math.remainder(est["phi_hat"] - abs(rep["true"]["phi"]), math.pi)
    assert abs(dphi) <= 3 * est["std_errors"]["phi"]


def test_simulate_product_flags_phi():
    rep = cmd_simulate(QutritSpec(amplitudes=(1, 0, 0)), 1000, seed=1)
    assert rep["estimate"]["phi_identifiable"] is False
    assert rep["estimate"]["phi_hat"] is None


def test_simulate_rejects_zero_trials():
    with pytest.raises(InvalidTrials):
        cmd_simulate(QutritSpec(family="hv"), 0, seed=1)


def test_exit_codes(capsys):
    assert main(["decompose", "--family", "hv"]) == 0
    assert main(["decompose", "--amplitudes", "0,0", "0,0", "0,0"]) == 2
    assert main(["decompose", "--family", "c2zero", "--params", "0.8"]) == 2
    assert main(["decompose", "--family", "nope"]) == 2
    assert main(["simulate", "--family", "hv", "--trials", "0"]) == 2
    # an impossible tolerance turns into a violation
    assert main(["decompose", "--family", "random", "--seed", "4", "--tol-magic", "-1"]) == 1
    err = capsys.readouterr().err
    assert "magic" in err


def test_json_input_file(tmp_path, capsys):
    f = tmp_path / "state.json"
    f.write_text(json.dumps({"amplitudes": [[0.6, 0], {"mag": 0, "phase_deg": 0}, [0, 0.8]]}))
    assert main(["decompose", "--input", str(f), "--json"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["decomposition"]["lambda_plus"] == pytest.approx(0.64, abs=1e-12)
    f.write_text("{not json")
    assert main(["decompose", "--input", str(f)]) == 2
    assert main(["decompose", "--input", str(tmp_path / "missing.json")]) == 2


def test_spec_validation():
    with pytest.raises(ParseError):
        spec_from_json({"amplitudes": [1, 0, 0], "family": "hv"})
    with pytest.raises(ParseError):
        spec_from_json([1, 0, 0])
    with pytest.raises(ParseError):
        QutritSpec(amplitudes=(1, 0)).resolve()


@pytest.mark.parametrize("argv", [
    ["decompose", "--family", "random", "--seed", "9", "--json"],
    ["canonicalize", "--family", "random", "--seed", "9"],
    ["simulate", "--family", "c3zero", "--params", "40", "25", "--trials", "5000", "--seed", "3",
     "--resolve-sign", "--json"],
])
def test_reports_are_byte_identical(argv, capsys):
    main(argv)
    first = capsys.readouterr().out
    main(argv)
    assert capsys.readouterr().out == first
    assert first


def test_selftest_passes():
    out = io.StringIO()
    assert run_selftest(200, seed=1, out=out)
    assert "FAIL" not in out.getvalue()


def test_selftest_negative_control():
    fx = golden_fixtures()
    name, q, lp, modes = fx[0]
    fx[0] = (name, q, lp + 1e-6, modes)
    out = io.StringIO()
    assert not run_selftest(0, fixtures=fx, out=out)
    assert out.getvalue().startswith("FAIL")


def test_selftest_cli(capsys):
    assert main(["selftest", "--random", "50"]) == 0
    assert "FAIL" not in capsys.readouterr().out


def test_selftest_fixtures_are_states():
    for _, q, lp, _ in golden_fixtures():
        assert isinstance(q, core.QutritState) and 0.5 <= lp <= 1.0


@pytest.mark.slow
def test_selftest_hundred_thousand_random():
    import time
    t0 = time.perf_counter()
    assert run_selftest(100_000, seed=0, out=io.StringIO())
    assert time.perf_counter() - t0 < 120
