import csv
import io
import json
import math

import numpy as np
import pytest

from latmon.core.exceptions import AccuracyError
from latmon.main import main
from latmon.services import latsum, monotone, orthofam


@pytest.fixture
def cli(capsys):
    """Runs the CLI and returns (exit code, parsed stdout)"""

    def run(*argv):
        code = main(list(argv))
        out = capsys.readouterr().out
        if "--csv" in argv:
            return code, list(csv.DictReader(io.StringIO(out)))
        return code, json.loads(out) if out.strip() else None

    return run


def _record(data, name):
    return next(r for r in data["records"] if r["record"] == name)


def test_latsum_all_methods(cli):
    code, data = cli("latsum", "--dim", "2", "--p", "2", "--m", "1")
    assert code == 0
    assert data["status"] == "success"
    assert data["run_id"]
    names = {r["record"] for r in data["records"]}
    assert {"direct", "theta", "bessel", "direct-theta", "direct-bessel", "theta-bessel"} <= names
    assert all(r["passed"] for r in data["records"])
    assert _record(data, "bessel")["reference"] == 1.0
    assert _record(data, "direct-theta")["reference"] == pytest.approx(1e-9)


def test_latsum_cubic_with_derivative(cli):
    code, data = cli("latsum", "--dim", "3", "--p", "2", "--m", "1", "--method", "theta", "--derivative")
    assert code == 0
    assert _record(data, "theta")["value"] < math.pi**2
    assert _record(data, "dI/dm")["passed"]


def test_latsum_m_zero(cli):
    code, data = cli("latsum", "--dim", "2", "--p", "2", "--m", "0")
    assert code == 0
    assert [r["record"] for r in data["records"]] == ["direct"]
    assert _record(data, "direct")["value"] == 0.0


@pytest.mark.parametrize(
    "argv",
    [
        ("latsum", "--dim", "3", "--p", "1.4", "--m", "1"),
        ("latsum", "--dim", "3", "--p", "2", "--m", "1", "--method", "bessel"),
        ("latsum", "--dim", "2", "--p", "2", "--m", "-1"),
        ("certify", "--condition", "condmon", "--y-min", "2", "--y-max", "1"),
        ("dimbound", "--model", "ns2d", "--nu", "0.01", "--area", "1"),
        ("dimbound", "--model", "alpha2d", "--gamma", "1", "--alpha", "0.1"),
    ],
)
def test_domain_errors_exit_2(cli, argv):
    code, data = cli(*argv)
    assert code == 2
    assert data["status"] == "failure"
    assert data["exit_code"] == 2


def test_usage_errors_exit_2(cli, capsys):
    assert main(["latsum", "--dim", "4", "--p", "2", "--m", "1"]) == 2
    assert main(["nope"]) == 2
    assert capsys.readouterr().out == ""


def test_missing_parameter_is_named(cli):
    code, data = cli("dimbound", "--model", "ns2d", "--nu", "0.01", "--area", "1")
    assert code == 2
    assert data["error"]["missing"] == ["f_l2"]


def test_certify(cli):
    code, data = cli("certify", "--condition", "condmon", "--y-min", "0.5", "--y-max", "100", "--samples", "2000")
    assert code == 0
    assert _record(data, "violations")["value"] == 0.0
    assert _record(data, "min_value")["value"] == pytest.approx(0.0396, abs=1e-4)
    y_star = _record(data, "y_star")
    assert y_star["value"] == pytest.approx(y_star["reference"], abs=1e-10)


def test_certify_violation_exits_1(cli, monkeypatch):
    monkeypatch.setitem(
        monotone._LOG10_EVALUATORS, "suff3_3d", lambda y: np.where(y > 1.0, -np.inf, 0.0)
    )
    code, data = cli("certify", "--condition", "suff3", "--samples", "1000")
    assert code == 1
    assert data["status"] == "failure"
    assert _record(data, "violations")["value"] > 0


def test_dimbound_ns2d(cli):
    code, data = cli("dimbound", "--model", "ns2d", "--nu", "0.01", "--area", "1", "--f-norm", "1", "--q-table")
    assert code == 0
    assert _record(data, "grashof")["value"] == pytest.approx(1e4)
    assert _record(data, "li_yau")["value"] == pytest.approx(541.8, abs=0.5)
    assert _record(data, "pre_lt")["value"] == pytest.approx(2.389e5, abs=1e2)
    lt = _record(data, "n_lifschitz_lieb_thirring")
    assert lt["value"] <= lt["reference"]
    assert any(r["kind"] == "q_table" for r in data["records"])


def test_dimbound_selectors(cli):
    code, data = cli("dimbound", "--model", "ns2d", "--nu", "1", "--area", "1", "--f-norm", "1", "--clt", "lt")
    assert code == 0
    assert _record(data, "clt")["value"] == pytest.approx(1.5)
    code, _ = cli("dimbound", "--model", "ns2d", "--nu", "1", "--area", "1", "--f-norm", "1", "--clt", "bogus")
    assert code == 2


@pytest.mark.parametrize(
    "argv,expected",
    [
        (("--model", "alpha2d", "--bc", "no-boundary", "--curl-g-norm", "1", "--g-norm", "1"), 10 / (8 * math.pi)),
        (("--model", "alpha2d", "--bc", "proper", "--g-norm", "1"), 50 / (8 * math.pi)),
        (("--model", "alpha3d", "--g-norm", "1"), 0.1**-2.5 / (12 * math.pi)),
    ],
)
def test_dimbound_alpha(cli, argv, expected):
    code, data = cli("dimbound", "--gamma", "1", "--alpha", "0.1", *argv)
    assert code == 0
    assert data["records"][0]["value"] == pytest.approx(expected, rel=1e-10)


@pytest.mark.parametrize(
    "argv",
    [
        ("--check", "liebd2", "--n", "3", "--p", "2"),
        ("--check", "gagnir", "--q", "4"),
        ("--check", "alpha", "--n", "3", "--alpha", "0.5"),
    ],
)
def test_fuzz(cli, argv):
    code, data = cli("fuzz", "--trials", "3", "--seed", "7", "--k-max", "4", *argv)
    assert code == 0
    assert data["seeds"] == [7]
    assert _record(data, "passed")["value"] == 3.0


def test_fuzz_failure_exits_1(cli, monkeypatch):
    from latmon.schemas.orthofam import LiebThirringCheck

    def failing(fam, p):
        return LiebThirringCheck(p=p, n=fam.n, m=fam.m, lhs=2.0, rhs=1.0, holds=False)

    monkeypatch.setattr(orthofam, "check_liebd2", failing)
    code, data = cli("fuzz", "--check", "liebd2", "--trials", "2", "--seed", "5", "--k-max", "3")
    assert code == 1
    assert _record(data, "first_failing_seed")["value"] == 5.0


def test_numerical_failure_exits_3(cli, monkeypatch):
    def broken(q):
        raise AccuracyError("quadrature did not converge", {"levels": 6})

    monkeypatch.setattr(latsum, "theta_integral", broken)
    code, data = cli("latsum", "--dim", "2", "--p", "2", "--m", "1", "--method", "theta")
    assert code == 3
    assert data["error"] == {"levels": 6}


def test_disagreement_exits_3(cli, monkeypatch):
    original = latsum.bessel_series

    def shifted(q, shells=None):
        result = original(q, shells)
        return result.model_copy(update={"value": result.value + 1e-3})

    monkeypatch.setattr(latsum, "bessel_series", shifted)
    code, data = cli("latsum", "--dim", "2", "--p", "2", "--m", "1")
    assert code == 3
    assert _record(data, "theta-bessel")["passed"] is False


def test_error_bounds_do_not_widen_the_agreement_window(cli, monkeypatch):
    original = latsum.bessel_series

    def loose(q, shells=None):
        result = original(q, shells)
        return result.model_copy(update={"value": result.value + 1e-6, "error_bound": 1.0})

    monkeypatch.setattr(latsum, "bessel_series", loose)
    code, data = cli("latsum", "--dim", "2", "--p", "2", "--m", "1")
    assert code == 3
    row = _record(data, "direct-bessel")
    assert row["passed"] is False
    assert row["reference"] == pytest.approx(1e-9)
    assert row["error_bound"] >= 1.0


def test_csv_matches_json(cli):
    argv = ("latsum", "--dim", "2", "--p", "3", "--m", "0.5", "--method", "bessel")
    _, data = cli(*argv)
    code, rows = cli(*argv, "--csv")
    assert code == 0
    assert list(rows[0].keys()) == ["record", "kind", "value", "reference", "error_bound", "passed", "detail"]
    assert float(rows[0]["value"]) == _record(data, "bessel")["value"]
    assert rows[0]["passed"] == "true"


def test_csv_failure_carries_the_error(cli):
    code, rows = cli("latsum", "--dim", "2", "--p", "2", "--m", "-1", "--csv")
    assert code == 2
    assert len(rows) == 1
    assert rows[0]["record"] == "error" and rows[0]["passed"] == "false"
    assert rows[0]["detail"]
