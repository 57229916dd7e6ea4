"""Chain CSV parsing and versioned JSON report round-trips."""

import json
import math

import pytest

from quadprice.calibration import CalibrationSettings, OptionChain, local_stage, make_synthetic_chain
from quadprice.census import SamplingPlan, run_problematic_census, run_switch_census
from quadprice.chainio import (CHAIN_COLUMNS, ChainParseError, SCHEMA_VERSION,
                               dump_report, load_report, read_chain,
                               report_kind, write_chain)
from quadprice.model import MarketQuote
from quadprice.pricing import price_call
from quadprice.quadrature import QuadSpec, integrate
from quadprice.testcases import get

GOOD_HEADER = "tau,strike,rate,spot,mid,bid,ask\n"
GOOD_ROW = "0.5,100.0,0.01,100.0,10.0,9.5,10.5\n"


def write(tmp_path, text, name="chain.csv"):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return p


def sample_chain():
    q1 = MarketQuote(tau=0.123456789012345, strike=6250.0, rate=0.009,
                     spot=6721.8, bid=541.25, ask=543.75, mid=542.5)
    q2 = MarketQuote(tau=1.5, strike=90.0, rate=0.0, spot=100.0,
                     bid=12.0 + 1e-13, ask=12.5, mid=12.25)
    return OptionChain(quotes=(q1, q2))


# ---------------------------------------------------------------- chain CSV

def test_chain_round_trip(tmp_path):
    chain = sample_chain()
    path = tmp_path / "chain.csv"
    write_chain(chain, path)
    assert read_chain(path) == chain          # repr serialization is lossless


def test_header_any_order_and_case(tmp_path):
    p = write(tmp_path,
              "Strike, ASK, tau, Mid, rate, SPOT, bid\n"
              "100.0, 10.5, 0.5, 10.0, 0.01, 100.0, 9.5\n")
    chain = read_chain(p)
    q = chain.quotes[0]
    assert (q.tau, q.strike, q.mid) == (0.5, 100.0, 10.0)
    assert (q.bid, q.ask) == (9.5, 10.5)


def test_extra_columns_and_comments_ignored(tmp_path):
    p = write(tmp_path,
              "# option chain, afternoon snapshot\n"
              "\n"
              "tau,strike,rate,spot,mid,bid,ask,volume\n"
              "# the row below is the near contract\n"
              + GOOD_ROW.rstrip("\n") + ",1234\n")
    chain = read_chain(p)
    assert len(chain) == 1 and chain.quotes[0].strike == 100.0


def test_missing_file_column(tmp_path):
    p = write(tmp_path, "tau,strike,rate,spot,mid,bid\n0.5,100,0.01,100,10,9.5\n")
    with pytest.raises(ChainParseError, match=r"missing column\(s\) ask"):
        read_chain(p)


def test_empty_and_header_only(tmp_path):
    with pytest.raises(ChainParseError, match="no header"):
        read_chain(write(tmp_path, "# nothing here\n\n"))
    with pytest.raises(ChainParseError, match="no data rows"):
        read_chain(write(tmp_path, GOOD_HEADER, name="h.csv"))


def test_bad_number_names_line_and_token(tmp_path):
    p = write(tmp_path, GOOD_HEADER + "oops,100.0,0.01,100.0,10.0,9.5,10.5\n")
    with pytest.raises(ChainParseError, match=r"line 2: bad number 'oops' in column 'tau'"):
        read_chain(p)


def test_short_row_rejected(tmp_path):
    p = write(tmp_path, GOOD_HEADER + "0.5,100.0,0.01\n")
    with pytest.raises(ChainParseError, match="line 2: expected at least 7 fields, got 3"):
        read_chain(p)


def test_crossed_and_nonpositive_rejected(tmp_path):
    p = write(tmp_path, GOOD_HEADER + "0.5,100.0,0.01,100.0,10.0,10.6,10.5\n")
    with pytest.raises(ChainParseError, match="line 2: bid 10.6 exceeds ask 10.5"):
        read_chain(p)
    p = write(tmp_path, GOOD_HEADER + "0.5,100.0,0.01,100.0,0.0,9.5,10.5\n",
              name="mid.csv")
    with pytest.raises(ChainParseError, match="mid must be positive"):
        read_chain(p)


def test_quote_level_rejection_carries_line(tmp_path):
    p = write(tmp_path, GOOD_HEADER
              + GOOD_ROW
              + "-0.5,100.0,0.01,100.0,10.0,9.5,10.5\n")
    with pytest.raises(ChainParseError, match="line 3"):
        read_chain(p)


def test_zero_spread_is_chain_invariant_not_parse_error(tmp_path):
    p = write(tmp_path, GOOD_HEADER + "0.5,100.0,0.01,100.0,10.0,10.0,10.0\n")
    with pytest.raises(ValueError, match="zero spread") as exc:
        read_chain(p)
    assert not isinstance(exc.value, ChainParseError)


def test_parse_error_is_a_value_error():
    assert issubclass(ChainParseError, ValueError)
    assert CHAIN_COLUMNS == ("tau", "strike", "rate", "spot", "mid", "bid", "ask")


# ------------------------------------------------------------- JSON reports

def test_quadrature_report_round_trip(tmp_path):
    res = integrate(lambda x: x * x, 0.0, 1.0, QuadSpec())
    p = tmp_path / "quad.json"
    dump_report(res, p)
    assert report_kind(res) == "quadrature"
    assert load_report(p) == res


def test_price_report_round_trip_with_infinities(tmp_path):
    case = get("tc1", sigma=1e-5)      # decision carries +-inf order terms
    res = price_call(case.params, case.quote)
    assert math.isinf(res.decision.o)
    p = tmp_path / "price.json"
    dump_report(res, p)
    loaded = load_report(p)
    assert loaded == res
    assert loaded.decision.o == math.inf and loaded.decision.o2 == -math.inf


def test_study_report_round_trip(tmp_path):
    rep = run_switch_census(SamplingPlan(n=20, sigma_range=(1e-6, 1e-5)))
    p = tmp_path / "study.json"
    dump_report(rep, p)
    assert load_report(p) == rep
    rich = run_problematic_census(SamplingPlan(n=2, sigma_range=(1e-5, 1e-4)))
    dump_report(rich, p)
    assert load_report(p) == rich


def test_calibration_report_round_trip(tmp_path):
    chain = make_synthetic_chain("heston", [0.05, 2.0, 0.04, 0.4, -0.6],
                                 n=4, seed=3)
    settings = CalibrationSettings(model="heston", population=4, generations=1,
                                   lsq_max_iters=2, digits=20)
    rep = local_stage([0.05, 2.0, 0.04, 0.4, -0.6], chain, settings)
    p = tmp_path / "cal.json"
    dump_report(rep, p)
    assert load_report(p) == rep


def test_report_kind_rejects_unknown():
    with pytest.raises(TypeError, match="no report kind"):
        report_kind(object())


def test_envelope_validation(tmp_path):
    res = integrate(lambda x: x, 0.0, 1.0, QuadSpec())
    p = tmp_path / "r.json"
    dump_report(res, p)
    env = json.loads(p.read_text())
    assert env["schema_version"] == SCHEMA_VERSION

    env["schema_version"] = 99
    p.write_text(json.dumps(env))
    with pytest.raises(ValueError, match="unsupported schema_version"):
        load_report(p)

    env["schema_version"] = SCHEMA_VERSION
    env["kind"] = "mystery"
    p.write_text(json.dumps(env))
    with pytest.raises(ValueError, match="unknown report kind"):
        load_report(p)
