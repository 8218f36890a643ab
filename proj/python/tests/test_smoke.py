import os
import pathlib

import pytest

import bubbletree

DATA = pathlib.Path(os.environ.get("BUBBLETREE_DATA", pathlib.Path(__file__).resolve().parents[2] / "data"))


def value(report, key):
    return next(v["value"] for v in report["values"] if v["key"] == key)


def verdict(report, name):
    return next(v for v in report["verdicts"] if v["name"] == name)


def test_market_from_file():
    m = bubbletree.Market.from_file(str(DATA / "ex1geom.market"))
    assert m.node_ids[0] == "root"
    assert m.horizon == 1
    again = bubbletree.Market.from_text(m.to_text())
    assert again.to_text() == m.to_text()


def test_analyze_ex1():
    report = bubbletree.analyze(bubbletree.ex1())
    assert report["command"] == "analyze"
    assert value(report, "S_star_0") == pytest.approx(1.0, abs=1e-12)
    assert value(report, "inf_E_beta_1") == pytest.approx(-0.3, abs=1e-12)


def test_fiat_is_pure_bubble():
    report = bubbletree.analyze(bubbletree.fiat(6))
    sstar = next(p for p in report["processes"] if p["name"] == "Sstar")
    assert all(v == 0.0 for v in sstar["values"])


def test_price_call():
    m = bubbletree.Market.from_file(str(DATA / "ex1geom.market"))
    report = bubbletree.price(m, "ecall", 1.0)
    assert value(report, "price") == pytest.approx(0.2, abs=1e-12)
    assert verdict(report, "parity sandwich")["pass"]


def test_hedge_forms_agree():
    m = bubbletree.Market.from_file(str(DATA / "ex1geom.market"))
    a = bubbletree.hedge(m, {"u": 0.5, "d": 0.0})
    b = bubbletree.hedge(m, [0.5, 0.0])
    c = bubbletree.hedge_claim(m, "ecall", 1.0)
    assert value(a, "price") == pytest.approx(value(b, "price"))
    assert value(a, "price") == pytest.approx(value(c, "price"))
    assert value(bubbletree.hedge(m, 2.0), "price") == pytest.approx(2.0, abs=1e-9)


def test_classify_and_dominance():
    report = bubbletree.classify(bubbletree.ex1(0.2, 0.4), "W")
    assert report["facts"]
    dom = bubbletree.dominance(bubbletree.Market.from_file(str(DATA / "overpriced.market")))
    assert value(dom, "hedge_cost") == pytest.approx(0.9, abs=1e-9)


def test_errors_carry_code():
    with pytest.raises(bubbletree.Error) as info:
        bubbletree.dominance(bubbletree.ex1())
    assert info.value.code == "arbitrage"
    assert info.value.exit_code == 2
    with pytest.raises(bubbletree.Error) as info:
        bubbletree.Market.from_text("horizon 1\n")
    assert info.value.code == "invalid input"
