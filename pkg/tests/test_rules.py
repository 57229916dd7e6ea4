"""Quadrature rule construction: exactness, symmetry, the GK cross-check."""

import numpy as np
import pytest

from quadprice.rules import (EmbeddedRule, G7_WEIGHTS, GK715_TABLE,
                             gauss_legendre_rule, kronrod_extension,
                             lobatto_kronrod_rule, map_to_panel)


def moment(k: int) -> float:
    # integral of x^k over [-1, 1]
    return 0.0 if k % 2 else 2.0 / (k + 1)


def apply_rule(nodes, weights, k):
    return float(np.sum(weights * nodes ** k))


@pytest.mark.parametrize("n", [2, 3, 5, 8, 13, 20])
def test_gauss_legendre_degree_exactness(n):
    rule = gauss_legendre_rule(n)
    for k in range(2 * n):
        assert apply_rule(rule.nodes, rule.weights, k) == pytest.approx(
            moment(k), abs=1e-13)
    # degree 2n is the first one the rule must miss
    err = abs(apply_rule(rule.nodes, rule.weights, 2 * n) - moment(2 * n))
    assert err > 1e-12


def test_gauss_legendre_structure():
    rule = gauss_legendre_rule(12)
    assert np.all(np.diff(rule.nodes) > 0)
    assert np.allclose(rule.nodes, -rule.nodes[::-1], atol=1e-15)
    assert np.all(rule.weights > 0)
    assert float(np.sum(rule.weights)) == pytest.approx(2.0, abs=1e-14)


def test_gauss_legendre_endpoints():
    one = gauss_legendre_rule(1)
    assert one.nodes[0] == 0.0 and one.weights[0] == 2.0
    with pytest.raises(ValueError):
        gauss_legendre_rule(0)
    with pytest.raises(ValueError):
        gauss_legendre_rule(1025)


def test_gauss_legendre_cached():
    assert gauss_legendre_rule(16) is gauss_legendre_rule(16)


def test_gk715_matches_independent_table():
    rule = kronrod_extension(7)
    assert rule.npoints == 15
    # positive half of the derived rule against the compiled-in table
    for i, (xs, ws) in enumerate(GK715_TABLE):
        assert rule.nodes[7 + i] == pytest.approx(float(xs), abs=5e-16)
        assert rule.weights_high[7 + i] == pytest.approx(float(ws), abs=5e-16)
    for i, ws in enumerate(G7_WEIGHTS):
        assert rule.weights_low[3 + i] == pytest.approx(float(ws), abs=5e-16)


def test_gk715_embedding():
    rule = kronrod_extension(7)
    gauss = gauss_legendre_rule(7)
    assert np.all(rule.low_indices == np.arange(1, 15, 2))
    assert np.allclose(rule.nodes[rule.low_indices], gauss.nodes, atol=1e-14)
    assert float(np.sum(rule.weights_high)) == pytest.approx(2.0, abs=1e-14)
    assert float(np.sum(rule.weights_low)) == pytest.approx(2.0, abs=1e-14)


def test_gk715_exactness():
    # the 15-point Kronrod rule is exact through degree 22
    rule = kronrod_extension(7)
    for k in range(23):
        assert apply_rule(rule.nodes, rule.weights_high, k) == pytest.approx(
            moment(k), abs=1e-13)


def test_kronrod_other_sizes():
    rule = kronrod_extension(10)
    assert isinstance(rule, EmbeddedRule)
    assert rule.npoints == 21
    gauss = gauss_legendre_rule(10)
    assert np.allclose(rule.nodes[rule.low_indices], gauss.nodes, atol=1e-13)
    assert float(np.sum(rule.weights_high)) == pytest.approx(2.0, abs=1e-13)
    with pytest.raises(ValueError):
        kronrod_extension(1)


def test_lobatto_kronrod_rule():
    rule = lobatto_kronrod_rule()
    assert rule.npoints == 7
    assert rule.nodes[0] == -1.0 and rule.nodes[-1] == 1.0
    assert float(np.sum(rule.weights_high)) == pytest.approx(2.0, abs=1e-14)
    assert float(np.sum(rule.weights_low)) == pytest.approx(2.0, abs=1e-14)
    # embedded 4-point Lobatto exact through degree 5, extension through 9
    low_nodes = rule.nodes[rule.low_indices]
    for k in range(6):
        assert apply_rule(low_nodes, rule.weights_low, k) == pytest.approx(
            moment(k), abs=1e-14)
    for k in range(10):
        assert apply_rule(rule.nodes, rule.weights_high, k) == pytest.approx(
            moment(k), abs=1e-14)


def test_map_to_panel():
    nodes = np.array([-1.0, 0.0, 1.0])
    mapped = map_to_panel(2.0, 6.0, nodes)
    assert np.allclose(mapped, [2.0, 4.0, 6.0])
