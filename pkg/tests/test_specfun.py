import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from greenks.specfun import UnsupportedOrderError, bessel_k, bessel_k_asymptotic
from oracles import bessel_k_quadrature

SUPPORTED = (0.0, 0.5, -0.5, 1.0)


def test_half_integer_closed_form():
    # K_{1/2}(r) = sqrt(pi/(2r)) e^{-r}
    expected = math.sqrt(math.pi / 2.0) * math.exp(-1.0)
    assert bessel_k(0.5, 1.0) == pytest.approx(expected, rel=1e-14)
    assert expected == pytest.approx(0.46106850, rel=1e-7)


def test_evenness_is_exact():
    for r in (0.01, 0.3, 2.0, 15.0):
        assert bessel_k(-0.5, r) == bessel_k(0.5, r)
        assert bessel_k(-1.0, r) == bessel_k(1.0, r)


def test_integer_order_zero_reference_value():
    # frozen from the quadrature oracle: int_0^inf e^{-cosh s} ds
    assert bessel_k(0, 1.0) == pytest.approx(0.42102444, abs=5e-9)


def test_oracle_agreement_spot():
    for nu in SUPPORTED:
        for r in (0.01, 0.1, 1.0, 5.0, 19.0):
            ref = bessel_k_quadrature(nu, r)
            assert bessel_k(nu, r) == pytest.approx(ref, rel=1e-10)


def test_monotone_decreasing_in_r():
    r = np.logspace(-2, math.log10(20.0), 200)
    for nu in SUPPORTED:
        vals = bessel_k(nu, r)
        assert np.all(np.diff(vals) < 0)


@given(st.floats(min_value=0.02, max_value=19.0),
       st.floats(min_value=1e-3, max_value=0.9))
@settings(max_examples=50, deadline=None)
def test_monotone_random_pairs(r, frac):
    r_small = r * frac
    for nu in SUPPORTED:
        assert bessel_k(nu, r_small) > bessel_k(nu, r)


def test_asymptotic_ratio_at_30():
    for nu in (0.0, 0.5, 1.0):
        ratio = bessel_k(nu, 30.0) / bessel_k_asymptotic(30.0)
        assert 0.95 <= ratio <= 1.05


def test_rejects_nonpositive_argument():
    with pytest.raises(ValueError):
        bessel_k(0.5, 0.0)
    with pytest.raises(ValueError):
        bessel_k(0, -1.0)


def test_rejects_unsupported_order():
    with pytest.raises(UnsupportedOrderError):
        bessel_k(0.3, 1.0)


def test_array_argument_matches_scalars():
    r = np.array([0.5, 1.0, 2.0])
    vals = bessel_k(1.0, r)
    for ri, vi in zip(r, vals):
        assert vi == bessel_k(1.0, float(ri))
