import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from duelbatch.bounds import (
    BoundInputs,
    a_constant,
    bound_curve,
    c_delta,
    r_delta,
    regret_bound_expected,
    regret_bound_high_prob,
    regret_bound_terms,
)
from duelbatch.errors import DomainError

# hand-derived, cross-checked with mpmath
A_K10_D02 = 4238.65389324
A_K2_D05 = 266.168517335


def test_c_delta_examples():
    assert c_delta(2, 0.01) == 4
    assert c_delta(2, 0.25) == 1
    assert c_delta(10, 0.01) == 1
    assert c_delta((10**5) ** (1 / 16), 0.01) == 4
    with pytest.raises(DomainError):
        c_delta(1.0, 0.1)
    with pytest.raises(DomainError):
        c_delta(2.0, 1.0)


def test_a_constant_examples():
    assert a_constant(10, 0.2) == pytest.approx(A_K10_D02, rel=1e-9)
    assert a_constant(2, 0.5) == pytest.approx(A_K2_D05, rel=1e-9)
    assert a_constant(7, 0.1) / a_constant(7, 0.2) == pytest.approx(4.0, rel=1e-12)
    with pytest.raises(DomainError):
        a_constant(1, 0.2)


def test_r_delta_examples():
    A = a_constant(10, 0.2)
    assert 2 * A * math.log(A) == pytest.approx(70802.48, rel=1e-6)
    assert r_delta(2, 0.01, 10, 0.2) == 17
    # delta near 1 and a tiny A: the C(delta) + 1 floor dominates
    assert r_delta(1000.0, 0.999999, 2, 0.5) == c_delta(1000.0, 0.999999) + 1 == 2


def lemma_inequality(q, r, K, dmin):
    return q**r > 8 / dmin**2 * math.log(2 * K * K * q**r)


@pytest.mark.parametrize("q", [2.0, 2.0535, 3.0, 10.0])
@pytest.mark.parametrize("K", [2, 5, 10, 50])
@pytest.mark.parametrize("dmin", [0.05, 0.2, 0.5])
def test_r_delta_satisfies_defining_inequality(q, K, dmin):
    r0 = r_delta(q, 0.01, K, dmin)
    for r in range(r0, r0 + 11):
        assert lemma_inequality(q, r, K, dmin)


def test_shape_only_factor_two():
    T = 2**20
    inputs = BoundInputs(K=10, T=T, B=20, delta_min=0.2, delta=0.01)
    assert inputs.q == pytest.approx(2.0, rel=1e-12)


def test_expected_bound_well_defined():
    inputs = BoundInputs(K=10, T=10**5, B=16, delta_min=0.2, delta=0.01)
    gaps = [0.0] + [0.2] * 9
    v = regret_bound_expected(inputs, gaps)
    assert math.isfinite(v) and v > 0
    assert regret_bound_high_prob(inputs, gaps) > v


def test_doubling_gaps_halves_elimination_term():
    gaps = np.array([0.0, 0.1, 0.2, 0.15])
    a = regret_bound_terms(4, 2.0, 10**4, 0.1, gaps)["elimination"]
    b = regret_bound_terms(4, 2.0, 10**4, 0.1, 2 * gaps)["elimination"]
    assert b == pytest.approx(a / 2, rel=1e-12)


@pytest.mark.parametrize(
    "kwargs",
    [dict(K=1), dict(T=1), dict(B=0), dict(B=20), dict(delta_min=0.0), dict(delta_min=0.6), dict(delta=1.0)],
)
def test_bound_inputs_domain(kwargs):
    args = dict(K=4, T=10**5, B=8, delta_min=0.2, delta=0.01) | kwargs
    with pytest.raises(DomainError):
        BoundInputs(**args)


@settings(max_examples=100, deadline=None)
@given(
    K=st.integers(2, 40),
    logT=st.integers(4, 30),
    B=st.integers(1, 29),
    dmin=st.floats(0.01, 0.5),
    delta=st.floats(0.001, 0.5),
)
def test_bounds_monotone(K, logT, B, dmin, delta):
    T = 2**logT
    B = min(B, logT - 1)
    base = BoundInputs(K, T, B, dmin, delta)

    def value(inp):
        gaps = [0.0] + [inp.delta_min] * (inp.K - 1)
        return regret_bound_expected(inp, gaps), regret_bound_high_prob(inp, gaps)

    v = value(base)
    for more_B in [BoundInputs(K, T, B + 1, dmin, delta)]:
        assert all(a <= b * (1 + 1e-12) for a, b in zip(value(more_B), v))
    assert all(a >= b * (1 - 1e-12) for a, b in zip(value(BoundInputs(K + 1, T, B, dmin, delta)), v))
    assert all(a >= b * (1 - 1e-12) for a, b in zip(value(BoundInputs(K, 2 * T, B, dmin, delta)), v))
    bigger = min(0.5, dmin * 1.5)
    assert all(a <= b * (1 + 1e-12) for a, b in zip(value(BoundInputs(K, T, B, bigger, delta)), v))


def test_bound_curve_masks_short_horizons():
    out = bound_curve([1, 2, 100, 1000], 10, 2.0, 0.2, [0.0] + [0.2] * 9)
    assert math.isnan(out[0]) and np.all(np.isfinite(out[1:]))
    assert np.all(np.diff(out[1:]) > 0)
