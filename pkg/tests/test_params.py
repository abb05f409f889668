from __future__ import annotations

import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from gaussflow.params import (
    FlowDomainError,
    FlowParams,
    classify_g_regularity,
    classify_v_regularity,
    derive_exponents,
    floor_strict,
    near_integer,
)


@pytest.mark.parametrize("n,p,sigma", [(2, 1.0, 1.0), (3, 1.0, 2.0), (2, 2.0, 1.5), (3, 0.75, 3 - 4 / 3)])
def test_sigma_is_n_minus_inverse_p(n, p, sigma):
    params = derive_exponents(n, p)
    assert params.sigma_p == pytest.approx(sigma, abs=1e-15)
    assert params.persistent


def test_speed_exponent():
    assert derive_exponents(2, 1.0).speed_exponent == 1.5
    assert derive_exponents(3, 2.0).speed_exponent == 4.5


def test_boundary_case_rejected_for_flat_side_runs():
    assert derive_exponents(2, 0.5).sigma_p == 0.0
    with pytest.raises(FlowDomainError):
        derive_exponents(2, 0.5, flat_side=True)
    with pytest.raises(FlowDomainError):
        derive_exponents(3, 0.2, flat_side=True)


@pytest.mark.parametrize("kw", [dict(n=1, p=1.0), dict(n=2, p=0.0), dict(n=2, p=-1.0), dict(n=2, p=math.nan),
                                dict(n=2, p=math.inf), dict(n=2, p=1.0, t_horizon=-1.0)])
def test_invalid_parameters(kw):
    with pytest.raises(FlowDomainError):
        FlowParams(**kw)


def test_floor_strict_and_near_integer():
    assert floor_strict(2.0) == 1
    assert floor_strict(2.0 + 1e-12) == 1
    assert floor_strict(4 / 3) == 1
    assert floor_strict(0.8) == 0
    assert near_integer(3.0 - 1e-11)
    assert not near_integer(3.0 - 1e-6)


def test_round_trip_dict():
    params = derive_exponents(3, 0.75, t_horizon=0.2)
    assert FlowParams.from_dict(params.to_dict()) == params


# hand-computed table over (n, p) in {2, 3} x {0.6, 0.75, 1, 2}:
# (g smooth, g order, g beta0, v smooth, v order, v exponent)
TABLE = {
    (2, 0.6): (True, None, None, True, None, None),
    (2, 0.75): (True, None, None, False, 2, 0.5),
    (2, 1.0): (True, None, None, True, None, None),
    (2, 2.0): (False, 1, 2 / 3, False, 1, 2 / 3),
    (3, 0.6): (False, 1, 1.0, False, 1, 0.75),
    (3, 0.75): (False, 1, 0.4, False, 1, 0.6),
    (3, 1.0): (True, None, None, False, 1, 0.5),
    (3, 2.0): (False, 0, 1.0, False, 1, 0.4),
}


@pytest.mark.parametrize("key", sorted(TABLE))
def test_classifier_table(key):
    g_smooth, g_order, g_beta, v_smooth, v_order, v_exp = TABLE[key]
    params = derive_exponents(*key, flat_side=True)
    g = classify_g_regularity(params)
    v = classify_v_regularity(params)
    assert g.smooth is g_smooth and v.smooth is v_smooth
    assert g.order == g_order and v.order == v_order
    if g_beta is None:
        assert g.holder_exponent is None
    else:
        assert g.holder_exponent == pytest.approx(g_beta, abs=1e-12)
    if v_exp is None:
        assert v.holder_exponent is None
    else:
        assert v.holder_exponent == pytest.approx(v_exp, abs=1e-12)


def test_split_case_labels():
    params = derive_exponents(2, 0.75)
    assert classify_g_regularity(params).smooth
    assert classify_v_regularity(params).label() == "v in C^{2, 0.5}"
    assert classify_g_regularity(derive_exponents(2, 2.0)).label() == "g in C_mu^{1, 2+0.666667}"


def test_classifiers_reject_nonpersistent():
    params = derive_exponents(2, 0.4)
    with pytest.raises(FlowDomainError):
        classify_g_regularity(params)
    with pytest.raises(FlowDomainError):
        classify_v_regularity(params)


def test_rational_sweep_smooth_when_two_over_sigma_is_integer():
    for n in (2, 3, 4):
        for k in range(1, 21):
            for m in range(1, 21):
                p = Fraction(k, m)
                sigma = n - 1 / p
                if sigma <= 0:
                    continue
                params = derive_exponents(n, float(p))
                g = classify_g_regularity(params)
                v = classify_v_regularity(params)
                if (2 / sigma).denominator == 1:
                    assert g.smooth, (n, p)
                if v.smooth:
                    assert g.smooth, (n, p)


@given(n=st.integers(2, 6), p=st.floats(0.05, 50.0, allow_nan=False))
def test_beta0_range_and_order(n, p):
    params = derive_exponents(n, p)
    if not params.persistent or params.sigma_p < 1e-6:
        return
    g = classify_g_regularity(params)
    two_over = 2.0 / params.sigma_p
    assert 0 <= g.k0 < two_over
    if not near_integer(two_over):
        assert not g.smooth
        assert 0 < g.beta0 <= 1
        assert g.order == math.floor(two_over)
