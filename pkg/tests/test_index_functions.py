import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from core.errors import InvalidArgumentError, UnknownNameError
from entities.index_functions import (
    KIND_LOG, constant, default_log_cap, holder, logarithmic, mu_log_cap, parse_index_function,
    tabulated
)


def test_holder_values():
    phi = holder(0.5)
    assert phi(4.0) == pytest.approx(2.0)
    assert phi(0.0) == 0.0
    assert isinstance(phi(4.0), float)
    assert np.allclose(phi(np.array([1.0, 9.0])), [1.0, 3.0])


@given(gamma=st.floats(1e-3, 1e3), alpha=st.floats(1e-8, 1e2), q=st.floats(0.1, 3.0))
@settings(max_examples=50, deadline=None)
def test_holder_is_multiplicative(gamma, alpha, q):
    phi = holder(q)
    assert phi(gamma * alpha) == pytest.approx(gamma ** q * phi(alpha), rel=1e-12)


def test_logarithmic_branch_and_cap():
    phi = logarithmic(0.5)
    assert phi.cap == pytest.approx(math.exp(-1.5))
    assert phi(1e-4) == pytest.approx(abs(math.log(1e-4)) ** -0.5)
    assert phi(0.9) == pytest.approx(phi.cap_value)
    assert phi(0.0) == 0.0


def test_logarithmic_is_concave_on_its_branch():
    phi = logarithmic(0.5)
    lam = np.linspace(1e-3, 0.2, 400)
    h = lam[1] - lam[0]
    second = (phi(lam[2:]) - 2 * phi(lam[1:-1]) + phi(lam[:-2])) / h ** 2
    assert np.all(second <= 1e-9)


def test_log_caps():
    assert default_log_cap(0.5) == pytest.approx(math.exp(-1.5))
    assert mu_log_cap(0.5, 0.75) == pytest.approx(math.exp(-2.0 / 3.0))
    assert logarithmic(0.5, mu=0.75).cap == pytest.approx(math.exp(-2.0 / 3.0))


def test_power_keeps_kind():
    assert holder(0.5).power(2.0)(3.0) == pytest.approx(3.0)
    squared = logarithmic(0.5).power(2.0)
    assert squared.kind == KIND_LOG
    assert squared.cap == pytest.approx(math.exp(-1.5))
    assert squared(1e-3) == pytest.approx(logarithmic(0.5)(1e-3) ** 2)
    with pytest.raises(InvalidArgumentError):
        holder(1.0).power(0.0)


@given(lams=st.lists(st.floats(0.0, 1e3), min_size=2, max_size=30))
@settings(max_examples=50, deadline=None)
def test_index_functions_are_non_decreasing(lams):
    lam = np.sort(np.array(lams))
    for phi in (holder(0.7), logarithmic(0.5), logarithmic(1.0, cap=0.1)):
        assert np.all(np.diff(phi(lam)) >= 0)


def test_parse_forms():
    assert parse_index_function("holder:1.5").exponent == 1.5
    assert parse_index_function("log:0.5").cap == pytest.approx(math.exp(-1.5))
    assert parse_index_function("log:0.5:0.1").cap == pytest.approx(0.1)
    assert parse_index_function("log:0.5:mu=0.25").cap == pytest.approx(math.exp(-2.0))


def test_parse_errors():
    with pytest.raises(UnknownNameError):
        parse_index_function("power:2")
    with pytest.raises(InvalidArgumentError):
        parse_index_function("holder:abc")
    with pytest.raises(InvalidArgumentError):
        parse_index_function("holder:-1")
    with pytest.raises(InvalidArgumentError):
        parse_index_function("log:0.5:2.0")


def test_table_from_csv(tmp_path):
    path = tmp_path / "phi.csv"
    path.write_text("# knots\nlambda,phi\n0.0,0.0\n1.0,2.0\n2.0,3.0\n")
    phi = parse_index_function(f"table:{path}")
    assert phi(0.5) == pytest.approx(1.0)
    assert phi(1.5) == pytest.approx(2.5)
    assert phi(10.0) == pytest.approx(3.0)


def test_table_rejects_decreasing_values():
    with pytest.raises(InvalidArgumentError):
        tabulated([0.0, 1.0], [1.0, 0.5])


def test_constant():
    assert constant(2.0)(1e-9) == 2.0
    assert constant(2.0)(1e9) == 2.0
