import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from danebench import Schedule, step_size
from danebench.errors import ConfigError
from danebench.schedules import Kind, step_sizes

kinds = st.sampled_from(list(Kind))
schedules = st.builds(Schedule, kinds, st.floats(0.0, 10.0), st.floats(0.0, 5.0), st.floats(0.0, 3.0))


def test_inverse_decay_values():
    s = Schedule(Kind.INVERSE_DECAY, a0=1.0, decay=1.0)
    assert step_size(s, 0) == 1.0 and step_size(s, 1) == 0.5


def test_dane_exp_decay_halves_per_round():
    s = Schedule(Kind.DANE_EXP_DECAY, a0=1.0, decay=0.0, c=math.log(2))
    assert step_size(s, 0, 1) == pytest.approx(0.5, rel=1e-15)
    assert step_size(s, 0, 2) == pytest.approx(0.25, rel=1e-15)


def test_constant_ignores_everything():
    s = Schedule(Kind.CONSTANT, a0=0.3, decay=5.0, c=2.0)
    assert {step_size(s, k, t) for k in range(5) for t in range(1, 4)} == {0.3}


def test_inverse_decay_ignores_c():
    a = Schedule(Kind.INVERSE_DECAY, 0.2, 0.1, 0.0)
    b = Schedule(Kind.INVERSE_DECAY, 0.2, 0.1, 9.0)
    assert all(step_size(a, k, t) == step_size(b, k, t) for k in range(10) for t in (1, 5))


@given(a0=st.floats(0.0, 5.0), decay=st.floats(0.0, 2.0), k=st.integers(0, 10**6), t=st.integers(1, 50))
def test_exp_decay_with_zero_c_is_inverse_decay(a0, decay, k, t):
    assert step_size(Schedule(Kind.DANE_EXP_DECAY, a0, decay, 0.0), k, t) == \
        step_size(Schedule(Kind.INVERSE_DECAY, a0, decay), k, t)


@given(s=schedules, k=st.integers(0, 10**6), t=st.integers(1, 100))
def test_monotone_in_k_and_t(s, k, t):
    assert step_size(s, k + 1, t) <= step_size(s, k, t)
    assert step_size(s, k, t + 1) <= step_size(s, k, t)


@given(s=schedules)
def test_initial_value(s):
    expected = s.a0 / math.exp(s.c) if s.kind is Kind.DANE_EXP_DECAY else s.a0
    assert step_size(s, 0, 1) == expected


@given(s=schedules, k0=st.integers(0, 10**5), count=st.integers(1, 50), t=st.integers(1, 20))
def test_vectorized_matches_scalar(s, k0, count, t):
    vec = step_sizes(s, k0, count, t)
    assert np.array_equal(vec, [step_size(s, k0 + i, t) for i in range(count)])


@pytest.mark.parametrize("field,value", [("a0", -0.1), ("decay", -1.0), ("c", -0.5), ("a0", math.inf)])
def test_invalid_fields(field, value):
    kw = {"a0": 0.1, "decay": 0.0, "c": 0.0, field: value}
    with pytest.raises(ConfigError, match=f"schedule.{field}"):
        Schedule(Kind.DANE_EXP_DECAY, **kw)


def test_unknown_kind():
    with pytest.raises(ValueError):
        Schedule("Cosine")


def test_kind_parsed_from_string():
    assert Schedule("DaneExpDecay").kind is Kind.DANE_EXP_DECAY
