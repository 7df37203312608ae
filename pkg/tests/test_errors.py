import pytest

from danebench.errors import ConfigError, ContractViolation, DaneBenchError, NumericalError, UnsupportedError


def test_config_error_names_key():
    e = ConfigError("must be >= 1", "run.T")
    assert e.key == "run.T"
    assert str(e).startswith("run.T:")


def test_numerical_error_names_round_and_machine():
    e = NumericalError("blew up", round=3, machine=1)
    assert "3" in str(e) and "1" in str(e)
    assert (e.round, e.machine) == (3, 1)


@pytest.mark.parametrize("cls", [ConfigError, ContractViolation, UnsupportedError, NumericalError])
def test_hierarchy(cls):
    assert issubclass(cls, DaneBenchError)
