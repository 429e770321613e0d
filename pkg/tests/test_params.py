import math

import pytest

from rfcascade import AtomDriveParams, DegenerateRootsError, DomainError, ParameterError


def test_defaults_are_the_optimal_point():
    p = AtomDriveParams()
    assert (p.gamma, p.omega, p.delta) == (1.0, math.sqrt(2.0), 0.0)


@pytest.mark.parametrize("kw", [
    {"gamma": 0.0}, {"gamma": -1.0}, {"omega": -0.1},
    {"gamma": math.inf}, {"omega": math.nan}, {"delta": math.inf},
    {"gamma": "1"}, {"omega": 1j},
])
def test_invalid_values_rejected(kw):
    with pytest.raises(ParameterError):
        AtomDriveParams(**kw)


def test_integer_inputs_are_cast():
    p = AtomDriveParams(1, 2, -1)
    assert all(isinstance(v, float) for v in (p.gamma, p.omega, p.delta))


def test_undriven_atom_is_valid_but_flagged():
    p = AtomDriveParams(1.0, 0.0, 0.0)
    with pytest.raises(ParameterError):
        p.require_drive()


def test_einstein_coefficient_and_dict():
    p = AtomDriveParams(0.75, 1.0, 0.5)
    assert p.einstein_coefficient == 1.5
    assert p.as_dict() == {"gamma": 0.75, "omega": 1.0, "delta": 0.5}


def test_error_hierarchy():
    assert issubclass(ParameterError, ValueError)
    assert issubclass(DomainError, ValueError)
    assert issubclass(DegenerateRootsError, ArithmeticError)
