import pytest

from rfcascade import validation


def test_all_checks_pass():
    results = validation.run_checks()
    assert [r.name for r in results] == list(validation.CHECKS)
    failed = [(r.name, r.error, r.tolerance) for r in results if not r.passed]
    assert not failed
    rep = validation.report(results)
    assert rep["passed"] and all({"error", "tolerance"} <= set(c) for c in rep["checks"])


@pytest.mark.parametrize("name", list(validation.CHECKS))
def test_injected_fault_is_detected(name):
    (result,) = validation.run_checks(fault=name, only={name})
    assert not result.passed


def test_unknown_fault():
    with pytest.raises(KeyError):
        validation.run_checks(fault="no_such_check")


def test_grid_size():
    assert len(validation.GRID) == 25
