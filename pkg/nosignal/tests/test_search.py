import pytest

from resources.lib.errors import DimensionMismatchError, InputError
from resources.lib.hilbert import random_density
from resources.lib.locality import check_nosignaling
from resources.lib.partitions import axis_aligned_partition, make_product_partition
from resources.lib.search import adversarial_signal_search

PP33 = make_product_partition([3, 3])
SPLIT3 = axis_aligned_partition(3, [[0], [1, 2]])


@pytest.fixture
def rho33():
    return random_density(9, 9, 13)


def test_single_evaluation(rho33):
    result = adversarial_signal_search(rho33, PP33, SPLIT3, 1, 0)
    assert result.evaluations == 1
    assert result.best_deviation >= 0
    assert result.best_deviation <= 1e-10


def test_quantum_search_stays_below_tolerance(rho33):
    result = adversarial_signal_search(rho33, PP33, SPLIT3, 500, 4)
    assert result.evaluations == 500
    assert result.best_deviation <= 1e-8
    first, second = result.best_pair
    assert check_nosignaling(rho33, first, second, SPLIT3, PP33).max_deviation <= 1e-8


def test_best_deviation_is_monotone_in_budget(rho33):
    deviations = [
        adversarial_signal_search(rho33, PP33, SPLIT3, budget, 2, allow_non_trace_preserving=True).best_deviation
        for budget in (1, 10, 100, 300)
    ]
    assert deviations == sorted(deviations)


def test_planted_violation_is_found(rho33):
    result = adversarial_signal_search(rho33, PP33, SPLIT3, 1000, 0, allow_non_trace_preserving=True)
    assert result.best_deviation > 0.1


def test_search_is_deterministic(rho33):
    first = adversarial_signal_search(rho33, PP33, SPLIT3, 200, 9, allow_non_trace_preserving=True)
    second = adversarial_signal_search(rho33, PP33, SPLIT3, 200, 9, allow_non_trace_preserving=True)
    assert first.best_deviation == second.best_deviation


def test_search_rejects_bad_input(rho33):
    with pytest.raises(InputError):
        adversarial_signal_search(rho33, PP33, SPLIT3, 0, 0)
    with pytest.raises(InputError):
        adversarial_signal_search(rho33, PP33, SPLIT3, 10, -1)
    with pytest.raises(DimensionMismatchError):
        adversarial_signal_search(rho33, make_product_partition([3, 2]), SPLIT3, 10, 0)
    with pytest.raises(DimensionMismatchError):
        adversarial_signal_search(rho33, PP33, axis_aligned_partition(2, [[0], [1]]), 10, 0)
