import numpy as np
import pytest

from resources.lib.errors import BobUnreachableError, DegenerateSplitError, NotNormalizedError
from resources.lib.hilbert import max_principal_angle, random_pure_state, spectral_decompose
from resources.lib.qutrit import (
    KET_MINUS,
    KET_PLUS,
    Context,
    alice_probability,
    born_weight,
    build_x,
    check_nodisturbance,
    check_signal_free,
    make_scenario,
    routing_partition,
    run_routing,
)

UNIFORM = np.ones(3) / np.sqrt(3)


def _random_beta(seed):
    values, vectors = np.linalg.eigh(random_pure_state(3, seed).matrix)
    return vectors[:, np.argmax(values)]


def test_build_x_spectrum():
    x = build_x(1, 2)
    assert x.eigenvalues == pytest.approx((1.0, 2.0))
    assert [p.rank for p in x.projectors] == [1, 2]
    np.testing.assert_allclose(x.projector_for(2).matrix, np.diag([0, 1, 1]), atol=1e-12)


def test_build_x_indicator_form():
    x = build_x(0, 1)
    np.testing.assert_allclose(x.matrix, x.projector_for(1).matrix, atol=1e-12)


def test_build_x_degenerate():
    with pytest.raises(DegenerateSplitError):
        build_x(1, 1)


def test_make_scenario_validates():
    with pytest.raises(NotNormalizedError):
        make_scenario([1, 1, 0], 1, 2)
    with pytest.raises(NotNormalizedError):
        make_scenario([1, 0], 1, 2)
    with pytest.raises(DegenerateSplitError):
        make_scenario(UNIFORM, 2, 2)


def test_contexts_span_the_b_eigenspace():
    assert max_principal_angle(Context.Y1.basis(), Context.Y2.basis()) <= 1e-12
    np.testing.assert_array_equal(KET_PLUS, np.array([0, 1, 1]) / np.sqrt(2))
    np.testing.assert_array_equal(KET_MINUS, np.array([0, 1, -1]) / np.sqrt(2))
    assert Context.Y2.labels() == ("|+>", "|->")


def test_routing_partition_is_x_eigenspaces():
    sp = routing_partition()
    assert sp.labels == ("a", "b")
    assert sp.dims == (1, 2)
    np.testing.assert_allclose(sp.projector(1), build_x(1, 2).projector_for(2).matrix, atol=1e-12)


@pytest.mark.parametrize("ctx", list(Context))
def test_run_routing_uniform(ctx):
    outcome = run_routing(make_scenario(UNIFORM, 1, 2), ctx)
    assert outcome.alice_prob == pytest.approx(1 / 3, abs=1e-12)
    assert outcome.bob_conditional.total == pytest.approx(1.0)


def test_run_routing_plus_minus():
    outcome = run_routing(make_scenario([0, 1, 0], 1, 2), Context.Y2)
    assert outcome.alice_prob == pytest.approx(0, abs=1e-12)
    assert outcome.bob_conditional.labels == ("|+>", "|->")
    assert outcome.bob_conditional.probabilities == pytest.approx((0.5, 0.5), abs=1e-12)


def test_run_routing_bob_unreachable():
    with pytest.raises(BobUnreachableError):
        run_routing(make_scenario([1, 0, 0], 1, 2), Context.Y1)


def test_run_routing_complex_amplitudes():
    beta = np.array([0.6, 0.48j, 0.64])
    outcome = run_routing(make_scenario(beta, -1, 1), Context.Y1)
    assert outcome.alice_prob == pytest.approx(0.36, abs=1e-12)
    expected = np.array([0.48**2, 0.64**2]) / 0.64
    np.testing.assert_allclose(outcome.bob_conditional.probabilities, expected, atol=1e-12)


def test_routing_total_probability():
    for seed in range(50):
        sc = make_scenario(_random_beta(seed), 0.5, -0.5)
        for ctx in Context:
            outcome = run_routing(sc, ctx)
            total = outcome.alice_prob + (1 - outcome.alice_prob) * outcome.bob_conditional.total
            assert total == pytest.approx(1.0, abs=1e-10)


def test_signal_free_random_states():
    for seed in range(100):
        beta = _random_beta(seed)
        sc = make_scenario(beta, 1, 2)
        report = check_signal_free(sc)
        assert report.passed
        for ctx in Context:
            assert alice_probability(sc, ctx) == pytest.approx(abs(beta[0]) ** 2, abs=1e-12)
        assert report.noncontextuality is not None
        assert report.noncontextuality.passed


def test_signal_free_exact_case():
    report = check_signal_free(make_scenario([1 / np.sqrt(2), 0.5, 0.5], 1, 2))
    assert report.max_deviation == pytest.approx(0, abs=1e-15)
    assert report.contexts == ("Y1", "Y2")


def test_signal_free_catches_contextual_weight():
    def tilted(rho, vector, context):
        weight = born_weight(rho, vector, context)
        return 0.8 * weight if context is Context.Y2 else weight

    report = check_signal_free(make_scenario(UNIFORM, 1, 2), weight=tilted)
    assert not report.passed
    assert report.max_deviation == pytest.approx(0.2 * 2 / 3, abs=1e-12)
    assert report.noncontextuality is not None
    assert not report.noncontextuality.passed


def test_nodisturbance_default_observable():
    report = check_nodisturbance(1, 2)
    assert report.passed
    assert report.max_x_commutator == 0
    assert report.cross_commutator == pytest.approx(1 / np.sqrt(2), abs=1e-12)
    assert len(report.x_commutators) == 6


@pytest.mark.parametrize(("a", "b"), [(0, 1), (-3.5, 2), (1e3, 1e-3)])
def test_nodisturbance_marginals(a, b):
    report = check_nodisturbance(a, b, trials=20, seed=3)
    assert report.undisturbed
    assert report.marginal_deviation <= 1e-12


def test_nodisturbance_non_degenerate_observable_fails():
    report = check_nodisturbance(1, 2, observable=spectral_decompose(np.diag([1.0, 2.0, 3.0])))
    assert not report.commuting
    assert not report.passed
    assert report.cross_commutator > 0.1


def test_nodisturbance_degenerate():
    with pytest.raises(DegenerateSplitError):
        check_nodisturbance(2, 2)
