import numpy as np
import pytest

from resources.lib.errors import (
    DimensionMismatchError,
    InputError,
    NotTracePreservingError,
    SameSectorError,
    WrongSectorError,
)
from resources.lib.gleason import frame_distribution
from resources.lib.hilbert import bell_state, make_density, maximally_mixed, pure_state, random_density
from resources.lib.instruments import (
    Channel,
    basis_instrument,
    make_channel,
    random_channel,
    random_povm_instrument,
    random_projective_instrument,
    trivial_instrument,
)
from resources.lib.locality import (
    apply_channel,
    bob_marginal,
    check_nosignaling,
    check_reduced_invariance,
    finest_instrument,
    joint_distribution,
    partial_trace,
    post_instrument_state,
)
from resources.lib.partitions import (
    axis_aligned_partition,
    make_product_partition,
    make_sum_partition,
    random_sum_partition,
)

X_BASIS = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
PAULIS = [np.eye(2), np.array([[0, 1], [1, 0]]), np.array([[0, -1j], [1j, 0]]), np.diag([1, -1])]


def _z(sector="A"):
    return basis_instrument(np.eye(2), sector=sector, name="Z")


def _x(sector="A"):
    return basis_instrument(X_BASIS, sector=sector, name="X")


def _depolarizing():
    return make_channel([p / 2 for p in PAULIS])


def test_partial_trace_of_bell_state(bell, pp22):
    np.testing.assert_allclose(partial_trace(bell, pp22, "A").matrix, np.eye(2) / 2, atol=1e-14)
    np.testing.assert_allclose(partial_trace(bell, pp22, "B").matrix, np.eye(2) / 2, atol=1e-14)


def test_partial_trace_of_product_state():
    pp = make_product_partition([2, 3])
    rho_a = random_density(2, 2, 1).matrix
    rho_b = random_density(3, 2, 2).matrix
    rho = make_density(np.kron(rho_a, rho_b))
    np.testing.assert_allclose(partial_trace(rho, pp, "A").matrix, rho_a, atol=1e-12)
    np.testing.assert_allclose(partial_trace(rho, pp, "B").matrix, rho_b, atol=1e-12)


def test_partial_trace_multipartite_sectors():
    pp = make_product_partition([2, 2, 2])
    ghz = np.zeros(8)
    ghz[[0, 7]] = 1 / np.sqrt(2)
    rho = pure_state(ghz)
    np.testing.assert_allclose(partial_trace(rho, pp, [0, 2]).matrix, np.diag([0.5, 0, 0, 0.5]), atol=1e-14)
    assert partial_trace(rho, pp, "A", cut=2).dim == 4
    with pytest.raises(InputError):
        partial_trace(rho, pp, [3])
    with pytest.raises(DimensionMismatchError):
        partial_trace(bell_state(), pp)


def test_apply_channel(bell):
    with pytest.raises(DimensionMismatchError):
        apply_channel(bell, _depolarizing())
    leaky = Channel(dim=4, kraus_ops=(np.eye(4) / 2,))
    with pytest.raises(NotTracePreservingError):
        apply_channel(bell, leaky)


def test_joint_distribution_bell_zz(bell, pp22):
    table = joint_distribution(bell, _z(), _z("B"), pp22)
    np.testing.assert_allclose(table.probabilities, [[0.5, 0], [0, 0.5]], atol=1e-14)
    assert table.total == pytest.approx(1.0)
    assert table.row_labels == ("0", "1")


def test_joint_distribution_accepts_swapped_arguments(bell, pp22):
    table = joint_distribution(bell, _z("B"), _x(), pp22)
    np.testing.assert_allclose(table.probabilities, np.full((2, 2), 0.25), atol=1e-14)


def test_joint_distribution_errors(bell, pp22):
    with pytest.raises(SameSectorError):
        joint_distribution(bell, _z(), _x(), pp22)
    with pytest.raises(DimensionMismatchError):
        joint_distribution(bell, trivial_instrument(3), _z("B"), pp22)


def test_finest_instrument_owners():
    sp = axis_aligned_partition(3, [[0], [1, 2]], labels=["a", "b"])
    instrument, owners = finest_instrument(sp)
    assert owners == [0, 1, 1]
    assert instrument.labels == ("a:0", "b:0", "b:1")
    assert instrument.sector == "B"


def test_bob_marginal(bell, pp22):
    b_split = axis_aligned_partition(2, [[0], [1]])
    marginal = bob_marginal(bell, _x(), b_split, pp22)
    assert marginal.probabilities == pytest.approx((0.5, 0.5))
    with pytest.raises(WrongSectorError):
        bob_marginal(bell, _z("B"), b_split, pp22)


def test_check_nosignaling_bell_z_versus_x(bell, pp22):
    report = check_nosignaling(bell, _z(), _x(), axis_aligned_partition(2, [[0], [1]]), pp22)
    assert report.passed
    assert report.max_deviation <= 1e-12
    assert report.contexts == ("Z", "X")
    for mu, mu_prime in report.measures:
        assert mu == pytest.approx(0.5)
        assert mu_prime == pytest.approx(0.5)


def test_check_nosignaling_identical_contexts(pp22):
    rho = random_density(4, 3, 5)
    z = _z()
    report = check_nosignaling(rho, z, z, axis_aligned_partition(2, [[0], [1]]), pp22)
    assert report.max_deviation == 0


def test_check_nosignaling_rotated_split(bell, pp22):
    plus, minus = X_BASIS[:, 0], X_BASIS[:, 1]
    b_split = make_sum_partition([plus, minus], labels=["+", "-"])
    report = check_nosignaling(bell, _z(), _x(), b_split, pp22)
    assert report.labels == ("+", "-")
    assert report.passed


def test_check_nosignaling_rejects_b_side_instrument(bell, pp22):
    with pytest.raises(WrongSectorError):
        check_nosignaling(bell, _z(), _x("B"), axis_aligned_partition(2, [[0], [1]]), pp22)


@pytest.mark.parametrize(("dim_a", "dim_b"), [(2, 2), (2, 3), (3, 2), (3, 3)])
def test_check_nosignaling_random_instruments(rng, dim_a, dim_b):
    pp = make_product_partition([dim_a, dim_b])
    for seed in range(20):
        rho = random_density(dim_a * dim_b, int(rng.integers(1, dim_a * dim_b + 1)), seed)
        first = random_projective_instrument(rng, dim_a, 2)
        second = random_povm_instrument(rng, dim_a, 3).preceded_by(random_channel(rng, dim_a, 2))
        b_split = axis_aligned_partition(dim_b, [[0], list(range(1, dim_b))])
        assert check_nosignaling(rho, first, second, b_split, pp).max_deviation <= 1e-10


def test_multipartite_cut():
    pp = make_product_partition([2, 2, 2])
    rho = random_density(8, 2, 3)
    b_split = axis_aligned_partition(4, [[0, 1], [2, 3]])
    first = basis_instrument(np.eye(2), name="Z")
    second = basis_instrument(X_BASIS, name="X")
    assert check_nosignaling(rho, first, second, b_split, pp).passed

    a_pair = basis_instrument(np.eye(4), name="ZZ")
    b_qubit = axis_aligned_partition(2, [[0], [1]])
    assert check_nosignaling(rho, a_pair, trivial_instrument(4), b_qubit, pp, cut=2).passed


def test_depolarizing_channel_on_b(bell, pp22):
    report = check_reduced_invariance(bell, _depolarizing(), pp22)
    assert report.passed
    after = apply_channel(bell, make_channel([np.kron(np.eye(2), p / 2) for p in PAULIS]))
    np.testing.assert_allclose(after.matrix, np.eye(4) / 4, atol=1e-14)


def test_reduced_invariance_random(rng):
    pp = make_product_partition([3, 2])
    for seed in range(20):
        rho = random_density(6, 4, seed)
        report = check_reduced_invariance(rho, random_channel(rng, 2, 3), pp)
        assert report.deviation <= 1e-10


def test_post_instrument_state(bell, pp22):
    after = post_instrument_state(bell, _z(), pp22)
    np.testing.assert_allclose(after.matrix, np.diag([0.5, 0, 0, 0.5]), atol=1e-14)
    np.testing.assert_allclose(post_instrument_state(maximally_mixed(4), _x(), pp22).matrix, np.eye(4) / 4, atol=1e-14)


@pytest.mark.parametrize(("dim_a", "dim_b"), [(2, 2), (2, 3), (3, 2), (3, 3)])
def test_trivial_instrument_marginal_is_the_reduced_state_measure(rng, dim_a, dim_b):
    pp = make_product_partition([dim_a, dim_b])
    for seed in range(20):
        rho = random_density(dim_a * dim_b, dim_a * dim_b, seed)
        rho_b = partial_trace(rho, pp, "B")
        b_split = random_sum_partition(dim_b, rng, axis_aligned=False)
        marginal = bob_marginal(rho, trivial_instrument(dim_a), b_split, pp)
        expected = [frame_distribution(rho_b, block.basis).total for block in b_split.blocks]
        np.testing.assert_allclose(marginal.probabilities, expected, atol=1e-12)


def _outcome_probabilities(rho, instrument):
    return [float(np.real(np.trace(effect @ rho.matrix))) for effect in instrument.effects()]


@pytest.mark.parametrize(("dim_a", "dim_b"), [(2, 2), (2, 3), (3, 3)])
def test_joint_table_marginals_match_each_side(rng, dim_a, dim_b):
    pp = make_product_partition([dim_a, dim_b])
    for seed in range(20):
        rho = random_density(dim_a * dim_b, 2, seed)
        instr_a = random_povm_instrument(rng, dim_a, 3, sector="A")
        instr_b = random_projective_instrument(rng, dim_b, 2, sector="B")
        table = joint_distribution(rho, instr_a, instr_b, pp)
        assert table.total == pytest.approx(1.0, abs=1e-12)
        np.testing.assert_allclose(
            table.probabilities.sum(axis=1),
            _outcome_probabilities(partial_trace(rho, pp, "A"), instr_a),
            atol=1e-12,
        )
        np.testing.assert_allclose(
            table.col_marginal(),
            _outcome_probabilities(partial_trace(rho, pp, "B"), instr_b),
            atol=1e-12,
        )
