"""Single-qutrit routing: X = a|0><0| + b(|1><1| + |2><2|) decides whether Alice or Bob gets the particle."""

import itertools
from collections.abc import Callable
from dataclasses import dataclass
from enum import StrEnum

import numpy as np
import numpy.typing as npt

from .config import DEFAULT_TOLERANCES, Tolerances
from .errors import BobUnreachableError, DegenerateSplitError, NotNormalizedError
from .gleason import Distribution, MeasureReport, check_noncontextuality, make_distribution
from .hilbert import (
    ComplexMatrix,
    ComplexVector,
    DensityMatrix,
    Observable,
    as_vector,
    basis_state,
    commutator_norm,
    induced_density,
    make_density,
    pure_state,
    spectral_decompose,
)
from .locality import SignalReport
from .partitions import SumPartition, make_sum_partition

KET_0 = basis_state(3, 0)
KET_1 = basis_state(3, 1)
KET_2 = basis_state(3, 2)
KET_PLUS = (KET_1 + KET_2) / np.sqrt(2)
KET_MINUS = (KET_1 - KET_2) / np.sqrt(2)

B_SUBSPACE = np.column_stack([KET_1, KET_2])


class Context(StrEnum):
    Y1 = "Y1"
    Y2 = "Y2"

    def basis(self) -> ComplexMatrix:
        if self is Context.Y1:
            return np.column_stack([KET_1, KET_2])
        return np.column_stack([KET_PLUS, KET_MINUS])

    def labels(self) -> tuple[str, str]:
        return ("|1>", "|2>") if self is Context.Y1 else ("|+>", "|->")

    def completed(self) -> ComplexMatrix:
        """Y_j+ = {|0>} u Y_j."""
        return np.column_stack([KET_0, self.basis()])


WeightFunction = Callable[[DensityMatrix, ComplexVector, Context], float]


def born_weight(rho: DensityMatrix, vector: ComplexVector, context: Context) -> float:  # noqa: ARG001
    return float(np.real(vector.conj() @ rho.matrix @ vector))


@dataclass(frozen=True, eq=False)
class QutritScenario:
    beta: ComplexVector
    a: float
    b: float

    @property
    def state(self) -> DensityMatrix:
        return pure_state(self.beta)


@dataclass(frozen=True)
class RoutingOutcome:
    alice_prob: float
    bob_conditional: Distribution


@dataclass(frozen=True)
class NoDisturbanceReport:
    x_commutators: tuple[tuple[str, float], ...]
    max_x_commutator: float
    cross_commutator: float
    marginal_deviation: float
    tol: float

    @property
    def commuting(self) -> bool:
        return self.max_x_commutator <= self.tol

    @property
    def contexts_incompatible(self) -> bool:
        return self.cross_commutator > 0.1  # noqa: PLR2004

    @property
    def undisturbed(self) -> bool:
        return self.marginal_deviation <= self.tol

    @property
    def passed(self) -> bool:
        return self.commuting and self.contexts_incompatible and self.undisturbed


def make_scenario(
    beta: npt.ArrayLike,
    a: float,
    b: float,
    *,
    tols: Tolerances = DEFAULT_TOLERANCES,
) -> QutritScenario:
    amplitudes = as_vector(beta)
    if amplitudes.shape != (3,):
        msg = f"a qutrit needs 3 amplitudes, got {amplitudes.shape[0]}"
        raise NotNormalizedError(msg, deviation=float("nan"))
    norm = float(np.linalg.norm(amplitudes))
    if abs(norm - 1) > tols.norm:
        msg = f"amplitudes have norm {norm:.12g}"
        raise NotNormalizedError(msg, deviation=abs(norm - 1))
    if a == b:
        msg = f"a = b = {a} collapses the X split"
        raise DegenerateSplitError(msg)
    return QutritScenario(beta=amplitudes, a=float(a), b=float(b))


def build_x(a: float, b: float) -> Observable:
    if a == b:
        msg = f"a = b = {a} collapses the X split"
        raise DegenerateSplitError(msg)
    return spectral_decompose(np.diag([a, b, b]))


def routing_partition() -> SumPartition:
    """{|0>} + span{|1>, |2>}, the eigenspaces of X."""
    return make_sum_partition([KET_0, B_SUBSPACE], labels=["a", "b"])


def _bob_measure(rho: DensityMatrix, ctx: Context, weight: WeightFunction) -> float:
    basis = ctx.basis()
    return sum(weight(rho, basis[:, j], ctx) for j in range(basis.shape[1]))


def alice_probability(sc: QutritScenario, ctx: Context, *, weight: WeightFunction = born_weight) -> float:
    # Alice gets whatever Bob's subspace measure leaves over
    return min(max(1.0 - _bob_measure(sc.state, ctx, weight), 0.0), 1.0)


def run_routing(
    sc: QutritScenario,
    ctx: Context,
    *,
    weight: WeightFunction = born_weight,
    tols: Tolerances = DEFAULT_TOLERANCES,
) -> RoutingOutcome:
    alice_prob = alice_probability(sc, ctx, weight=weight)
    if 1.0 - alice_prob <= tols.prob:
        msg = "the particle always reaches Alice, Bob's conditional distribution is undefined"
        raise BobUnreachableError(msg)

    rho = sc.state.matrix
    pi_b = build_x(sc.a, sc.b).projector_for(sc.b).matrix
    conditioned = pi_b @ rho @ pi_b
    conditioned = make_density(conditioned / np.trace(conditioned).real, tols=tols)

    basis = ctx.basis()
    weights = np.array([weight(conditioned, basis[:, j], ctx) for j in range(basis.shape[1])])
    return RoutingOutcome(
        alice_prob=alice_prob,
        bob_conditional=make_distribution(ctx.labels(), weights / weights.sum(), tol=tols.prob),
    )


def check_signal_free(
    sc: QutritScenario,
    tol: float = 1e-12,
    *,
    weight: WeightFunction = born_weight,
) -> SignalReport:
    """Compare Prob(|0>) under Bob's two contexts and the measure each assigns to span{|1>, |2>}."""
    measures = {ctx: _bob_measure(sc.state, ctx, weight) for ctx in Context}
    if weight is born_weight:
        contextuality = check_noncontextuality(
            sc.state,
            B_SUBSPACE,
            [ctx.basis() for ctx in Context],
            tol,
            label="span{|1>,|2>}",
            context_labels=[str(ctx) for ctx in Context],
        )
    else:
        contextuality = MeasureReport.from_values(
            "span{|1>,|2>}", [(str(ctx), m) for ctx, m in measures.items()], tol=tol
        )

    first, second = (
        make_distribution(["|0>"], [alice_probability(sc, ctx, weight=weight)], complete=False) for ctx in Context
    )
    return SignalReport.compare(
        (str(Context.Y1), str(Context.Y2)),
        first,
        second,
        tol=tol,
        measures=((measures[Context.Y1], measures[Context.Y2]),),
        noncontextuality=contextuality,
    )


def _rank_one(columns: ComplexMatrix) -> list[ComplexMatrix]:
    return [np.outer(columns[:, i], columns[:, i].conj()) for i in range(columns.shape[1])]


def check_nodisturbance(  # noqa: PLR0913
    a: float,
    b: float,
    tol: float = 1e-12,
    *,
    observable: Observable | None = None,
    trials: int = 100,
    seed: int = 0,
) -> NoDisturbanceReport:
    """Commutation of X with both completed contexts, incompatibility of the contexts, and X marginals.

    The marginal part measures Y_j+ first (non-selectively) and X afterwards, so any
    disturbance of X by the co-measured context shows up as a changed X marginal.
    """
    x = build_x(a, b) if observable is None else observable
    if observable is not None and a == b:
        msg = f"a = b = {a} collapses the X split"
        raise DegenerateSplitError(msg)
    contexts = {ctx: _rank_one(ctx.completed()) for ctx in Context}

    x_commutators = tuple(
        (f"{ctx}+:{label}", commutator_norm(x.matrix, p))
        for ctx, projectors in contexts.items()
        for label, p in zip(("|0>", *ctx.labels()), projectors, strict=True)
    )
    cross = max(commutator_norm(p, q) for p, q in itertools.product(contexts[Context.Y1], contexts[Context.Y2]))

    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        rho = induced_density(rng, 3, 3)
        for pi_x in x.projectors:
            marginals = [
                sum(np.real(np.trace(pi_x.matrix @ p @ rho @ p)) for p in projectors)
                for projectors in contexts.values()
            ]
            worst = max(worst, abs(marginals[0] - marginals[1]))

    return NoDisturbanceReport(
        x_commutators=x_commutators,
        max_x_commutator=max(v for _, v in x_commutators),
        cross_commutator=cross,
        marginal_deviation=float(worst),
        tol=tol,
    )
