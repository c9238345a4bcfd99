"""Randomised attempt to find a local instrument pair that changes Bob's marginals."""

import dataclasses
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
import numpy.typing as npt

from .errors import DimensionMismatchError, InputError
from .hilbert import DensityMatrix, complex_gaussian, dagger, haar_unitary, qr_unitary
from .instruments import LocalInstrument, povm_from_seeds, unitary_then_measure
from .partitions import ProductPartition, SumPartition, as_bipartite, random_index_groups
from .utils import LOGDEBUG, log_message

RESTART_PERIOD = 64
INITIAL_STEP = 0.5
MIN_STEP = 1e-4


@dataclass(frozen=True, eq=False)
class _Candidate:
    kind: str
    params: npt.NDArray[np.complex128]
    groups: tuple[tuple[int, ...], ...] = ()
    weights: npt.NDArray[np.float64] | None = None

    def instrument(self) -> LocalInstrument:
        weights = None if self.weights is None else list(self.weights)
        if self.kind == "unitary":
            return unitary_then_measure(self.params, self.groups, weights=weights)
        return povm_from_seeds(self.params, weights=weights)


@dataclass(frozen=True, eq=False)
class SearchResult:
    best_deviation: float
    best_pair: tuple[LocalInstrument, LocalInstrument]
    evaluations: int
    seed: int


def _sample(rng: np.random.Generator, dim: int, *, planted: bool) -> _Candidate:
    if rng.random() < 0.5:  # noqa: PLR2004
        groups = random_index_groups(rng, dim, int(rng.integers(2, dim + 1)))
        params = haar_unitary(rng, dim)
        kind = "unitary"
        n_outcomes = len(groups)
    else:
        n_outcomes = int(rng.integers(2, dim + 2))
        params = complex_gaussian(rng, (n_outcomes, dim, dim))
        groups = []
        kind = "povm"
    weights = 1.0 - rng.random(n_outcomes) if planted else None
    return _Candidate(kind=kind, params=params, groups=tuple(tuple(g) for g in groups), weights=weights)


def _perturb(rng: np.random.Generator, cand: _Candidate, step: float) -> _Candidate:
    if cand.weights is not None and rng.random() < 0.5:  # noqa: PLR2004
        weights = cand.weights.copy()
        i = int(rng.integers(len(weights)))
        weights[i] = float(np.clip(weights[i] + step * rng.standard_normal(), 1e-3, 1.0))
        return dataclasses.replace(cand, weights=weights)

    params = cand.params.copy()
    index = tuple(int(rng.integers(n)) for n in params.shape)
    params[index] += step * complex_gaussian(rng, ())
    if cand.kind == "unitary":
        params = qr_unitary(params)
    return dataclasses.replace(cand, params=params)


class _Objective:
    def __init__(self, rho: DensityMatrix, pp: ProductPartition, sp_b: SumPartition) -> None:
        self.__rho = rho.matrix
        self.__dim_b = pp.dim_b
        eye_a = np.eye(pp.dim_a)
        self.__projectors = [np.kron(eye_a, b.projector) for b in sp_b.blocks]

    def marginal(self, instrument: LocalInstrument) -> npt.NDArray[np.float64]:
        eye_b = np.eye(self.__dim_b)
        after = np.zeros_like(self.__rho)
        for m in instrument.channel().kraus_ops:
            k = np.kron(m, eye_b)
            after += k @ self.__rho @ dagger(k)
        return np.array([np.real(np.trace(p @ after)) for p in self.__projectors])

    def __call__(self, pair: Sequence[LocalInstrument]) -> float:
        return float(np.max(np.abs(self.marginal(pair[0]) - self.marginal(pair[1]))))


def adversarial_signal_search(  # noqa: PLR0913
    rho: DensityMatrix,
    pp: ProductPartition,
    sp_b: SumPartition,
    budget: int,
    seed: int,
    *,
    cut: int = 1,
    allow_non_trace_preserving: bool = False,
) -> SearchResult:
    """Maximise max_j |Prob_B(j|E) - Prob_B(j|E')| over pairs of A-side instruments.

    Every RESTART_PERIOD evaluations a fresh random pair is drawn, then refined one
    coordinate at a time, halving the step after each rejected move. The schedule only
    depends on the seed, so a larger budget replays a smaller one and the result is
    monotone in the budget.
    """
    if budget < 1:
        msg = f"budget must be >= 1, got {budget}"
        raise InputError(msg)
    if seed < 0:
        msg = f"seed must be >= 0, got {seed}"
        raise InputError(msg)
    pp = as_bipartite(pp, cut)
    if rho.dim != pp.total_dim or sp_b.total_dim != pp.dim_b:
        msg = f"state, partition {list(pp.sector_dims)} and B-split {sp_b.total_dim} do not fit together"
        raise DimensionMismatchError(msg)

    rng = np.random.default_rng(seed)
    objective = _Objective(rho, pp, sp_b)
    planted = allow_non_trace_preserving

    best_value = -1.0
    best_pair: tuple[LocalInstrument, LocalInstrument] | None = None
    evaluations = 0
    while evaluations < budget:
        current = (_sample(rng, pp.dim_a, planted=planted), _sample(rng, pp.dim_a, planted=planted))
        pair = (current[0].instrument(), current[1].instrument())
        value = objective(pair)
        evaluations += 1
        if value > best_value:
            best_value, best_pair = value, pair
        step = INITIAL_STEP
        for _ in range(RESTART_PERIOD - 1):
            if evaluations >= budget:
                break
            side = int(rng.integers(2))
            trial = list(current)
            trial[side] = _perturb(rng, current[side], step)
            trial_pair = (trial[0].instrument(), trial[1].instrument())
            trial_value = objective(trial_pair)
            evaluations += 1
            if trial_value > value:
                current, value = (trial[0], trial[1]), trial_value
                if value > best_value:
                    best_value, best_pair = value, trial_pair
                    log_message(f"search seed {seed}: deviation {value:.3e} after {evaluations} evaluations")
            else:
                step = max(step / 2, MIN_STEP)

    assert best_pair is not None  # noqa: S101
    log_message(f"search seed {seed} done: best deviation {best_value:.3e}", level=LOGDEBUG)
    return SearchResult(best_deviation=best_value, best_pair=best_pair, evaluations=evaluations, seed=seed)
