"""Seeded randomized property sweeps over the library checks.

Every trial draws its own integer seed from a SeedSequence rooted at the sweep seed, so
a failure can be replayed alone with `numpy.random.default_rng(failing_seed)`.
"""

import time
from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .boxes import TSIRELSON_BOUND, check_box_nosignaling, chsh_value, random_quantum_box
from .errors import InputError, UnknownKindError
from .gleason import check_noncontextuality, measure_under_context
from .hilbert import DensityMatrix, haar_unitary, induced_density, make_density
from .instruments import LocalInstrument, random_channel, random_povm_instrument, random_projective_instrument
from .locality import bob_marginal, check_nosignaling, check_reduced_invariance
from .partitions import (
    ProductPartition,
    SumPartition,
    induced_sum_partition,
    make_product_partition,
    random_sum_partition,
)
from .qutrit import Context, alice_probability, check_signal_free, make_scenario
from .report import EntryResult, RunReport
from .search import adversarial_signal_search
from .settings import DEFAULT_SEED
from .utils import LOGINFO, LOGNONE, LOGWARNING, log_message

Dims = tuple[int, ...]

CONTEXTS_PER_SUBSPACE = 5
DEFAULT_BUDGET = 10_000
CHSH_SLACK = 1e-8


@dataclass(frozen=True)
class TrialOutcome:
    deviation: float
    passed: bool


@dataclass(frozen=True)
class SweepKind:
    name: str
    arity: int
    dims: tuple[Dims, ...]
    trials: int
    tol: float
    trial: Callable[[np.random.Generator, Dims, float, int], TrialOutcome]


def _random_state(rng: np.random.Generator, dim: int) -> DensityMatrix:
    return make_density(induced_density(rng, dim, int(rng.integers(1, dim + 1))))


def _random_instrument(rng: np.random.Generator, dim: int) -> LocalInstrument:
    if rng.random() < 0.5:  # noqa: PLR2004
        instrument = random_projective_instrument(rng, dim, int(rng.integers(1, dim + 1)))
    else:
        instrument = random_povm_instrument(rng, dim, int(rng.integers(2, dim + 2)))
    if rng.random() < 0.25:  # noqa: PLR2004
        instrument = instrument.preceded_by(random_channel(rng, dim, int(rng.integers(1, 4))))
    return instrument


def _bipartite_case(rng: np.random.Generator, dims: Dims) -> tuple[DensityMatrix, ProductPartition, SumPartition]:
    pp = make_product_partition(dims)
    rho = _random_state(rng, pp.total_dim)
    sp_b = random_sum_partition(pp.dim_b, rng, axis_aligned=bool(rng.random() < 0.5))  # noqa: PLR2004
    return rho, pp, sp_b


def _nosignal_trial(rng: np.random.Generator, dims: Dims, tol: float, budget: int) -> TrialOutcome:  # noqa: ARG001
    rho, pp, sp_b = _bipartite_case(rng, dims)
    report = check_nosignaling(rho, _random_instrument(rng, pp.dim_a), _random_instrument(rng, pp.dim_a), sp_b, pp, tol)
    return TrialOutcome(report.max_deviation, report.passed)


def _gleason_trial(rng: np.random.Generator, dims: Dims, tol: float, budget: int) -> TrialOutcome:  # noqa: ARG001
    (dim,) = dims
    rho = _random_state(rng, dim)
    rank = int(rng.integers(1, dim))
    subspace = haar_unitary(rng, dim)[:, :rank]
    contexts = [subspace @ haar_unitary(rng, rank) for _ in range(CONTEXTS_PER_SUBSPACE)]
    report = check_noncontextuality(rho, subspace, contexts, tol)
    return TrialOutcome(report.max_pairwise_deviation, report.passed)


def _boxes_trial(rng: np.random.Generator, dims: Dims, tol: float, budget: int) -> TrialOutcome:  # noqa: ARG001
    box = random_quantum_box(rng, (dims[0], dims[1]))
    report = check_box_nosignaling(box, tol)
    return TrialOutcome(report.max_deviation, report.passed and abs(chsh_value(box)) <= TSIRELSON_BOUND + CHSH_SLACK)


def _search_trial(rng: np.random.Generator, dims: Dims, tol: float, budget: int) -> TrialOutcome:
    rho, pp, sp_b = _bipartite_case(rng, dims)
    result = adversarial_signal_search(rho, pp, sp_b, budget, int(rng.integers(2**32)))
    return TrialOutcome(result.best_deviation, result.best_deviation <= tol)


def _bridge_trial(rng: np.random.Generator, dims: Dims, tol: float, budget: int) -> TrialOutcome:  # noqa: ARG001
    rho, pp, sp_b = _bipartite_case(rng, dims)
    instrument = _random_instrument(rng, pp.dim_a)
    marginal = bob_marginal(rho, instrument, sp_b, pp).as_array()
    measure = measure_under_context(rho, induced_sum_partition(pp, sp_b), instrument, pp).as_array()
    deviation = float(np.max(np.abs(marginal - measure)))
    return TrialOutcome(deviation, deviation <= tol)


def _reduced_trial(rng: np.random.Generator, dims: Dims, tol: float, budget: int) -> TrialOutcome:  # noqa: ARG001
    pp = make_product_partition(dims)
    rho = _random_state(rng, pp.total_dim)
    channel = random_channel(rng, pp.dim_b, int(rng.integers(1, 5)))
    report = check_reduced_invariance(rho, channel, pp, tol)
    return TrialOutcome(report.deviation, report.passed)


def _qutrit_trial(rng: np.random.Generator, dims: Dims, tol: float, budget: int) -> TrialOutcome:  # noqa: ARG001
    beta = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    a, b = rng.choice(np.arange(-5, 6), size=2, replace=False)
    sc = make_scenario(beta / np.linalg.norm(beta), float(a), float(b))
    expected = abs(sc.beta[0]) ** 2
    deviation = max(abs(alice_probability(sc, ctx) - expected) for ctx in Context)
    report = check_signal_free(sc, tol)
    deviation = max(deviation, report.max_deviation)
    return TrialOutcome(deviation, deviation <= tol and report.passed)


KINDS: dict[str, SweepKind] = {
    k.name: k
    for k in (
        SweepKind("nosignal", 2, ((2, 2), (2, 3), (3, 3), (4, 4)), 1000, 1e-10, _nosignal_trial),
        SweepKind("gleason", 1, ((3,), (4,), (5,), (6,)), 1000, 1e-10, _gleason_trial),
        SweepKind("boxes", 2, ((2, 2),), 100, 1e-10, _boxes_trial),
        SweepKind("search", 2, ((3, 3),), 1, 1e-8, _search_trial),
        SweepKind("bridge", 2, ((2, 2), (2, 3), (3, 3)), 200, 1e-12, _bridge_trial),
        SweepKind("reduced", 2, ((2, 2), (2, 3), (3, 3)), 500, 1e-10, _reduced_trial),
        SweepKind("qutrit", 1, ((3,),), 100, 1e-12, _qutrit_trial),
    )
}


def get_kind(name: str) -> SweepKind:
    kind = KINDS.get(name)
    if kind is None:
        msg = f"unknown sweep kind {name!r}, expected one of {', '.join(KINDS)}"
        raise UnknownKindError(msg)
    return kind


def parse_dims(text: str) -> list[Dims]:
    """"2x2,3x3" -> [(2, 2), (3, 3)]; "4,5" -> [(4,), (5,)]."""
    try:
        return [tuple(int(d) for d in part.split("x")) for part in text.split(",") if part.strip()]
    except ValueError as e:
        msg = f"cannot read dimensions from {text!r}"
        raise InputError(msg) from e


def _check_dims(kind: SweepKind, dims: Dims) -> None:
    if len(dims) != kind.arity or any(d < 2 for d in dims):  # noqa: PLR2004
        msg = f"sweep {kind.name} needs {kind.arity} dimension(s) >= 2, got {list(dims)}"
        raise InputError(msg)
    if kind.name == "qutrit" and dims != (3,):
        msg = f"sweep qutrit only runs in dimension 3, got {list(dims)}"
        raise InputError(msg)


def check_sweep_args(
    name: str,
    dims: Sequence[Dims] | None = None,
    trials: int | None = None,
    budget: int | None = None,
    *,
    seed: int | None = None,
) -> SweepKind:
    kind = get_kind(name)
    if seed is not None and seed < 0:
        msg = f"seed must be >= 0, got {seed}"
        raise InputError(msg)
    if trials is not None and trials < 1:
        msg = f"trials must be >= 1, got {trials}"
        raise InputError(msg)
    if budget is not None and budget < 1:
        msg = f"budget must be >= 1, got {budget}"
        raise InputError(msg)
    if dims is not None and len(dims) == 0:
        msg = "no dimensions given"
        raise InputError(msg)
    for d in dims or ():
        _check_dims(kind, tuple(d))
    return kind


def _dims_label(dims: Dims) -> str:
    return "x".join(str(d) for d in dims)


def sweep_entries(  # noqa: PLR0913
    name: str,
    dims: Sequence[Dims] | None = None,
    trials: int | None = None,
    seed: int = DEFAULT_SEED,
    tol: float | None = None,
    budget: int | None = None,
    *,
    index: int = 0,
    workers: int = 1,
) -> list[EntryResult]:
    """One entry per dimension tuple, each covering `trials` seeded trials."""
    kind = check_sweep_args(name, dims, trials, budget, seed=seed)
    dims = [tuple(d) for d in (kind.dims if dims is None else dims)]
    trials = kind.trials if trials is None else trials
    tol = kind.tol if tol is None else tol
    budget = DEFAULT_BUDGET if budget is None else budget

    seeds = np.random.SeedSequence(seed).generate_state(len(dims) * trials, dtype=np.uint32)
    entries = []
    for n, d in enumerate(dims):
        trial_seeds = [int(s) for s in seeds[n * trials : (n + 1) * trials]]

        def run(trial_seed: int, d: Dims = d) -> TrialOutcome:
            outcome = kind.trial(np.random.default_rng(trial_seed), d, tol, budget)
            log_message(f"{kind.name} {_dims_label(d)} seed {trial_seed}: {outcome.deviation:.3e}", level=LOGNONE)
            return outcome

        start = time.perf_counter()
        with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
            outcomes = list(pool.map(run, trial_seeds))
        elapsed = time.perf_counter() - start

        failing = [s for s, o in zip(trial_seeds, outcomes, strict=True) if not o.passed]
        worst = max(o.deviation for o in outcomes)
        if failing:
            log_message(
                f"sweep {kind.name} {_dims_label(d)}: {len(failing)} failing seeds, first {failing[0]}",
                level=LOGWARNING,
            )
        log_message(f"sweep {kind.name} {_dims_label(d)}: {trials} trials, worst deviation {worst:.3e}", level=LOGINFO)
        details = {"dims": list(d), "trials": trials, "tol": tol, "failures": len(failing)}
        if kind.name == "search":
            details["budget"] = budget
        entries.append(
            EntryResult(
                index=index,
                kind=f"sweep:{kind.name} {_dims_label(d)}",
                passed=not failing,
                max_deviation=worst,
                elapsed=elapsed,
                details=details,
                failing_seed=failing[0] if failing else None,
            )
        )
    return entries


def run_sweep(  # noqa: PLR0913
    name: str,
    dims: Sequence[Dims] | None = None,
    trials: int | None = None,
    seed: int = DEFAULT_SEED,
    tol: float | None = None,
    budget: int | None = None,
    *,
    workers: int = 1,
) -> RunReport:
    entries = sweep_entries(name, dims, trials, seed, tol, budget, workers=workers)
    return RunReport(source=f"sweep {name}", seed=seed, entries=tuple(entries))
