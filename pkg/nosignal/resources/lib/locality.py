import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
import numpy.typing as npt

from .config import DEFAULT_TOLERANCES, Tolerances
from .errors import (
    DimensionMismatchError,
    InputError,
    NegativeProbabilityError,
    NotNormalizedError,
    NotTracePreservingError,
    SameSectorError,
    WrongSectorError,
)
from .gleason import Distribution, MeasureReport, make_distribution, measure_under_context
from .hilbert import DensityMatrix, dagger, frobenius, make_density
from .instruments import Channel, LocalInstrument, basis_instrument, instrument_channel, trace_preservation_deviation
from .partitions import ProductPartition, Sector, SumPartition, as_bipartite, embed_local, induced_sum_partition
from .utils import LOGNONE, log_message


@dataclass(frozen=True, eq=False)
class JointTable:
    row_labels: tuple[str, ...]
    col_labels: tuple[str, ...]
    probabilities: npt.NDArray[np.float64]

    def col_marginal(self) -> npt.NDArray[np.float64]:
        return self.probabilities.sum(axis=0)

    @property
    def total(self) -> float:
        return float(self.probabilities.sum())


@dataclass(frozen=True)
class SignalReport:
    contexts: tuple[str, str]
    labels: tuple[str, ...]
    deviations: tuple[float, ...]
    max_deviation: float
    tol: float
    passed: bool
    # (mu(K_j|E), mu(K_j|E')) per block, from the subspace-measure side
    measures: tuple[tuple[float, float], ...] = ()
    noncontextuality: MeasureReport | None = None

    @classmethod
    def compare(
        cls,
        contexts: tuple[str, str],
        first: Distribution,
        second: Distribution,
        *,
        tol: float,
        measures: tuple[tuple[float, float], ...] = (),
        noncontextuality: MeasureReport | None = None,
    ) -> "SignalReport":
        deviations = tuple(float(abs(p - q)) for p, q in zip(first.probabilities, second.probabilities, strict=True))
        worst = max(deviations, default=0.0)
        return cls(
            contexts=contexts,
            labels=first.labels,
            deviations=deviations,
            max_deviation=worst,
            tol=tol,
            passed=worst <= tol,
            measures=measures,
            noncontextuality=noncontextuality,
        )


@dataclass(frozen=True)
class ReducedStateReport:
    deviation: float
    tol: float
    passed: bool


def apply_channel(rho: DensityMatrix, ch: Channel, *, tols: Tolerances = DEFAULT_TOLERANCES) -> DensityMatrix:
    if ch.dim != rho.dim:
        msg = f"channel of dimension {ch.dim} cannot act on a state of dimension {rho.dim}"
        raise DimensionMismatchError(msg)
    dev = trace_preservation_deviation(ch.kraus_ops)
    if dev > tols.res:
        msg = f"channel is not trace preserving: deviation {dev:.3e}"
        raise NotTracePreservingError(msg, deviation=dev)
    return make_density(ch.apply_matrix(rho.matrix), tols=tols)


def _sector_indices(pp: ProductPartition, keep: Sector | int | Sequence[int], cut: int) -> list[int]:
    n = len(pp.sector_dims)
    if keep == "A":
        return list(range(cut))
    if keep == "B":
        return list(range(cut, n))
    indices = [keep] if isinstance(keep, int) else sorted(keep)
    if any(not 0 <= i < n for i in indices):
        msg = f"sector indices {indices} out of range for {n} sectors"
        raise InputError(msg)
    return indices


def partial_trace(
    rho: DensityMatrix,
    pp: ProductPartition,
    keep: Sector | int | Sequence[int] = "A",
    *,
    cut: int = 1,
    tols: Tolerances = DEFAULT_TOLERANCES,
) -> DensityMatrix:
    if rho.dim != pp.total_dim:
        msg = f"state of dimension {rho.dim} does not fit partition {list(pp.sector_dims)}"
        raise DimensionMismatchError(msg)
    dims = list(pp.sector_dims)
    kept = _sector_indices(pp, keep, cut)
    t = rho.matrix.reshape(dims + dims)
    n = len(dims)
    for i in reversed(range(len(dims))):
        if i in kept:
            continue
        t = np.trace(t, axis1=i, axis2=i + n)
        n -= 1
    d = math.prod(dims[i] for i in kept)
    return make_density(t.reshape(d, d), tols=tols)


def joint_distribution(
    rho: DensityMatrix,
    instr_a: LocalInstrument,
    instr_b: LocalInstrument,
    pp: ProductPartition,
    *,
    cut: int = 1,
    tols: Tolerances = DEFAULT_TOLERANCES,
) -> JointTable:
    """P(a, k) = Tr[(M_a (x) N_k) rho (M_a (x) N_k)^dagger], summed over each outcome's Kraus operators."""
    if instr_a.sector == instr_b.sector:
        msg = f"both instruments act on sector {instr_a.sector}"
        raise SameSectorError(msg)
    if instr_a.sector == "B":
        instr_a, instr_b = instr_b, instr_a
    pp = as_bipartite(pp, cut)
    if rho.dim != pp.total_dim or instr_a.dim != pp.dim_a or instr_b.dim != pp.dim_b:
        msg = (
            f"state dimension {rho.dim} and instrument dimensions {instr_a.dim}, {instr_b.dim} "
            f"do not fit partition {list(pp.sector_dims)}"
        )
        raise DimensionMismatchError(msg)

    table = np.zeros((len(instr_a.labels), len(instr_b.labels)))
    for a, ops_a in enumerate(instr_a.elements):
        for k, ops_b in enumerate(instr_b.elements):
            for m in ops_a:
                for n in ops_b:
                    op = np.kron(m, n)
                    table[a, k] += np.real(np.trace(op @ rho.matrix @ dagger(op)))

    worst = float(table.min())
    if worst < -tols.prob:
        msg = f"joint table has a negative entry {worst:.3e}"
        raise NegativeProbabilityError(msg, deviation=-worst)
    if abs(table.sum() - 1) > tols.prob:
        msg = f"joint table sums to {table.sum():.12g}"
        raise NotNormalizedError(msg, deviation=abs(table.sum() - 1))
    table = np.clip(table, 0.0, None)
    table.setflags(write=False)
    return JointTable(row_labels=instr_a.labels, col_labels=instr_b.labels, probabilities=table)


def finest_instrument(sp_b: SumPartition) -> tuple[LocalInstrument, list[int]]:
    """Rank-1 B measurement refining the split, with the block index of each outcome."""
    columns = np.hstack([b.basis for b in sp_b.blocks])
    owners = [j for j, b in enumerate(sp_b.blocks) for _ in range(b.dim)]
    labels = [f"{b.label}:{c}" for b in sp_b.blocks for c in range(b.dim)]
    return basis_instrument(columns, sector="B", labels=labels, name="finest B"), owners


def bob_marginal(
    rho: DensityMatrix,
    instr_a: LocalInstrument,
    sp_b: SumPartition,
    pp: ProductPartition,
    *,
    cut: int = 1,
    tols: Tolerances = DEFAULT_TOLERANCES,
) -> Distribution:
    """Prob_B(j|E) = sum_a sum_{k in block j} P(A=a, B=k)."""
    if instr_a.sector != "A":
        msg = f"Alice's instrument acts on sector {instr_a.sector}"
        raise WrongSectorError(msg)
    finest, owners = finest_instrument(sp_b)
    table = joint_distribution(rho, instr_a, finest, pp, cut=cut, tols=tols)
    weights = np.zeros(len(sp_b.blocks))
    np.add.at(weights, owners, table.col_marginal())
    return make_distribution(sp_b.labels, weights, tol=tols.prob)


def check_nosignaling(  # noqa: PLR0913
    rho: DensityMatrix,
    instr: LocalInstrument,
    instr_prime: LocalInstrument,
    sp_b: SumPartition,
    pp: ProductPartition,
    tol: float = 1e-10,
    *,
    cut: int = 1,
    tols: Tolerances = DEFAULT_TOLERANCES,
) -> SignalReport:
    for i in (instr, instr_prime):
        if i.sector != "A":
            msg = f"instrument {i.name or '?'} acts on sector {i.sector}, expected A"
            raise WrongSectorError(msg)
    first = bob_marginal(rho, instr, sp_b, pp, cut=cut, tols=tols)
    second = bob_marginal(rho, instr_prime, sp_b, pp, cut=cut, tols=tols)

    induced = induced_sum_partition(pp, sp_b, cut=cut)
    mu = measure_under_context(rho, induced, instr, pp, cut=cut, tols=tols)
    mu_prime = measure_under_context(rho, induced, instr_prime, pp, cut=cut, tols=tols)

    report = SignalReport.compare(
        (instr.name or "E", instr_prime.name or "E'"),
        first,
        second,
        tol=tol,
        measures=tuple(zip(mu.probabilities, mu_prime.probabilities, strict=True)),
    )
    log_message(f"no-signaling check {report.contexts}: max deviation {report.max_deviation:.3e}", level=LOGNONE)
    return report


def check_reduced_invariance(
    rho: DensityMatrix,
    channel: Channel,
    pp: ProductPartition,
    tol: float = 1e-10,
    *,
    cut: int = 1,
    tols: Tolerances = DEFAULT_TOLERANCES,
) -> ReducedStateReport:
    """|rho_A - Tr_B[(I (x) Phi)(rho)]|_F for a channel Phi acting on sector B."""
    lifted = Channel(
        dim=pp.total_dim,
        kraus_ops=tuple(embed_local(k, pp, sector="B", cut=cut) for k in channel.kraus_ops),
    )
    before = partial_trace(rho, pp, "A", cut=cut, tols=tols)
    after = partial_trace(apply_channel(rho, lifted, tols=tols), pp, "A", cut=cut, tols=tols)
    deviation = frobenius(before.matrix - after.matrix)
    return ReducedStateReport(deviation=deviation, tol=tol, passed=deviation <= tol)


def post_instrument_state(
    rho: DensityMatrix,
    instr: LocalInstrument,
    pp: ProductPartition,
    *,
    cut: int = 1,
    tols: Tolerances = DEFAULT_TOLERANCES,
) -> DensityMatrix:
    """Non-selective state after the instrument, averaged over its outcomes."""
    return apply_channel(rho, instrument_channel(instr, pp, cut=cut), tols=tols)
