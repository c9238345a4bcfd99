"""Born-form subspace measures and basis-independence checks.

Measures are always Tr(P rho). Gleason's theorem only forces this form from dimension 3
upwards; the same computation is applied to qubits without further comment.
"""

import itertools
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
import numpy.typing as npt

from .config import DEFAULT_TOLERANCES, Tolerances
from .errors import (
    ContextSpanMismatchError,
    DimensionMismatchError,
    InputError,
    NegativeProbabilityError,
    NonRealTraceError,
    NotBlockInvariantError,
    NotNormalizedError,
    NotOrthonormalError,
)
from .hilbert import (
    DensityMatrix,
    Projector,
    as_columns,
    as_matrix,
    frobenius,
    max_principal_angle,
    orthonormality_deviation,
)
from .instruments import Channel, LocalInstrument, instrument_channel
from .partitions import ProductPartition, SumPartition


@dataclass(frozen=True, eq=False)
class Distribution:
    labels: tuple[str, ...]
    probabilities: tuple[float, ...]
    complete: bool = True

    @property
    def total(self) -> float:
        return float(sum(self.probabilities))

    def as_array(self) -> npt.NDArray[np.float64]:
        return np.array(self.probabilities)


def make_distribution(
    labels: Sequence[str],
    values: Sequence[float] | npt.NDArray[np.float64],
    *,
    complete: bool = True,
    tol: float = DEFAULT_TOLERANCES.prob,
) -> Distribution:
    labels = tuple(str(label) for label in labels)
    values = [float(v) for v in values]
    if len(labels) != len(values):
        msg = f"{len(labels)} labels for {len(values)} probabilities"
        raise InputError(msg)
    for label, v in zip(labels, values, strict=True):
        if v < -tol:
            msg = f"probability of {label} is negative: {v:.3e}"
            raise NegativeProbabilityError(msg, deviation=-v)
        if v > 1 + tol:
            msg = f"probability of {label} exceeds one: {v:.12g}"
            raise NotNormalizedError(msg, deviation=v - 1)
    clamped = tuple(min(max(v, 0.0), 1.0) for v in values)
    if complete and abs(sum(values) - 1) > tol:
        msg = f"probabilities sum to {sum(values):.12g}"
        raise NotNormalizedError(msg, deviation=abs(sum(values) - 1))
    return Distribution(labels=labels, probabilities=clamped, complete=complete)


@dataclass(frozen=True)
class MeasureReport:
    subspace: str
    values: tuple[tuple[str, float], ...]
    max_pairwise_deviation: float
    tol: float
    passed: bool

    @classmethod
    def from_values(cls, subspace: str, values: Sequence[tuple[str, float]], *, tol: float) -> "MeasureReport":
        spread = max((abs(a - b) for (_, a), (_, b) in itertools.combinations(values, 2)), default=0.0)
        return cls(
            subspace=subspace,
            values=tuple(values),
            max_pairwise_deviation=spread,
            tol=tol,
            passed=spread <= tol,
        )


def _check_dims(rho: DensityMatrix, dim: int, what: str) -> None:
    if rho.dim != dim:
        msg = f"state of dimension {rho.dim} does not match {what} of dimension {dim}"
        raise DimensionMismatchError(msg)


def born_measure(
    rho: DensityMatrix,
    projector: Projector | npt.ArrayLike,
    *,
    tols: Tolerances = DEFAULT_TOLERANCES,
) -> float:
    p = projector.matrix if isinstance(projector, Projector) else as_matrix(projector, square=True)
    _check_dims(rho, p.shape[0], "projector")
    value = complex(np.trace(p @ rho.matrix))
    if abs(value.imag) > tols.herm:
        msg = f"Tr(P rho) has imaginary part {value.imag:.3e}"
        raise NonRealTraceError(msg, deviation=abs(value.imag))
    if not -tols.prob <= value.real <= 1 + tols.prob:
        msg = f"Tr(P rho) = {value.real:.12g} is not a probability"
        raise NonRealTraceError(msg, deviation=max(-value.real, value.real - 1))
    return min(max(value.real, 0.0), 1.0)


def frame_distribution(
    rho: DensityMatrix,
    basis: npt.ArrayLike,
    *,
    labels: Sequence[str] | None = None,
    tols: Tolerances = DEFAULT_TOLERANCES,
) -> Distribution:
    """mu(e_j) = <e_j|rho|e_j> for each basis column; the basis may span a proper subspace."""
    v = as_columns(basis)
    _check_dims(rho, v.shape[0], "basis")
    dev = orthonormality_deviation(v)
    if dev > tols.res:
        msg = f"frame is not orthonormal: deviation {dev:.3e}"
        raise NotOrthonormalError(msg, deviation=dev)
    weights = np.real(np.einsum("ij,ik,kj->j", v.conj(), rho.matrix, v))
    labels = [str(j) for j in range(v.shape[1])] if labels is None else labels
    return make_distribution(labels, weights, complete=v.shape[1] == rho.dim, tol=tols.prob)


def check_noncontextuality(
    rho: DensityMatrix,
    subspace: npt.ArrayLike,
    contexts: Sequence[npt.ArrayLike],
    tol: float = 1e-10,
    *,
    label: str = "K",
    context_labels: Sequence[str] | None = None,
    tols: Tolerances = DEFAULT_TOLERANCES,
) -> MeasureReport:
    span = as_columns(subspace)
    context_labels = [f"context {i}" for i in range(len(contexts))] if context_labels is None else context_labels
    values = []
    for ctx_label, context in zip(context_labels, contexts, strict=True):
        frame = as_columns(context)
        angle = max_principal_angle(span, frame)
        if angle > tols.span:
            msg = f"{ctx_label} does not span subspace {label}: largest principal angle {angle:.3e}"
            raise ContextSpanMismatchError(msg, deviation=angle)
        values.append((str(ctx_label), frame_distribution(rho, frame, tols=tols).total))
    return MeasureReport.from_values(label, values, tol=tol)


def measure_under_context(
    rho: DensityMatrix,
    sp: SumPartition,
    instrument: Channel | LocalInstrument,
    pp: ProductPartition | None = None,
    *,
    cut: int = 1,
    tols: Tolerances = DEFAULT_TOLERANCES,
) -> Distribution:
    """q_j = Tr(P_j rho') for the state rho' left behind by a block-preserving operation."""
    if isinstance(instrument, LocalInstrument):
        if pp is None:
            msg = "a local instrument needs the product partition it is embedded with"
            raise InputError(msg)
        channel = instrument_channel(instrument, pp, cut=cut)
    else:
        channel = instrument
    _check_dims(rho, sp.total_dim, "sum partition")
    _check_dims(rho, channel.dim, "operation")

    eye = np.eye(sp.total_dim)
    projectors = [b.projector for b in sp.blocks]
    for block, p in zip(sp.blocks, projectors, strict=True):
        for k in channel.kraus_ops:
            leakage = frobenius((eye - p) @ k @ p)
            if leakage > tols.res:
                msg = f"operation leaks out of block {block.label}: |(I - P) K P|_F = {leakage:.3e}"
                raise NotBlockInvariantError(msg, block=block.label, leakage=leakage)

    after = channel.apply_matrix(rho.matrix)
    weights = [float(np.real(np.trace(p @ after))) for p in projectors]
    return make_distribution(sp.labels, weights, tol=tols.prob)
