import dataclasses
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
import numpy.typing as npt
import scipy.linalg

from .config import DEFAULT_TOLERANCES, Tolerances
from .errors import DimensionMismatchError, InputError, NotOrthogonalError, NotTracePreservingError
from .hilbert import (
    ComplexMatrix,
    as_columns,
    as_matrix,
    complex_gaussian,
    dagger,
    frobenius,
    haar_unitary,
    make_projector,
)
from .partitions import ProductPartition, Sector, embed_local, random_index_groups


@dataclass(frozen=True, eq=False)
class Channel:
    dim: int
    kraus_ops: tuple[ComplexMatrix, ...]

    def apply_matrix(self, m: ComplexMatrix) -> ComplexMatrix:
        return sum((k @ m @ dagger(k) for k in self.kraus_ops), start=np.zeros_like(m))


@dataclass(frozen=True, eq=False)
class LocalInstrument:
    """Outcome-labelled trace-preserving instrument on one product sector.

    `elements[a]` holds the Kraus operators of outcome `a`; projective instruments hold
    exactly one projector per outcome.
    """

    sector: Sector
    labels: tuple[str, ...]
    elements: tuple[tuple[ComplexMatrix, ...], ...]
    projective: bool
    name: str = ""

    @property
    def dim(self) -> int:
        return self.elements[0][0].shape[0]

    def effects(self) -> tuple[ComplexMatrix, ...]:
        return tuple(sum(dagger(m) @ m for m in ops) for ops in self.elements)

    def channel(self) -> Channel:
        return Channel(dim=self.dim, kraus_ops=tuple(m for ops in self.elements for m in ops))

    def preceded_by(self, channel: Channel) -> "LocalInstrument":
        if channel.dim != self.dim:
            msg = f"channel of dimension {channel.dim} cannot precede an instrument of dimension {self.dim}"
            raise DimensionMismatchError(msg)
        return LocalInstrument(
            sector=self.sector,
            labels=self.labels,
            elements=tuple(tuple(m @ k for m in ops for k in channel.kraus_ops) for ops in self.elements),
            projective=False,
            name=f"{self.name} after channel" if self.name else "",
        )


def trace_preservation_deviation(kraus_ops: Sequence[ComplexMatrix]) -> float:
    dim = kraus_ops[0].shape[1]
    return frobenius(sum(dagger(k) @ k for k in kraus_ops) - np.eye(dim))


def make_channel(
    kraus_ops: Sequence[npt.ArrayLike],
    *,
    tols: Tolerances = DEFAULT_TOLERANCES,
) -> Channel:
    ops = tuple(as_matrix(k, square=True) for k in kraus_ops)
    if not ops:
        msg = "a channel needs at least one Kraus operator"
        raise InputError(msg)
    if len({k.shape for k in ops}) != 1:
        msg = f"Kraus operators have different shapes: {[k.shape for k in ops]}"
        raise DimensionMismatchError(msg)
    dev = trace_preservation_deviation(ops)
    if dev > tols.res:
        msg = f"channel is not trace preserving: |sum K^dagger K - I|_F = {dev:.3e}"
        raise NotTracePreservingError(msg, deviation=dev)
    return Channel(dim=ops[0].shape[0], kraus_ops=ops)


def _outcome_ops(element: npt.ArrayLike) -> tuple[ComplexMatrix, ...]:
    arr = np.asarray(element)
    if arr.ndim == 2:  # noqa: PLR2004
        return (as_matrix(arr, square=True),)
    return tuple(as_matrix(m, square=True) for m in arr)


def make_instrument(
    elements: Sequence[npt.ArrayLike],
    *,
    sector: Sector = "A",
    labels: Sequence[str] | None = None,
    name: str = "",
    tols: Tolerances = DEFAULT_TOLERANCES,
    trace_preserving: bool = True,
) -> LocalInstrument:
    ops = tuple(_outcome_ops(e) for e in elements)
    if not ops or any(not o for o in ops):
        msg = "an instrument needs at least one Kraus operator per outcome"
        raise InputError(msg)
    if len({m.shape for o in ops for m in o}) != 1:
        msg = "instrument Kraus operators have different shapes"
        raise DimensionMismatchError(msg)
    labels = tuple(str(a) for a in range(len(ops))) if labels is None else tuple(str(a) for a in labels)
    if len(labels) != len(ops):
        msg = f"{len(labels)} labels for {len(ops)} outcomes"
        raise InputError(msg)
    if trace_preserving:
        dev = trace_preservation_deviation([m for o in ops for m in o])
        if dev > tols.res:
            msg = f"instrument is not trace preserving: |sum M^dagger M - I|_F = {dev:.3e}"
            raise NotTracePreservingError(msg, deviation=dev)
    return LocalInstrument(sector=sector, labels=labels, elements=ops, projective=False, name=name)


def projective_instrument(
    projectors: Sequence[npt.ArrayLike],
    *,
    sector: Sector = "A",
    labels: Sequence[str] | None = None,
    name: str = "",
    tols: Tolerances = DEFAULT_TOLERANCES,
) -> LocalInstrument:
    checked = [make_projector(p, tols=tols).matrix for p in projectors]
    for i in range(len(checked)):
        for j in range(i + 1, len(checked)):
            overlap = frobenius(checked[i] @ checked[j])
            if overlap > tols.res:
                msg = f"projectors {i} and {j} are not orthogonal: |P_i P_j|_F = {overlap:.3e}"
                raise NotOrthogonalError(msg, deviation=overlap)
    instrument = make_instrument([[p] for p in checked], sector=sector, labels=labels, name=name, tols=tols)
    return dataclasses.replace(instrument, projective=True)


def basis_instrument(
    columns: npt.ArrayLike,
    *,
    sector: Sector = "A",
    labels: Sequence[str] | None = None,
    name: str = "",
    tols: Tolerances = DEFAULT_TOLERANCES,
) -> LocalInstrument:
    """Measurement in the orthonormal basis given by the columns."""
    v = as_columns(columns)
    return projective_instrument(
        [np.outer(v[:, k], v[:, k].conj()) for k in range(v.shape[1])],
        sector=sector,
        labels=labels,
        name=name,
        tols=tols,
    )


def trivial_instrument(dim: int, *, sector: Sector = "A") -> LocalInstrument:
    return projective_instrument([np.eye(dim)], sector=sector, labels=["*"], name="trivial")


def instrument_channel(instrument: LocalInstrument, pp: ProductPartition, *, cut: int = 1) -> Channel:
    """The non-selective instrument embedded in the whole space, e.g. E_A (x) I_B."""
    return Channel(
        dim=pp.total_dim,
        kraus_ops=tuple(embed_local(m, pp, sector=instrument.sector, cut=cut) for m in instrument.channel().kraus_ops),
    )


def random_projective_instrument(
    rng: np.random.Generator,
    dim: int,
    outcomes: int,
    *,
    sector: Sector = "A",
) -> LocalInstrument:
    u = haar_unitary(rng, dim)
    projectors = [u[:, g] @ dagger(u[:, g]) for g in random_index_groups(rng, dim, outcomes)]
    return projective_instrument(projectors, sector=sector, name="random projective")


def unitary_then_measure(
    u: ComplexMatrix,
    groups: Sequence[Sequence[int]],
    *,
    sector: Sector = "A",
    weights: Sequence[float] | None = None,
) -> LocalInstrument:
    """Unitary followed by a computational-basis measurement coarse-grained into `groups`.

    `weights` rescales each outcome's Kraus operator, which breaks trace preservation
    and is only meant for exercising the signaling search.
    """
    dim = u.shape[0]
    eye = np.eye(dim)
    scale = [1.0] * len(groups) if weights is None else list(weights)
    elements = [[np.sqrt(w) * (eye[:, g] @ eye[g, :]) @ u] for g, w in zip(groups, scale, strict=True)]
    return make_instrument(elements, sector=sector, name="unitary+measure", trace_preserving=weights is None)


def _normalized_kraus(g: npt.NDArray[np.complex128]) -> tuple[ComplexMatrix, ...]:
    # M_k = G_k S^{-1/2} with S = sum_k G_k^dagger G_k, so sum_k M_k^dagger M_k = I
    s = sum(dagger(gk) @ gk for gk in g)
    w, v = scipy.linalg.eigh(s)
    inv_sqrt = (v / np.sqrt(w)) @ dagger(v)
    return tuple(gk @ inv_sqrt for gk in g)


def povm_from_seeds(
    g: npt.NDArray[np.complex128],
    *,
    sector: Sector = "A",
    weights: Sequence[float] | None = None,
) -> LocalInstrument:
    kraus = _normalized_kraus(g)
    scale = [1.0] * len(kraus) if weights is None else list(weights)
    return make_instrument(
        [[np.sqrt(w) * k] for k, w in zip(kraus, scale, strict=True)],
        sector=sector,
        name="povm",
        trace_preserving=weights is None,
    )


def random_povm_instrument(
    rng: np.random.Generator,
    dim: int,
    outcomes: int,
    *,
    sector: Sector = "A",
) -> LocalInstrument:
    return povm_from_seeds(complex_gaussian(rng, (outcomes, dim, dim)), sector=sector)


def random_channel(rng: np.random.Generator, dim: int, n_kraus: int) -> Channel:
    return make_channel(_normalized_kraus(complex_gaussian(rng, (n_kraus, dim, dim))))
