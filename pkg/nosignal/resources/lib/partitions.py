import math
from collections.abc import Sequence
from dataclasses import dataclass
from typing import Literal

import numpy as np
import numpy.typing as npt

from .config import DEFAULT_TOLERANCES, Tolerances
from .errors import (
    DimensionMismatchError,
    DimensionSumMismatchError,
    EmptyPartitionError,
    InputError,
    NotOrthogonalError,
)
from .hilbert import ComplexMatrix, as_columns, as_matrix, dagger, frobenius, haar_unitary, orthonormality_deviation

Sector = Literal["A", "B"]


@dataclass(frozen=True)
class SectorIndexMap:
    """Row-major index bookkeeping: the first sector varies slowest."""

    sector_dims: tuple[int, ...]

    def to_global(self, indices: Sequence[int]) -> int:
        if len(indices) != len(self.sector_dims):
            msg = f"expected {len(self.sector_dims)} sector indices, got {len(indices)}"
            raise DimensionMismatchError(msg)
        return int(np.ravel_multi_index(tuple(indices), self.sector_dims))

    def to_local(self, index: int) -> tuple[int, ...]:
        return tuple(int(i) for i in np.unravel_index(index, self.sector_dims))


@dataclass(frozen=True)
class ProductPartition:
    sector_dims: tuple[int, ...]
    total_dim: int
    index_map: SectorIndexMap

    @property
    def trivial(self) -> bool:
        return len(self.sector_dims) < 2 or any(d == 1 for d in self.sector_dims)  # noqa: PLR2004

    @property
    def dim_a(self) -> int:
        return self.sector_dims[0]

    @property
    def dim_b(self) -> int:
        return math.prod(self.sector_dims[1:])


@dataclass(frozen=True, eq=False)
class SumBlock:
    label: str
    basis: ComplexMatrix
    indices: tuple[int, ...] | None

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    @property
    def projector(self) -> ComplexMatrix:
        return self.basis @ dagger(self.basis)


@dataclass(frozen=True, eq=False)
class SumPartition:
    total_dim: int
    blocks: tuple[SumBlock, ...]

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(b.label for b in self.blocks)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(b.dim for b in self.blocks)

    def projector(self, j: int) -> ComplexMatrix:
        return self.blocks[j].projector


def make_product_partition(sector_dims: Sequence[int]) -> ProductPartition:
    dims = tuple(int(d) for d in sector_dims)
    if not dims:
        msg = "a product partition needs at least one sector"
        raise EmptyPartitionError(msg)
    if any(d < 1 for d in dims):
        msg = f"sector dimensions must be >= 1, got {list(dims)}"
        raise InputError(msg)
    return ProductPartition(sector_dims=dims, total_dim=math.prod(dims), index_map=SectorIndexMap(dims))


def as_bipartite(pp: ProductPartition, cut: int = 1) -> ProductPartition:
    n = len(pp.sector_dims)
    if n == 2 and cut == 1:  # noqa: PLR2004
        return pp
    if not 1 <= cut < n:
        msg = f"cannot cut a {n}-sector partition after sector {cut}"
        raise InputError(msg)
    return make_product_partition([math.prod(pp.sector_dims[:cut]), math.prod(pp.sector_dims[cut:])])


def _axis_indices(basis: ComplexMatrix, tol: float) -> tuple[int, ...] | None:
    indices = []
    for col in basis.T:
        support = np.flatnonzero(np.abs(col) > tol)
        if len(support) != 1 or abs(abs(col[support[0]]) - 1) > tol:
            return None
        indices.append(int(support[0]))
    return tuple(sorted(indices))


def make_sum_partition(
    blocks: Sequence[npt.ArrayLike],
    *,
    labels: Sequence[str] | None = None,
    tols: Tolerances = DEFAULT_TOLERANCES,
) -> SumPartition:
    bases = [as_columns(b) for b in blocks]
    if not bases:
        msg = "a sum partition needs at least one block"
        raise EmptyPartitionError(msg)
    total_dim = bases[0].shape[0]
    if any(b.shape[0] != total_dim for b in bases):
        msg = f"blocks live in different spaces: {[b.shape[0] for b in bases]}"
        raise DimensionMismatchError(msg)
    labels = [str(j) for j in range(len(bases))] if labels is None else [str(label) for label in labels]
    if len(labels) != len(bases):
        msg = f"{len(labels)} labels for {len(bases)} blocks"
        raise InputError(msg)

    for label, basis in zip(labels, bases, strict=True):
        dev = orthonormality_deviation(basis)
        if dev > tols.res:
            msg = f"block {label} columns are not orthonormal: deviation {dev:.3e}"
            raise NotOrthogonalError(msg, deviation=dev)
    for i in range(len(bases)):
        for j in range(i + 1, len(bases)):
            overlap = frobenius(dagger(bases[i]) @ bases[j])
            if overlap > tols.res:
                msg = f"blocks {labels[i]} and {labels[j]} overlap: |B_i^dagger B_j|_F = {overlap:.3e}"
                raise NotOrthogonalError(msg, deviation=overlap)

    dim_sum = sum(b.shape[1] for b in bases)
    if dim_sum != total_dim:
        msg = f"block dimensions sum to {dim_sum}, the space has dimension {total_dim}"
        raise DimensionSumMismatchError(msg)

    return SumPartition(
        total_dim=total_dim,
        blocks=tuple(
            SumBlock(label=label, basis=basis, indices=_axis_indices(basis, tols.res))
            for label, basis in zip(labels, bases, strict=True)
        ),
    )


def axis_aligned_partition(
    dim: int,
    index_sets: Sequence[Sequence[int]],
    *,
    labels: Sequence[str] | None = None,
) -> SumPartition:
    eye = np.eye(dim)
    blocks = []
    for indices in index_sets:
        if any(not 0 <= k < dim for k in indices):
            msg = f"basis indices {list(indices)} out of range for dimension {dim}"
            raise DimensionMismatchError(msg)
        blocks.append(eye[:, list(indices)])
    return make_sum_partition(blocks, labels=labels)


def induced_sum_partition(pp: ProductPartition, b_blocks: SumPartition, *, cut: int = 1) -> SumPartition:
    """Lift a split of H_B to the split K_j = H_A (x) B_j of the whole space."""
    pp = as_bipartite(pp, cut)
    dim_a, dim_b = pp.sector_dims
    if b_blocks.total_dim != dim_b:
        msg = f"B-split acts on dimension {b_blocks.total_dim}, sector B has dimension {dim_b}"
        raise DimensionMismatchError(msg)

    eye_a = np.eye(dim_a)
    blocks = []
    for block in b_blocks.blocks:
        indices = None
        if block.indices is not None:
            indices = tuple(sorted(pp.index_map.to_global((a, k)) for a in range(dim_a) for k in block.indices))
        basis = np.kron(eye_a, block.basis)
        basis.setflags(write=False)
        blocks.append(SumBlock(label=block.label, basis=basis, indices=indices))
    return SumPartition(total_dim=pp.total_dim, blocks=tuple(blocks))


def factorizations(dim: int) -> list[tuple[int, int]]:
    if dim < 2:  # noqa: PLR2004
        msg = f"dimension must be >= 2, got {dim}"
        raise InputError(msg)
    return [(d, dim // d) for d in range(2, math.isqrt(dim) + 1) if dim % d == 0]


def embed_local(
    op_matrix: npt.ArrayLike,
    pp: ProductPartition,
    *,
    sector: Sector = "A",
    cut: int = 1,
) -> ComplexMatrix:
    pp = as_bipartite(pp, cut)
    dim_a, dim_b = pp.sector_dims
    op = as_matrix(op_matrix, square=True)
    expected = dim_a if sector == "A" else dim_b
    if op.shape[0] != expected:
        msg = f"operator of dimension {op.shape[0]} does not act on sector {sector} (dimension {expected})"
        raise DimensionMismatchError(msg)
    out = np.kron(op, np.eye(dim_b)) if sector == "A" else np.kron(np.eye(dim_a), op)
    out.setflags(write=False)
    return out


def random_index_groups(rng: np.random.Generator, dim: int, n_groups: int) -> list[list[int]]:
    if not 1 <= n_groups <= dim:
        msg = f"cannot split dimension {dim} into {n_groups} nonempty groups"
        raise InputError(msg)
    order = rng.permutation(dim)
    cuts = sorted(rng.choice(np.arange(1, dim), size=n_groups - 1, replace=False)) if n_groups > 1 else []
    return [sorted(int(i) for i in g) for g in np.split(order, cuts)]


def random_sum_partition(dim: int, rng: np.random.Generator, *, axis_aligned: bool) -> SumPartition:
    groups = random_index_groups(rng, dim, int(rng.integers(1, dim + 1)))
    frame = np.eye(dim, dtype=np.complex128) if axis_aligned else haar_unitary(rng, dim)
    return make_sum_partition([frame[:, g] for g in groups])
