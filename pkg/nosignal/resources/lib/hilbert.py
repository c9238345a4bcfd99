"""Validated finite-dimensional states, projectors, observables and unitaries."""

from dataclasses import dataclass

import numpy as np
import numpy.typing as npt
import scipy.linalg

from .config import DEFAULT_TOLERANCES, Tolerances
from .errors import (
    DimensionMismatchError,
    InputError,
    NonFiniteError,
    NotHermitianError,
    NotNormalizedError,
    NotOrthonormalError,
    NotPositiveError,
    NotProjectorError,
    NotSquareError,
    NotUnitaryError,
    NotUnitTraceError,
    RankOutOfRangeError,
)

ComplexMatrix = npt.NDArray[np.complex128]
ComplexVector = npt.NDArray[np.complex128]


def as_matrix(data: npt.ArrayLike, *, square: bool = False) -> ComplexMatrix:
    m = np.array(data, dtype=np.complex128)
    if m.ndim != 2:  # noqa: PLR2004
        msg = f"expected a matrix, got an array of shape {m.shape}"
        raise DimensionMismatchError(msg)
    if not np.all(np.isfinite(m)):
        msg = "matrix has non-finite entries"
        raise NonFiniteError(msg)
    if square and m.shape[0] != m.shape[1]:
        msg = f"expected a square matrix, got shape {m.shape}"
        raise NotSquareError(msg)
    m.setflags(write=False)
    return m


def as_vector(data: npt.ArrayLike) -> ComplexVector:
    v = np.array(data, dtype=np.complex128)
    if v.ndim != 1:
        msg = f"expected a vector, got an array of shape {v.shape}"
        raise DimensionMismatchError(msg)
    if not np.all(np.isfinite(v)):
        msg = "vector has non-finite entries"
        raise NonFiniteError(msg)
    v.setflags(write=False)
    return v


def as_columns(data: npt.ArrayLike) -> ComplexMatrix:
    """Accept a single vector or a matrix of basis columns."""
    m = np.array(data, dtype=np.complex128)
    if m.ndim == 1:
        m = m.reshape(-1, 1)
    return as_matrix(m)


def _frozen(m: npt.ArrayLike) -> ComplexMatrix:
    out = np.array(m, dtype=np.complex128)
    out.setflags(write=False)
    return out


def dagger(m: ComplexMatrix) -> ComplexMatrix:
    return m.conj().T


def frobenius(m: npt.ArrayLike) -> float:
    return float(np.linalg.norm(m))


def hermitian_part(m: ComplexMatrix) -> ComplexMatrix:
    return (m + dagger(m)) / 2


def orthonormality_deviation(columns: ComplexMatrix) -> float:
    k = columns.shape[1]
    return frobenius(dagger(columns) @ columns - np.eye(k))


def max_principal_angle(a: ComplexMatrix, b: ComplexMatrix) -> float:
    if a.shape[1] != b.shape[1]:
        return float(np.pi / 2)
    return float(np.max(scipy.linalg.subspace_angles(a, b)))


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    dim: int
    matrix: ComplexMatrix

    def eigenvalues(self) -> npt.NDArray[np.float64]:
        return scipy.linalg.eigvalsh(self.matrix)

    def is_pure(self, *, tol: float = DEFAULT_TOLERANCES.idem) -> bool:
        return frobenius(self.matrix @ self.matrix - self.matrix) <= tol


@dataclass(frozen=True, eq=False)
class Projector:
    dim: int
    matrix: ComplexMatrix
    rank: int


@dataclass(frozen=True, eq=False)
class Observable:
    dim: int
    matrix: ComplexMatrix
    spectrum: tuple[tuple[float, Projector], ...]

    @property
    def eigenvalues(self) -> tuple[float, ...]:
        return tuple(v for v, _ in self.spectrum)

    @property
    def projectors(self) -> tuple[Projector, ...]:
        return tuple(p for _, p in self.spectrum)

    def projector_for(self, eigenvalue: float, *, tol: float = DEFAULT_TOLERANCES.cluster) -> Projector:
        for value, projector in self.spectrum:
            if abs(value - eigenvalue) <= tol:
                return projector
        msg = f"{eigenvalue} is not an eigenvalue (spectrum {self.eigenvalues})"
        raise InputError(msg)


@dataclass(frozen=True, eq=False)
class Unitary:
    dim: int
    matrix: ComplexMatrix


def make_density(matrix: npt.ArrayLike, *, tols: Tolerances = DEFAULT_TOLERANCES) -> DensityMatrix:
    m = as_matrix(matrix, square=True)
    violations: list[InputError] = []

    herm_dev = frobenius(m - dagger(m))
    if herm_dev > tols.herm:
        msg = f"density matrix is not Hermitian: |rho - rho^dagger|_F = {herm_dev:.3e}"
        violations.append(NotHermitianError(msg, deviation=herm_dev))

    h = hermitian_part(m)
    trace_dev = abs(np.trace(m) - 1)
    if trace_dev > tols.trace:
        msg = f"density matrix trace is {np.trace(m).real:.12g}, off by {trace_dev:.3e}"
        violations.append(NotUnitTraceError(msg, deviation=float(trace_dev)))

    min_eig = float(scipy.linalg.eigvalsh(h)[0])
    if min_eig < -tols.psd:
        msg = f"density matrix is not positive: smallest eigenvalue {min_eig:.3e}"
        violations.append(NotPositiveError(msg, deviation=-min_eig))

    if len(violations) == 1:
        raise violations[0]
    if violations:
        msg = "invalid density matrix"
        raise ExceptionGroup(msg, violations)

    return DensityMatrix(dim=m.shape[0], matrix=_frozen(h))


def pure_state(
    amplitudes: npt.ArrayLike,
    *,
    normalize: bool = False,
    tols: Tolerances = DEFAULT_TOLERANCES,
) -> DensityMatrix:
    v = as_vector(amplitudes)
    norm = float(np.linalg.norm(v))
    if normalize:
        if norm == 0:
            msg = "cannot normalize the zero vector"
            raise NotNormalizedError(msg, deviation=1.0)
        v = v / norm
    elif abs(norm - 1) > tols.norm:
        msg = f"state vector has norm {norm:.12g}"
        raise NotNormalizedError(msg, deviation=abs(norm - 1))
    return make_density(np.outer(v, v.conj()), tols=tols)


def basis_state(dim: int, k: int) -> ComplexVector:
    v = np.zeros(dim, dtype=np.complex128)
    v[k] = 1
    v.setflags(write=False)
    return v


def maximally_mixed(dim: int) -> DensityMatrix:
    return make_density(np.eye(dim) / dim)


def bell_state() -> DensityMatrix:
    """Phi+ = (|00> + |11>)/sqrt(2)."""
    return pure_state(np.array([1, 0, 0, 1]) / np.sqrt(2))


def make_projector(matrix: npt.ArrayLike, *, tols: Tolerances = DEFAULT_TOLERANCES) -> Projector:
    m = as_matrix(matrix, square=True)
    herm_dev = frobenius(m - dagger(m))
    if herm_dev > tols.herm:
        msg = f"projector is not Hermitian: deviation {herm_dev:.3e}"
        raise NotHermitianError(msg, deviation=herm_dev)
    idem_dev = frobenius(m @ m - m)
    if idem_dev > tols.idem:
        msg = f"projector is not idempotent: |P^2 - P|_F = {idem_dev:.3e}"
        raise NotProjectorError(msg, deviation=idem_dev)
    trace = float(np.trace(m).real)
    rank = round(trace)
    if abs(trace - rank) > tols.trace:
        msg = f"projector trace {trace:.12g} is not an integer rank"
        raise NotProjectorError(msg, deviation=abs(trace - rank))
    return Projector(dim=m.shape[0], matrix=_frozen(hermitian_part(m)), rank=rank)


def projector_onto(columns: npt.ArrayLike, *, tols: Tolerances = DEFAULT_TOLERANCES) -> Projector:
    v = as_columns(columns)
    dev = orthonormality_deviation(v)
    if dev > tols.res:
        msg = f"basis columns are not orthonormal: |V^dagger V - I|_F = {dev:.3e}"
        raise NotOrthonormalError(msg, deviation=dev)
    return Projector(dim=v.shape[0], matrix=_frozen(v @ dagger(v)), rank=v.shape[1])


def spectral_decompose(
    matrix: npt.ArrayLike,
    cluster_tol: float | None = None,
    *,
    tols: Tolerances = DEFAULT_TOLERANCES,
) -> Observable:
    """Eigen-decompose a Hermitian matrix, merging eigenvalues closer than `cluster_tol`.

    Consecutive sorted eigenvalues with a gap below the tolerance end up in one cluster,
    reported as a single eigenvalue (the cluster mean) with a projector of rank > 1.
    """
    m = as_matrix(matrix, square=True)
    herm_dev = frobenius(m - dagger(m))
    if herm_dev > tols.herm:
        msg = f"observable is not Hermitian: deviation {herm_dev:.3e}"
        raise NotHermitianError(msg, deviation=herm_dev)
    cluster_tol = tols.cluster if cluster_tol is None else cluster_tol

    values, vectors = scipy.linalg.eigh(hermitian_part(m))
    clusters: list[list[int]] = [[0]]
    for i in range(1, len(values)):
        if values[i] - values[i - 1] < cluster_tol:
            clusters[-1].append(i)
        else:
            clusters.append([i])

    spectrum = []
    for idx in clusters:
        v = vectors[:, idx]
        projector = Projector(dim=m.shape[0], matrix=_frozen(v @ dagger(v)), rank=len(idx))
        spectrum.append((float(np.mean(values[idx])), projector))
    return Observable(dim=m.shape[0], matrix=m, spectrum=tuple(spectrum))


def commutator_norm(a: npt.ArrayLike, b: npt.ArrayLike) -> float:
    a = as_matrix(a, square=True)
    b = as_matrix(b, square=True)
    if a.shape != b.shape:
        msg = f"cannot commute a {a.shape} matrix with a {b.shape} matrix"
        raise DimensionMismatchError(msg)
    return frobenius(a @ b - b @ a)


def make_unitary(matrix: npt.ArrayLike, *, tols: Tolerances = DEFAULT_TOLERANCES) -> Unitary:
    u = as_matrix(matrix, square=True)
    dev = frobenius(dagger(u) @ u - np.eye(u.shape[0]))
    if dev > tols.unitary:
        msg = f"matrix is not unitary: |U^dagger U - I|_F = {dev:.3e}"
        raise NotUnitaryError(msg, deviation=dev)
    return Unitary(dim=u.shape[0], matrix=u)


def complex_gaussian(rng: np.random.Generator, shape: tuple[int, ...]) -> npt.NDArray[np.complex128]:
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def qr_unitary(m: npt.ArrayLike) -> ComplexMatrix:
    """Q of the QR factorization, with the phases of R's diagonal moved into Q so it is unique."""
    q, r = scipy.linalg.qr(m)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def haar_unitary(rng: np.random.Generator, dim: int) -> ComplexMatrix:
    return qr_unitary(complex_gaussian(rng, (dim, dim)))


def haar_random_unitary(dim: int, seed: int) -> Unitary:
    if dim < 1:
        msg = f"dimension must be >= 1, got {dim}"
        raise InputError(msg)
    rng = np.random.default_rng(seed)
    return Unitary(dim=dim, matrix=_frozen(haar_unitary(rng, dim)))


def induced_density(rng: np.random.Generator, dim: int, rank: int) -> ComplexMatrix:
    # partial trace of a Haar-random pure state on C^dim x C^rank over the second factor
    g = complex_gaussian(rng, (dim, rank))
    g /= np.linalg.norm(g)
    return g @ dagger(g)


def random_density(
    dim: int,
    rank: int,
    seed: int,
    *,
    tols: Tolerances = DEFAULT_TOLERANCES,
) -> DensityMatrix:
    if not 1 <= rank <= dim:
        msg = f"rank must be within [1, {dim}], got {rank}"
        raise RankOutOfRangeError(msg)
    rng = np.random.default_rng(seed)
    return make_density(induced_density(rng, dim, rank), tols=tols)


def random_pure_state(dim: int, seed: int) -> DensityMatrix:
    return random_density(dim, 1, seed)
