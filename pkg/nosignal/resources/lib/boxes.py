"""Conditional probability boxes p(a, b | x, y), their no-signaling constraints and CHSH values."""

import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
import numpy.typing as npt

from .config import DEFAULT_TOLERANCES, Tolerances
from .errors import InvalidBoxError, WrongArityError
from .hilbert import DensityMatrix, induced_density, make_density
from .instruments import LocalInstrument, projective_instrument, random_projective_instrument
from .locality import joint_distribution
from .partitions import ProductPartition, Sector, make_product_partition

PAULI_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)

TSIRELSON_BOUND = 2 * math.sqrt(2)


@dataclass(frozen=True, eq=False)
class Box:
    """`table[x, y, a, b]` = p(a, b | x, y)."""

    table: npt.NDArray[np.float64]

    @property
    def inputs(self) -> tuple[int, int]:
        return self.table.shape[0], self.table.shape[1]

    @property
    def outputs(self) -> tuple[int, int]:
        return self.table.shape[2], self.table.shape[3]

    def alice_marginals(self) -> npt.NDArray[np.float64]:
        """[x, y, a] = sum_b p(a, b | x, y)."""
        return self.table.sum(axis=3)

    def bob_marginals(self) -> npt.NDArray[np.float64]:
        """[x, y, b] = sum_a p(a, b | x, y)."""
        return self.table.sum(axis=2)


@dataclass(frozen=True)
class BoxReport:
    alice_deviation: float
    bob_deviation: float
    tol: float

    @property
    def max_deviation(self) -> float:
        return max(self.alice_deviation, self.bob_deviation)

    @property
    def passed(self) -> bool:
        return self.max_deviation <= self.tol


def _validate(table: npt.NDArray[np.float64], tol: float) -> None:
    if table.ndim != 4 or 0 in table.shape:  # noqa: PLR2004
        msg = f"a box table is indexed [x][y][a][b], got shape {table.shape}"
        raise InvalidBoxError(msg)
    if not np.all(np.isfinite(table)):
        msg = "box table has non-finite entries"
        raise InvalidBoxError(msg)
    worst = float(table.min())
    if worst < -tol:
        msg = f"box table has a negative entry {worst:.3e}"
        raise InvalidBoxError(msg)
    sums = table.sum(axis=(2, 3))
    x, y = np.unravel_index(np.argmax(np.abs(sums - 1)), sums.shape)
    if abs(sums[x, y] - 1) > tol:
        msg = f"p(., . | x={x}, y={y}) sums to {sums[x, y]:.12g}"
        raise InvalidBoxError(msg)


def make_box(table: npt.ArrayLike, *, tol: float = DEFAULT_TOLERANCES.prob) -> Box:
    try:
        values = np.array(table, dtype=np.float64)
    except (TypeError, ValueError) as e:
        msg = f"box table is not a rectangular array of reals: {e}"
        raise InvalidBoxError(msg) from e
    _validate(values, tol)
    values = np.clip(values, 0.0, None)
    values.setflags(write=False)
    return Box(table=values)


def check_box_nosignaling(box: Box, tol: float = 1e-10) -> BoxReport:
    """Alice's marginals must not depend on y, Bob's must not depend on x."""
    _validate(box.table, DEFAULT_TOLERANCES.prob)
    alice = box.alice_marginals()
    bob = box.bob_marginals()
    alice_dev = float(np.max(alice.max(axis=1) - alice.min(axis=1)))
    bob_dev = float(np.max(bob.max(axis=0) - bob.min(axis=0)))
    return BoxReport(alice_deviation=alice_dev, bob_deviation=bob_dev, tol=tol)


def chsh_value(box: Box) -> float:
    """S = E00 + E01 + E10 - E11 with E_xy = sum_ab (-1)^(a xor b) p(a, b | x, y)."""
    if box.table.shape != (2, 2, 2, 2):
        msg = f"CHSH needs binary inputs and outputs, got shape {box.table.shape}"
        raise WrongArityError(msg)
    parity = np.array([[1.0, -1.0], [-1.0, 1.0]])
    e = np.einsum("xyab,ab->xy", box.table, parity)
    return float(e[0, 0] + e[0, 1] + e[1, 0] - e[1, 1])


def pr_box() -> Box:
    table = np.zeros((2, 2, 2, 2))
    for x, y, a, b in np.ndindex(table.shape):
        if a ^ b == x & y:
            table[x, y, a, b] = 0.5
    return make_box(table)


def uniform_box(na: int = 2, nb: int = 2, nx: int = 2, ny: int = 2) -> Box:
    return make_box(np.full((nx, ny, na, nb), 1.0 / (na * nb)))


def product_box(pa: npt.ArrayLike, pb: npt.ArrayLike) -> Box:
    """p(a|x) q(b|y), with `pa[x, a]` and `pb[y, b]`."""
    return make_box(np.einsum("xa,yb->xyab", np.asarray(pa, dtype=np.float64), np.asarray(pb, dtype=np.float64)))


def measurement_at_angle(theta: float, sector: Sector = "A") -> LocalInstrument:
    """Binary measurement of cos(theta) Z + sin(theta) X; outcome "0" is the +1 eigenvalue."""
    obs = math.cos(theta) * PAULI_Z + math.sin(theta) * PAULI_X
    eye = np.eye(2)
    return projective_instrument(
        [(eye + obs) / 2, (eye - obs) / 2],
        sector=sector,
        labels=["0", "1"],
        name=f"{sector}@{theta:.6g}",
    )


def chsh_instruments() -> tuple[list[LocalInstrument], list[LocalInstrument]]:
    """Settings reaching 2 sqrt(2) on Phi+: A at 0 and pi/2, B at pi/4 and -pi/4."""
    alice = [measurement_at_angle(0.0, "A"), measurement_at_angle(math.pi / 2, "A")]
    bob = [measurement_at_angle(math.pi / 4, "B"), measurement_at_angle(-math.pi / 4, "B")]
    return alice, bob


def box_from_quantum(  # noqa: PLR0913
    rho: DensityMatrix,
    instrs_a: Sequence[LocalInstrument],
    instrs_b: Sequence[LocalInstrument],
    pp: ProductPartition,
    *,
    cut: int = 1,
    tols: Tolerances = DEFAULT_TOLERANCES,
) -> Box:
    """p(a, b | x, y) from the joint table of Alice's x-th and Bob's y-th instrument."""
    for side, instrs in (("A", instrs_a), ("B", instrs_b)):
        if not instrs:
            msg = f"no instruments for side {side}"
            raise InvalidBoxError(msg)
        if len({len(i.labels) for i in instrs}) != 1:
            msg = f"side {side} instruments disagree on the number of outcomes"
            raise InvalidBoxError(msg)

    table = np.array(
        [[joint_distribution(rho, ia, ib, pp, cut=cut, tols=tols).probabilities for ib in instrs_b] for ia in instrs_a]
    )
    return make_box(table, tol=tols.prob)


def random_quantum_box(
    rng: np.random.Generator,
    dims: tuple[int, int] = (2, 2),
) -> Box:
    """Two binary projective settings per side on a random full-rank state."""
    dim_a, dim_b = dims
    pp = make_product_partition([dim_a, dim_b])
    rho = make_density(induced_density(rng, pp.total_dim, pp.total_dim))
    alice = [random_projective_instrument(rng, dim_a, 2, sector="A") for _ in range(2)]
    bob = [random_projective_instrument(rng, dim_b, 2, sector="B") for _ in range(2)]
    return box_from_quantum(rho, alice, bob, pp)
