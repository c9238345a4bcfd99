"""Scenario files: JSON documents of tagged stanzas, validated in full before anything runs.

    {"version": "1", "entries": [{"qutrit": {...}}, {"bipartite": {...}}, {"box": {...}}, {"sweep": {...}}]}

Complex numbers are always written as [re, im]; a matrix literal is a list of rows of them.
"""

import dataclasses
import json
import math
import time
from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Any, TypeVar

import numpy as np

from .boxes import Box, check_box_nosignaling, chsh_value, make_box
from .errors import InputError, ScenarioParseError, SchemaError
from .hilbert import ComplexMatrix, DensityMatrix, make_density, maximally_mixed, pure_state
from .instruments import LocalInstrument, make_instrument, projective_instrument
from .locality import check_nosignaling
from .partitions import ProductPartition, SumPartition, as_bipartite, make_product_partition, make_sum_partition
from .qutrit import (
    Context,
    QutritScenario,
    alice_probability,
    check_nodisturbance,
    check_signal_free,
    make_scenario,
    run_routing,
)
from .report import EntryResult, RunReport
from .settings import DEFAULT_SEED, Settings
from .sweeps import Dims, check_sweep_args, sweep_entries
from .toolkit import Toolkit
from .utils import LOGINFO, log_message

SUPPORTED_VERSIONS = ("1",)
QUTRIT_TOL = 1e-12
BIPARTITE_TOL = 1e-10
BOX_TOL = 1e-10
NODISTURBANCE_TRIALS = 100

_SQRT_HALF = 1 / math.sqrt(2)
BELL_STATES = {
    "phi+": [_SQRT_HALF, 0, 0, _SQRT_HALF],
    "phi-": [_SQRT_HALF, 0, 0, -_SQRT_HALF],
    "psi+": [0, _SQRT_HALF, _SQRT_HALF, 0],
    "psi-": [0, _SQRT_HALF, -_SQRT_HALF, 0],
}

T = TypeVar("T")


@dataclass(frozen=True, eq=False)
class QutritStanza:
    index: int
    scenario: QutritScenario
    contexts: tuple[Context, ...]
    tol: float | None


@dataclass(frozen=True, eq=False)
class BipartiteStanza:
    index: int
    rho: DensityMatrix
    partition: ProductPartition
    cut: int
    instruments: tuple[LocalInstrument, LocalInstrument]
    b_split: SumPartition
    tol: float | None


@dataclass(frozen=True, eq=False)
class BoxStanza:
    index: int
    box: Box
    tol: float | None


@dataclass(frozen=True)
class SweepStanza:
    index: int
    kind: str
    dims: tuple[Dims, ...] | None
    trials: int | None
    seed: int | None
    tol: float | None
    budget: int | None


Stanza = QutritStanza | BipartiteStanza | BoxStanza | SweepStanza


@dataclass(frozen=True)
class ScenarioFile:
    source: str
    version: str
    entries: tuple[Stanza, ...]


class _Fields:
    """Typed access to one stanza body, raising SchemaError with the stanza and field names."""

    def __init__(self, stanza: str, body: Any, allowed: Sequence[str]) -> None:
        self.stanza = stanza
        if not isinstance(body, dict):
            msg = "stanza body must be an object"
            raise SchemaError(msg, stanza=stanza, field="*")
        for key in body:
            if key not in allowed:
                msg = f"unknown field, expected one of {', '.join(allowed)}"
                raise SchemaError(msg, stanza=stanza, field=key)
        self.__body = body

    def fail(self, field: str, message: str) -> SchemaError:
        return SchemaError(message, stanza=self.stanza, field=field)

    def has(self, field: str) -> bool:
        return field in self.__body

    def raw(self, field: str) -> Any:
        if field not in self.__body:
            raise self.fail(field, "missing required field")
        return self.__body[field]

    def number(self, field: str) -> float:
        value = self.raw(field)
        if isinstance(value, bool) or not isinstance(value, int | float):
            raise self.fail(field, f"expected a number, got {value!r}")
        if not math.isfinite(value):
            raise self.fail(field, f"expected a finite number, got {value!r}")
        return float(value)

    def integer(self, field: str) -> int:
        value = self.raw(field)
        if isinstance(value, bool) or not isinstance(value, int):
            raise self.fail(field, f"expected an integer, got {value!r}")
        return value

    def string(self, field: str) -> str:
        value = self.raw(field)
        if not isinstance(value, str):
            raise self.fail(field, f"expected a string, got {value!r}")
        return value

    def optional(self, field: str, getter: Callable[[str], T]) -> T | None:
        return getter(field) if self.has(field) else None

    def build(self, field: str, fn: Callable[[], T]) -> T:
        """Run a library constructor, reporting its validation failure against `field`."""
        try:
            return fn()
        except SchemaError:
            raise
        except InputError as e:
            raise self.fail(field, str(e)) from e
        except ExceptionGroup as e:
            raise self.fail(field, "; ".join(str(x) for x in e.exceptions)) from e


def _is_number(value: Any) -> bool:
    return isinstance(value, int | float) and not isinstance(value, bool)


def decode_complex(value: Any) -> complex:
    if not (isinstance(value, list) and len(value) == 2 and all(_is_number(v) for v in value)):  # noqa: PLR2004
        msg = f"complex numbers are written [re, im], got {value!r}"
        raise InputError(msg)
    return complex(value[0], value[1])


def decode_vector(value: Any) -> np.ndarray:
    if not isinstance(value, list) or not value:
        msg = "expected a non-empty list of [re, im] pairs"
        raise InputError(msg)
    return np.array([decode_complex(v) for v in value], dtype=np.complex128)


def decode_matrix(value: Any) -> ComplexMatrix:
    if not isinstance(value, list) or not value or not all(isinstance(row, list) for row in value):
        msg = "a matrix literal is a non-empty list of rows"
        raise InputError(msg)
    if len({len(row) for row in value}) != 1:
        msg = "matrix literal rows differ in length"
        raise InputError(msg)
    return np.array([[decode_complex(v) for v in row] for row in value], dtype=np.complex128)


def _is_index_list(value: Any) -> bool:
    return (
        isinstance(value, list)
        and bool(value)
        and all(isinstance(v, int) and not isinstance(v, bool) for v in value)
    )


def _axis_projector(dim: int, indices: Sequence[int]) -> np.ndarray:
    if any(not 0 <= k < dim for k in indices):
        msg = f"basis indices {list(indices)} out of range for dimension {dim}"
        raise InputError(msg)
    p = np.zeros((dim, dim), dtype=np.complex128)
    p[list(indices), list(indices)] = 1
    return p


def _parse_state(f: _Fields) -> DensityMatrix:
    value = f.raw("state")
    if isinstance(value, list):
        return f.build("state", lambda: make_density(decode_matrix(value)))
    if isinstance(value, dict) and len(value) == 1:
        ((key, arg),) = value.items()
        if key == "pure":
            return f.build("state", lambda: pure_state(decode_vector(arg)))
        if key == "bell" and arg in BELL_STATES:
            return pure_state(BELL_STATES[arg])
        if key == "mixed" and isinstance(arg, int) and not isinstance(arg, bool) and arg >= 1:
            return maximally_mixed(arg)
    msg = 'expected a matrix literal, {"pure": [...]}, {"bell": "phi+|phi-|psi+|psi-"} or {"mixed": n}'
    raise f.fail("state", msg)


def _parse_partition(f: _Fields) -> tuple[ProductPartition, int]:
    value = f.raw("partition")
    pf = _Fields(f"{f.stanza}.partition", value, ("dims", "cut"))
    dims = pf.raw("dims")
    if not _is_index_list(dims):
        raise pf.fail("dims", f"expected a list of sector dimensions, got {dims!r}")
    cut = pf.optional("cut", pf.integer)
    cut = 1 if cut is None else cut
    pp = pf.build("dims", lambda: make_product_partition(dims))
    if not 1 <= cut < len(pp.sector_dims):
        raise pf.fail("cut", f"cut must split {len(pp.sector_dims)} sectors into two nonempty groups, got {cut}")
    return pp, cut


def _parse_instrument(f: _Fields, n: int, value: Any, dim: int) -> LocalInstrument:
    field = f"instruments[{n}]"
    inf = _Fields(f"{f.stanza}.{field}", value, ("projective", "kraus", "label"))
    name = inf.optional("label", inf.string) or ""
    if inf.has("projective") == inf.has("kraus"):
        raise inf.fail("projective", 'give exactly one of "projective" or "kraus"')

    if inf.has("projective"):
        specs = inf.raw("projective")
        if not isinstance(specs, list) or not specs:
            raise inf.fail("projective", "expected a non-empty list of projectors")

        def projectors() -> list[np.ndarray]:
            return [_axis_projector(dim, s) if _is_index_list(s) else decode_matrix(s) for s in specs]

        return inf.build("projective", lambda: projective_instrument(projectors(), name=name))

    ops = inf.raw("kraus")
    if not isinstance(ops, list) or not ops:
        raise inf.fail("kraus", "expected a non-empty list of Kraus matrices, one per outcome")
    return inf.build("kraus", lambda: make_instrument([[decode_matrix(m)] for m in ops], name=name))


def _parse_b_split(f: _Fields, dim_b: int) -> SumPartition:
    bf = _Fields(f"{f.stanza}.b_split", f.raw("b_split"), ("blocks", "labels"))
    blocks = bf.raw("blocks")
    if not isinstance(blocks, list) or not blocks:
        raise bf.fail("blocks", "expected a non-empty list of blocks")
    labels = bf.optional("labels", bf.raw)
    eye = np.eye(dim_b, dtype=np.complex128)

    def bases() -> list[np.ndarray]:
        out = []
        for block in blocks:
            if _is_index_list(block):
                _axis_projector(dim_b, block)
                out.append(eye[:, block])
            else:
                out.append(decode_matrix(block))
        return out

    return bf.build("blocks", lambda: make_sum_partition(bases(), labels=labels))


def _parse_qutrit(index: int, f: _Fields) -> QutritStanza:
    beta = f.build("beta", lambda: decode_vector(f.raw("beta")))
    if beta.shape != (3,):
        raise f.fail("beta", f"expected 3 amplitudes, got {beta.shape[0]}")
    a, b = f.number("a"), f.number("b")
    if a == b:
        raise f.fail("b", f"a = b = {a} collapses the X split")
    scenario = f.build("beta", lambda: make_scenario(beta, a, b))
    context = f.optional("context", f.string)
    if context is not None and context not in Context.__members__:
        raise f.fail("context", f"expected Y1 or Y2, got {context!r}")
    contexts = tuple(Context) if context is None else (Context(context),)
    return QutritStanza(index=index, scenario=scenario, contexts=contexts, tol=f.optional("tol", f.number))


def _parse_bipartite(index: int, f: _Fields) -> BipartiteStanza:
    rho = _parse_state(f)
    pp, cut = _parse_partition(f)
    if rho.dim != pp.total_dim:
        raise f.fail("state", f"state of dimension {rho.dim} does not fit partition {list(pp.sector_dims)}")
    dim_a, dim_b = as_bipartite(pp, cut).sector_dims

    values = f.raw("instruments")
    if not isinstance(values, list) or len(values) != 2:  # noqa: PLR2004
        raise f.fail("instruments", "expected exactly two instruments on sector A")
    instruments = (_parse_instrument(f, 0, values[0], dim_a), _parse_instrument(f, 1, values[1], dim_a))
    for n, instrument in enumerate(instruments):
        if instrument.dim != dim_a:
            raise f.fail(f"instruments[{n}]", f"acts on dimension {instrument.dim}, sector A has dimension {dim_a}")

    return BipartiteStanza(
        index=index,
        rho=rho,
        partition=pp,
        cut=cut,
        instruments=instruments,
        b_split=_parse_b_split(f, dim_b),
        tol=f.optional("tol", f.number),
    )


def _parse_box(index: int, f: _Fields) -> BoxStanza:
    shape = (f.integer("x"), f.integer("y"), f.integer("a"), f.integer("b"))
    table = f.raw("table")
    try:
        found = np.shape(table)
    except ValueError as e:
        raise f.fail("table", "table is not rectangular") from e
    if found != shape:
        raise f.fail("table", f"expected a table indexed [x][y][a][b] of shape {list(shape)}, got {list(found)}")
    box = f.build("table", lambda: make_box(table))
    return BoxStanza(index=index, box=box, tol=f.optional("tol", f.number))


def _parse_sweep(index: int, f: _Fields) -> SweepStanza:
    kind = f.string("kind")
    dims = None
    if f.has("dims"):
        raw = f.raw("dims")
        if not isinstance(raw, list) or not all(_is_index_list(d) for d in raw):
            raise f.fail("dims", f"expected a list of dimension lists, got {raw!r}")
        dims = tuple(tuple(d) for d in raw)
    stanza = SweepStanza(
        index=index,
        kind=kind,
        dims=dims,
        trials=f.optional("trials", f.integer),
        seed=f.optional("seed", f.integer),
        tol=f.optional("tol", f.number),
        budget=f.optional("budget", f.integer),
    )
    if stanza.seed is not None and stanza.seed < 0:
        raise f.fail("seed", f"seed must be >= 0, got {stanza.seed}")
    f.build("kind", lambda: check_sweep_args(kind, dims, stanza.trials, stanza.budget))
    return stanza


_PARSERS: dict[str, tuple[tuple[str, ...], Callable[[int, _Fields], Stanza]]] = {
    "qutrit": (("beta", "a", "b", "context", "tol"), _parse_qutrit),
    "bipartite": (("state", "partition", "instruments", "b_split", "tol"), _parse_bipartite),
    "box": (("x", "y", "a", "b", "table", "tol"), _parse_box),
    "sweep": (("kind", "dims", "trials", "seed", "tol", "budget"), _parse_sweep),
}


def parse_scenario(text: str, *, source: str = "<string>") -> ScenarioFile:
    try:
        document = json.loads(text)
    except json.JSONDecodeError as e:
        raise ScenarioParseError(e.msg, line=e.lineno, column=e.colno) from e

    top = _Fields("file", document, ("version", "entries"))
    version = top.raw("version")
    if version not in SUPPORTED_VERSIONS:
        raise top.fail("version", f"unsupported version {version!r}, expected one of {', '.join(SUPPORTED_VERSIONS)}")
    raw_entries = top.raw("entries")
    if not isinstance(raw_entries, list):
        raise top.fail("entries", "expected a list of stanzas")

    entries = []
    for i, raw in enumerate(raw_entries):
        if not isinstance(raw, dict) or len(raw) != 1:
            msg = f"a stanza is an object with exactly one of {', '.join(_PARSERS)}"
            raise SchemaError(msg, stanza=f"entries[{i}]", field="*")
        ((kind, body),) = raw.items()
        if kind not in _PARSERS:
            msg = f"unknown stanza kind, expected one of {', '.join(_PARSERS)}"
            raise SchemaError(msg, stanza=f"entries[{i}]", field=kind)
        allowed, parser = _PARSERS[kind]
        entries.append(parser(i, _Fields(f"entries[{i}] ({kind})", body, allowed)))
    return ScenarioFile(source=source, version=version, entries=tuple(entries))


def load_scenario(path: str | Path) -> ScenarioFile:
    path = Path(path)
    data = path.read_bytes()
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as e:
        line_start = data.rfind(b"\n", 0, e.start) + 1
        line = data.count(b"\n", 0, e.start) + 1
        msg = "file is not valid UTF-8"
        raise ScenarioParseError(msg, line=line, column=e.start - line_start + 1) from e
    return parse_scenario(text, source=path.name)


def _pick(*values: T | None) -> T | None:
    return next((v for v in values if v is not None), None)


def _run_qutrit(stanza: QutritStanza, sttngs: Settings) -> EntryResult:
    tol = _pick(sttngs.tol, stanza.tol, QUTRIT_TOL)
    sc = stanza.scenario
    beta0 = float(abs(sc.beta[0]) ** 2)

    contexts = {}
    worst_alice = 0.0
    for ctx in stanza.contexts:
        p = alice_probability(sc, ctx)
        worst_alice = max(worst_alice, abs(p - beta0))
        conditional = None
        if 1.0 - p > sttngs.tolerances.prob:
            outcome = run_routing(sc, ctx, tols=sttngs.tolerances)
            conditional = dict(zip(outcome.bob_conditional.labels, outcome.bob_conditional.probabilities, strict=True))
        contexts[str(ctx)] = {"alice_prob": p, "bob_conditional": conditional}

    signal = check_signal_free(sc, tol)
    nodist = check_nodisturbance(
        sc.a,
        sc.b,
        tol,
        trials=_pick(sttngs.trials, NODISTURBANCE_TRIALS),
        seed=sttngs.effective_seed,
    )
    spread = signal.noncontextuality.max_pairwise_deviation if signal.noncontextuality else 0.0
    deviation = max(worst_alice, signal.max_deviation, spread, nodist.max_x_commutator, nodist.marginal_deviation)
    return EntryResult(
        index=stanza.index,
        kind="qutrit",
        passed=deviation <= tol and nodist.contexts_incompatible,
        max_deviation=deviation,
        elapsed=0.0,
        details={
            "beta0_squared": beta0,
            "contexts": contexts,
            "signal_deviation": signal.max_deviation,
            "noncontextuality_spread": spread,
            "nodisturbance": {
                "max_x_commutator": nodist.max_x_commutator,
                "cross_commutator": nodist.cross_commutator,
                "marginal_deviation": nodist.marginal_deviation,
            },
            "tol": tol,
        },
    )


def _run_bipartite(stanza: BipartiteStanza, sttngs: Settings) -> EntryResult:
    tol = _pick(sttngs.tol, stanza.tol, BIPARTITE_TOL)
    first, second = stanza.instruments
    report = check_nosignaling(
        stanza.rho, first, second, stanza.b_split, stanza.partition, tol, cut=stanza.cut, tols=sttngs.tolerances
    )
    return EntryResult(
        index=stanza.index,
        kind="bipartite",
        passed=report.passed,
        max_deviation=report.max_deviation,
        elapsed=0.0,
        details={
            "contexts": list(report.contexts),
            "blocks": list(report.labels),
            "deviations": list(report.deviations),
            "measures": [list(m) for m in report.measures],
            "tol": tol,
        },
    )


def _run_box(stanza: BoxStanza, sttngs: Settings) -> EntryResult:
    tol = _pick(sttngs.tol, stanza.tol, BOX_TOL)
    report = check_box_nosignaling(stanza.box, tol)
    details: dict[str, Any] = {
        "alice_deviation": report.alice_deviation,
        "bob_deviation": report.bob_deviation,
        "tol": tol,
    }
    if stanza.box.table.shape == (2, 2, 2, 2):
        details["chsh"] = chsh_value(stanza.box)
    return EntryResult(
        index=stanza.index,
        kind="box",
        passed=report.passed,
        max_deviation=report.max_deviation,
        elapsed=0.0,
        details=details,
    )


def run_stanza(stanza: Stanza, sttngs: Settings) -> list[EntryResult]:
    start = time.perf_counter()
    if isinstance(stanza, SweepStanza):
        return sweep_entries(
            stanza.kind,
            stanza.dims,
            _pick(sttngs.trials, stanza.trials),
            _pick(sttngs.seed, stanza.seed, DEFAULT_SEED),
            _pick(sttngs.tol, stanza.tol),
            _pick(sttngs.budget, stanza.budget),
            index=stanza.index,
            workers=sttngs.workers,
        )

    if isinstance(stanza, QutritStanza):
        result = _run_qutrit(stanza, sttngs)
    elif isinstance(stanza, BipartiteStanza):
        result = _run_bipartite(stanza, sttngs)
    else:
        result = _run_box(stanza, sttngs)
    verdict = "pass" if result.passed else "fail"
    log_message(
        f"entry {stanza.index} ({result.kind}): {verdict}, max deviation {result.max_deviation:.3e}",
        level=LOGINFO,
    )
    return [dataclasses.replace(result, elapsed=time.perf_counter() - start)]


def run_scenario(scenario: ScenarioFile, sttngs: Settings) -> RunReport:
    with ThreadPoolExecutor(max_workers=max(1, sttngs.workers)) as pool:
        results = list(pool.map(lambda s: run_stanza(s, sttngs), scenario.entries))
    return RunReport(
        source=scenario.source,
        seed=sttngs.effective_seed,
        entries=tuple(r for stanza_results in results for r in stanza_results),
    )


def run_scenario_file(path: str | Path, sttngs: Settings) -> RunReport:
    return run_scenario(load_scenario(path), sttngs)


def fixture_names() -> list[str]:
    return sorted(p.stem for p in Toolkit.FIXTURES.glob("*.json"))


def fixture_path(name: str) -> Path:
    if name not in fixture_names():
        msg = f"unknown fixture {name!r}, expected one of {', '.join(fixture_names())}"
        raise InputError(msg)
    return Toolkit.FIXTURES / f"{name}.json"
