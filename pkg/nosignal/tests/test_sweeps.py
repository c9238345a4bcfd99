import numpy as np
import pytest

from resources.lib.errors import InputError, UnknownKindError
from resources.lib.sweeps import KINDS, check_sweep_args, get_kind, parse_dims, run_sweep, sweep_entries

SMALL = {
    "nosignal": [(2, 2), (2, 3)],
    "gleason": [(3,), (4,)],
    "boxes": [(2, 2)],
    "search": [(2, 2)],
    "bridge": [(2, 3)],
    "reduced": [(3, 2)],
    "qutrit": [(3,)],
}


@pytest.mark.parametrize(
    ("text", "expected"),
    [
        ("2x2,3x3", [(2, 2), (3, 3)]),
        ("4,5", [(4,), (5,)]),
        ("2x3,", [(2, 3)]),
    ],
)
def test_parse_dims(text, expected):
    assert parse_dims(text) == expected


def test_parse_dims_rejects_garbage():
    with pytest.raises(InputError):
        parse_dims("2xa")


def test_get_kind():
    assert get_kind("gleason").arity == 1
    with pytest.raises(UnknownKindError):
        get_kind("bogus")


@pytest.mark.parametrize(
    ("name", "dims", "trials", "budget"),
    [
        ("nosignal", [(2,)], None, None),
        ("nosignal", [(1, 2)], None, None),
        ("gleason", [(3, 3)], None, None),
        ("qutrit", [(4,)], None, None),
        ("boxes", [], None, None),
        ("boxes", None, 0, None),
        ("search", None, None, 0),
    ],
)
def test_check_sweep_args_rejects(name, dims, trials, budget):
    with pytest.raises(InputError):
        check_sweep_args(name, dims, trials, budget)


def test_negative_seed_is_rejected():
    with pytest.raises(InputError):
        check_sweep_args("gleason", seed=-1)
    with pytest.raises(InputError):
        run_sweep("gleason", [(3,)], trials=1, seed=-3)
    assert check_sweep_args("gleason", seed=0).name == "gleason"


@pytest.mark.parametrize("name", list(KINDS))
def test_every_kind_passes_on_small_runs(name):
    report = run_sweep(name, SMALL[name], trials=3, seed=11, budget=50)
    assert report.passed
    assert report.source == f"sweep {name}"
    assert len(report.entries) == len(SMALL[name])
    for entry, dims in zip(report.entries, SMALL[name], strict=True):
        assert entry.details["dims"] == list(dims)
        assert entry.details["failures"] == 0
        assert entry.failing_seed is None


def test_default_dims_and_tolerance():
    entries = sweep_entries("nosignal", trials=2)
    assert [e.kind for e in entries] == [
        "sweep:nosignal 2x2",
        "sweep:nosignal 2x3",
        "sweep:nosignal 3x3",
        "sweep:nosignal 4x4",
    ]
    assert all(e.details["tol"] == 1e-10 for e in entries)


def test_search_entries_report_budget():
    (entry,) = sweep_entries("search", [(2, 2)], trials=1, budget=20)
    assert entry.details["budget"] == 20


def test_sweeps_are_reproducible():
    first = run_sweep("bridge", [(2, 2)], trials=20, seed=5)
    second = run_sweep("bridge", [(2, 2)], trials=20, seed=5, workers=4)
    assert first.entries[0].max_deviation == second.entries[0].max_deviation


def test_failing_seed_replays():
    (entry,) = sweep_entries("boxes", [(2, 2)], trials=4, seed=3, tol=-1.0)
    assert not entry.passed
    assert entry.details["failures"] == 4
    expected = int(np.random.SeedSequence(3).generate_state(4, dtype=np.uint32)[0])
    assert entry.failing_seed == expected

    replay = KINDS["boxes"].trial(np.random.default_rng(entry.failing_seed), (2, 2), -1.0, 1)
    assert not replay.passed
