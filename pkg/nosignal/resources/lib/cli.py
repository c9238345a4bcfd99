import argparse
import dataclasses
import datetime
import math
import sys
from collections.abc import Sequence
from typing import Any

from .config import RunSummary, Tolerances
from .errors import InputError
from .report import OUTPUT_FORMATS, Listing, RunReport
from .router import Renderable, Router
from .scenario import fixture_names, fixture_path, load_scenario, run_scenario, run_scenario_file
from .settings import Settings
from .sweeps import KINDS, parse_dims, run_sweep
from .toolkit import Toolkit
from .utils import LOGWARNING, log_exception, log_message, setup_logging

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_INPUT = 2

router = Router(default_action="fixture_list")


@router.route
def verify(*, sttngs: Settings, file: str) -> RunReport:
    return run_scenario_file(file, sttngs)


@router.route
def sweep(*, sttngs: Settings, kind: str, dims: str | None = None) -> RunReport:
    return run_sweep(
        kind,
        None if dims is None else parse_dims(dims),
        sttngs.trials,
        sttngs.effective_seed,
        sttngs.tol,
        sttngs.budget,
        workers=sttngs.workers,
    )


@router.route
def fixture_list(*, sttngs: Settings) -> Listing:  # noqa: ARG001
    rows = []
    for name in fixture_names():
        scenario = load_scenario(fixture_path(name))
        rows.append((name, len(scenario.entries)))
    return Listing.of("fixtures", ("name", "entries"), rows)


@router.route
def fixture_run(*, sttngs: Settings, name: str) -> RunReport:
    return run_scenario(load_scenario(fixture_path(name)), sttngs)


@router.route
def runs(*, sttngs: Settings) -> Listing:  # noqa: ARG001
    rows = [
        (r.when.isoformat(timespec="seconds"), r.command, "pass" if r.passed else "fail", r.max_deviation, r.seed)
        for r in reversed(Toolkit.config().get_runs())
    ]
    return Listing.of("runs", ("when", "command", "verdict", "max_deviation", "seed"), rows)


def parse_assignments(assignments: Sequence[str]) -> dict[str, float]:
    known = {f.name for f in dataclasses.fields(Tolerances)}
    values = {}
    for item in assignments:
        key, sep, raw = item.partition("=")
        if not sep or key not in known:
            msg = f"expected NAME=VALUE with NAME one of {', '.join(sorted(known))}, got {item!r}"
            raise InputError(msg)
        try:
            value = float(raw)
        except ValueError as e:
            msg = f"tolerance {key} must be a number, got {raw!r}"
            raise InputError(msg) from e
        if not math.isfinite(value) or value < 0:
            msg = f"tolerance {key} must be a non-negative number, got {raw!r}"
            raise InputError(msg)
        values[key] = value
    return values


@router.route
def tolerances(*, sttngs: Settings, assignments: Sequence[str] = ()) -> Listing:
    config = Toolkit.config()
    if assignments:
        config.set_tolerances(dataclasses.replace(sttngs.tolerances, **parse_assignments(assignments)))
    current = config.get_tolerances()
    rows = [(f.name, getattr(current, f.name)) for f in dataclasses.fields(current)]
    return Listing.of("tolerances", ("name", "value"), rows)


def _global_flags(*, nested: bool) -> argparse.ArgumentParser:
    """Flags accepted before the command, and again after it where they override the earlier value."""

    def dflt(value: Any) -> Any:
        return argparse.SUPPRESS if nested else value

    flags = argparse.ArgumentParser(add_help=False)
    flags.add_argument("--seed", type=int, default=dflt(None), help="root seed for every randomized part (default 7)")
    flags.add_argument("--tol", type=float, default=dflt(None), help="verdict tolerance, overrides scenario defaults")
    flags.add_argument("--trials", type=int, default=dflt(None), help="trials per sweep dimension")
    flags.add_argument("--budget", type=int, default=dflt(None), help="evaluations per adversarial search")
    flags.add_argument("--format", dest="output_format", choices=OUTPUT_FORMATS, default=dflt("json"))
    flags.add_argument("--workers", type=int, default=dflt(1), help="threads for stanzas and sweep trials")
    flags.add_argument("--debug", action="store_true", default=dflt(False), help="verbose logging to stderr")
    flags.add_argument(
        "--no-record",
        dest="record_runs",
        action="store_false",
        default=dflt(True),
        help="do not add to the run history",
    )
    return flags


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog=Toolkit.ID,
        description="No-signaling and non-contextuality checks",
        parents=[_global_flags(nested=False)],
    )
    parser.add_argument("--fixture", metavar="NAME", help="run a bundled scenario, same as `fixture run NAME`")
    nested = [_global_flags(nested=True)]

    commands = parser.add_subparsers(dest="command")
    p = commands.add_parser("verify", parents=nested, help="run a scenario file")
    p.add_argument("file")
    p = commands.add_parser("sweep", parents=nested, help="seeded randomized property sweep")
    p.add_argument("kind", choices=list(KINDS))
    p.add_argument("--dims", help='e.g. "2x2,3x3", or "3,4" for single-space kinds')
    p = commands.add_parser("fixture", help="bundled scenario files")
    fixture = p.add_subparsers(dest="fixture_command", required=True)
    fixture.add_parser("list", parents=nested)
    p = fixture.add_parser("run", parents=nested)
    p.add_argument("name")
    commands.add_parser("runs", parents=nested, help="recent run summaries")
    p = commands.add_parser("tolerances", parents=nested, help="show or set the default tolerances")
    p.add_argument("assignments", nargs="*", metavar="NAME=VALUE")
    return parser


def parse_args(argv: Sequence[str]) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None and args.fixture is None:
        parser.error("a command is required")
    if args.command is not None and args.fixture is not None:
        parser.error("--fixture cannot be combined with a command")
    return args


def _action(args: argparse.Namespace) -> tuple[str, dict[str, Any]]:
    if args.fixture is not None:
        return "fixture_run", {"name": args.fixture}
    if args.command == "verify":
        return "verify", {"file": args.file}
    if args.command == "sweep":
        params = {"kind": args.kind}
        if args.dims is not None:
            params["dims"] = args.dims
        return "sweep", params
    if args.command == "fixture":
        if args.fixture_command == "run":
            return "fixture_run", {"name": args.name}
        return "fixture_list", {}
    if args.command == "tolerances":
        return "tolerances", {"assignments": tuple(args.assignments)}
    return args.command, {}


def _record(command: str, result: Renderable, sttngs: Settings) -> None:
    if not sttngs.record_runs or not isinstance(result, RunReport):
        return
    summary = RunSummary(
        command=command,
        passed=result.passed,
        max_deviation=result.max_deviation,
        seed=result.seed,
        when=datetime.datetime.now(tz=datetime.UTC),
    )
    try:
        Toolkit.config().add_run(summary)
    except (InputError, OSError):
        log_message(f"could not record the run in {Toolkit.home()}", level=LOGWARNING)


def dispatch(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    args = parse_args(argv)
    if args.debug:
        Toolkit.set_debug(enabled=True)
    setup_logging()
    log_message(f"entered with: {argv}")

    try:
        sttngs = Toolkit.settings(
            seed=args.seed,
            tol=args.tol,
            trials=args.trials,
            budget=args.budget,
            output_format=args.output_format,
            workers=args.workers,
            record_runs=args.record_runs,
        )
        name, params = _action(args)
        result = router.dispatch(name, params, sttngs=sttngs)
    except (InputError, OSError, ExceptionGroup) as e:
        print(f"error: {e}", file=sys.stderr)  # noqa: T201
        log_exception("input error")
        return EXIT_INPUT

    print(result.render(sttngs.output_format))  # noqa: T201
    _record(" ".join(argv), result, sttngs)
    return EXIT_PASS if result.passed else EXIT_FAIL
