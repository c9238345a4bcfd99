import dataclasses
import datetime
import json
import math
from dataclasses import dataclass
from pathlib import Path

from .errors import InputError


@dataclass(frozen=True)
class Tolerances:
    herm: float = 1e-10
    trace: float = 1e-10
    idem: float = 1e-10
    res: float = 1e-10
    unitary: float = 1e-10
    psd: float = 1e-9
    norm: float = 1e-10
    prob: float = 1e-10
    cluster: float = 1e-8
    span: float = 1e-8


DEFAULT_TOLERANCES = Tolerances()


@dataclass
class RunSummary:
    command: str
    passed: bool
    max_deviation: float
    seed: int
    when: datetime.datetime


class Config:
    _TOLERANCES_FILE = "tolerances.json"
    _RUNS_FILE = "runs.json"

    _MAX_RUNS = 15

    def __init__(self, path: str | Path) -> None:
        self.__path = Path(path)

    def get_tolerances(self) -> Tolerances:
        path = self.__get_path(self._TOLERANCES_FILE)
        overrides = self.__read_json_file(self._TOLERANCES_FILE, dfault={})
        known = {f.name for f in dataclasses.fields(Tolerances)}
        unknown = set(overrides) - known
        if unknown:
            msg = f"unknown tolerance keys in {path}: {sorted(unknown)}"
            raise InputError(msg)
        for k, v in overrides.items():
            if isinstance(v, bool) or not isinstance(v, int | float) or not math.isfinite(v) or v < 0:
                msg = f"tolerance {k} in {path} must be a non-negative number, got {v!r}"
                raise InputError(msg)
        return dataclasses.replace(DEFAULT_TOLERANCES, **{k: float(v) for k, v in overrides.items()})

    def set_tolerances(self, tolerances: Tolerances) -> None:
        data = {
            k: v for k, v in dataclasses.asdict(tolerances).items() if getattr(DEFAULT_TOLERANCES, k) != v
        }
        self.__write_json_file(self._TOLERANCES_FILE, data)

    def get_runs(self) -> list[RunSummary]:
        runs = self.__read_json_file(self._RUNS_FILE, dfault={})
        try:
            return [
                RunSummary(
                    command=r["command"],
                    passed=r["passed"],
                    max_deviation=r["max_deviation"],
                    seed=r["seed"],
                    when=datetime.datetime.fromisoformat(r["when"]),
                )
                for r in runs.get("runs", [])
            ]
        except (KeyError, TypeError, ValueError) as e:
            msg = f"malformed run history in {self.__get_path(self._RUNS_FILE)}: {e!r}"
            raise InputError(msg) from e

    def add_run(self, summary: RunSummary) -> None:
        runs = self.__read_json_file(self._RUNS_FILE, dfault={})
        runs["runs"] = runs.get("runs", [])
        runs["runs"].append(
            {
                "command": summary.command,
                "passed": summary.passed,
                "max_deviation": summary.max_deviation,
                "seed": summary.seed,
                "when": summary.when.isoformat(),
            }
        )
        if len(runs["runs"]) > self._MAX_RUNS:
            runs["runs"].pop(0)
        self.__write_json_file(self._RUNS_FILE, runs)

    def __get_path(self, file: str) -> Path:
        return self.__path / file

    def __read_json_file(self, file: str, dfault: dict) -> dict:
        path = self.__get_path(file)

        if not path.exists():
            return dfault

        try:
            with path.open(encoding="utf-8") as f:
                data = json.load(f)
        except ValueError as e:
            msg = f"cannot read {path}: {e}"
            raise InputError(msg) from e
        if not isinstance(data, dict):
            msg = f"{path} must hold a JSON object"
            raise InputError(msg)
        return data

    def __write_json_file(self, file: str, data: dict) -> None:
        path = self.__get_path(file)
        path.parent.mkdir(parents=True, exist_ok=True)

        with path.open("w", encoding="utf-8") as f:
            json.dump(data, f)
