import json
from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Any

from .errors import InputError
from .toolkit import Toolkit

OUTPUT_FORMATS = ("json", "text")


def _check_format(output_format: str) -> None:
    if output_format not in OUTPUT_FORMATS:
        msg = f"unknown output format {output_format!r}, expected one of {', '.join(OUTPUT_FORMATS)}"
        raise InputError(msg)


def _dumps(data: dict[str, Any]) -> str:
    # json writes floats with repr, the shortest string that reads back to the same double
    return json.dumps(data, indent=2, sort_keys=True)


@dataclass(frozen=True)
class EntryResult:
    index: int
    kind: str
    passed: bool
    max_deviation: float
    elapsed: float
    details: dict[str, Any] = field(default_factory=dict)
    failing_seed: int | None = None

    def to_dict(self) -> dict[str, Any]:
        data = {
            "index": self.index,
            "kind": self.kind,
            "verdict": "pass" if self.passed else "fail",
            "max_deviation": self.max_deviation,
            "elapsed": self.elapsed,
            "details": self.details,
        }
        if self.failing_seed is not None:
            data["failing_seed"] = self.failing_seed
        return data


@dataclass(frozen=True)
class RunReport:
    source: str
    seed: int
    entries: tuple[EntryResult, ...]
    version: str = Toolkit.VERSION

    @property
    def passed(self) -> bool:
        return all(e.passed for e in self.entries)

    @property
    def max_deviation(self) -> float:
        return max((e.max_deviation for e in self.entries), default=0.0)

    def to_dict(self) -> dict[str, Any]:
        return {
            "toolkit": Toolkit.ID,
            "version": self.version,
            "source": self.source,
            "seed": self.seed,
            "verdict": "pass" if self.passed else "fail",
            "max_deviation": self.max_deviation,
            "entries": [e.to_dict() for e in self.entries],
        }

    def render(self, output_format: str = "json") -> str:
        _check_format(output_format)
        if output_format == "json":
            return _dumps(self.to_dict())

        lines = [f"{Toolkit.ID} {self.version} | {self.source} | seed {self.seed}"]
        width = max((len(e.kind) for e in self.entries), default=4)
        lines.append(f"{'#':>3}  {'kind':<{width}}  verdict  {'max deviation':<13}  elapsed")
        for e in self.entries:
            verdict = "PASS" if e.passed else "FAIL"
            line = f"{e.index:>3}  {e.kind:<{width}}  {verdict:<7}  {e.max_deviation:<13.3e}  {e.elapsed:.3f}s"
            if e.failing_seed is not None:
                line += f"  (failing seed {e.failing_seed})"
            lines.append(line)
        lines.append(f"overall: {'PASS' if self.passed else 'FAIL'}")
        return "\n".join(lines)


@dataclass(frozen=True)
class Listing:
    """Plain rows for the informational commands; always passes."""

    title: str
    columns: tuple[str, ...]
    rows: tuple[tuple[Any, ...], ...]

    passed = True
    max_deviation = 0.0

    @classmethod
    def of(cls, title: str, columns: Sequence[str], rows: Sequence[Sequence[Any]]) -> "Listing":
        return cls(title=title, columns=tuple(columns), rows=tuple(tuple(r) for r in rows))

    def render(self, output_format: str = "json") -> str:
        _check_format(output_format)
        if output_format == "json":
            return _dumps({self.title: [dict(zip(self.columns, r, strict=True)) for r in self.rows]})
        lines = [self.title]
        lines.extend("  ".join(str(v) for v in row) for row in self.rows)
        return "\n".join(lines)
