import math
from dataclasses import dataclass, field

from .config import DEFAULT_TOLERANCES, Tolerances
from .errors import InputError

DEFAULT_SEED = 7


@dataclass
class Settings:
    # None means "not given on the command line": stanza values, then defaults, apply
    seed: int | None = None
    tol: float | None = None
    trials: int | None = None
    budget: int | None = None
    output_format: str = "json"
    workers: int = 1
    record_runs: bool = True
    tolerances: Tolerances = field(default_factory=lambda: DEFAULT_TOLERANCES)

    def __post_init__(self) -> None:
        if self.seed is not None and self.seed < 0:
            msg = f"seed must be >= 0, got {self.seed}"
            raise InputError(msg)
        for name in ("trials", "budget", "workers"):
            value = getattr(self, name)
            if value is not None and value < 1:
                msg = f"{name} must be >= 1, got {value}"
                raise InputError(msg)
        if self.tol is not None and not math.isfinite(self.tol):
            msg = f"tol must be finite, got {self.tol}"
            raise InputError(msg)

    @property
    def effective_seed(self) -> int:
        return DEFAULT_SEED if self.seed is None else self.seed
