import os
from pathlib import Path
from typing import Any

from .config import Config
from .settings import Settings

_ID = "nosignal"


class Toolkit:
    ID = _ID
    VERSION = "0.1.0"
    FIXTURES = Path(__file__).parent.parent / "fixtures"
    HOME_ENV = "NOSIGNAL_HOME"
    DEBUG_ENV = "NOSIGNAL_DEBUG"

    _force_debug = False

    @classmethod
    def home(cls) -> Path:
        home = os.getenv(cls.HOME_ENV)
        if home:
            return Path(home)
        return Path.home() / ".config" / _ID

    @classmethod
    def config(cls) -> Config:
        return Config(cls.home())

    @classmethod
    def debug(cls) -> bool:
        return cls._force_debug or os.getenv(cls.DEBUG_ENV, "") not in ("", "0")

    @classmethod
    def set_debug(cls, *, enabled: bool) -> None:
        cls._force_debug = enabled

    @classmethod
    def settings(cls, **overrides: Any) -> Settings:
        values = {k: v for k, v in overrides.items() if v is not None}
        return Settings(tolerances=cls.config().get_tolerances(), **values)
