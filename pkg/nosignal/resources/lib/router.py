from collections.abc import Callable
from typing import Any, Protocol

from .errors import InputError
from .settings import Settings
from .utils import log_message


class Renderable(Protocol):
    @property
    def passed(self) -> bool: ...

    @property
    def max_deviation(self) -> float: ...

    def render(self, output_format: str = "json") -> str: ...


class Router:
    def __init__(self, *, default_action: str) -> None:
        self.__routes: dict[str, Callable[..., Renderable]] = {}
        self.__default_action = default_action

    @property
    def actions(self) -> list[str]:
        return list(self.__routes)

    def route(self, fn: Callable[..., Renderable]) -> Callable[..., Renderable]:
        name = fn.__name__  # ty:ignore[unresolved-attribute]
        if name in self.__routes:
            msg = f"duplicate action name: {name}"
            raise ValueError(msg)
        self.__routes[name] = fn
        return fn

    def dispatch(self, name: str | None, params: dict[str, Any], *, sttngs: Settings) -> Renderable:
        name = name or self.__default_action
        log_message(f"dispatching: {params} to {name}")

        action = self.__routes.get(name)
        if action is None:
            msg = f"Unsupported action {name}"
            raise InputError(msg)

        return action(sttngs=sttngs, **params)
