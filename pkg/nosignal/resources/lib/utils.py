import logging
import os
import sys
import traceback
from logging import DEBUG as LOGDEBUG
from logging import ERROR as LOGERROR
from logging import INFO as LOGINFO
from logging import WARNING as LOGWARNING

from .toolkit import Toolkit

LOGNONE = logging.CRITICAL + 10

_ = [LOGINFO, LOGDEBUG, LOGWARNING, LOGERROR, LOGNONE]

local_dev_mode = os.getenv("LOCAL_DEV_MODE") is not None

_logger = logging.getLogger(Toolkit.ID)


def setup_logging() -> None:
    for old in list(_logger.handlers):
        _logger.removeHandler(old)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(asctime)s %(levelname)s %(message)s"))
    _logger.addHandler(handler)
    _logger.setLevel(LOGINFO if Toolkit.debug() else LOGWARNING)
    _logger.propagate = False


def _log(msg: str, level: int = LOGDEBUG) -> None:
    if local_dev_mode:
        print(f"[{level}] {msg}")  # noqa: T201
    else:
        _logger.log(level, msg)


def log_message(message: str, *, level: int = LOGDEBUG) -> None:
    if level == LOGNONE:
        return
    if Toolkit.debug() and (level == LOGDEBUG):
        level = LOGINFO
    _log(f"{Toolkit.ID}: {message}", level=level)


def log_exception(message: str) -> None:
    exc_typ, exc, tb = sys.exc_info()
    if exc_typ is None or exc is None or tb is None:
        return
    _log(
        f"{Toolkit.ID}: {message} {''.join(traceback.format_exception(exc_typ, exc, tb))}",
        level=LOGERROR,
    )
