"""Append-only run directories with a single-writer lock file"""

import logging
import os
from pathlib import Path
from typing import Union

from ..utils.exceptions import ConfigError

logger = logging.getLogger(__name__)

LOCK_NAME = ".lock"


class RunDirectory:
    """Context manager owning ``path`` for one command.

    A non-empty directory is refused unless ``force`` is set; a present lock
    file always is.
    """

    def __init__(self, path: Union[str, Path], force: bool = False):
        self.path = Path(path)
        self.force = force
        self._lock = self.path / LOCK_NAME
        self._held = False

    def __enter__(self) -> Path:
        if self._lock.exists():
            raise ConfigError(f"run directory {self.path} is locked by another writer ({self._lock})")
        if self.path.exists():
            if not self.path.is_dir():
                raise ConfigError(f"output path {self.path} exists and is not a directory")
            occupied = any(self.path.iterdir())
            if occupied and not self.force:
                raise ConfigError(f"run directory {self.path} is not empty; pass --force to write into it")
            if occupied:
                logger.warning(f"writing into non-empty run directory {self.path}")
        self.path.mkdir(parents=True, exist_ok=True)
        try:
            fd = os.open(self._lock, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
        except FileExistsError:
            raise ConfigError(f"run directory {self.path} is locked by another writer ({self._lock})")
        with os.fdopen(fd, "w") as f:
            f.write(f"{os.getpid()}\n")
        self._held = True
        return self.path

    def __exit__(self, exc_type, exc, tb) -> None:
        if self._held:
            self._lock.unlink(missing_ok=True)
            self._held = False
