from __future__ import annotations
import logging
import os
import re
import tempfile
from pathlib import Path
from typing import Callable, Optional, Union

import joblib  # type: ignore

from ._matrices import GroupEnumeration

logger = logging.getLogger(__name__)


def _slug(label: str) -> str:
    return re.sub(r"[^A-Za-z0-9]+", "_", label).strip("_") or "group"


class GroupCache:
    """On-disk store of group enumerations, one joblib file per group.

    Files are keyed by (label, p, s, d, version) so that a new package
    version never reads an old format. Writes go to a temporary file in the
    same directory and are moved into place atomically.

    Parameters
    ----------
    directory : str or Path
        Cache directory, created on first write.
    version : str
        Format version baked into file names.

    Examples
    --------
    >>> import tempfile
    >>> from cosetexpanders import GeneratorSet, GroupCache, bfs_closure
    >>> cache = GroupCache(tempfile.mkdtemp(), version="0")
    >>> cache.path("K_{1,3}", 2, 2, 3).name
    'K_1_3-p2-s2-d3-v0.joblib'
    >>> build = lambda: bfs_closure(GeneratorSet.for_subgroup(2, 1, 3))
    >>> cache.get_or_build("G", 2, 1, 3, build).order
    168
    >>> cache.load("G", 2, 1, 3).order
    168
    """

    def __init__(self, directory: Union[str, Path], version: str) -> None:
        self.directory = Path(directory)
        self.version = version

    def path(self, label: str, p: int, s: int, d: int) -> Path:
        name = f"{_slug(label)}-p{p}-s{s}-d{d}-v{self.version}.joblib"
        return self.directory / name

    def load(self, label: str, p: int, s: int, d: int) -> Optional[GroupEnumeration]:
        path = self.path(label, p, s, d)
        if not path.exists():
            return None
        group = joblib.load(path)
        if not isinstance(group, GroupEnumeration) or group.params != (p, s, d):
            raise ValueError(f"{path} does not hold {label} over ({p}, {s}, {d})")
        logger.debug("loaded %s from %s", label, path)
        return group

    def store(self, group: GroupEnumeration) -> Path:
        self.directory.mkdir(parents=True, exist_ok=True)
        path = self.path(group.label, *group.params)
        fd, tmp = tempfile.mkstemp(dir=self.directory, suffix=".tmp")
        os.close(fd)
        try:
            joblib.dump(group, tmp)
            os.replace(tmp, path)
        finally:
            if os.path.exists(tmp):
                os.remove(tmp)
        logger.debug("stored %s in %s", group.label, path)
        return path

    def get_or_build(
        self,
        label: str,
        p: int,
        s: int,
        d: int,
        build: Callable[[], GroupEnumeration],
    ) -> GroupEnumeration:
        """Return the cached group, building and storing it on a miss."""
        cached = self.load(label, p, s, d)
        if cached is not None:
            return cached
        group = build()
        if group.label != label or group.params != (p, s, d):
            raise ValueError(f"built {group.label} does not match the key {label}")
        self.store(group)
        return group
