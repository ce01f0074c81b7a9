from __future__ import annotations
import json
import math
import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterator, List, Optional, Union

import numpy as np

from ._typing import Verdict


def jsonable(value: Any) -> Any:
    """Convert numpy scalars, tuples and non-finite floats for `json.dumps`."""
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return jsonable(value.tolist())
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    return value


@dataclass(frozen=True)
class CheckResult:
    """One named check of a certificate.

    Informational results are recorded but never fail the certificate.
    """

    name: str
    passed: bool
    expected: Any = None
    measured: Any = None
    tolerance: Optional[float] = None
    informational: bool = False
    detail: str = ""

    @classmethod
    def from_verdict(cls, name: str, verdict: Verdict) -> CheckResult:
        return cls(name, bool(verdict), True, bool(verdict), detail=verdict.detail)

    @classmethod
    def equals(cls, name: str, expected: Any, measured: Any) -> CheckResult:
        return cls(name, expected == measured, expected, measured)

    @classmethod
    def close(
        cls, name: str, expected: float, measured: float, tolerance: float
    ) -> CheckResult:
        return cls(
            name, abs(measured - expected) <= tolerance, expected, measured, tolerance
        )

    @classmethod
    def at_most(
        cls, name: str, bound: float, measured: float, tolerance: float
    ) -> CheckResult:
        return cls(name, measured <= bound + tolerance, bound, measured, tolerance)

    @classmethod
    def at_least(
        cls, name: str, bound: float, measured: float, tolerance: float
    ) -> CheckResult:
        return cls(name, measured >= bound - tolerance, bound, measured, tolerance)

    @classmethod
    def record(cls, name: str, measured: Any, detail: str = "") -> CheckResult:
        return cls(name, True, None, measured, informational=True, detail=detail)

    def to_dict(self) -> Dict[str, Any]:
        return jsonable(
            {
                "name": self.name,
                "pass": self.passed,
                "expected": self.expected,
                "measured": self.measured,
                "tolerance": self.tolerance,
                "informational": self.informational,
                "detail": self.detail,
            }
        )


@dataclass
class Certificate:
    """The JSON record of one CLI run.

    Examples
    --------
    >>> from cosetexpanders import Certificate, CheckResult
    >>> cert = Certificate("build", {"p": 2}, "0.1.0")
    >>> _ = cert.add(CheckResult.equals("order", 168, 168))
    >>> _ = cert.add(CheckResult.close("lambda", 0.5, 0.6, 1e-8))
    >>> cert.passed, cert.failures()
    (False, ['lambda'])
    """

    command: str
    config: Dict[str, Any]
    version: str
    checks: List[CheckResult] = field(default_factory=list)

    def add(self, check: CheckResult) -> CheckResult:
        self.checks.append(check)
        return check

    @property
    def passed(self) -> bool:
        return all(c.passed or c.informational for c in self.checks)

    def failures(self) -> List[str]:
        return [c.name for c in self.checks if not (c.passed or c.informational)]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "command": self.command,
            "config": jsonable(self.config),
            "version": self.version,
            "pass": self.passed,
            "checks": [c.to_dict() for c in self.checks],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def write(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.to_json())
        return path


class StageTimer:
    """Wall-clock seconds per named stage, kept apart from certificates."""

    def __init__(self) -> None:
        self.timings: Dict[str, float] = {}

    @contextmanager
    def stage(self, name: str) -> Iterator[None]:
        start = time.perf_counter()
        try:
            yield
        finally:
            self.timings[name] = self.timings.get(name, 0.0) + (
                time.perf_counter() - start
            )

    def write(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(self.timings, indent=2, sort_keys=True) + "\n")
        return path
