from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any


class Verdict(str, Enum):
    PASS = "PASS"
    FAIL = "FAIL"
    INDETERMINATE = "INDETERMINATE"

    def __str__(self) -> str:
        return self.value

    @classmethod
    def of(cls, ok: bool) -> "Verdict":
        return cls.PASS if ok else cls.FAIL


@dataclass
class ClassVerdict:
    """Outcome of a class-membership check plus the evidence behind it."""

    check: str
    psi: str
    verdict: Verdict
    heuristic: bool = False
    caveat: str = ""
    details: dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.verdict is Verdict.PASS

    def summary(self) -> dict[str, Any]:
        out = {
            "check": self.check,
            "psi": self.psi,
            "verdict": self.verdict.value,
            "heuristic": self.heuristic,
        }
        if self.caveat:
            out["caveat"] = self.caveat
        out.update({k: v for k, v in self.details.items() if isinstance(v, (bool, int, float, str))})
        return out
