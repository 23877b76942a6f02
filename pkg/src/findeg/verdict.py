from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any


@dataclass(frozen=True)
class Verdict:
    """Outcome of a check: a boolean plus JSON-friendly detail and an optional witness.

    Truthy iff the check held, so ``assert check(...)`` reads naturally.
    """

    holds: bool
    detail: dict[str, Any] = field(default_factory=dict)
    witness: Any = None

    def __bool__(self):
        return bool(self.holds)

    def to_json(self) -> dict:
        out = {"holds": bool(self.holds), "detail": self.detail}
        if self.witness is not None:
            out["witness"] = repr(self.witness)
        return out
