"""Check reports and seeded sampling helpers.

Every verification operation returns a Report rather than a bare bool:
pass/fail, the property tag it certifies, the seed and sample count it
ran with, and a serializable witness for the first failure.  Identical
(config, seed) inputs produce byte-identical JSON.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field


@dataclass
class Report:
    name: str
    property_tag: str
    passed: bool = True
    samples: int = 0
    seed: int | None = None
    details: list = field(default_factory=list)
    witness: dict | None = None

    def fail(self, witness=None, note=None):
        self.passed = False
        if self.witness is None:
            self.witness = witness or {}
        if note:
            self.details.append(note)
        return self

    def note(self, s):
        self.details.append(s)
        return self

    def merge(self, other):
        self.passed = self.passed and other.passed
        self.samples += other.samples
        self.details.extend(f"{other.name}: {d}" for d in other.details)
        if self.witness is None and other.witness is not None:
            self.witness = {"from": other.name, **other.witness}
        return self

    def to_json(self):
        return {
            "name": self.name,
            "property": self.property_tag,
            "passed": self.passed,
            "samples": self.samples,
            "seed": self.seed,
            "details": list(self.details),
            "witness": self.witness,
        }

    def dumps(self):
        return json.dumps(self.to_json(), sort_keys=True, indent=2, default=repr)


def describe(x):
    """Compact, deterministic witness rendering of a ring element."""
    try:
        return repr(x)
    except Exception:  # pragma: no cover
        return f"<{type(x).__name__}>"
