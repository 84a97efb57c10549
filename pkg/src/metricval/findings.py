"""Structured warnings produced by validation and analysis steps.

A Finding is a non-fatal observation: the operation that produced it still
returned a result, but the caller should know about the condition.  Fatal
conditions raise exceptions from metricval.errors instead.
"""

from __future__ import annotations

from dataclasses import dataclass, field

WARNING = "warning"
ERROR = "error"


@dataclass(frozen=True)
class Finding:
    """One diagnostic emitted while processing data.

    Attributes:
        severity: WARNING for advisory notes, ERROR for conditions that made
            part of the result unavailable (without aborting the whole run).
        message: human-readable description.
        code: short machine-readable tag, empty when none applies.
    """

    severity: str
    message: str
    code: str = ""

    def __post_init__(self):
        if self.severity not in (WARNING, ERROR):
            raise ValueError(f"unknown severity: {self.severity!r}")


def warning(message: str, code: str = "") -> Finding:
    return Finding(WARNING, message, code)


def error(message: str, code: str = "") -> Finding:
    return Finding(ERROR, message, code)


@dataclass
class FindingList:
    """Mutable accumulator for findings, shared by multi-step pipelines."""

    items: list[Finding] = field(default_factory=list)

    def add(self, finding: Finding) -> None:
        self.items.append(finding)

    def warn(self, message: str, code: str = "") -> None:
        self.items.append(warning(message, code))

    def error(self, message: str, code: str = "") -> None:
        self.items.append(error(message, code))

    def extend(self, findings) -> None:
        self.items.extend(findings)

    def __iter__(self):
        return iter(self.items)

    def __len__(self) -> int:
        return len(self.items)

    def has_errors(self) -> bool:
        return any(f.severity == ERROR for f in self.items)
