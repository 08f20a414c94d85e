"""Check rows and reports produced by the verification suites."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class CheckRow:
    """One verified relation.

    ``residual`` is the largest absolute mismatch seen, ``scale`` the largest
    individual term magnitude; the row passes when
    ``residual / max(1, scale) < tol``.
    """

    id: str
    residual: float
    scale: float
    tol: float
    skipped: bool = False
    note: str = ""

    @property
    def relative(self) -> float:
        return self.residual / max(1.0, self.scale)

    @property
    def passed(self) -> bool:
        if self.skipped:
            return False
        return bool(np.isfinite(self.relative) and self.relative < self.tol)

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "residual": float(self.residual),
            "scale": float(self.scale),
            "relative": float(self.relative),
            "tol": float(self.tol),
            "pass": self.passed,
            "skipped": self.skipped,
            "note": self.note,
        }

    def line(self) -> str:
        if self.skipped:
            return f"SKIP {self.id}: {self.note}"
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.id}: rel={self.relative:.3e} (tol {self.tol:.0e}, scale {self.scale:.3e})"


@dataclass
class Report:
    title: str
    rows: list = field(default_factory=list)

    def add(self, row: CheckRow) -> CheckRow:
        self.rows.append(row)
        return row

    def extend(self, other: "Report") -> None:
        self.rows.extend(other.rows)

    @property
    def executed(self):
        return [r for r in self.rows if not r.skipped]

    @property
    def all_passed(self) -> bool:
        return all(r.passed for r in self.executed)

    def row(self, id: str) -> CheckRow:
        for r in self.rows:
            if r.id == id:
                return r
        raise KeyError(id)

    def ids(self):
        return [r.id for r in self.rows]

    def failures(self):
        return [r for r in self.executed if not r.passed]

    def to_dict(self) -> dict:
        return {"title": self.title, "rows": [r.to_dict() for r in self.rows]}

    def summary(self) -> str:
        return "\n".join([self.title] + ["  " + r.line() for r in self.rows])


def compare(id, lhs, rhs, tol, terms=(), note=""):
    """Build a row from two sampled sides of an identity.

    ``terms`` are the individual summands entering either side; their largest
    magnitude sets the scale (both sides count as terms too).
    """
    lhs = np.asarray(lhs)
    rhs = np.asarray(rhs)
    residual = float(np.max(np.abs(lhs - rhs))) if lhs.size else 0.0
    scale = max([float(np.max(np.abs(np.asarray(t)))) for t in (lhs, rhs, *terms) if np.size(t)] + [0.0])
    return CheckRow(id, residual, scale, tol, note=note)
