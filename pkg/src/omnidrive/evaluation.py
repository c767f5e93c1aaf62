"""Relative displacement error between a reference and a simulated trace.

The per-command error is ``|dp_real - dp_sim| / dp_real`` where ``dp`` is the
net displacement (position) or accumulated heading change (rotation) over
the trace.  Commands are grouped into categories and summarised by the mean
(MRE) and population standard deviation (STDRE) of their errors, in percent.
"""
from __future__ import annotations

import io
import logging
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from .simulator import OdometryTrace

log = logging.getLogger(__name__)

LINEAR = "linear"
ROTATION = "rotation"
KINDS = (LINEAR, ROTATION)
CATEGORIES = ("x", "y", "x-y", "rotation")
CATEGORY_TITLES = {"x": "x-direction", "y": "y-direction", "x-y": "x-y-direction", "rotation": "Rotation"}


def net_displacement(trace: OdometryTrace, kind: str = LINEAR) -> float:
    if len(trace) == 0:
        raise ValueError("trace is empty")
    if kind == LINEAR:
        d = trace.pose[-1, :2] - trace.pose[0, :2]
        return float(np.hypot(d[0], d[1]))
    if kind == ROTATION:
        return float(abs(trace.pose[-1, 2] - trace.pose[0, 2]))
    raise ValueError(f"kind must be one of {KINDS}, got {kind!r}")


def relative_error_of(dp_real: float, dp_sim: float) -> float:
    if not dp_real > 0:
        raise ValueError("reference displacement is zero; relative error undefined")
    return abs(dp_real - dp_sim) / dp_real


def relative_error(real: OdometryTrace, sim: OdometryTrace, kind: str = LINEAR) -> float:
    return relative_error_of(net_displacement(real, kind), net_displacement(sim, kind))


@dataclass
class CategoryStats:
    errors: list[float]

    @property
    def mre(self) -> float:
        return 100.0 * float(np.mean(self.errors))

    @property
    def stdre(self) -> float:
        return 100.0 * float(np.std(self.errors))


@dataclass
class ErrorReport:
    categories: dict[str, CategoryStats] = field(default_factory=dict)

    def __getitem__(self, category: str) -> CategoryStats:
        return self.categories[category]

    def __contains__(self, category: str) -> bool:
        return category in self.categories

    def to_text(self, label: str = "% Value") -> str:
        return format_table({label: self})

    def to_csv(self, label: str = "value") -> str:
        return table_csv({label: self})


def summarize(pairs: Iterable[tuple[OdometryTrace, OdometryTrace, str, str]], expected=CATEGORIES) -> ErrorReport:
    """Group ``(real, sim, category, kind)`` pairs and summarise per category."""
    grouped: dict[str, list[float]] = {}
    for real, sim, category, kind in pairs:
        grouped.setdefault(category, []).append(relative_error(real, sim, kind))
    return summarize_errors(grouped, expected)


def summarize_errors(grouped: Mapping[str, Iterable[float]], expected=CATEGORIES) -> ErrorReport:
    """Same as :func:`summarize` for already computed per-command errors."""
    report = ErrorReport()
    order = list(expected) + [c for c in grouped if c not in expected]
    for category in order:
        errors = [float(e) for e in grouped.get(category, ())]
        if not errors:
            if category in expected:
                log.warning("no commands in category %r; omitted from the report", category)
            continue
        report.categories[category] = CategoryStats(errors)
    return report


def _row_names(reports: Mapping[str, ErrorReport]) -> list[str]:
    names: list[str] = []
    for rep in reports.values():
        for c in rep.categories:
            if c not in names:
                names.append(c)
    return names


def format_table(reports: Mapping[str, ErrorReport]) -> str:
    """Aligned text table, one column per report (e.g. physical / lightweight)."""
    header = ["MRE +- STDRE"] + list(reports)
    rows = [header]
    for c in _row_names(reports):
        row = [CATEGORY_TITLES.get(c, c)]
        for rep in reports.values():
            row.append(f"{rep[c].mre:.2f} +- {rep[c].stdre:.2f}" if c in rep else "-")
        rows.append(row)
    widths = [max(len(r[i]) for r in rows) for i in range(len(header))]
    lines = ["  ".join(cell.ljust(w) if i == 0 else cell.rjust(w) for i, (cell, w) in enumerate(zip(r, widths)))
             for r in rows]
    return "\n".join(lines) + "\n"


def table_csv(reports: Mapping[str, ErrorReport]) -> str:
    """Machine-readable table with ``<label>_mre`` / ``<label>_stdre`` columns."""
    buf = io.StringIO()
    cols = ["category"]
    for label in reports:
        cols += [f"{label}_mre", f"{label}_stdre", f"{label}_n"]
    buf.write(",".join(cols) + "\n")
    for c in _row_names(reports):
        cells = [c]
        for rep in reports.values():
            if c in rep:
                cells += [repr(rep[c].mre), repr(rep[c].stdre), str(len(rep[c].errors))]
            else:
                cells += ["", "", "0"]
        buf.write(",".join(cells) + "\n")
    return buf.getvalue()
