"""Reproduction of the circulant comparison table (MAD vs cMAD per profile)."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

from .circulant import DEFAULT_EXACT_THRESHOLD, DEFAULT_RESTARTS, CirculantSpec, TreeResult, find_cmad, find_mad
from .errors import CapConsensusError


@dataclass(frozen=True)
class TableRow:
    n: int
    generators: tuple[int, ...]
    h: tuple[int, ...]
    printed_mad: float
    printed_cmad: float
    printed_delta: float  # fraction


REFERENCE_ROWS: tuple[TableRow, ...] = (
    TableRow(10, (3, 5), (5, 4), 0.605, 0.605, 0.0),
    TableRow(10, (3, 5), (8, 1), 0.605, 0.645, 0.060),
    TableRow(10, (1, 3, 4), (3, 3, 3), 0.481, 0.481, 0.0),
    TableRow(10, (1, 3, 4), (1, 7, 1), 0.481, 0.570, 0.156),
    TableRow(15, (1, 3, 4), (4, 6, 4), 0.622, 0.622, 0.0),
    TableRow(15, (1, 3, 4), (7, 3, 4), 0.622, 0.653, 0.047),
    TableRow(15, (3, 4, 7), (4, 4, 5), 0.640, 0.640, 0.0),
    TableRow(15, (3, 4, 7), (3, 1, 10), 0.640, 0.707, 0.095),
    TableRow(20, (1, 2, 4), (8, 6, 5), 0.734, 0.734, 0.0),
    TableRow(20, (1, 2, 4), (2, 2, 15), 0.734, 0.801, 0.084),
    TableRow(30, (1, 4, 5), (9, 10, 10), 0.908, 0.908, 0.0),
    TableRow(30, (1, 4, 5), (4, 16, 9), 0.908, 0.934, 0.027),
    TableRow(35, (1, 6, 7, 10), (10, 4, 10, 10), 0.770, 0.770, 0.0),
    TableRow(35, (1, 6, 7, 10), (6, 8, 15, 5), 0.770, 0.783, 0.017),
)


@dataclass(frozen=True)
class RowResult:
    row: TableRow
    mad: TreeResult
    cmad: TreeResult | None
    note: str = ""

    @property
    def hstar_mad(self) -> float:
        return self.mad.hstar

    @property
    def hstar_cmad(self) -> float:
        return self.cmad.hstar if self.cmad is not None else math.nan

    @property
    def delta(self) -> float:
        if self.cmad is None:
            return math.nan
        return (self.hstar_cmad - self.hstar_mad) / self.hstar_cmad

    @property
    def heuristic(self) -> bool:
        return self.mad.heuristic or (self.cmad is not None and self.cmad.heuristic)


def reproduce(
    rows: tuple[TableRow, ...] = REFERENCE_ROWS,
    exact_threshold: int = DEFAULT_EXACT_THRESHOLD,
    restarts: int = DEFAULT_RESTARTS,
    seed: int = 0,
) -> list[RowResult]:
    """Recompute each row; profiles the search rejects keep ``cmad=None`` and a note."""
    mads: dict[tuple, TreeResult] = {}
    out = []
    for row in rows:
        key = (row.n, row.generators)
        if key not in mads:
            mads[key] = find_mad(row.n, row.generators, exact_threshold=exact_threshold, restarts=restarts, seed=seed)
        try:
            spec = CirculantSpec(row.n, row.generators, row.h)
            cmad = find_cmad(spec, exact_threshold=exact_threshold, restarts=restarts, seed=seed)
            out.append(RowResult(row, mads[key], cmad))
        except CapConsensusError as exc:
            out.append(RowResult(row, mads[key], None, f"{exc.code}: {exc}"))
    return out


HEADER = ("n", "classes", "h", "H*_MAD", "H*_cMAD", "Delta", "heuristic", "note")


def _fmt(x: float) -> str:
    return "" if math.isnan(x) else f"{x:.6f}"


def to_csv(results: list[RowResult]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(HEADER)
    for r in results:
        w.writerow(
            (
                r.row.n,
                ",".join(map(str, r.row.generators)),
                ",".join(map(str, r.row.h)),
                _fmt(r.hstar_mad),
                _fmt(r.hstar_cmad),
                _fmt(r.delta),
                "true" if r.heuristic else "false",
                r.note,
            )
        )
    return buf.getvalue()
