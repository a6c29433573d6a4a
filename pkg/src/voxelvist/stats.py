"""Spearman rank correlation between per-generator metric means and human ratings."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np
from scipy import stats as sps

__all__ = [
    "CATEGORIES",
    "RatingTable",
    "CorrelationCell",
    "CorrelationReport",
    "rank_average",
    "spearman_rho",
    "spearman_pvalue",
    "correlation_matrix",
]

CATEGORIES = ("adaptability", "functionality", "narrative", "aesthetic", "overall")
_JUDGED = CATEGORIES[:4]


def rank_average(values: Sequence[float]) -> np.ndarray:
    """1-based ranks; tied values share the mean of the ranks they span."""
    return sps.rankdata(np.asarray(values, dtype=np.float64), method="average")


def spearman_rho(xs: Sequence[float], ys: Sequence[float]) -> float | None:
    """Pearson correlation of average ranks; ``None`` if either side is constant."""
    if len(xs) != len(ys):
        raise ValueError(f"length mismatch: {len(xs)} vs {len(ys)}")
    if len(xs) < 3:
        raise ValueError("spearman_rho needs at least 3 pairs")
    rx = rank_average(xs)
    ry = rank_average(ys)
    rx -= rx.mean()
    ry -= ry.mean()
    den = math.sqrt(float(rx @ rx) * float(ry @ ry))
    if den == 0.0:
        return None
    rho = float((rx @ ry) / den)
    if abs(abs(rho) - 1.0) < 1e-12:
        rho = math.copysign(1.0, rho)
    return rho


def spearman_pvalue(rho: float, n: int) -> float:
    """Two-sided p-value of ``rho`` from Student's t with ``n - 2`` dof.

    A perfect correlation (``|rho| == 1``) returns 0.0; callers flag it.
    """
    if n < 4:
        raise ValueError("spearman_pvalue needs n >= 4")
    if not -1.0 <= rho <= 1.0:
        raise ValueError(f"rho outside [-1, 1]: {rho}")
    if abs(rho) == 1.0:
        return 0.0
    t = rho * math.sqrt((n - 2) / (1.0 - rho * rho))
    return float(min(1.0, 2.0 * sps.t.sf(abs(t), n - 2)))


@dataclass
class RatingTable:
    """Per-generator judge scores; ``overall`` is the mean of the four categories if missing."""

    scores: dict[str, dict[str, float]]

    @classmethod
    def from_rows(cls, rows: Mapping[str, Mapping[str, float]]) -> "RatingTable":
        scores = {}
        for gen, row in rows.items():
            missing = [c for c in _JUDGED if row.get(c) is None]
            if missing:
                raise ValueError(f"generator {gen!r} lacks {missing}")
            entry = {c: float(row[c]) for c in _JUDGED}
            overall = row.get("overall")
            entry["overall"] = float(overall) if overall is not None else sum(entry.values()) / 4
            scores[gen] = entry
        return cls(scores)

    @classmethod
    def read_csv(cls, path: str | Path) -> "RatingTable":
        with Path(path).open(newline="") as fh:
            reader = csv.DictReader(fh)
            header = reader.fieldnames or []
            if not header or header[0] != "generator" or not set(_JUDGED) <= set(header):
                raise ValueError(f"{path}: ratings header must be generator,{','.join(_JUDGED)}[,overall]")
            rows: dict[str, dict[str, float]] = {}
            for rec in reader:
                gen = rec["generator"]
                if gen in rows:
                    raise ValueError(f"{path}: duplicate generator {gen!r}")
                rows[gen] = {
                    c: float(rec[c]) for c in CATEGORIES if c in rec and rec[c] not in ("", None)
                }
        return cls.from_rows(rows)

    def generators(self) -> list[str]:
        return list(self.scores)


@dataclass(frozen=True)
class CorrelationCell:
    rho: float | None
    p: float | None
    n: int
    perfect: bool = False


@dataclass
class CorrelationReport:
    cells: dict[tuple[str, str], CorrelationCell]
    metrics: list[str]
    categories: list[str]
    dropped: list[str]

    def rho(self, metric: str, category: str) -> float | None:
        return self.cells[metric, category].rho

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["metric", "category", "rho", "p", "n"])
        for m in self.metrics:
            for c in self.categories:
                cell = self.cells[m, c]
                w.writerow([
                    m,
                    c,
                    "" if cell.rho is None else f"{cell.rho:.6g}",
                    "" if cell.p is None else f"{cell.p:.6g}",
                    cell.n,
                ])
        return buf.getvalue()


def correlation_matrix(
    means: Mapping[str, Mapping[str, float | None]],
    ratings: RatingTable,
    metrics: Sequence[str] | None = None,
) -> CorrelationReport:
    """Spearman rho and p for every (metric, category) pair.

    Generators present on only one side are dropped and listed. Within a
    metric, generators whose mean is absent are skipped for that metric.
    """
    shared = [g for g in means if g in ratings.scores]
    dropped = sorted(set(means) ^ set(ratings.scores))
    if len(shared) < 3:
        raise ValueError(f"need at least 3 generators with both means and ratings, got {len(shared)}")
    if metrics is None:
        metrics = list(dict.fromkeys(k for g in shared for k in means[g]))

    cells: dict[tuple[str, str], CorrelationCell] = {}
    for metric in metrics:
        gens = [g for g in shared if means[g].get(metric) is not None]
        xs = [float(means[g][metric]) for g in gens]  # type: ignore[arg-type]
        for cat in CATEGORIES:
            ys = [ratings.scores[g][cat] for g in gens]
            n = len(gens)
            rho = spearman_rho(xs, ys) if n >= 3 else None
            p = None
            perfect = rho is not None and abs(rho) == 1.0
            if rho is not None and n >= 4:
                p = spearman_pvalue(rho, n)
            cells[metric, cat] = CorrelationCell(rho, p, n, perfect)
    return CorrelationReport(cells, list(metrics), list(CATEGORIES), dropped)
