"""CSV/JSON reports with a fixed column order and lossless float text."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field


def fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return "nan" if math.isnan(v) else repr(v)
    return str(v)


def _num(text: str):
    if text == "":
        return None
    try:
        return int(text)
    except ValueError:
        return float(text)


def radius_label(r: float) -> str:
    return f"cov@{fmt(float(r))}"


@dataclass
class BenchRow:
    method: str
    scene: str
    seed: int
    n: int
    runtime_ms: float | None
    coverage: list = field(default_factory=list)
    error: str = ""

    @property
    def cov_avg(self) -> float | None:
        if not self.coverage or any(c is None for c in self.coverage):
            return None
        return sum(self.coverage) / len(self.coverage)


@dataclass
class BenchReport:
    """Sampler benchmark table: one row per (method, scene, seed)."""

    radii: list
    rows: list = field(default_factory=list)

    @property
    def columns(self) -> list[str]:
        return ["method", "scene", "seed", "n", "runtime_ms",
                *(radius_label(r) for r in self.radii), "cov_avg", "error"]

    def _records(self):
        for r in self.rows:
            cov = r.coverage if r.coverage else [None] * len(self.radii)
            yield [r.method, r.scene, r.seed, r.n, r.runtime_ms, *cov, r.cov_avg, r.error]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for rec in self._records():
            w.writerow([fmt(v) for v in rec])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "BenchReport":
        reader = csv.reader(io.StringIO(text))
        header = next(reader)
        cov_cols = [h for h in header if h.startswith("cov@")]
        radii = [float(h[4:]) for h in cov_cols]
        k = len(radii)
        rows = []
        for rec in reader:
            cov = [_num(x) for x in rec[5:5 + k]]
            rows.append(BenchRow(rec[0], rec[1], int(rec[2]), int(rec[3]), _num(rec[4]),
                                 [] if all(c is None for c in cov) else cov, rec[6 + k]))
        return cls(radii, rows)

    def to_json(self) -> str:
        recs = [dict(zip(self.columns, rec)) for rec in self._records()]
        return json.dumps({"radii": self.radii, "rows": recs}, indent=2) + "\n"

    def mean_coverage(self, method: str) -> list[float]:
        rows = [r for r in self.rows if r.method == method and r.coverage]
        return [sum(r.coverage[i] for r in rows) / len(rows) for i in range(len(self.radii))]


def write_table(columns, records, out_format: str = "csv") -> str:
    """Generic table serialisation used by the CLI."""
    if out_format == "json":
        return json.dumps([dict(zip(columns, rec)) for rec in records], indent=2) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for rec in records:
        w.writerow([fmt(v) for v in rec])
    return buf.getvalue()
