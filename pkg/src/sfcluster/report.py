"""Run reports: summary numbers for one build or clustering, plus JSON/CSV writers."""

from __future__ import annotations

import csv
import json
import os
from dataclasses import asdict, dataclass, field
from importlib import resources

import jsonschema
import numpy as np

SCHEMA_NAME = "run_report.schema.json"


def load_schema() -> dict:
    return json.loads(resources.files("sfcluster").joinpath("schemas", SCHEMA_NAME).read_text())


@dataclass(frozen=True)
class ClusterSizeStats:
    mean: float
    std: float
    variance: float

    @classmethod
    def of(cls, sizes) -> ClusterSizeStats:
        a = np.asarray(sizes, dtype=np.float64)
        if a.size == 0:
            return cls(0.0, 0.0, 0.0)
        var = float(a.var())
        return cls(float(a.mean()), float(np.sqrt(var)), var)


@dataclass
class RunReport:
    """One command's outcome. Size statistics use the population variance."""

    command: str
    mode: str
    n: int
    gamma: float
    seed: int
    n_edges: int
    trace_distance: float
    fidelity: float
    threshold: int | None = None
    n_cores: int | None = None
    n_isolated: int | None = None
    cluster_sizes: list[int] | None = None
    cluster_size_stats: ClusterSizeStats | None = None
    build: dict = field(default_factory=dict)
    wall_time: float | None = None

    def __post_init__(self):
        if self.cluster_sizes is not None and self.cluster_size_stats is None:
            self.cluster_size_stats = ClusterSizeStats.of(self.cluster_sizes)

    def check_conservation(self) -> None:
        if self.cluster_sizes is None:
            return
        total = sum(self.cluster_sizes) + (self.n_isolated or 0) + (self.n_cores or 0)
        if total != self.n:
            raise AssertionError(f"cluster sizes + isolated + cores = {total}, expected {self.n}")

    def to_dict(self) -> dict:
        d = asdict(self)
        if self.wall_time is None:
            d.pop("wall_time")
        return d

    def validate(self) -> None:
        jsonschema.validate(self.to_dict(), load_schema())


def write_json(obj, path: str | os.PathLike) -> None:
    with open(path, "w", newline="\n") as fh:
        json.dump(obj, fh, indent=1, sort_keys=True)
        fh.write("\n")


def write_report(report: RunReport, path: str | os.PathLike) -> None:
    report.check_conservation()
    report.validate()
    write_json(report.to_dict(), path)


def write_csv(rows, header, path: str | os.PathLike) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
