"""Run log records and their on-disk forms.

Logs are JSONL: one record per epoch, append-only, so partial runs stay
readable.  Bound snapshots (for the fit workflow) go to a sidecar ``.npz``
because they are dense integer arrays, not events.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np


@dataclass(frozen=True)
class RunLogRecord:
    algorithm: str  # "tabu" | "gta"
    instance: str
    seed: int
    epoch: int
    iters: int  # iterations completed at the end of this epoch (cumulative)
    best: int  # best makespan so far
    theta: float | None = None  # active theta during this epoch (gta only)
    elapsed_ms: int = 0

    def to_json(self) -> str:
        d = asdict(self)
        if self.theta is None:
            del d["theta"]
        return json.dumps(d, separators=(",", ":"))

    @classmethod
    def from_json(cls, line: str) -> "RunLogRecord":
        d = json.loads(line)
        return cls(
            algorithm=d["algorithm"],
            instance=d["instance"],
            seed=int(d["seed"]),
            epoch=int(d["epoch"]),
            iters=int(d["iters"]),
            best=int(d["best"]),
            theta=d.get("theta"),
            elapsed_ms=int(d.get("elapsed_ms", 0)),
        )


def write_jsonl(records, path) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        for rec in records:
            fh.write(rec.to_json() + "\n")


def read_jsonl(path) -> list[RunLogRecord]:
    records = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line:
                records.append(RunLogRecord.from_json(line))
    return records


def write_bounds_snapshots(path, epochs, d1_rows, d0_rows) -> None:
    """Per-epoch d1/d0 arrays (NOT_SEEN sentinel kept as-is)."""
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    np.savez_compressed(
        path,
        epochs=np.asarray(epochs, dtype=np.int64),
        d1=np.asarray(d1_rows, dtype=np.int64),
        d0=np.asarray(d0_rows, dtype=np.int64),
    )


def read_bounds_snapshots(path):
    with np.load(path) as z:
        return z["epochs"].copy(), z["d1"].copy(), z["d0"].copy()
