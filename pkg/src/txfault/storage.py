"""On-disk formats: per-record CSV, the packed waveform container and
feature-matrix text files.

Packed container layout (little endian)::

    b"TXWF" | uint32 version | uint64 record count
    repeated: uint64 header length | JSON header | float64[3 * n] samples

The JSON header carries the scenario plus sample period, start time,
event time and ``n``.  Samples are stored phase-major (a, b, c).
"""
from __future__ import annotations

import csv
import json
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import numpy as np

from .scenarios import ScenarioSpec
from .simulate import WaveformRecord

MAGIC = b"TXWF"
CONTAINER_VERSION = 1
_HEAD = struct.Struct("<4sIQ")
_LEN = struct.Struct("<Q")


def _header(rec: WaveformRecord) -> dict:
    return {"spec": rec.spec.to_dict(), "sample_period": rec.sample_period,
            "t0": rec.t0, "event_time": rec.event_time, "n": rec.n}


def _record(head: dict, samples: np.ndarray) -> WaveformRecord:
    return WaveformRecord(ScenarioSpec.from_dict(head["spec"]), samples,
                          head["sample_period"], head["t0"], head["event_time"])


# -- single record as CSV + sidecar ------------------------------------------

def write_record_csv(rec: WaveformRecord, path) -> Path:
    """Write ``t, ia, ib, ic`` rows to ``path`` and the scenario to
    ``path.json``.  Values use ``repr`` so a reload is exact."""
    path = Path(path)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "ia", "ib", "ic"])
        for t, a, b, c in zip(rec.t, *rec.samples):
            w.writerow([repr(float(t)), repr(float(a)), repr(float(b)), repr(float(c))])
    with open(path.with_suffix(path.suffix + ".json"), "w") as fh:
        json.dump(_header(rec), fh, indent=1, sort_keys=True)
    return path


def read_record_csv(path) -> WaveformRecord:
    path = Path(path)
    with open(path.with_suffix(path.suffix + ".json")) as fh:
        head = json.load(fh)
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if data.shape != (head["n"], 4):
        raise ValueError(f"{path}: expected {head['n']} rows of 4 columns, "
                         f"found shape {data.shape}")
    return _record(head, data[:, 1:].T.copy())


# -- packed container ---------------------------------------------------------

class ContainerWriter:
    """Streaming writer; the record count in the header is patched on close."""

    def __init__(self, path):
        self.path = Path(path)
        self._fh = open(self.path, "wb")
        self._fh.write(_HEAD.pack(MAGIC, CONTAINER_VERSION, 0))
        self.count = 0

    def write(self, rec: WaveformRecord) -> None:
        head = json.dumps(_header(rec), sort_keys=True,
                          separators=(",", ":")).encode()
        self._fh.write(_LEN.pack(len(head)))
        self._fh.write(head)
        self._fh.write(np.ascontiguousarray(rec.samples, dtype="<f8").tobytes())
        self.count += 1

    __call__ = write

    def close(self) -> None:
        if self._fh.closed:
            return
        self._fh.seek(0)
        self._fh.write(_HEAD.pack(MAGIC, CONTAINER_VERSION, self.count))
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def write_container(records: Iterable[WaveformRecord], path) -> int:
    with ContainerWriter(path) as w:
        for rec in records:
            w.write(rec)
    return w.count


def _read_exact(fh, n: int, path) -> bytes:
    buf = fh.read(n)
    if len(buf) != n:
        raise ValueError(f"{path}: truncated container")
    return buf


def iter_container(path) -> Iterator[WaveformRecord]:
    path = Path(path)
    with open(path, "rb") as fh:
        magic, version, count = _HEAD.unpack(_read_exact(fh, _HEAD.size, path))
        if magic != MAGIC:
            raise ValueError(f"{path}: not a waveform container")
        if version != CONTAINER_VERSION:
            raise ValueError(f"{path}: unsupported container version {version}")
        for _ in range(count):
            (hl,) = _LEN.unpack(_read_exact(fh, _LEN.size, path))
            head = json.loads(_read_exact(fh, hl, path))
            raw = _read_exact(fh, 3 * head["n"] * 8, path)
            yield _record(head, np.frombuffer(raw, dtype="<f8").reshape(3, head["n"]).copy())
        if fh.read(1):
            raise ValueError(f"{path}: trailing bytes after {count} records")


def read_container(path) -> list[WaveformRecord]:
    return list(iter_container(path))


# -- feature matrices ---------------------------------------------------------

@dataclass
class FeatureMatrix:
    X: np.ndarray
    names: tuple[str, ...]
    labels: np.ndarray            # fault type / INRUSH / NOFAULT
    merged: np.ndarray            # merged class, "" for non-fault rows
    provenance: np.ndarray | None = None

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=float)
        self.names = tuple(self.names)
        self.labels = np.asarray(self.labels, dtype=object)
        self.merged = np.asarray(self.merged, dtype=object)
        n = self.X.shape[0]
        if self.X.ndim != 2 or self.X.shape[1] != len(self.names):
            raise ValueError("feature matrix width does not match its names")
        if len(self.labels) != n or len(self.merged) != n:
            raise ValueError("label columns differ in length from the matrix")
        if self.provenance is not None:
            self.provenance = np.asarray(self.provenance, dtype=object)
            if len(self.provenance) != n:
                raise ValueError("provenance column differs in length")

    def columns(self, names: Sequence[str]) -> np.ndarray:
        index = {n: i for i, n in enumerate(self.names)}
        missing = [n for n in names if n not in index]
        if missing:
            raise KeyError(f"missing feature columns: {', '.join(missing)}")
        return self.X[:, [index[n] for n in names]]

    def select(self, rows) -> "FeatureMatrix":
        prov = None if self.provenance is None else self.provenance[rows]
        return FeatureMatrix(self.X[rows], self.names, self.labels[rows],
                             self.merged[rows], prov)


def write_matrix(fm: FeatureMatrix, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        extra = ["provenance"] if fm.provenance is not None else []
        w.writerow(list(fm.names) + ["label", "merged_label"] + extra)
        for i, row in enumerate(fm.X):
            tail = [fm.labels[i], fm.merged[i] or ""]
            if extra:
                tail.append(fm.provenance[i])
            w.writerow([repr(float(v)) for v in row] + tail)


def read_matrix(path) -> FeatureMatrix:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError(f"{path}: empty feature matrix file")
    header = rows[0]
    has_prov = header[-1] == "provenance"
    n_tail = 3 if has_prov else 2
    names = header[:-n_tail]
    if header[len(names):len(names) + 2] != ["label", "merged_label"]:
        raise ValueError(f"{path}: missing label/merged_label columns")
    body = rows[1:]
    X = np.array([[float(v) for v in r[:len(names)]] for r in body],
                 dtype=float).reshape(len(body), len(names))
    labels = [r[len(names)] for r in body]
    merged = [r[len(names) + 1] for r in body]
    prov = [r[len(names) + 2] for r in body] if has_prov else None
    return FeatureMatrix(X, names, labels, merged, prov)
