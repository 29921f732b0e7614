"""File formats: measurement datasets, estimator checkpoints and trial records.

Datasets are CSV with header ``k,slot,i,j,value``; one row per matrix entry,
``slot`` is ``phi`` or ``y`` and values carry 17 significant digits, which
round-trips every float64 exactly.

Checkpoints are JSON documents::

    {"format": "matrls-checkpoint", "version": 1, "method": "matrix",
     "dims": {...}, "step": 50,
     "arrays": {"p": {"shape": [n, n], "data": [...]}, ...}}

with arrays flattened row-major. Python's float repr is the shortest string
that parses back to the same double, so the JSON is lossless as well.
"""

import csv
import json
import math
import os
from dataclasses import asdict, dataclass, fields

import numpy as np

from .arma import ArmaMatrixState, ArmaVecPermState
from .errors import CheckpointError, DatasetFormatError
from .estimators import ColumnwiseState, MatrixUpdateState, VecPermState
from .problem import Measurement, ProblemDims

__all__ = [
    "TrialRecord",
    "checkpoint_load",
    "checkpoint_save",
    "dataset_read",
    "dataset_write",
    "read_records",
    "write_records",
]

DATASET_HEADER = ["k", "slot", "i", "j", "value"]
_SLOTS = ("phi", "y")


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


# -- datasets -----------------------------------------------------------------

def dataset_write(path, data) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(DATASET_HEADER)
        for k, meas in enumerate(data):
            for slot in _SLOTS:
                arr = getattr(meas, slot)
                for (i, j), value in np.ndenumerate(arr):
                    writer.writerow([k, slot, i, j, _fmt(value)])


def dataset_read(path):
    """Read measurements written by :func:`dataset_write`."""
    entries = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != DATASET_HEADER:
            raise DatasetFormatError(f"expected header {','.join(DATASET_HEADER)}", line=1)
        for line, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 5:
                raise DatasetFormatError(f"expected 5 fields, got {len(row)}", line=line)
            k, slot, i, j, value = row
            if slot not in _SLOTS:
                raise DatasetFormatError(f"unknown slot {slot!r}", line=line)
            try:
                k, i, j = int(k), int(i), int(j)
                value = float(value)
            except ValueError as exc:
                raise DatasetFormatError(str(exc), line=line) from None
            if min(k, i, j) < 0 or not math.isfinite(value):
                raise DatasetFormatError("negative index or non-finite value", line=line)
            entries.setdefault(k, {"phi": {}, "y": {}})[slot][(i, j)] = value
    if sorted(entries) != list(range(len(entries))):
        raise DatasetFormatError("measurement indices k are not contiguous from 0")
    data = []
    for k in range(len(entries)):
        arrays = {}
        for slot in _SLOTS:
            cells = entries[k][slot]
            if not cells:
                raise DatasetFormatError(f"measurement {k} has no {slot} entries")
            rows = 1 + max(i for i, _ in cells)
            cols = 1 + max(j for _, j in cells)
            if len(cells) != rows * cols:
                raise DatasetFormatError(f"measurement {k} {slot} is missing entries")
            arr = np.empty((rows, cols))
            for (i, j), value in cells.items():
                arr[i, j] = value
            arrays[slot] = arr
        data.append(Measurement(arrays["phi"], arrays["y"]))
    return data


# -- checkpoints --------------------------------------------------------------

_TAGS = {
    VecPermState: "vecperm",
    ColumnwiseState: "columnwise",
    MatrixUpdateState: "matrix",
    ArmaVecPermState: "arma-vecperm",
    ArmaMatrixState: "arma-matrix",
}
_CLASSES = {tag: cls for cls, tag in _TAGS.items()}


def _pack(arr):
    arr = np.asarray(arr, dtype=np.float64)
    return {"shape": list(arr.shape), "data": [float(x) for x in arr.ravel()]}


def _unpack(doc, name):
    try:
        item = doc[name]
        return np.array(item["data"], dtype=np.float64).reshape(item["shape"])
    except (KeyError, TypeError, ValueError) as exc:
        raise CheckpointError(f"bad array {name!r}: {exc}") from None


def checkpoint_save(path, state) -> None:
    tag = _TAGS.get(type(state))
    if tag is None:
        raise CheckpointError(f"cannot checkpoint {type(state).__name__}")
    arrays = {}
    dims = {}
    if isinstance(state, VecPermState):
        arrays["pbar"] = _pack(state.pbar)
        arrays["thetabar"] = _pack(state.thetabar)
        if state.info is not None:
            arrays["info"] = _pack(state.info)
    elif isinstance(state, ColumnwiseState):
        for j, pj in enumerate(state.p):
            arrays[f"p{j}"] = _pack(pj)
        arrays["theta"] = _pack(state.theta)
        if state.info is not None:
            for j, ij in enumerate(state.info):
                arrays[f"info{j}"] = _pack(ij)
    elif isinstance(state, MatrixUpdateState):
        arrays["p"] = _pack(state.p)
        arrays["theta"] = _pack(state.theta)
        if state.info is not None:
            arrays["info"] = _pack(state.info)
    elif isinstance(state, ArmaVecPermState):
        arrays["pbar"] = _pack(state.pbar)
        arrays["thetabar"] = _pack(state.thetabar)
        dims = {"p": state.p, "d": state.d}
    else:
        arrays["P"] = _pack(state.P)
        arrays["theta"] = _pack(state.theta)
        dims = {"p": state.p, "d": state.d}
    if hasattr(state, "dims"):
        dims = asdict(state.dims)
    doc = {"format": "matrls-checkpoint", "version": 1, "method": tag,
           "dims": dims, "step": int(state.step), "arrays": arrays}
    with open(path, "w") as fh:
        json.dump(doc, fh)


def checkpoint_load(path, expected=None):
    """Load a checkpoint; `expected` (tag or state class) guards the method."""
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise CheckpointError(f"not a checkpoint: {exc}") from None
    if not isinstance(doc, dict) or doc.get("format") != "matrls-checkpoint":
        raise CheckpointError("not a matrls checkpoint")
    tag = doc.get("method")
    if tag not in _CLASSES:
        raise CheckpointError(f"unknown method tag {tag!r}")
    if expected is not None:
        want = expected if isinstance(expected, str) else _TAGS.get(expected)
        if want != tag:
            raise CheckpointError(f"checkpoint holds a {tag!r} state, expected {want!r}")
    arrays, step = doc["arrays"], int(doc["step"])
    dims_doc = doc["dims"]
    if tag in ("arma-vecperm", "arma-matrix"):
        p, d = int(dims_doc["p"]), int(dims_doc["d"])
        if tag == "arma-vecperm":
            pbar, thetabar = _unpack(arrays, "pbar"), _unpack(arrays, "thetabar")
            _expect_shape(pbar, (p * d, p * d), "pbar")
            _expect_shape(thetabar, (p * d, 1), "thetabar")
            return ArmaVecPermState(pbar, thetabar, p, step)
        P, theta = _unpack(arrays, "P"), _unpack(arrays, "theta")
        _expect_shape(P, (d, d), "P")
        _expect_shape(theta, (p, d), "theta")
        return ArmaMatrixState(P, theta, step)

    try:
        dims = ProblemDims(**{f.name: int(dims_doc[f.name]) for f in fields(ProblemDims)})
    except (KeyError, TypeError, ValueError) as exc:
        raise CheckpointError(f"bad dims: {exc}") from None
    n, m = dims.n, dims.m
    if tag == "vecperm":
        pbar, thetabar = _unpack(arrays, "pbar"), _unpack(arrays, "thetabar")
        _expect_shape(pbar, (n * m, n * m), "pbar")
        _expect_shape(thetabar, (n * m, 1), "thetabar")
        info = _unpack(arrays, "info") if "info" in arrays else None
        return VecPermState(pbar, thetabar, dims, step, info)
    if tag == "columnwise":
        ps = tuple(_unpack(arrays, f"p{j}") for j in range(m))
        for j, pj in enumerate(ps):
            _expect_shape(pj, (n, n), f"p{j}")
        theta = _unpack(arrays, "theta")
        _expect_shape(theta, (n, m), "theta")
        info = (tuple(_unpack(arrays, f"info{j}") for j in range(m))
                if "info0" in arrays else None)
        return ColumnwiseState(ps, theta, dims, step, info)
    p, theta = _unpack(arrays, "p"), _unpack(arrays, "theta")
    _expect_shape(p, (n, n), "p")
    _expect_shape(theta, (n, m), "theta")
    info = _unpack(arrays, "info") if "info" in arrays else None
    return MatrixUpdateState(p, theta, dims, step, info)


def _expect_shape(arr, shape, name):
    if arr.shape != shape:
        raise CheckpointError(f"{name} has shape {arr.shape}, expected {shape}")


# -- trial records --------------------------------------------------------------

@dataclass(frozen=True)
class TrialRecord:
    """One output row: estimate error of `method` after `k` steps of `trial`."""

    trial: int
    k: int
    method: str
    error: float
    elapsed_ns: int
    mem_params: int


RECORD_HEADER = [f.name for f in fields(TrialRecord)]


def write_records(path, records, append: bool = True) -> None:
    """Write records as CSV; appending never repeats the header."""
    new = not append or not os.path.exists(path) or os.path.getsize(path) == 0
    with open(path, "w" if not append else "a", newline="") as fh:
        writer = csv.writer(fh)
        if new:
            writer.writerow(RECORD_HEADER)
        for r in records:
            writer.writerow([r.trial, r.k, r.method, _fmt(r.error), r.elapsed_ns,
                             r.mem_params])


def read_records(path):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != RECORD_HEADER:
            raise DatasetFormatError(f"expected header {','.join(RECORD_HEADER)}", line=1)
        out = []
        for line, row in enumerate(reader, start=2):
            try:
                out.append(TrialRecord(int(row[0]), int(row[1]), row[2], float(row[3]),
                                       int(row[4]), int(row[5])))
            except (ValueError, IndexError) as exc:
                raise DatasetFormatError(str(exc), line=line) from None
        return out
