import json

import numpy as np
import pytest

from matrls.arma import arma_matrix_init, arma_vecperm_init, ident_step_matrix, ident_step_vecperm
from matrls.errors import CheckpointError, DatasetFormatError
from matrls.estimators import FAMILIES, run_recursive
from matrls.experiments import random_instance
from matrls.io import (
    RECORD_HEADER,
    TrialRecord,
    checkpoint_load,
    checkpoint_save,
    dataset_read,
    dataset_write,
    read_records,
    write_records,
)
from matrls.problem import Measurement, ProblemDims


def same_state(a, b):
    assert type(a) is type(b)
    assert a.step == b.step
    for name in ("pbar", "thetabar", "p", "P", "theta", "info"):
        x, y = getattr(a, name, None), getattr(b, name, None)
        if isinstance(x, tuple):
            assert len(x) == len(y) and all(np.array_equal(u, v) for u, v in zip(x, y))
        elif x is None or isinstance(x, int):
            assert x == y
        else:
            assert np.array_equal(x, y)


def test_empty_dataset(tmp_path):
    path = tmp_path / "d.csv"
    dataset_write(path, [])
    assert path.read_text().strip() == "k,slot,i,j,value"
    assert dataset_read(path) == []


def test_single_measurement_round_trip(tmp_path):
    path = tmp_path / "d.csv"
    dataset_write(path, [Measurement([[0.1]], [[-3.5]])])
    (m,) = dataset_read(path)
    assert m.phi[0, 0] == 0.1 and m.y[0, 0] == -3.5


def test_random_dataset_bit_exact(tmp_path, rng):
    data = [Measurement(rng.standard_normal((2, 3)) * 10.0 ** rng.integers(-300, 300),
                        rng.standard_normal((2, 4))) for _ in range(100)]
    path = tmp_path / "d.csv"
    dataset_write(path, data)
    back = dataset_read(path)
    assert len(back) == 100
    for a, b in zip(data, back):
        assert np.array_equal(a.phi, b.phi) and np.array_equal(a.y, b.y)


@pytest.mark.parametrize("body,line", [
    ("0,phi,0,0,1\n0,y,0,0,abc\n", 3),
    ("0,phi,0,0,1\n0,z,0,0,1\n", 3),
    ("0,phi,0,0\n", 2),
    ("0,phi,0,0,nan\n", 2),
])
def test_malformed_rows_name_line(tmp_path, body, line):
    path = tmp_path / "d.csv"
    path.write_text("k,slot,i,j,value\n" + body)
    with pytest.raises(DatasetFormatError) as info:
        dataset_read(path)
    assert info.value.line == line
    assert str(info.value).startswith(f"line {line}:")


def test_bad_header(tmp_path):
    path = tmp_path / "d.csv"
    path.write_text("a,b\n")
    with pytest.raises(DatasetFormatError):
        dataset_read(path)


def test_missing_entries(tmp_path):
    path = tmp_path / "d.csv"
    path.write_text("k,slot,i,j,value\n0,phi,0,0,1\n0,phi,1,1,1\n0,y,0,0,1\n")
    with pytest.raises(DatasetFormatError):
        dataset_read(path)


def states_for(family, form):
    dims = ProblemDims(2, 3, 2)
    mode = {"vecperm": "full", "columnwise": "per_column", "matrix": "shared"}[family]
    data, reg, weights, _ = random_instance(6, 0, dims, 100, mode)
    return data, reg, weights, dims


@pytest.mark.parametrize("family", list(FAMILIES))
@pytest.mark.parametrize("form", ["information", "covariance"])
def test_checkpoint_fresh_state_identity(tmp_path, family, form):
    data, reg, weights, dims = states_for(family, form)
    state = FAMILIES[family][0](reg, dims)
    checkpoint_save(tmp_path / "c.json", state)
    same_state(state, checkpoint_load(tmp_path / "c.json"))


@pytest.mark.parametrize("family", list(FAMILIES))
@pytest.mark.parametrize("form", ["information", "covariance"])
def test_checkpoint_resume(tmp_path, family, form):
    data, reg, weights, dims = states_for(family, form)
    full = run_recursive(family, data, reg, weights, form, dims)
    checkpoint_save(tmp_path / "c.json", full[50])
    resumed = checkpoint_load(tmp_path / "c.json", family)
    same_state(full[50], resumed)
    rest = run_recursive(family, data[50:], reg, weights[50:], form, dims, state=resumed)
    for a, b in zip(full[50:], rest):
        assert np.linalg.norm(a.theta - b.theta) <= 1e-12 * np.linalg.norm(a.theta)


def test_arma_checkpoints(tmp_path, rng):
    phi = rng.standard_normal((7, 1))
    y = rng.standard_normal((2, 1))
    for state, step in ((arma_vecperm_init(2, 7), ident_step_vecperm),
                        (arma_matrix_init(2, 7), ident_step_matrix)):
        state = step(state, phi, y)
        checkpoint_save(tmp_path / "a.json", state)
        same_state(state, checkpoint_load(tmp_path / "a.json", type(state)))


def test_checkpoint_tag_mismatch(tmp_path):
    data, reg, weights, dims = states_for("vecperm", None)
    checkpoint_save(tmp_path / "c.json", FAMILIES["vecperm"][0](reg, dims))
    with pytest.raises(CheckpointError):
        checkpoint_load(tmp_path / "c.json", "matrix")


def test_checkpoint_shape_mismatch(tmp_path):
    data, reg, weights, dims = states_for("matrix", None)
    path = tmp_path / "c.json"
    checkpoint_save(path, FAMILIES["matrix"][0](reg, dims))
    doc = json.loads(path.read_text())
    doc["dims"]["n"] = 4
    path.write_text(json.dumps(doc))
    with pytest.raises(CheckpointError):
        checkpoint_load(path)


def test_checkpoint_rejects_other_files(tmp_path):
    path = tmp_path / "c.json"
    path.write_text("{}")
    with pytest.raises(CheckpointError):
        checkpoint_load(path)
    path.write_text("not json")
    with pytest.raises(CheckpointError):
        checkpoint_load(path)
    with pytest.raises(CheckpointError):
        checkpoint_save(path, object())


def test_records_append_and_parse(tmp_path):
    path = tmp_path / "r.csv"
    first = [TrialRecord(0, 1, "matrix", 0.1 + 0.2, 10, 12)]
    second = [TrialRecord(1, 2, "vecperm", 1e-300, 20, 40)]
    write_records(path, first)
    write_records(path, second)
    lines = path.read_text().splitlines()
    assert lines[0] == ",".join(RECORD_HEADER)
    assert sum(line == lines[0] for line in lines) == 1
    assert read_records(path) == first + second
    write_records(path, second, append=False)
    assert read_records(path) == second
