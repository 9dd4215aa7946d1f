import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from multisep import io
from multisep.errors import FormatError, InvalidState
from multisep.fixtures import random_pure, rng_for, tiles
from multisep.purification import Ensemble
from multisep.states import DensityMatrix

from conftest import random_density


def test_float_format():
    assert io.dumps(0.1) == "0.10000000000000001"
    assert io.dumps(1.0) == "1.0"
    assert io.dumps(float("nan")) == "null"
    assert io.dumps({"a": [1, True, None, "x"]}) == '{"a": [1, true, null, "x"]}'


@settings(max_examples=30, deadline=None)
@given(dims=st.lists(st.integers(1, 3), min_size=1, max_size=3), seed=st.integers(0, 2**31))
def test_pure_round_trip_bit_identical(dims, seed):
    psi = random_pure(dims, seed)
    text = io.dump_text(psi)
    back = io.loads(text)
    assert np.array_equal(back.amps, psi.amps) and back.dims == psi.dims
    assert io.dump_text(back) == text


def test_density_ensemble_isometry_round_trip():
    rho = DensityMatrix((2, 3), random_density(rng_for(2), (2, 3)))
    back = io.loads(io.dump_text(rho))
    assert np.array_equal(back.mat, rho.mat)
    a, b = np.array([1, 0]), np.array([0.6, 0.8j])
    e = Ensemble.from_terms((2, 2), [0.25, 0.75], [[a, b], [b, a]])
    back = io.loads(io.dump_text(e))
    assert isinstance(back, Ensemble) and np.array_equal(back.vectors(), e.vectors())
    assert np.array_equal(back.probs, e.probs)
    iso = np.eye(3, dtype=complex)[:, :2] * np.exp(0.3j)
    back = io.loads(io.dump_text(iso))
    assert np.array_equal(back, iso)


def test_files(tmp_path):
    path = tmp_path / "t.json"
    io.save(tiles(), path)
    assert np.array_equal(io.load(path).mat, tiles().mat)
    rec = json.loads(path.read_text())
    assert rec["kind"] == "density" and rec["dims"] == [3, 3]


@pytest.mark.parametrize(
    "text, err",
    [
        ("{", FormatError),
        ('{"dims": [2]}', FormatError),
        ('{"kind": "mystery"}', FormatError),
        ('{"kind": "pure", "dims": [2]}', FormatError),
        ('{"kind": "pure", "dims": [2], "amps": [[1, 0, 3]]}', FormatError),
        ('{"kind": "pure", "dims": "2", "amps": [[1, 0]]}', FormatError),
        ('{"kind": "pure", "dims": [2], "amps": [[1, 0], [1, 0]]}', InvalidState),
    ],
)
def test_parse_errors(text, err):
    with pytest.raises(err):
        io.loads(text)
