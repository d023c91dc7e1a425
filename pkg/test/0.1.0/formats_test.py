import json

import numpy as np
import pytest

from qerase.channels import channels_equal
from qerase.ensembles import random_density_matrix, random_kraus_channel, trial_rng
from qerase.error_handling import (
    InvalidParameterError,
    StateFileError,
    build_error_envelope,
    envelope_for_exception,
    normalize_run_id,
)
from qerase.fixtures import FIXTURES, fixture_path, load_fixture
from qerase.formats import (
    dump_channel,
    dump_state,
    inputs_digest,
    load_channel,
    load_state,
    parse_state,
    read_json,
    write_state,
)
from qerase.qmath import SubsystemDims

AB = SubsystemDims.bipartite(2, 2)


# --- state files ---

def test_state_file_round_trip_is_bit_exact(tmp_path):
    """Test that writing then reading a state reproduces every matrix entry exactly."""
    rng = trial_rng(13, 0)
    path = tmp_path / "state.json"
    for rank in (1, 2, 4):
        state = random_density_matrix(4, rank, rng, AB)
        write_state(path, state)
        loaded = load_state(path)
        assert np.array_equal(loaded.matrix, state.matrix)
        assert loaded.dims == state.dims


def test_dump_state_uses_re_im_pairs():
    """Test that complex entries are written as two-element arrays."""
    data = json.loads(dump_state(load_fixture("bell")))
    assert data["dims"] == [2, 2]
    assert data["labels"] == ["A", "B"]
    assert data["matrix"][0][3] == [0.5, 0.0]


def test_parse_state_rejects_non_square_matrix():
    """Test that a ragged matrix is a parse error with a field path."""
    data = {"dims": [2], "labels": ["A"], "matrix": [[[1, 0], [0, 0]], [[0, 0]]]}
    with pytest.raises(StateFileError) as excinfo:
        parse_state(data)
    assert excinfo.value.exit_code == 2
    assert excinfo.value.details


def test_parse_state_rejects_invalid_density_operator():
    """Test that a well-formed file holding a trace-2 matrix is rejected."""
    data = {"dims": [2], "labels": ["A"], "matrix": [[[1, 0], [0, 0]], [[0, 0], [1, 0]]]}
    with pytest.raises(StateFileError) as excinfo:
        parse_state(data)
    assert excinfo.value.details[0]["field"] == "matrix"


def test_parse_state_rejects_unknown_keys():
    """Test that extra keys in a state file are refused."""
    data = json.loads(dump_state(load_fixture("product")))
    data["comment"] = "hello"
    with pytest.raises(StateFileError):
        parse_state(data)


def test_read_json_reports_syntax_error_location(tmp_path):
    """Test that malformed JSON is a parse error carrying line and column."""
    path = tmp_path / "broken.json"
    path.write_text('{"dims": [2,\n', encoding="utf-8")
    with pytest.raises(StateFileError) as excinfo:
        read_json(path)
    assert excinfo.value.code == "parse_error"
    assert excinfo.value.details[0]["source"] == "json"
    assert excinfo.value.details[0]["field"].startswith("line ")


def test_read_json_reports_missing_file(tmp_path):
    """Test that an unreadable path is a parse error."""
    with pytest.raises(StateFileError):
        read_json(tmp_path / "missing.json")


# --- channel files ---

def test_channel_file_round_trip(tmp_path):
    """Test that a Kraus channel survives a write and read."""
    channel = random_kraus_channel(2, 3, trial_rng(6, 0))
    path = tmp_path / "channel.json"
    path.write_text(dump_channel(channel), encoding="utf-8")
    loaded = load_channel(path)
    assert loaded.kraus_count == 3
    assert channels_equal(channel, loaded, 0.0)


def test_load_channel_rejects_non_trace_preserving(tmp_path):
    """Test that a channel file whose operators are not complete is a parse error."""
    path = tmp_path / "channel.json"
    path.write_text(json.dumps({"kraus": [[[[1, 0], [0, 0]], [[0, 0], [0, 0]]]]}), encoding="utf-8")
    with pytest.raises(StateFileError):
        load_channel(path)


# --- fixtures and digests ---

@pytest.mark.parametrize("name", FIXTURES)
def test_fixtures_load(name):
    """Test that every shipped fixture is a valid two-qubit state."""
    state = load_fixture(name)
    assert state.dims.dims == (2, 2)
    assert state.labels == ("A", "B")
    assert fixture_path(name).name == f"{name}.json"


def test_unknown_fixture_is_refused():
    """Test that fixture names are checked."""
    with pytest.raises(InvalidParameterError):
        fixture_path("ghz")


def test_inputs_digest_tracks_state_and_parameters():
    """Test that the digest is stable and changes with the state or the parameters."""
    bell = load_fixture("bell")
    first = inputs_digest(bell, {"beta": 1.0})
    assert first == inputs_digest(bell, {"beta": 1.0})
    assert first != inputs_digest(bell, {"beta": 2.0})
    assert first != inputs_digest(load_fixture("product"), {"beta": 1.0})


# --- error envelopes ---

def test_envelope_for_qerase_error():
    """Test that a library error maps to its exit code and machine code."""
    exit_code, envelope = envelope_for_exception(InvalidParameterError("bad beta"), "run-1")
    assert exit_code == 4
    assert envelope["error"] == {"code": "invalid_parameters", "message": "bad beta"}
    assert envelope["run_id"] == "run-1"
    assert envelope["timestamp"].endswith("Z")


def test_envelope_for_unexpected_error():
    """Test that any other exception is an internal error with exit code 1."""
    exit_code, envelope = envelope_for_exception(RuntimeError("boom"))
    assert exit_code == 1
    assert envelope["error"]["code"] == "internal_error"
    assert envelope["run_id"].startswith("run_")


def test_envelope_details_and_run_id_normalization():
    """Test that details are attached only when present and run ids are trimmed."""
    envelope = build_error_envelope("r", "parse_error", "bad", [{"field": "matrix"}])
    assert envelope["error"]["details"] == [{"field": "matrix"}]
    assert "details" not in build_error_envelope("r", "parse_error", "bad")["error"]
    assert normalize_run_id("  abc  ") == "abc"
    assert normalize_run_id("   ").startswith("run_")
