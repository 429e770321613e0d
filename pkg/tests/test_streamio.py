import struct

import numpy as np
import pytest

from conftest import ROOT2
from rfcascade import AtomDriveParams, ParameterError
from rfcascade import montecarlo as mc
from rfcascade import streamio as sio


@pytest.fixture
def stream():
    return mc.generate_stream(AtomDriveParams(1.0, ROOT2, -0.25), 257, 2**63 + 5)


def test_binary_layout(stream):
    data = sio.stream_to_bytes(stream)
    assert len(data) == 56 + 8 * 257
    magic, version, flags, g, w, d, seed, n = struct.unpack_from("<8sIIdddQQ", data)
    assert magic == b"RFCSTRM\x00" and version == 1 and flags == 0
    assert (g, w, d, seed, n) == (1.0, ROOT2, -0.25, 2**63 + 5, 257)
    assert np.array_equal(np.frombuffer(data, "<f8", offset=56), stream.times)


@pytest.mark.parametrize("fmt", ["binary", "csv"])
def test_round_trip(tmp_path, stream, fmt):
    path = sio.write_stream(stream, tmp_path / f"s.{fmt}", fmt)
    back = sio.read_stream(path)
    assert back.params == stream.params and back.seed == stream.seed
    assert back.times.tobytes() == stream.times.tobytes()
    assert back.process == "cascade"


@pytest.mark.parametrize("fmt", ["binary", "csv"])
def test_poisson_flag(tmp_path, fmt):
    ref = mc.poisson_reference_stream(AtomDriveParams(), 50, 1)
    back = sio.read_stream(sio.write_stream(ref, tmp_path / "r", fmt))
    assert back.process == "poisson"


def test_csv_header(stream):
    text = sio.stream_to_csv(stream)
    lines = text.splitlines()
    meta = dict(line[2:].split("=", 1) for line in lines if line.startswith("#"))
    assert meta["seed"] == str(2**63 + 5)
    assert meta["generator"] == mc.GENERATOR_NAME
    assert float(meta["omega"]) == ROOT2
    assert lines[lines.index("time") + 1] == "0.0"
    assert len(lines) == lines.index("time") + 1 + 257


def test_corrupt_inputs(stream):
    data = sio.stream_to_bytes(stream)
    with pytest.raises(ParameterError):
        sio.stream_from_bytes(data[:20])
    with pytest.raises(ParameterError):
        sio.stream_from_bytes(b"XXXXXXXX" + data[8:])
    with pytest.raises(ParameterError):
        sio.stream_from_bytes(data[:-8])
    bumped = bytearray(data)
    bumped[8] = 9
    with pytest.raises(ParameterError):
        sio.stream_from_bytes(bytes(bumped))
    with pytest.raises(ParameterError):
        sio.stream_from_csv("# gamma=1\ntime\n0.0\n")
    with pytest.raises(ParameterError):
        sio.write_stream(stream, "unused", "hdf5")
