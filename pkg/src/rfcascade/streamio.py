"""Stream file formats.

Binary layout (all little-endian)::

    offset  size  field
    0       8     magic  b"RFCSTRM\\0"
    8       4     uint32 format version (1)
    12      4     uint32 flags (bit 0: poisson reference stream)
    16      24    float64 gamma, omega, delta
    40      8     uint64 seed
    48      8     uint64 number of emission times N
    56      8*N   float64 emission times

CSV: ``#``-prefixed ``key=value`` metadata lines, a ``time`` header row,
then one emission time per line in round-trip ``repr`` precision.
"""

from __future__ import annotations

import io
import struct
from pathlib import Path

import numpy as np

from . import __version__
from .montecarlo import GENERATOR_NAME, PhotonStream
from .params import AtomDriveParams, ParameterError

MAGIC = b"RFCSTRM\x00"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<8sIIdddQQ")
_FLAG_POISSON = 1


def stream_to_bytes(stream: PhotonStream) -> bytes:
    flags = _FLAG_POISSON if stream.process == "poisson" else 0
    p = stream.params
    header = _HEADER.pack(MAGIC, FORMAT_VERSION, flags, p.gamma, p.omega, p.delta, stream.seed, stream.n_photons)
    return header + stream.times.astype("<f8").tobytes()


def stream_from_bytes(data: bytes) -> PhotonStream:
    if len(data) < _HEADER.size:
        raise ParameterError("truncated stream header")
    magic, version, flags, gamma, omega, delta, seed, count = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise ParameterError("not a photon stream file")
    if version != FORMAT_VERSION:
        raise ParameterError(f"unsupported stream format version {version}")
    body = data[_HEADER.size:]
    if len(body) != 8 * count:
        raise ParameterError(f"expected {count} emission times, found {len(body) / 8:g}")
    times = np.frombuffer(body, dtype="<f8").astype(np.float64)
    process = "poisson" if flags & _FLAG_POISSON else "cascade"
    return PhotonStream(AtomDriveParams(gamma, omega, delta), seed, times, process)


def stream_to_csv(stream: PhotonStream) -> str:
    p = stream.params
    lines = [
        f"# tool=rfcascade {__version__}",
        f"# generator={GENERATOR_NAME}",
        f"# process={stream.process}",
        f"# gamma={p.gamma!r}",
        f"# omega={p.omega!r}",
        f"# delta={p.delta!r}",
        f"# seed={stream.seed}",
        f"# n_photons={stream.n_photons}",
        "time",
    ]
    lines.extend(repr(t) for t in stream.times.tolist())
    return "\n".join(lines) + "\n"


def stream_from_csv(text: str) -> PhotonStream:
    meta = {}
    times = []
    header_seen = False
    for line in io.StringIO(text):
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            key, _, value = line[1:].strip().partition("=")
            meta[key.strip()] = value.strip()
        elif not header_seen:
            if line != "time":
                raise ParameterError(f"unexpected CSV header {line!r}")
            header_seen = True
        else:
            times.append(float(line))
    try:
        params = AtomDriveParams(float(meta["gamma"]), float(meta["omega"]), float(meta["delta"]))
        seed = int(meta["seed"])
    except KeyError as exc:
        raise ParameterError(f"missing metadata field {exc.args[0]!r}") from None
    return PhotonStream(params, seed, np.array(times), meta.get("process", "cascade"))


def write_stream(stream: PhotonStream, path, fmt: str = "binary") -> Path:
    path = Path(path)
    if fmt == "binary":
        path.write_bytes(stream_to_bytes(stream))
    elif fmt == "csv":
        with open(path, "w", encoding="ascii", newline="\n") as fh:
            fh.write(stream_to_csv(stream))
    else:
        raise ParameterError(f"unknown stream format {fmt!r}")
    return path


def read_stream(path) -> PhotonStream:
    """Read either format, recognising binary files by their magic."""
    data = Path(path).read_bytes()
    if data.startswith(MAGIC):
        return stream_from_bytes(data)
    return stream_from_csv(data.decode("ascii"))
