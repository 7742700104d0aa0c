"""Binary field snapshots.

Layout (all little-endian)::

    b"MKGH"                       magic
    uint32 version, d, n
    float64 L, gamma, t           gamma is NaN when no kernel is attached
    uint8  representation         0 = physical, 1 = frequency
    complex values                n^d interleaved (re, im) float64 pairs

Values are written in row-major lattice order: physical samples by grid
index ``j = 0..n-1`` per axis, frequency coefficients by lattice index
``k = -n/2..n/2-1`` per axis (i.e. FFT-shifted).
"""

from __future__ import annotations

import math
import os
import struct
import tempfile
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameter
from .grid import Field, GridSpec

MAGIC = b"MKGH"
VERSION = 1
_HEADER = struct.Struct("<4sIII3dB")


@dataclass(frozen=True, eq=False)
class Snapshot:
    field: Field
    t: float = 0.0
    gamma: float | None = None


def atomic_write_bytes(path, data: bytes):
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def encode(field: Field, t=0.0, gamma=None) -> bytes:
    spec = field.spec
    rep = 0 if field.representation == "physical" else 1
    g = math.nan if gamma is None else float(gamma)
    header = _HEADER.pack(MAGIC, VERSION, spec.d, spec.n, spec.L, g, float(t), rep)
    vals = field.values
    if rep == 1:
        vals = np.fft.fftshift(vals)
    body = np.ascontiguousarray(vals, dtype="<c16").tobytes()
    return header + body


def decode(data: bytes) -> Snapshot:
    if len(data) < _HEADER.size:
        raise InvalidParameter("snapshot truncated before end of header")
    magic, version, d, n, L, gamma, t, rep = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise InvalidParameter(f"bad snapshot magic {magic!r}")
    if version != VERSION:
        raise InvalidParameter(f"unsupported snapshot version {version}")
    if rep not in (0, 1):
        raise InvalidParameter(f"bad representation flag {rep}")
    spec = GridSpec(d, n, L)
    expected = _HEADER.size + 16 * n ** d
    if len(data) != expected:
        raise InvalidParameter(f"snapshot has {len(data)} bytes, expected {expected}")
    vals = np.frombuffer(data, dtype="<c16", offset=_HEADER.size).reshape(spec.shape)
    if rep == 1:
        vals = np.fft.ifftshift(vals)
        representation = "frequency"
    else:
        representation = "physical"
    real = bool(rep == 0 and not np.any(vals.imag))
    field = Field(spec, vals, representation, real)
    return Snapshot(field, t, None if math.isnan(gamma) else gamma)


def write_snapshot(path, field: Field, t=0.0, gamma=None):
    atomic_write_bytes(path, encode(field, t, gamma))


def read_snapshot(path) -> Snapshot:
    with open(path, "rb") as fh:
        return decode(fh.read())
