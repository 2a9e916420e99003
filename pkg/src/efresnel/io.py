"""CF64 field files and WF64 Wigner-table files.

Both formats are one ASCII header line followed by little-endian float64
values in row-major order.  Decimal fields are written with ``repr`` so a
write/read cycle is bit-exact.
"""

from __future__ import annotations

import os

import numpy as np

from .core import ComplexField, GridSpec, RealField
from .errors import FormatError
from .wigner import WignerTable

MAX_HEADER = 256
_LE = np.dtype("<f8")


def _header(data: bytes, magic: str) -> tuple[dict, int]:
    """Parse ``<magic> v1 key=value ...\\n``; return the fields and the payload offset."""
    if not data.startswith(magic.encode()):
        raise FormatError(f"bad magic: expected {magic!r}", 0)
    end = data.find(b"\n", 0, MAX_HEADER)
    if end < 0:
        raise FormatError(f"{magic} header has no newline within {MAX_HEADER} bytes",
                          min(len(data), MAX_HEADER))
    try:
        line = data[:end].decode("ascii")
    except UnicodeDecodeError as exc:
        raise FormatError("header is not ASCII", exc.start) from None
    tokens = line.split(" ")
    pos = len(tokens[0]) + 1
    if len(tokens) < 2 or tokens[0] != magic or tokens[1] != "v1":
        raise FormatError(f"expected '{magic} v1' at start of header", min(pos, end))
    fields = {}
    pos += len(tokens[1]) + 1
    for tok in tokens[2:]:
        key, sep, value = tok.partition("=")
        if not sep or not key or key in fields:
            raise FormatError(f"malformed header field {tok!r}", pos)
        fields[key] = (value, pos)
        pos += len(tok) + 1
    return fields, end + 1


def _take(fields: dict, key: str, kind, offset: int):
    if key not in fields:
        raise FormatError(f"header is missing {key}=", offset)
    raw, pos = fields.pop(key)
    try:
        return kind(raw)
    except ValueError:
        raise FormatError(f"bad value for {key}: {raw!r}", pos) from None


def _grid(n, L, pos):
    try:
        return GridSpec(n, L)
    except ValueError as exc:
        raise FormatError(str(exc), pos) from None


def _payload(data: bytes, start: int, count: int) -> np.ndarray:
    expected = count * _LE.itemsize
    got = len(data) - start
    if got < expected:
        raise FormatError(f"truncated payload: expected {expected} bytes, found {got}", len(data))
    if got > expected:
        raise FormatError(f"payload has {got - expected} trailing bytes", start + expected)
    return np.frombuffer(data, dtype=_LE, count=count, offset=start).astype(float)


def _reject_extra(fields: dict):
    if fields:
        key, (_, pos) = next(iter(fields.items()))
        raise FormatError(f"unexpected header field {key!r}", pos)


def dumps_field(f: ComplexField | RealField) -> bytes:
    spec = f.spec
    if isinstance(f, ComplexField):
        kind = "complex"
        flat = np.empty(2 * spec.n * spec.n)
        flat[0::2] = f.samples.real.ravel()
        flat[1::2] = f.samples.imag.ravel()
    elif isinstance(f, RealField):
        kind = "real"
        flat = f.values.ravel()
    else:
        raise TypeError(f"cannot write {type(f).__name__}")
    head = f"CF64 v1 n={spec.n} L={spec.L!r} kind={kind}\n".encode("ascii")
    return head + flat.astype(_LE).tobytes()


def loads_field(data: bytes) -> ComplexField | RealField:
    fields, start = _header(data, "CF64")
    n = _take(fields, "n", int, start - 1)
    L_pos = fields.get("L", (None, start - 1))[1]
    L = _take(fields, "L", float, start - 1)
    kind = _take(fields, "kind", str, start - 1)
    _reject_extra(fields)
    spec = _grid(n, L, L_pos)
    if kind not in ("complex", "real"):
        raise FormatError(f"unknown kind {kind!r}", start - 1)
    flat = _payload(data, start, (2 if kind == "complex" else 1) * n * n)
    try:
        if kind == "complex":
            return ComplexField(spec, (flat[0::2] + 1j * flat[1::2]).reshape(n, n))
        return RealField(spec, flat.reshape(n, n))
    except ValueError as exc:
        raise FormatError(str(exc), start) from None


def dumps_table(w: WignerTable) -> bytes:
    s, g = w.sigma_spec, w.gamma_spec
    head = f"WF64 v1 ns={s.n} Ls={s.L!r} ng={g.n} Lg={g.L!r}\n".encode("ascii")
    return head + w.values.astype(_LE).tobytes()


def loads_table(data: bytes) -> WignerTable:
    fields, start = _header(data, "WF64")
    pos = {k: v[1] for k, v in fields.items()}
    ns = _take(fields, "ns", int, start - 1)
    Ls = _take(fields, "Ls", float, start - 1)
    ng = _take(fields, "ng", int, start - 1)
    Lg = _take(fields, "Lg", float, start - 1)
    _reject_extra(fields)
    sigma = _grid(ns, Ls, pos["Ls"])
    gamma = _grid(ng, Lg, pos["Lg"])
    flat = _payload(data, start, ns * ns * ng * ng)
    try:
        return WignerTable(sigma, gamma, flat.reshape(ns, ns, ng, ng))
    except ValueError as exc:
        raise FormatError(str(exc), start) from None


def _write(path, data: bytes):
    tmp = f"{path}.tmp"
    with open(tmp, "wb") as fh:
        fh.write(data)
    os.replace(tmp, path)


def _read(path) -> bytes:
    with open(path, "rb") as fh:
        return fh.read()


def write_field(path, f: ComplexField | RealField):
    _write(path, dumps_field(f))


def read_field(path) -> ComplexField | RealField:
    return loads_field(_read(path))


def write_table(path, w: WignerTable):
    _write(path, dumps_table(w))


def read_table(path) -> WignerTable:
    return loads_table(_read(path))
