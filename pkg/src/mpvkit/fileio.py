"""Text exchange format for MPV and MPDO tensors.

A tensor file is line oriented UTF-8 text:

    tensor v1
    kind mpv            (or: kind mpdo)
    d 2
    D 2
    meta name ghz       (zero or more, optional free-form metadata)
    entries
    1 0
    0 0
    ...

Each entry line holds one complex value as a decimal (re, im) pair printed
with 17 significant digits, so serialize-then-parse reproduces the float64
entries bit exactly.  Entries are row-major over the index order
[physical..., left virtual, right virtual], with the ket physical index
before the bra index for mpdo tensors: d*D*D values for an mpv tensor and
d*d*D*D for an mpdo tensor.  Blank lines and lines starting with ``#`` are
ignored.  Parse errors report line and column.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .tensors import MpdoTensor, MpvTensor

__all__ = [
    "TensorFile",
    "TensorFormatError",
    "parse_tensor",
    "parse_tensor_text",
    "serialize_tensor",
    "write_tensor",
]

_MAGIC = "tensor v1"


class TensorFormatError(ValueError):
    """Malformed tensor file; carries the offending line and column."""

    def __init__(self, message: str, line: int, column: int = 1):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


@dataclass
class TensorFile:
    kind: str  # "mpv" | "mpdo"
    d: int
    D: int
    entries: np.ndarray  # flat complex array in documented order
    metadata: dict[str, str] = field(default_factory=dict)

    def expected_count(self) -> int:
        if self.kind == "mpv":
            return self.d * self.D * self.D
        return self.d * self.d * self.D * self.D

    def to_tensor(self) -> MpvTensor | MpdoTensor:
        if self.kind == "mpv":
            return MpvTensor(self.entries.reshape(self.d, self.D, self.D))
        return MpdoTensor(self.entries.reshape(self.d, self.d, self.D, self.D))

    @staticmethod
    def from_tensor(t: MpvTensor | MpdoTensor, metadata: dict[str, str] | None = None) -> "TensorFile":
        kind = "mpdo" if isinstance(t, MpdoTensor) else "mpv"
        return TensorFile(kind, t.d, t.D, t.entries.reshape(-1).copy(), dict(metadata or {}))


def _headline(lines: list[str], idx: int) -> tuple[str, str]:
    raw = lines[idx]
    parts = raw.strip().split(None, 1)
    return parts[0] if parts else "", parts[1] if len(parts) > 1 else ""


def parse_tensor_text(text: str) -> TensorFile:
    lines = text.splitlines()
    pos = 0

    def skip_blank(i: int) -> int:
        while i < len(lines) and (not lines[i].strip() or lines[i].lstrip().startswith("#")):
            i += 1
        return i

    pos = skip_blank(pos)
    if pos >= len(lines) or lines[pos].strip() != _MAGIC:
        raise TensorFormatError(f"expected header '{_MAGIC}'", pos + 1)
    pos += 1

    kind: str | None = None
    d: int | None = None
    dim: int | None = None
    meta: dict[str, str] = {}
    while True:
        pos = skip_blank(pos)
        if pos >= len(lines):
            raise TensorFormatError("missing 'entries' section", len(lines) + 1)
        key, rest = _headline(lines, pos)
        if key == "entries":
            pos += 1
            break
        if key == "kind":
            if rest not in ("mpv", "mpdo"):
                raise TensorFormatError(f"unknown kind {rest!r}", pos + 1, len("kind ") + 1)
            kind = rest
        elif key in ("d", "D"):
            try:
                value = int(rest)
            except ValueError:
                raise TensorFormatError(f"{key} must be an integer, got {rest!r}", pos + 1, 3)
            if value <= 0:
                raise TensorFormatError(f"{key} must be positive, got {value}", pos + 1, 3)
            if key == "d":
                d = value
            else:
                dim = value
        elif key == "meta":
            mk, _, mv = rest.partition(" ")
            meta[mk] = mv
        else:
            raise TensorFormatError(f"unknown header field {key!r}", pos + 1)
        pos += 1

    if kind is None:
        raise TensorFormatError("missing 'kind' header", pos + 1)
    if d is None or dim is None:
        raise TensorFormatError("missing 'd' or 'D' header", pos + 1)

    out = TensorFile(kind, d, dim, np.zeros(0, dtype=np.complex128), meta)
    expected = out.expected_count()
    values = np.zeros(expected, dtype=np.complex128)
    count = 0
    for i in range(pos, len(lines)):
        stripped = lines[i].strip()
        if not stripped or stripped.startswith("#"):
            continue
        parts = stripped.split()
        if len(parts) != 2:
            raise TensorFormatError(
                f"expected 're im' pair, got {len(parts)} token(s)", i + 1
            )
        if count >= expected:
            raise TensorFormatError(
                f"too many entries: expected {expected}", i + 1
            )
        col = lines[i].index(parts[0]) + 1
        try:
            re_part = float(parts[0])
        except ValueError:
            raise TensorFormatError(f"bad number {parts[0]!r}", i + 1, col)
        col = lines[i].index(parts[1], lines[i].index(parts[0]) + len(parts[0])) + 1
        try:
            im_part = float(parts[1])
        except ValueError:
            raise TensorFormatError(f"bad number {parts[1]!r}", i + 1, col)
        if not (math.isfinite(re_part) and math.isfinite(im_part)):
            raise TensorFormatError("non-finite entry", i + 1, 1)
        values[count] = complex(re_part, im_part)
        count += 1
    if count != expected:
        raise TensorFormatError(
            f"entry count mismatch: expected {expected}, got {count}", len(lines) + 1
        )
    out.entries = values
    return out


def parse_tensor(path: str) -> MpvTensor | MpdoTensor:
    """Parse a tensor file; returns the tensor (metadata is discarded)."""
    with open(path, encoding="utf-8") as fh:
        return parse_tensor_text(fh.read()).to_tensor()


def serialize_tensor(t: MpvTensor | MpdoTensor, metadata: dict[str, str] | None = None) -> str:
    tf = TensorFile.from_tensor(t, metadata)
    lines = [_MAGIC, f"kind {tf.kind}", f"d {tf.d}", f"D {tf.D}"]
    for k, v in tf.metadata.items():
        lines.append(f"meta {k} {v}")
    lines.append("entries")
    for z in tf.entries:
        lines.append(f"{z.real:.17g} {z.imag:.17g}")
    return "\n".join(lines) + "\n"


def write_tensor(path: str, t: MpvTensor | MpdoTensor, metadata: dict[str, str] | None = None) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(serialize_tensor(t, metadata))
