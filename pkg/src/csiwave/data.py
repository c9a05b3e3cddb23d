"""Core data model for CSI amplitude recordings and the interchange formats.

A recording is a T x N matrix of per-stream amplitudes sampled at a fixed
rate, where a stream is one (tx antenna, rx antenna, subcarrier) series and
columns follow the canonical tx-major / rx / subcarrier order.

Two versioned on-disk formats are defined here:

CSV (text, ``.csv``)
    First line::

        # csiwave v1; rate=<Hz>; ntx=<int>; nrx=<int>; nsub=<int>; label=<id|none>

    followed by T data lines of exactly N comma-separated decimal amplitudes.

Binary (``.csiw``)
    Magic bytes ``CSIW``, version byte ``1``, then little-endian
    ``u32 T``, ``u32 n_tx``, ``u32 n_rx``, ``u32 n_subcarriers``,
    ``f64 sample_rate``, ``i32 label`` (-1 = none), then ``T*N`` f32
    amplitudes in row-major order.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .errors import FormatError, InvalidValue

#: The 16 activity classes, indexed by class_id 0..15.
ACTIVITY_NAMES = (
    "Horizontal Arm Wave",
    "High Arm Wave",
    "Two Hands Wave",
    "High Throw",
    "Draw X",
    "Draw Tick",
    "Toss Paper",
    "Forward Kick",
    "Side Kick",
    "Bend",
    "Hand Clap",
    "Walk",
    "Phone Call",
    "Drink Water",
    "Sit Down",
    "Squat",
)

_CSV_MAGIC = "# csiwave v1"
_BIN_MAGIC = b"CSIW"
_BIN_VERSION = 1
_BIN_HEADER = struct.Struct("<IIIIdi")  # T, n_tx, n_rx, n_subcarriers, rate, label


@dataclass(frozen=True)
class ActivityLabel:
    """One of the 16 activity classes; id and name are a fixed bijection."""

    class_id: int
    name: str

    def __post_init__(self):
        if not 0 <= self.class_id < len(ACTIVITY_NAMES):
            raise InvalidValue(f"class_id must be in [0, 15], got {self.class_id}")
        if self.name != ACTIVITY_NAMES[self.class_id]:
            raise InvalidValue(
                f"label name {self.name!r} does not match class_id "
                f"{self.class_id} ({ACTIVITY_NAMES[self.class_id]!r})"
            )

    @classmethod
    def from_id(cls, class_id: int) -> "ActivityLabel":
        if not 0 <= class_id < len(ACTIVITY_NAMES):
            raise InvalidValue(f"class_id must be in [0, 15], got {class_id}")
        return cls(class_id, ACTIVITY_NAMES[class_id])

    @classmethod
    def from_name(cls, name: str) -> "ActivityLabel":
        try:
            return cls(ACTIVITY_NAMES.index(name), name)
        except ValueError:
            raise InvalidValue(f"unknown activity name {name!r}") from None


@dataclass(frozen=True)
class StreamLayout:
    """Antenna/subcarrier geometry; the product equals the stream count N."""

    n_tx: int
    n_rx: int
    n_subcarriers: int

    def __post_init__(self):
        for fname in ("n_tx", "n_rx", "n_subcarriers"):
            v = getattr(self, fname)
            if not (isinstance(v, (int, np.integer)) and v >= 1):
                raise InvalidValue(f"{fname} must be a positive integer, got {v!r}")

    @property
    def total_streams(self) -> int:
        return self.n_tx * self.n_rx * self.n_subcarriers

    def column_index(self, tx: int, rx: int, subcarrier: int) -> int:
        """Column of stream (tx, rx, subcarrier): tx-major, then rx, then subcarrier."""
        if not (0 <= tx < self.n_tx and 0 <= rx < self.n_rx and 0 <= subcarrier < self.n_subcarriers):
            raise InvalidValue(
                f"stream index ({tx}, {rx}, {subcarrier}) outside layout "
                f"({self.n_tx}, {self.n_rx}, {self.n_subcarriers})"
            )
        return (tx * self.n_rx + rx) * self.n_subcarriers + subcarrier


@dataclass(frozen=True)
class CsiRecording:
    """One CSI amplitude recording: T time samples of N streams.

    ``activity_window_s`` is synthesis-only ground truth (start, end) in
    seconds used by segmentation oracles; it is not serialized by either
    interchange format.
    """

    sample_rate_hz: float
    streams: np.ndarray
    layout: StreamLayout
    label: Optional[ActivityLabel] = None
    subject_id: Optional[str] = None
    activity_window_s: Optional[tuple[float, float]] = None

    def __post_init__(self):
        arr = np.asarray(self.streams, dtype=np.float64)
        if arr.ndim != 2:
            raise InvalidValue(f"streams must be a 2-D matrix, got shape {arr.shape}")
        t, n = arr.shape
        if t < 2:
            raise InvalidValue(f"recording needs at least 2 time samples, got {t}")
        if n < 1:
            raise InvalidValue("recording needs at least 1 stream")
        if not np.all(np.isfinite(arr)):
            raise InvalidValue("amplitudes must be finite")
        if np.any(arr < 0):
            raise InvalidValue("amplitudes must be non-negative")
        if not (math.isfinite(self.sample_rate_hz) and self.sample_rate_hz > 0):
            raise InvalidValue(f"sample_rate_hz must be positive, got {self.sample_rate_hz}")
        if self.layout.total_streams != n:
            raise InvalidValue(
                f"layout {self.layout} implies {self.layout.total_streams} streams, "
                f"matrix has {n}"
            )
        arr.setflags(write=False)
        object.__setattr__(self, "streams", arr)

    @property
    def n_samples(self) -> int:
        return self.streams.shape[0]

    @property
    def n_streams(self) -> int:
        return self.streams.shape[1]

    @property
    def duration_s(self) -> float:
        return self.n_samples / self.sample_rate_hz


@dataclass
class Dataset:
    """An ordered collection of recordings sharing rate and stream count."""

    recordings: list[CsiRecording]
    class_count: int = field(default=0)

    def __post_init__(self):
        if self.class_count < 0:
            raise InvalidValue("class_count must be non-negative")
        if self.recordings:
            first = self.recordings[0]
            for rec in self.recordings:
                if rec.n_streams != first.n_streams:
                    raise InvalidValue("all recordings must share the stream count")
                if rec.sample_rate_hz != first.sample_rate_hz:
                    raise InvalidValue("all recordings must share the sample rate")
        for rec in self.recordings:
            if rec.label is not None and rec.label.class_id >= self.class_count:
                raise InvalidValue(
                    f"label {rec.label.class_id} outside class_count {self.class_count}"
                )

    def __len__(self) -> int:
        return len(self.recordings)

    def __iter__(self):
        return iter(self.recordings)


def complex_magnitude(re: float, im: float) -> float:
    """Amplitude of a complex frequency-response sample: sqrt(re^2 + im^2)."""
    if not (math.isfinite(re) and math.isfinite(im)):
        raise InvalidValue(f"complex_magnitude needs finite inputs, got ({re}, {im})")
    return math.hypot(re, im)


def stream_matrix(recording: CsiRecording) -> np.ndarray:
    """T x N amplitude view in canonical column order (tx-major, rx, subcarrier)."""
    return recording.streams


def _parse_header(line: str, path: str) -> tuple[float, StreamLayout, Optional[ActivityLabel]]:
    if not line.startswith(_CSV_MAGIC):
        raise FormatError(f"{path}:1: missing '# csiwave v1' header")
    fields: dict[str, str] = {}
    for part in line[len(_CSV_MAGIC):].split(";"):
        part = part.strip()
        if not part:
            continue
        if "=" not in part:
            raise FormatError(f"{path}:1: malformed header field {part!r}")
        key, value = part.split("=", 1)
        fields[key.strip()] = value.strip()
    missing = {"rate", "ntx", "nrx", "nsub", "label"} - fields.keys()
    if missing:
        raise FormatError(f"{path}:1: header missing fields {sorted(missing)}")
    try:
        rate = float(fields["rate"])
        ntx, nrx, nsub = (int(fields[k]) for k in ("ntx", "nrx", "nsub"))
    except ValueError as exc:
        raise FormatError(f"{path}:1: non-numeric header field ({exc})") from None
    label = None
    if fields["label"] != "none":
        try:
            label = ActivityLabel.from_id(int(fields["label"]))
        except (ValueError, InvalidValue):
            raise FormatError(f"{path}:1: bad label {fields['label']!r}") from None
    try:
        layout = StreamLayout(ntx, nrx, nsub)
    except InvalidValue as exc:
        raise FormatError(f"{path}:1: {exc}") from None
    return rate, layout, label


def load_csv(path) -> CsiRecording:
    """Parse a v1 CSV recording; FormatError pinpoints the offending line/column."""
    path = Path(path)
    with open(path, "r", encoding="utf-8") as fh:
        header_line = fh.readline().rstrip("\n")
        rate, layout, label = _parse_header(header_line, str(path))
        n = layout.total_streams
        rows = []
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            tokens = line.split(",")
            if len(tokens) != n:
                raise FormatError(
                    f"{path}:{lineno}: expected {n} fields, got {len(tokens)}"
                )
            row = np.empty(n, dtype=np.float64)
            for col, tok in enumerate(tokens):
                try:
                    row[col] = float(tok)
                except ValueError:
                    raise FormatError(
                        f"{path}:{lineno}: column {col + 1}: non-numeric token {tok!r}"
                    ) from None
            rows.append(row)
    if len(rows) < 2:
        raise FormatError(f"{path}: recording needs at least 2 data rows, got {len(rows)}")
    matrix = np.vstack(rows)
    if np.any(matrix < 0):
        raise InvalidValue(f"{path}: negative amplitude in data")
    return CsiRecording(sample_rate_hz=rate, streams=matrix, layout=layout, label=label)


def save_csv(recording: CsiRecording, path) -> None:
    """Write a recording in the v1 CSV format (amplitudes via shortest repr)."""
    label = "none" if recording.label is None else str(recording.label.class_id)
    rate = recording.sample_rate_hz
    rate_str = repr(int(rate)) if float(rate).is_integer() else repr(rate)
    header = (
        f"{_CSV_MAGIC}; rate={rate_str}; ntx={recording.layout.n_tx}; "
        f"nrx={recording.layout.n_rx}; nsub={recording.layout.n_subcarriers}; "
        f"label={label}"
    )
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(header + "\n")
        for row in recording.streams:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def save_binary(recording: CsiRecording, path) -> None:
    """Write the v1 binary format (amplitudes stored as f32)."""
    label = -1 if recording.label is None else recording.label.class_id
    header = _BIN_HEADER.pack(
        recording.n_samples,
        recording.layout.n_tx,
        recording.layout.n_rx,
        recording.layout.n_subcarriers,
        recording.sample_rate_hz,
        label,
    )
    payload = recording.streams.astype("<f4").tobytes(order="C")
    with open(path, "wb") as fh:
        fh.write(_BIN_MAGIC)
        fh.write(bytes([_BIN_VERSION]))
        fh.write(header)
        fh.write(payload)


def load_binary(path) -> CsiRecording:
    """Read the v1 binary format back into a recording."""
    path = Path(path)
    blob = path.read_bytes()
    if len(blob) < 5 or blob[:4] != _BIN_MAGIC:
        raise FormatError(f"{path}: bad magic bytes (expected {_BIN_MAGIC!r})")
    if blob[4] != _BIN_VERSION:
        raise FormatError(f"{path}: unsupported version {blob[4]} (expected {_BIN_VERSION})")
    header_end = 5 + _BIN_HEADER.size
    if len(blob) < header_end:
        raise FormatError(
            f"{path}: truncated header, expected {header_end} bytes, got {len(blob)}"
        )
    t, ntx, nrx, nsub, rate, label_id = _BIN_HEADER.unpack(blob[5:header_end])
    try:
        layout = StreamLayout(int(ntx), int(nrx), int(nsub))
    except InvalidValue as exc:
        raise FormatError(f"{path}: bad layout in header: {exc}") from None
    n = layout.total_streams
    expected = header_end + 4 * t * n
    if len(blob) != expected:
        raise FormatError(
            f"{path}: payload size mismatch, expected {expected} bytes "
            f"({t}x{n} f32 samples), got {len(blob)}"
        )
    matrix = np.frombuffer(blob[header_end:], dtype="<f4").reshape(t, n).astype(np.float64)
    label = None if label_id < 0 else ActivityLabel.from_id(int(label_id))
    try:
        return CsiRecording(sample_rate_hz=rate, streams=matrix, layout=layout, label=label)
    except InvalidValue as exc:
        raise FormatError(f"{path}: invalid recording content: {exc}") from None


def save_dataset(dataset: Dataset, directory) -> list[Path]:
    """Write every recording as ``recording_NNNN.csiw`` under ``directory``."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for i, rec in enumerate(dataset.recordings):
        p = directory / f"recording_{i:04d}.csiw"
        save_binary(rec, p)
        paths.append(p)
    return paths


def load_dataset(directory, class_count: Optional[int] = None) -> Dataset:
    """Load every ``.csiw`` file under ``directory`` in sorted name order."""
    directory = Path(directory)
    files = sorted(directory.glob("*.csiw"))
    if not files:
        raise InvalidValue(f"no .csiw recordings under {directory}")
    recs = [load_binary(p) for p in files]
    if class_count is None:
        ids = [r.label.class_id for r in recs if r.label is not None]
        class_count = (max(ids) + 1) if ids else 0
    return Dataset(recordings=recs, class_count=class_count)
