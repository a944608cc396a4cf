"""Feature sequences, reference annotations and their on-disk formats.

Three formats are supported:

* CSV: one keyframe per row, optional header ``# f0,f1,...`` or
  ``# t,f0,f1,...`` (the latter marks a leading timestamp column).
* Binary: ``b"MDLS"``, u16 version (1), u64 n, u32 d, u8 precision tag in
  {16, 32, 64}, then ``n * d`` little-endian floats of that width, row-major.
* Annotations: first line ``n=<N>``, then one ``annotator_id: b1 b2 ...``
  line per annotator.

Keyframes are assumed to come from an I-frame dump such as
``ffmpeg -i video -vf "select='eq(pict_type,I)',showinfo" -vsync vfr out/``;
extracting them is not handled here.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .segmentation import Segmentation

MAGIC = b"MDLS"
BINARY_VERSION = 1
_HEADER = struct.Struct("<4sHQIB")
_DTYPES = {16: "<f2", 32: "<f4", 64: "<f8"}


class FormatError(ValueError):
    """Raised when an input file does not parse under its declared format."""


@dataclass(frozen=True, eq=False)
class FeatureSequence:
    """Time-ordered ``n x d`` matrix of keyframe feature vectors."""

    values: np.ndarray
    timestamps: np.ndarray | None = None

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64)
        if values.ndim == 1:
            values = values[:, None]
        if values.ndim != 2:
            raise ValueError(f"feature matrix must be 2-d, got shape {values.shape}")
        n, d = values.shape
        if n < 1 or d < 1:
            raise ValueError(f"feature matrix must have n >= 1 and d >= 1, got {values.shape}")
        bad = np.argwhere(~np.isfinite(values))
        if bad.size:
            r, c = bad[0]
            raise ValueError(f"non-finite value at row {r}, column {c}")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        if self.timestamps is not None:
            ts = np.array(self.timestamps, dtype=np.float64).ravel()
            if ts.shape != (n,):
                raise ValueError(f"expected {n} timestamps, got {ts.size}")
            if not np.all(np.isfinite(ts)):
                raise ValueError("timestamps must be finite")
            if np.any(np.diff(ts) < 0):
                i = int(np.flatnonzero(np.diff(ts) < 0)[0]) + 1
                raise ValueError(f"timestamps decrease at row {i}")
            ts.setflags(write=False)
            object.__setattr__(self, "timestamps", ts)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def d(self) -> int:
        return self.values.shape[1]

    def __len__(self):
        return self.n


@dataclass(frozen=True)
class ReferenceAnnotation:
    n: int
    breaks: tuple[int, ...]
    annotator_id: str = "ref"

    def __post_init__(self):
        object.__setattr__(self, "breaks", tuple(int(b) for b in self.breaks))
        # reuse the Segmentation checks
        Segmentation(self.n, self.breaks)

    def to_segmentation(self) -> Segmentation:
        return Segmentation(self.n, self.breaks)


def infer_precision_bits(seq) -> int:
    """Smallest float width in {16, 32, 64} that stores every value exactly."""
    values = seq.values if isinstance(seq, FeatureSequence) else np.asarray(seq, dtype=np.float64)
    with np.errstate(over="ignore"):
        for bits, dtype in ((16, np.float16), (32, np.float32)):
            if np.array_equal(values.astype(dtype).astype(np.float64), values):
                return bits
    return 64


# -- CSV -------------------------------------------------------------------


def _parse_header(line: str) -> tuple[bool, int]:
    names = [c.strip() for c in line.lstrip("#").split(",")]
    if not names or any(not c for c in names):
        raise FormatError(f"malformed header line: {line!r}")
    has_t = names[0] == "t"
    feats = names[1:] if has_t else names
    if not feats or any(not (c.startswith("f") and c[1:].isdigit()) for c in feats):
        raise FormatError(f"malformed header line: {line!r}")
    return has_t, len(feats)


def read_csv(path) -> FeatureSequence:
    rows = []
    has_t, width, declared_d = False, None, None
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                if rows or declared_d is not None:
                    raise FormatError(f"unexpected header at line {lineno}")
                has_t, declared_d = _parse_header(line)
                width = declared_d + has_t
                continue
            cells = line.split(",")
            if width is None:
                width = len(cells)
            if len(cells) != width:
                raise FormatError(
                    f"inconsistent row width at row {len(rows)} (line {lineno}): "
                    f"expected {width} columns, got {len(cells)}"
                )
            row = []
            for col, cell in enumerate(cells):
                try:
                    x = float(cell)
                except ValueError:
                    raise FormatError(
                        f"unparseable value {cell.strip()!r} at row {len(rows)}, column {col}"
                    ) from None
                if not np.isfinite(x):
                    raise FormatError(f"non-finite value at row {len(rows)}, column {col}")
                row.append(x)
            rows.append(row)
    if not rows:
        raise FormatError(f"{path}: no feature rows (n = 0)")
    arr = np.array(rows, dtype=np.float64)
    if has_t:
        if arr.shape[1] < 2:
            raise FormatError("timestamp column present but no feature columns")
        return FeatureSequence(arr[:, 1:], arr[:, 0])
    return FeatureSequence(arr)


def write_csv(seq: FeatureSequence, path) -> None:
    d = seq.d
    names = [f"f{i}" for i in range(d)]
    data = seq.values
    if seq.timestamps is not None:
        names = ["t", *names]
        data = np.column_stack([seq.timestamps, data])
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("# " + ",".join(names) + "\n")
        for row in data:
            fh.write(",".join(repr(float(x)) for x in row) + "\n")


# -- binary ----------------------------------------------------------------


def read_binary(path) -> FeatureSequence:
    blob = Path(path).read_bytes()
    if len(blob) < _HEADER.size:
        raise FormatError(f"{path}: truncated header ({len(blob)} bytes)")
    magic, version, n, d, tag = _HEADER.unpack_from(blob)
    if magic != MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r}")
    if version != BINARY_VERSION:
        raise FormatError(f"{path}: unsupported format version {version}")
    if tag not in _DTYPES:
        raise FormatError(f"{path}: bad precision tag {tag}")
    if n == 0 or d == 0:
        raise FormatError(f"{path}: empty matrix (n={n}, d={d})")
    dtype = np.dtype(_DTYPES[tag])
    expected = n * d * dtype.itemsize
    payload = blob[_HEADER.size:]
    if len(payload) != expected:
        raise FormatError(f"{path}: expected {expected} payload bytes, found {len(payload)}")
    values = np.frombuffer(payload, dtype=dtype).reshape(n, d).astype(np.float64)
    bad = np.argwhere(~np.isfinite(values))
    if bad.size:
        r, c = bad[0]
        raise FormatError(f"{path}: non-finite value at row {r}, column {c}")
    return FeatureSequence(values)


def write_binary(seq: FeatureSequence, path, precision_bits: int | None = None) -> None:
    bits = infer_precision_bits(seq) if precision_bits is None else int(precision_bits)
    if bits not in _DTYPES:
        raise ValueError(f"precision must be one of 16, 32, 64; got {bits}")
    payload = seq.values.astype(_DTYPES[bits])
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, BINARY_VERSION, seq.n, seq.d, bits))
        fh.write(payload.tobytes(order="C"))


def _guess_format(path) -> str:
    with open(path, "rb") as fh:
        return "binary" if fh.read(4) == MAGIC else "csv"


def load_features(path, format: str | None = None) -> FeatureSequence:
    """Load a feature file; ``format`` is ``"csv"``, ``"binary"`` or None to sniff."""
    fmt = format or _guess_format(path)
    if fmt == "csv":
        return read_csv(path)
    if fmt == "binary":
        return read_binary(path)
    raise ValueError(f"unknown feature format {fmt!r}")


def save_features(seq: FeatureSequence, path, format: str = "binary", precision_bits=None) -> None:
    if format == "csv":
        write_csv(seq, path)
    elif format == "binary":
        write_binary(seq, path, precision_bits)
    else:
        raise ValueError(f"unknown feature format {format!r}")


# -- annotations -----------------------------------------------------------


def read_annotations(path) -> list[ReferenceAnnotation]:
    with open(path, encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines or not lines[0].startswith("n="):
        raise FormatError(f"{path}: first line must be 'n=<N>'")
    try:
        n = int(lines[0][2:])
    except ValueError:
        raise FormatError(f"{path}: bad frame count {lines[0]!r}") from None
    refs = []
    for lineno, line in enumerate(lines[1:], start=2):
        ann_id, sep, rest = line.partition(":")
        if not sep or not ann_id.strip():
            raise FormatError(f"{path}: line {lineno} is not 'annotator_id: b1 b2 ...'")
        try:
            breaks = [int(tok) for tok in rest.split()]
            refs.append(ReferenceAnnotation(n, tuple(breaks), ann_id.strip()))
        except ValueError as exc:
            raise FormatError(f"{path}: line {lineno}: {exc}") from None
    if not refs:
        raise FormatError(f"{path}: no annotator lines")
    return refs


def write_annotations(refs, path) -> None:
    refs = list(refs)
    if not refs:
        raise ValueError("no annotations to write")
    n = refs[0].n
    if any(r.n != n for r in refs):
        raise ValueError("annotations disagree on n")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"n={n}\n")
        for r in refs:
            fh.write(" ".join([f"{r.annotator_id}:", *map(str, r.breaks)]) + "\n")


# -- synthetic data ----------------------------------------------------------


def _draw_means(rng, k, d, separation):
    scale = separation * max(k, 2)
    means = []
    for _ in range(k):
        for _attempt in range(100):
            cand = rng.normal(scale=scale, size=d)
            if all(np.linalg.norm(cand - m) >= separation for m in means):
                break
        else:
            u = rng.normal(size=d)
            u /= np.linalg.norm(u) or 1.0
            radius = max(np.linalg.norm(m) for m in means) + separation
            cand = u * radius
        means.append(cand)
    return np.array(means)


def synth_sequence(segment_lengths, d: int, separation: float, noise_sigma: float, seed: int,
                   annotator_id: str = "truth", dtype=np.float32):
    """Piecewise-Gaussian sequence with known breaks.

    Every segment gets its own mean (pairwise at least ``separation`` apart)
    and isotropic noise of standard deviation ``noise_sigma``. Values are
    rounded to ``dtype`` (float32 by default, like stored image embeddings),
    which is what precision inference will then report.
    """
    lengths = [int(x) for x in segment_lengths]
    if not lengths:
        raise ValueError("segment_lengths must not be empty")
    if any(x < 1 for x in lengths):
        raise ValueError("every segment length must be >= 1")
    if d < 1 or separation <= 0 or noise_sigma < 0:
        raise ValueError("need d >= 1, separation > 0 and noise_sigma >= 0")
    rng = np.random.default_rng(seed)
    means = _draw_means(rng, len(lengths), d, separation)
    blocks = [mu + noise_sigma * rng.standard_normal((ln, d)) for mu, ln in zip(means, lengths)]
    breaks = tuple(np.cumsum(lengths)[:-1].tolist())
    n = sum(lengths)
    values = np.vstack(blocks).astype(dtype)
    return FeatureSequence(values), ReferenceAnnotation(n, breaks, annotator_id)
