"""Contiguous partitions of ``[0, n)`` expressed as sorted break indices."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np


@dataclass(frozen=True)
class Segmentation:
    """A contiguous partition of ``n`` frames.

    A break ``b`` means frames ``b - 1`` and ``b`` belong to different
    segments, so segments are the half-open intervals between consecutive
    entries of ``[0, *breaks, n]``.
    """

    n: int
    breaks: tuple[int, ...] = ()

    def __post_init__(self):
        breaks = tuple(int(b) for b in self.breaks)
        object.__setattr__(self, "breaks", breaks)
        if self.n < 1:
            raise ValueError(f"segmentation needs n >= 1, got {self.n}")
        prev = 0
        for b in breaks:
            if b <= prev or b >= self.n:
                raise ValueError(
                    f"breaks must be strictly increasing and inside (0, {self.n}); got {list(breaks)}"
                )
            prev = b

    @classmethod
    def from_labels(cls, labels: Sequence) -> "Segmentation":
        labels = np.asarray(labels)
        if labels.ndim != 1 or labels.size == 0:
            raise ValueError("labels must be a non-empty 1-d sequence")
        idx = np.flatnonzero(labels[1:] != labels[:-1]) + 1
        return cls(int(labels.size), tuple(idx.tolist()))

    @property
    def n_segments(self) -> int:
        return len(self.breaks) + 1

    @property
    def bounds(self) -> list[int]:
        return [0, *self.breaks, self.n]

    def segments(self) -> list[tuple[int, int]]:
        b = self.bounds
        return list(zip(b[:-1], b[1:]))

    def lengths(self) -> np.ndarray:
        return np.diff(self.bounds)

    def labels(self) -> np.ndarray:
        """Per-frame index of the containing segment (non-decreasing)."""
        out = np.zeros(self.n, dtype=np.int64)
        out[list(self.breaks)] = 1
        return np.cumsum(out)

    def to_dict(self, total_bits: float | None = None) -> dict:
        doc = {"n": self.n, "breaks": list(self.breaks)}
        if total_bits is not None:
            doc["total_bits"] = float(total_bits)
        doc["segments"] = [{"start": a, "end": b} for a, b in self.segments()]
        return doc


def frame_labels(seg: Segmentation) -> np.ndarray:
    return seg.labels()


def as_segmentation(obj, n: int | None = None) -> Segmentation:
    """Coerce a Segmentation, a break list (with ``n``) or an annotation."""
    if isinstance(obj, Segmentation):
        seg = obj
    elif hasattr(obj, "breaks") and hasattr(obj, "n"):
        seg = Segmentation(obj.n, tuple(obj.breaks))
    else:
        if n is None:
            raise ValueError("n is required when passing a raw break list")
        seg = Segmentation(n, tuple(_as_int_list(obj)))
    if n is not None and seg.n != n:
        raise ValueError(f"segmentation covers {seg.n} frames, expected {n}")
    return seg


def _as_int_list(values: Iterable) -> list[int]:
    return [int(v) for v in values]
