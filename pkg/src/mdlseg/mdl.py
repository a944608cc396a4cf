"""Minimum-description-length scene segmentation.

Each segment is coded with a diagonal Gaussian fitted to its own frames.
The cost of a segment, in bits, is the parameter cost ``2 * d * m`` (mean
and diagonal covariance at ``m`` bits per number) plus the code length
``-log2 p(v)`` of each of its vectors. The segmentation minimising the total
is found exactly by dynamic programming over segment end points.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterator

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin
from sklearn.utils.validation import check_is_fitted

from .features import FeatureSequence, infer_precision_bits
from .segmentation import Segmentation
from .validation import check_features

LOG2PI = math.log(2.0 * math.pi)
LN2 = math.log(2.0)
BRUTE_FORCE_MAX_N = 20
DEFAULT_MAX_SCENE_LEN = 300


@dataclass(frozen=True)
class MdlParams:
    """Coding parameters.

    precision_bits : int or None
        Bits per stored number; None infers it from the data.
    max_scene_len : int or None
        Longest admissible segment in keyframes; None means uncapped.
    var_floor : float
        Lower clamp on each per-dimension variance.
    """

    precision_bits: int | None = None
    max_scene_len: int | None = DEFAULT_MAX_SCENE_LEN
    var_floor: float = 1e-4

    def __post_init__(self):
        if self.precision_bits is not None and self.precision_bits not in (16, 32, 64):
            raise ValueError(f"precision_bits must be 16, 32 or 64, got {self.precision_bits}")
        if self.max_scene_len is not None and self.max_scene_len < 1:
            raise ValueError(f"max_scene_len must be >= 1, got {self.max_scene_len}")
        if not self.var_floor > 0:
            raise ValueError(f"var_floor must be > 0, got {self.var_floor}")

    def bits_for(self, seq: FeatureSequence) -> int:
        return self.precision_bits or infer_precision_bits(seq)


def _as_sequence(seq) -> FeatureSequence:
    return seq if isinstance(seq, FeatureSequence) else FeatureSequence(check_features(seq))


def segment_bitcost(seq, i: int, j: int, params: MdlParams = MdlParams()) -> float:
    """Bit cost of coding frames ``[i, j)`` as one segment.

    Evaluated directly from the frames (no prefix sums); ``build_cost_table``
    is the fast path.
    """
    seq = _as_sequence(seq)
    if not (0 <= i < j <= seq.n):
        raise IndexError(f"need 0 <= i < j <= {seq.n}, got i={i}, j={j}")
    d, m = seq.d, params.bits_for(seq)
    seg = seq.values[i:j]
    mu = seg.mean(axis=0)
    resid2 = (seg - mu) ** 2
    var = np.maximum(resid2.mean(axis=0), params.var_floor)
    log_density = -0.5 * (d * LOG2PI + np.log(var).sum() + (resid2 / var).sum(axis=1))
    return 2.0 * d * m - float(log_density.sum()) / LN2


class SegmentCostTable:
    """Bit costs ``cost(i, j)`` for every segment with ``j - i <= max_len``.

    Stored as an ``n x width`` array whose entry ``[i, l - 1]`` is the cost
    of ``[i, i + l)``; slots running past ``n`` hold ``inf``.
    """

    def __init__(self, costs: np.ndarray, max_len: int | None):
        costs = np.asarray(costs, dtype=np.float64)
        if costs.ndim != 2 or costs.shape[0] < 1:
            raise ValueError("cost array must be 2-d with at least one row")
        self.costs = costs
        self.n = costs.shape[0]
        self.max_len = max_len
        self.width = costs.shape[1]

    def __contains__(self, pair) -> bool:
        i, j = pair
        return 0 <= i < j <= self.n and j - i <= self.width

    def cost(self, i: int, j: int) -> float:
        if (i, j) not in self:
            raise KeyError(f"segment [{i}, {j}) not in table (n={self.n}, max_len={self.max_len})")
        return float(self.costs[i, j - i - 1])

    def pairs(self) -> Iterator[tuple[int, int]]:
        for i in range(self.n):
            for j in range(i + 1, min(self.n, i + self.width) + 1):
                yield i, j

    def __len__(self) -> int:
        w, n = self.width, self.n
        return w * n - w * (w - 1) // 2


def build_cost_table(seq, params: MdlParams = MdlParams(), n_jobs: int = 1) -> SegmentCostTable:
    """Costs of all admissible segments from prefix sums of ``v`` and ``v**2``.

    Work is ``O(n * L * d)``. Lengths are split across ``n_jobs`` threads; every
    entry is computed by the same elementwise operations whatever the split, so
    the table is bit-identical for any thread count.
    """
    seq = _as_sequence(seq)
    n, d = seq.n, seq.d
    m = params.bits_for(seq)
    width = n if params.max_scene_len is None else min(params.max_scene_len, n)
    # centring only reduces cancellation in s2/l - mu**2
    x = seq.values - seq.values.mean(axis=0)
    p1 = np.zeros((n + 1, d))
    p2 = np.zeros((n + 1, d))
    np.cumsum(x, axis=0, out=p1[1:])
    np.cumsum(x * x, axis=0, out=p2[1:])
    costs = np.full((n, width), np.inf)
    floor = params.var_floor
    param_bits = 2.0 * d * m

    def fill(lengths):
        for length in lengths:
            mu = (p1[length:] - p1[:-length]) / length
            raw = np.maximum((p2[length:] - p2[:-length]) / length - mu * mu, 0.0)
            var = np.maximum(raw, floor)
            nats = 0.5 * (length * (d * LOG2PI + np.log(var).sum(axis=1))
                          + (length * raw / var).sum(axis=1))
            costs[: n - length + 1, length - 1] = param_bits + nats / LN2

    lengths = list(range(1, width + 1))
    n_jobs = max(1, int(n_jobs))
    if n_jobs == 1 or width < 2:
        fill(lengths)
    else:
        chunks = [lengths[k::n_jobs] for k in range(n_jobs)]
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            list(pool.map(fill, chunks))
    return SegmentCostTable(costs, params.max_scene_len)


def dp_segment(table: SegmentCostTable) -> tuple[Segmentation, float]:
    """Exact minimiser of the summed segment cost.

    ``best[i] = min_k cost(i, k) + best[k]`` with ``best[n] = 0``, solved from
    the back. Among equal-cost choices the smallest ``k`` wins, which yields the
    lexicographically smallest sequence of segment ends.
    """
    n, width, costs = table.n, table.width, table.costs
    best = np.zeros(n + 1)
    choice = np.zeros(n, dtype=np.int64)
    for i in range(n - 1, -1, -1):
        span = min(width, n - i)
        cand = costs[i, :span] + best[i + 1: i + span + 1]
        k = int(np.argmin(cand))
        if not np.isfinite(cand[k]):
            raise ValueError(f"cost table has no finite entry for segments starting at {i}")
        choice[i] = i + 1 + k
        best[i] = cand[k]
    breaks = []
    i = int(choice[0])
    while i < n:
        breaks.append(i)
        i = int(choice[i])
    return Segmentation(n, tuple(breaks)), float(best[0])


def enumerate_partitions(n: int, max_len: int | None = None) -> Iterator[tuple[int, ...]]:
    """All segment-end sequences tiling ``[0, n)``, in lexicographic order."""
    cap = n if max_len is None else max_len

    def rec(start):
        if start == n:
            yield ()
            return
        for end in range(start + 1, min(n, start + cap) + 1):
            for rest in rec(end):
                yield (end, *rest)

    yield from rec(0)


def brute_force_segment(seq, params: MdlParams = MdlParams()) -> tuple[Segmentation, float]:
    """Exhaustive minimiser over every contiguous partition (n <= 20).

    Segment costs are read from the same table the DP uses and summed in the
    same right-to-left order, so on agreement the totals are equal bit for bit.
    """
    seq = _as_sequence(seq)
    if seq.n > BRUTE_FORCE_MAX_N:
        raise ValueError(
            f"instance too large for exhaustive search: n={seq.n} > {BRUTE_FORCE_MAX_N}"
        )
    table = build_cost_table(seq, params)
    best_total, best_ends = math.inf, None
    for ends in enumerate_partitions(seq.n, params.max_scene_len):
        total = 0.0
        for a, b in zip(reversed((0, *ends[:-1])), reversed(ends)):
            total = table.costs[a, b - a - 1] + total
        # enumeration is lexicographic, so strict < keeps the smallest tie
        if total < best_total:
            best_total, best_ends = total, ends
    return Segmentation(seq.n, best_ends[:-1]), float(best_total)


def segment_sequence(seq, params: MdlParams = MdlParams(), n_jobs: int = 1):
    """Infer precision (unless fixed), build the cost table and run the DP."""
    seq = _as_sequence(seq)
    return dp_segment(build_cost_table(seq, params, n_jobs=n_jobs))


class MDLSegmenter(ClusterMixin, BaseEstimator):
    """Parameter-free contiguous segmentation of a feature sequence.

    Parameters
    ----------
    max_scene_len : int or None, default=300
        Cap on segment length in frames. Only limits the search; None
        searches every segment length.
    var_floor : float, default=1e-4
        Minimum per-dimension variance of a segment's Gaussian.
    precision_bits : {"auto", 16, 32, 64}, default="auto"
        Bits per parameter in the model cost. "auto" uses the narrowest
        float width that stores the input exactly.
    n_jobs : int, default=1
        Threads used to fill the cost table.

    Attributes
    ----------
    breaks_ : list of int
    labels_ : ndarray of shape (n_samples,)
        Segment index of every frame.
    n_segments_ : int
    total_bits_ : float
    precision_bits_ : int
    segmentation_ : Segmentation

    Examples
    --------
    >>> import numpy as np
    >>> X = np.repeat([[0.0, 0.0], [10.0, 10.0]], 5, axis=0)
    >>> MDLSegmenter().fit(X).breaks_
    [5]
    """

    def __init__(self, max_scene_len=DEFAULT_MAX_SCENE_LEN, var_floor=1e-4,
                 precision_bits="auto", n_jobs=1):
        self.max_scene_len = max_scene_len
        self.var_floor = var_floor
        self.precision_bits = precision_bits
        self.n_jobs = n_jobs

    def _params(self) -> MdlParams:
        bits = None if self.precision_bits in (None, "auto") else int(self.precision_bits)
        return MdlParams(bits, self.max_scene_len, self.var_floor)

    def fit(self, X, y=None):
        seq = _as_sequence(X)
        params = self._params()
        seg, total = segment_sequence(seq, params, n_jobs=self.n_jobs)
        self.precision_bits_ = params.bits_for(seq)
        self.segmentation_ = seg
        self.breaks_ = list(seg.breaks)
        self.labels_ = seg.labels()
        self.n_segments_ = seg.n_segments
        self.total_bits_ = total
        self.n_features_in_ = seq.d
        return self

    def description_length(self):
        """Total bits of the fitted segmentation."""
        check_is_fitted(self, "total_bits_")
        return self.total_bits_
