"""Segmentation and partition agreement scores.

Window metrics (``pk``, ``windowdiff``) are lower-is-better fractions. The
partition metrics (``cluster_accuracy``, ``nmi``, ``ari``) are percentages,
higher is better. ``ded`` is the percentage of frames that change segment
under the best one-to-one matching of segments, i.e. ``100 - acc``.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, fields

import numpy as np

from .assignment import linear_sum_assignment
from .segmentation import Segmentation, as_segmentation
from .validation import check_labels

HIGHER_IS_BETTER = {"acc", "nmi", "ari", "pk_score"}
LOWER_IS_BETTER = {"pk_error", "windowdiff_error", "ded_error"}


def contingency(labels_a, labels_b) -> np.ndarray:
    a, b = check_labels(labels_a, labels_b)
    _, ia = np.unique(a, return_inverse=True)
    _, ib = np.unique(b, return_inverse=True)
    table = np.zeros((ia.max() + 1, ib.max() + 1), dtype=np.int64)
    np.add.at(table, (ia, ib), 1)
    return table


def _matched_frames(table: np.ndarray) -> int:
    rows, cols = linear_sum_assignment(table, maximize=True)
    return int(table[rows, cols].sum())


def cluster_accuracy(hyp_labels, ref_labels) -> float:
    """Percentage of frames agreeing under the best one-to-one label matching."""
    table = contingency(hyp_labels, ref_labels)
    return 100.0 * _matched_frames(table) / table.sum()


def _entropy(counts):
    # sorted so that equal count multisets give bit-identical entropies
    counts = np.sort(np.asarray(counts)[np.asarray(counts) > 0])
    p = counts / counts.sum()
    return float(-(p * np.log(p)).sum())


def nmi(hyp_labels, ref_labels) -> float:
    """Mutual information over the arithmetic mean of the entropies, in percent."""
    table = contingency(hyp_labels, ref_labels)
    h_a = _entropy(table.sum(axis=1))
    h_b = _entropy(table.sum(axis=0))
    if h_a == 0.0 and h_b == 0.0:
        return 100.0
    mi = h_a + h_b - _entropy(table.ravel())
    return 100.0 * (max(mi, 0.0) / ((h_a + h_b) / 2.0))


def _pairs(x) -> int:
    return sum(int(v) * (int(v) - 1) // 2 for v in np.ravel(x))


def ari(hyp_labels, ref_labels) -> float:
    """Adjusted Rand index in percent."""
    table = contingency(hyp_labels, ref_labels)
    n = int(table.sum())
    index = _pairs(table)
    sum_a = _pairs(table.sum(axis=1))
    sum_b = _pairs(table.sum(axis=0))
    total = n * (n - 1) // 2
    # (index - expected) / (max_index - expected), scaled by 2 * total to stay in integers
    num = 2 * (index * total - sum_a * sum_b)
    den = (sum_a + sum_b) * total - 2 * sum_a * sum_b
    if den == 0:
        # both partitions trivial (all-one or all-singletons) and identical in shape
        return 100.0
    return 100.0 * (num / den)


def default_window(ref: Segmentation) -> int:
    """Half the mean reference segment length, truncated, at least 1."""
    return max(1, int(ref.n / ref.n_segments / 2))


def _check_pair(hyp, ref, k):
    ref = as_segmentation(ref)
    hyp = as_segmentation(hyp, ref.n)
    k = default_window(ref) if k is None else int(k)
    if k < 1:
        raise ValueError(f"window size must be >= 1, got {k}")
    if ref.n <= k:
        raise ValueError(f"window size {k} needs n > k, got n={ref.n}")
    return hyp, ref, k


def _break_indicator(seg: Segmentation) -> np.ndarray:
    ind = np.zeros(seg.n + 1, dtype=np.int64)
    ind[list(seg.breaks)] = 1
    return np.cumsum(ind)


def _window_counts(seg: Segmentation, k: int) -> np.ndarray:
    # number of breaks b with i < b <= i + k, for i in [0, n - k)
    c = _break_indicator(seg)
    return c[k: seg.n] - c[: seg.n - k]


def pk(hyp, ref, k=None) -> float:
    """Fraction of windows whose end frames are together in one segmentation but not the other."""
    hyp, ref, k = _check_pair(hyp, ref, k)
    same_h = _window_counts(hyp, k) == 0
    same_r = _window_counts(ref, k) == 0
    return int((same_h != same_r).sum()) / (ref.n - k)


def windowdiff(hyp, ref, k=None) -> float:
    """Fraction of windows where the two segmentations hold different break counts."""
    hyp, ref, k = _check_pair(hyp, ref, k)
    return int((_window_counts(hyp, k) != _window_counts(ref, k)).sum()) / (ref.n - k)


def ded(hyp, ref) -> float:
    """Percentage of frames relabelled under the best one-to-one segment matching."""
    ref = as_segmentation(ref)
    hyp = as_segmentation(hyp, ref.n)
    return 100.0 - cluster_accuracy(hyp.labels(), ref.labels())


@dataclass(frozen=True)
class MetricReport:
    acc: float
    nmi: float
    ari: float
    pk_error: float
    pk_score: float
    windowdiff_error: float
    ded_error: float
    window_k: int | None

    def to_dict(self) -> dict:
        return asdict(self)


def evaluate(hyp, ref, k=None) -> MetricReport:
    """All scores for one hypothesis against one reference."""
    hyp, ref, k = _check_pair(hyp, ref, k)
    h, r = hyp.labels(), ref.labels()
    acc = cluster_accuracy(h, r)
    pk_err = pk(hyp, ref, k)
    return MetricReport(
        acc=acc,
        nmi=nmi(h, r),
        ari=ari(h, r),
        pk_error=pk_err,
        pk_score=100.0 * (1.0 - pk_err),
        windowdiff_error=windowdiff(hyp, ref, k),
        ded_error=100.0 - acc,
        window_k=k,
    )


@dataclass(frozen=True)
class MultiRefReport:
    annotators: list[str]
    per_annotator: list[MetricReport]
    best: MetricReport
    mean: MetricReport

    def to_dict(self) -> dict:
        return {
            "per_annotator": [
                {"annotator_id": a, **r.to_dict()} for a, r in zip(self.annotators, self.per_annotator)
            ],
            "best": self.best.to_dict(),
            "mean": self.mean.to_dict(),
        }


def aggregate_multi(hyp, refs, k=None) -> MultiRefReport:
    """Score against every annotator; report the closest annotator and the mean.

    "Best" is taken per metric: max for higher-is-better scores, min for
    error rates.
    """
    refs = list(refs)
    if not refs:
        raise ValueError("at least one reference annotation is required")
    n = as_segmentation(refs[0]).n
    if any(as_segmentation(r).n != n for r in refs):
        raise ValueError("reference annotations disagree on n")
    hyp = as_segmentation(hyp)
    if hyp.n != n:
        raise ValueError(f"hypothesis covers {hyp.n} frames, references cover {n}")
    reports = [evaluate(hyp, r, k) for r in refs]
    names = [getattr(r, "annotator_id", f"ref{i}") for i, r in enumerate(refs)]
    ks = {r.window_k for r in reports}
    shared_k = ks.pop() if len(ks) == 1 else None
    best, mean = {}, {}
    for f in fields(MetricReport):
        if f.name == "window_k":
            continue
        vals = [getattr(r, f.name) for r in reports]
        best[f.name] = max(vals) if f.name in HIGHER_IS_BETTER else min(vals)
        mean[f.name] = float(np.mean(vals))
    return MultiRefReport(
        names,
        reports,
        MetricReport(**best, window_k=shared_k),
        MetricReport(**mean, window_k=shared_k),
    )
