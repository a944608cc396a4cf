"""Score every segmenter on every item of a manifest.

A manifest is a JSON document ``{"items": [{"name": ..., "features": ...,
"annotations": ...}, ...]}`` (a bare list of items also works). Paths are
relative to the manifest's directory.
"""

from __future__ import annotations

import json
import time
from dataclasses import fields
from pathlib import Path

import numpy as np

from .baselines import contiguous_kmeans, uniform_breaks, uniform_oracle_breaks
from .features import load_features, read_annotations
from .mdl import MdlParams, segment_sequence
from .metrics import MetricReport, aggregate_multi

METHODS = ("mdlseg", "unif", "unif-oracle", "kmeans")
METRIC_NAMES = [f.name for f in fields(MetricReport) if f.name != "window_k"]
COLUMNS = (
    ["item", "method", "status", "error", "n", "n_segments"]
    + [f"best_{m}" for m in METRIC_NAMES]
    + [f"mean_{m}" for m in METRIC_NAMES]
    + ["runtime", "per_frame_runtime"]
)


def read_manifest(path):
    path = Path(path)
    doc = json.loads(path.read_text(encoding="utf-8"))
    items = doc["items"] if isinstance(doc, dict) else doc
    out = []
    for i, item in enumerate(items):
        out.append({
            "name": item.get("name", f"item{i}"),
            "features": path.parent / item["features"],
            "annotations": path.parent / item["annotations"],
        })
    return out


def _true_count(refs):
    return max(1, int(round(np.mean([len(r.breaks) + 1 for r in refs]))))


def dataset_mean_length(items) -> int:
    """Mean reference segment length over every item and annotator, rounded."""
    lengths = []
    for item in items:
        for ref in read_annotations(item["annotations"]):
            lengths.extend(np.diff([0, *ref.breaks, ref.n]).tolist())
    return max(1, int(round(float(np.mean(lengths))))) if lengths else 1


def _segment(method, seq, refs, params, mean_len, k, seed, threads):
    if method == "mdlseg":
        return segment_sequence(seq, params, n_jobs=threads)[0]
    if method == "unif":
        return uniform_breaks(seq.n, mean_len)
    if method == "unif-oracle":
        return uniform_oracle_breaks(seq.n, min(seq.n, _true_count(refs)))
    if method == "kmeans":
        return contiguous_kmeans(seq, min(seq.n, k or _true_count(refs)), seed=seed)
    raise ValueError(f"unknown method {method!r}")


def run_bench(items, methods=METHODS, params=MdlParams(), mean_len=None, k=None,
              seed=0, threads=1, window_k=None):
    """One row per (item, method). Failures are recorded, not raised."""
    if mean_len is None:
        mean_len = dataset_mean_length(items)
    rows = []
    for item in items:
        try:
            seq = load_features(item["features"])
            refs = read_annotations(item["annotations"])
            load_error = None
        except (OSError, ValueError) as exc:
            load_error = str(exc)
        for method in methods:
            row = dict.fromkeys(COLUMNS)
            row.update(item=item["name"], method=method)
            if load_error:
                row.update(status="error", error=load_error)
                rows.append(row)
                continue
            try:
                t0 = time.perf_counter()
                seg = _segment(method, seq, refs, params, mean_len, k, seed, threads)
                elapsed = time.perf_counter() - t0
                report = aggregate_multi(seg, refs, window_k)
            except (ValueError, KeyError) as exc:
                row.update(status="error", error=str(exc), n=seq.n)
                rows.append(row)
                continue
            row.update(status="ok", error="", n=seq.n, n_segments=seg.n_segments,
                       runtime=elapsed, per_frame_runtime=elapsed / seq.n)
            for name in METRIC_NAMES:
                row[f"best_{name}"] = getattr(report.best, name)
                row[f"mean_{name}"] = getattr(report.mean, name)
            rows.append(row)
    return rows


def summarize(rows, column):
    """Mean of ``column`` per method over successful rows."""
    out = {}
    for method in dict.fromkeys(r["method"] for r in rows):
        vals = [r[column] for r in rows if r["method"] == method and r["status"] == "ok"]
        out[method] = float(np.mean(vals)) if vals else float("nan")
    return out
