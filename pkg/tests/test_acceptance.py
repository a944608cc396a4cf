"""Exit criteria. Each test prints one PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py -s`` (the lines are also
printed without ``-s``).
"""

import json
import time

import numpy as np
import pytest

from conftest import random_instance, random_segmentation
from mdlseg import (MdlParams, Segmentation, ari, assign_names, brute_force_segment,
                    build_cost_table, cluster_accuracy, dp_segment, hungarian, nmi, pk,
                    segment_bitcost, segment_sequence, synth_sequence, windowdiff)
from mdlseg.assignment import problem_from_dict
from mdlseg.bench import read_manifest, run_bench, summarize
from mdlseg.cli import main
from mdlseg.features import save_features, write_annotations
from mdlseg.metrics import ded
from oracles import best_permutation, brute_force_names, window_diff, window_pk

pytestmark = pytest.mark.acceptance


@pytest.fixture
def report(capsys):
    def _report(label, ok, detail):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] {label}: {detail}")
        assert ok, f"{label}: {detail}"

    return _report


# -- instance generators shared with the determinism criterion ---------------


def dp_instances():
    rng = np.random.default_rng(2001)
    for _ in range(200):
        n = int(rng.integers(2, 13))
        d = int(rng.choice([1, 2, 3]))
        yield random_instance(rng, n, d)


def recovery_instances():
    rng = np.random.default_rng(3003)
    for trial in range(100):
        K = (2, 3, 5)[trial % 3]
        d = (2, 8)[(trial // 3) % 2]
        lengths = rng.integers(20, 51, size=K).tolist()
        noise = float(rng.choice([0.1, 0.5, 1.0]))
        seq, ann = synth_sequence(lengths, d, 10.0 * noise, noise, seed=trial)
        yield seq, ann, lengths


def assignment_documents():
    rng = np.random.default_rng(6006)
    for _ in range(50):
        m = int(rng.integers(1, 5))
        k = int(rng.integers(1, 9))
        n_scenes = int(rng.integers(1, 7))
        d = 4
        centers = rng.normal(scale=3.0, size=(m, d))
        characters = [
            {"name": f"char{i}",
             "faces": (centers[i] + rng.normal(scale=0.3, size=(int(rng.integers(1, 4)), d))).tolist()}
            for i in range(m)
        ]
        scenes = []
        for _ in range(n_scenes):
            present = rng.random(m) < 0.6
            faces = [(centers[i] + rng.normal(scale=0.5, size=d)).tolist() for i in np.flatnonzero(present)]
            faces += rng.normal(scale=3.0, size=(int(rng.integers(0, 2)), d)).tolist()
            scenes.append(faces)
        speakers = {
            f"SPEAKER_{s:02d}": sorted(rng.choice(n_scenes, size=int(rng.integers(1, n_scenes + 1)),
                                              replace=False).tolist())
            for s in range(k)
        }
        yield {"characters": characters, "scenes": scenes, "speakers": speakers}


# -- criteria -------------------------------------------------------------------


def test_c1_dp_exactness(report):
    t0 = time.perf_counter()
    mismatches, split = 0, 0
    for seq, params in dp_instances():
        got = dp_segment(build_cost_table(seq, params))
        want = brute_force_segment(seq, params)
        mismatches += got != want
        split += got[0].n_segments > 1
    elapsed = time.perf_counter() - t0
    report("C1 DP exactness", mismatches == 0 and elapsed < 30,
           f"{200 - mismatches}/200 identical breaks and total_bits ({split} multi-segment), {elapsed:.1f}s < 30s")


def test_c2_cost_table_oracle(report):
    rng = np.random.default_rng(2002)
    worst = 0.0
    for _ in range(50):
        n, d = int(rng.integers(1, 101)), int(rng.integers(1, 5))
        x = rng.normal(loc=rng.normal(scale=20, size=d), scale=rng.choice([0.01, 1.0, 5.0]), size=(n, d))
        params = MdlParams(int(rng.choice([16, 32, 64])),
                           None if rng.random() < 0.5 else int(rng.integers(1, n + 1)),
                           float(rng.choice([1e-4, 1e-2])))
        table = build_cost_table(x, params)
        for i, j in table.pairs():
            naive = segment_bitcost(x, i, j, params)
            worst = max(worst, abs(table.cost(i, j) - naive) / abs(naive))
    report("C2 cost table vs naive", worst <= 1e-9, f"max relative error {worst:.2e} <= 1e-9")


def test_c3_synthetic_recovery(report):
    t0 = time.perf_counter()
    hits = 0
    for seq, ann, _ in recovery_instances():
        seg, _ = segment_sequence(seq)
        ok = seg.n_segments == len(ann.breaks) + 1 and all(
            abs(a - b) <= 1 for a, b in zip(seg.breaks, ann.breaks))
        hits += ok
    elapsed = time.perf_counter() - t0
    report("C3 synthetic recovery", hits >= 95 and elapsed < 60,
           f"{hits}/100 trials exact segment count with breaks within +-1 (need >= 95), {elapsed:.1f}s < 60s")


def test_c4_cap_consistency(report):
    same = 0
    for seq, _, lengths in recovery_instances():
        capped, _ = segment_sequence(seq, MdlParams(max_scene_len=2 * max(lengths)))
        free, _ = segment_sequence(seq, MdlParams(max_scene_len=None))
        same += capped.breaks == free.breaks
    report("C4 L-consistency", same == 100, f"{same}/100 identical with L = 2 x longest true segment")


def test_c5_metric_identities(report):
    rng = np.random.default_rng(5005)
    failures = []
    for _ in range(50):
        n = int(rng.integers(2, 60))
        s = random_segmentation(rng, n)
        lab = s.labels()
        if not (pk(s, s) == windowdiff(s, s) == ded(s, s) == 0
                and cluster_accuracy(lab, lab) == nmi(lab, lab) == ari(lab, lab) == 100):
            failures.append(f"identity n={n}")
    for _ in range(100):
        n = int(rng.integers(1, 60))
        a, b = random_segmentation(rng, n), random_segmentation(rng, n)
        if ded(a, b) + cluster_accuracy(a.labels(), b.labels()) != 100:
            failures.append("ded+acc")
    u = np.random.default_rng(1).integers(0, 8, 10_000)
    v = np.random.default_rng(2).integers(0, 8, 10_000)
    chance = ari(u, v)
    if not abs(chance) < 5:
        failures.append(f"ari={chance}")
    for _ in range(100):
        n = int(rng.integers(2, 25))
        a, b = random_segmentation(rng, n), random_segmentation(rng, n)
        k = int(rng.integers(1, n))
        if pk(a, b, k) != window_pk(a.breaks, b.breaks, n, k) or \
                windowdiff(a, b, k) != window_diff(a.breaks, b.breaks, n, k):
            failures.append("window enumeration")
    report("C5 metric identities", not failures,
           f"self-scores, ded+acc=100, |ari|={abs(chance):.3f}<5 at N=10000, window enumeration; "
           f"{len(failures)} failures {failures[:3]}")


def test_c6_hungarian_exactness(report):
    rng = np.random.default_rng(6001)
    bad_lsap = 0
    for _ in range(200):
        rows = int(rng.integers(1, 8))
        cols = int(rng.integers(rows, 8))
        cost = rng.normal(size=(rows, cols)) if rng.random() < 0.7 else \
            rng.integers(0, 5, size=(rows, cols)).astype(float)
        _, total = hungarian(cost)
        _, best = best_permutation(cost)
        bad_lsap += total != best
    bad_names = 0
    for doc in assignment_documents():
        p = problem_from_dict(doc)
        bad_names += assign_names(p) != brute_force_names(p.speaker_costs, p.threshold,
                                                          p.characters, p.speakers)
    report("C6 Hungarian exactness", bad_lsap == 0 and bad_names == 0,
           f"{200 - bad_lsap}/200 LSAP totals equal enumeration; "
           f"{50 - bad_names}/50 name maps equal brute force")


def test_c7_bench_ordering(report, tmp_path):
    rng = np.random.default_rng(7007)
    items = []
    for i in range(10):
        lengths = rng.integers(8, 80, size=int(rng.integers(3, 7))).tolist()
        seq, ann = synth_sequence(lengths, 8, 10.0, 1.0, seed=700 + i)
        save_features(seq, tmp_path / f"f{i}.bin")
        write_annotations([ann], tmp_path / f"gt{i}.txt")
        items.append({"name": f"synth{i}", "features": f"f{i}.bin", "annotations": f"gt{i}.txt"})
    (tmp_path / "manifest.json").write_text(json.dumps({"items": items}))
    rows = run_bench(read_manifest(tmp_path / "manifest.json"))
    acc = summarize(rows, "mean_acc")
    err = summarize(rows, "mean_ded_error")
    others = [m for m in acc if m != "mdlseg"]
    ok = (len(rows) == 40 and all(acc["mdlseg"] > acc[m] for m in others)
          and all(err["mdlseg"] < err[m] for m in others))
    detail = ", ".join(f"{m} acc={acc[m]:.2f} ded={err[m]:.2f}" for m in acc)
    report("C7 bench ordering", ok, detail)


def _run(argv, path):
    code = main(argv + ["--output", str(path)])
    return code, path.read_bytes() if code == 0 else b""


def test_c8_determinism(report, tmp_path):
    differing, failed, docs = 0, 0, 0

    def compare(cmd, extra, name):
        nonlocal differing, failed, docs
        outs = []
        for threads in (1, 4):
            code, blob = _run([cmd, *extra, "--threads", str(threads)], tmp_path / f"{name}.t{threads}")
            failed += code != 0
            outs.append(blob)
        differing += outs[0] != outs[1]
        docs += 1

    for i, (seq, params) in enumerate(dp_instances()):
        f = tmp_path / f"c1_{i}.bin"
        save_features(seq, f, precision_bits=64)
        flags = ["--input", str(f), "--var-floor", repr(params.var_floor),
                 "--precision-bits", str(params.precision_bits or "auto"),
                 "--max-scene-len", str(params.max_scene_len or "none")]
        compare("segment", flags, f"c1_seg_{i}")
        compare("oracle", flags, f"c1_orc_{i}")
    for i, (seq, _, _) in enumerate(recovery_instances()):
        f = tmp_path / f"c3_{i}.bin"
        save_features(seq, f)
        compare("segment", ["--input", str(f), "--max-scene-len", "300"], f"c3_{i}")
    for i, doc in enumerate(assignment_documents()):
        f = tmp_path / f"c6_{i}.json"
        f.write_text(json.dumps(doc))
        compare("assign", ["--input", str(f)], f"c6_{i}")
    report("C8 determinism", differing == 0 and failed == 0,
           f"{docs - differing}/{docs} result documents byte-identical for --threads 1 vs 4 "
           f"({failed} command failures)")
