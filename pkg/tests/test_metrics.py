import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from sklearn import metrics as skm

from conftest import random_segmentation
from mdlseg import (ReferenceAnnotation, Segmentation, aggregate_multi, ari, cluster_accuracy, ded,
                    evaluate, frame_labels, nmi, pk, windowdiff)
from mdlseg.metrics import default_window
from oracles import matching_accuracy, pair_counting_ari, window_diff, window_pk


@pytest.mark.parametrize("n,breaks,expected", [
    (4, [2], [0, 0, 1, 1]),
    (3, [], [0, 0, 0]),
    (3, [1, 2], [0, 1, 2]),
])
def test_frame_labels(n, breaks, expected):
    assert frame_labels(Segmentation(n, tuple(breaks))).tolist() == expected


class TestPartitionScores:
    def test_identical(self):
        a = [0, 0, 1, 1, 2]
        assert cluster_accuracy(a, a) == nmi(a, a) == ari(a, a) == 100.0

    def test_labels_nominal(self):
        assert cluster_accuracy([0, 0, 1, 1], [1, 1, 0, 0]) == 100.0

    def test_accuracy_example(self):
        # matching_accuracy over both matchings gives 75
        assert cluster_accuracy([0, 0, 0, 1], [0, 0, 1, 1]) == 75.0

    def test_ari_example(self):
        # pair_counting_ari over the 6 pairs gives -50
        assert ari([0, 0, 1, 1], [0, 1, 0, 1]) == pytest.approx(-50.0)

    def test_single_cluster_nmi(self):
        assert nmi([0, 0, 0], [5, 5, 5]) == 100.0

    def test_length_mismatch(self):
        for f in (cluster_accuracy, nmi, ari):
            with pytest.raises(ValueError):
                f([0, 1], [0, 1, 1])

    def test_random_against_oracles(self, rng):
        for _ in range(60):
            n = int(rng.integers(1, 12))
            a = rng.integers(0, 4, size=n)
            b = rng.integers(0, 4, size=n)
            assert cluster_accuracy(a, b) == pytest.approx(matching_accuracy(a.tolist(), b.tolist()))
            assert ari(a, b) == pytest.approx(pair_counting_ari(a.tolist(), b.tolist()), abs=1e-9)
            assert nmi(a, b) == pytest.approx(100 * skm.normalized_mutual_info_score(a, b), abs=1e-9)

    def test_independent_labelings(self):
        rng = np.random.default_rng(0)
        a = rng.integers(0, 5, 10_000)
        b = rng.integers(0, 5, 10_000)
        assert abs(ari(a, b)) < 5

    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.integers(0, 3), min_size=1, max_size=20), st.data())
    def test_symmetry_and_relabel(self, a, data):
        b = data.draw(st.lists(st.integers(0, 3), min_size=len(a), max_size=len(a)))
        assert nmi(a, b) == pytest.approx(nmi(b, a), abs=1e-9)
        assert ari(a, b) == pytest.approx(ari(b, a), abs=1e-9)
        relabel = [7 - x for x in a]
        assert cluster_accuracy(relabel, b) == cluster_accuracy(a, b)
        assert ari(relabel, b) == pytest.approx(ari(a, b), abs=1e-9)


class TestWindowScores:
    def test_identical_is_zero(self, rng):
        for _ in range(20):
            s = random_segmentation(rng, int(rng.integers(2, 40)))
            assert pk(s, s) == windowdiff(s, s) == 0.0

    def test_pk_example(self):
        ref, hyp = Segmentation(6, (3,)), Segmentation(6, ())
        assert default_window(ref) == 1
        assert pk(hyp, ref) == pytest.approx(1 / 5)

    def test_windowdiff_example(self):
        # window enumeration: windows (1,2] and (2,3] disagree -> 2 / 5
        assert windowdiff(Segmentation(6, (2,)), Segmentation(6, (3,)), k=1) == pytest.approx(2 / 5)

    def test_maximal_disagreement(self):
        n = 20
        everything = Segmentation(n, tuple(range(1, n)))
        nothing = Segmentation(n, ())
        assert windowdiff(everything, nothing, k=3) == 1.0

    def test_window_too_large(self):
        with pytest.raises(ValueError):
            pk(Segmentation(3, ()), Segmentation(3, ()), k=3)
        with pytest.raises(ValueError):
            windowdiff(Segmentation(3, ()), Segmentation(3, ()), k=5)

    def test_against_enumeration(self, rng):
        for _ in range(100):
            n = int(rng.integers(2, 25))
            ref, hyp = random_segmentation(rng, n), random_segmentation(rng, n)
            k = int(rng.integers(1, n))
            assert pk(hyp, ref, k) == window_pk(hyp.breaks, ref.breaks, n, k)
            assert windowdiff(hyp, ref, k) == window_diff(hyp.breaks, ref.breaks, n, k)

    def test_zero_iff_equal(self, rng):
        for _ in range(100):
            n = int(rng.integers(3, 15))
            a, b = random_segmentation(rng, n), random_segmentation(rng, n)
            assert (windowdiff(a, b, 1) == 0) == (a == b) == (pk(a, b, 1) == 0)


class TestDed:
    def test_identical(self):
        s = Segmentation(10, (3, 7))
        assert ded(s, s) == 0.0

    def test_one_vs_two(self):
        assert ded(Segmentation(10, ()), Segmentation(10, (5,))) == 50.0

    def test_complement_of_accuracy(self, rng):
        for _ in range(100):
            n = int(rng.integers(1, 30))
            a, b = random_segmentation(rng, n), random_segmentation(rng, n)
            assert ded(a, b) + cluster_accuracy(a.labels(), b.labels()) == 100.0


class TestAggregate:
    def test_single_annotator(self):
        hyp = Segmentation(12, (4,))
        rep = aggregate_multi(hyp, [ReferenceAnnotation(12, (4, 8), "x")])
        assert rep.best == rep.mean == rep.per_annotator[0]

    def test_best_and_mean(self, rng):
        for _ in range(30):
            n = int(rng.integers(4, 30))
            hyp = random_segmentation(rng, n)
            refs = [ReferenceAnnotation(n, random_segmentation(rng, n).breaks, f"a{i}") for i in range(3)]
            refs.append(ReferenceAnnotation(n, hyp.breaks, "same"))
            rep = aggregate_multi(hyp, refs)
            assert rep.best.acc == 100.0
            assert rep.best.pk_error <= rep.mean.pk_error
            assert rep.best.ded_error <= rep.mean.ded_error
            assert rep.best.ari >= rep.mean.ari
            assert rep.best.pk_score >= rep.mean.pk_score
            assert [a for a in rep.annotators] == ["a0", "a1", "a2", "same"]

    def test_errors(self):
        with pytest.raises(ValueError):
            aggregate_multi(Segmentation(5, ()), [])
        with pytest.raises(ValueError):
            aggregate_multi(Segmentation(5, ()), [ReferenceAnnotation(6, ())])

    def test_report_fields(self):
        rep = evaluate(Segmentation(10, (5,)), Segmentation(10, (5,)))
        d = rep.to_dict()
        assert set(d) == {"acc", "nmi", "ari", "pk_error", "pk_score", "windowdiff_error",
                          "ded_error", "window_k"}
        assert d["window_k"] == 2 and d["pk_score"] == 100.0
