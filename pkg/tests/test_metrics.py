import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from aroiseg import Mask3D, dsc, overlap, overlap_counts, ppv, sen

masks = hnp.arrays(np.uint8, (3, 4, 4), elements=st.integers(0, 1))


def cube(fill_slices=()) -> np.ndarray:
    m = np.zeros((4, 5, 5), dtype=np.uint8)
    for sl in fill_slices:
        m[sl] = 1
    return m


class TestCounts:
    def test_worked_example(self):
        # 16-voxel prediction, 16-voxel reference, 12 shared.
        pred = cube([(0, slice(0, 4), slice(0, 4))])
        ref = cube([(0, slice(1, 5), slice(0, 4))])
        assert overlap_counts(pred, ref) == (12, 16, 16)

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            overlap_counts(np.zeros((2, 2, 2)), np.zeros((2, 2, 3)))

    def test_accepts_mask_objects_and_arrays(self):
        m = cube([(1, 2, 2)])
        assert overlap_counts(Mask3D(m), m) == (1, 1, 1)


class TestScores:
    def test_identical_masks_score_one(self):
        m = cube([(0, slice(1, 3), slice(1, 3)), (2, 4, 4)])
        r = overlap(m, m)
        assert (r.dsc, r.sen, r.ppv) == (1.0, 1.0, 1.0)

    def test_disjoint_masks_score_zero(self):
        a = cube([(0, 0, 0)])
        b = cube([(3, 4, 4)])
        r = overlap(a, b)
        assert (r.dsc, r.sen, r.ppv) == (0.0, 0.0, 0.0)
        assert (r.tp, r.pred_count, r.ref_count) == (0, 1, 1)

    def test_worked_example_point_seventy_five(self):
        pred = cube([(0, slice(0, 4), slice(0, 4))])
        ref = cube([(0, slice(1, 5), slice(0, 4))])
        r = overlap(pred, ref)
        assert r.dsc == 0.75
        assert r.sen == 0.75
        assert r.ppv == 0.75

    def test_both_empty_is_perfect_agreement(self):
        r = overlap(cube(), cube())
        assert (r.dsc, r.sen, r.ppv) == (1.0, 1.0, 1.0)
        assert (r.tp, r.pred_count, r.ref_count) == (0, 0, 0)

    def test_one_empty_is_total_disagreement_both_ways(self):
        full = cube([(slice(None), slice(None), slice(None))])
        for a, b in ((cube(), full), (full, cube())):
            r = overlap(a, b)
            assert (r.dsc, r.sen, r.ppv) == (0.0, 0.0, 0.0)

    def test_as_dict_round_trip(self):
        pred = cube([(0, slice(0, 4), slice(0, 4))])
        ref = cube([(0, slice(1, 5), slice(0, 4))])
        d = overlap(pred, ref).as_dict()
        assert d == {"dsc": 0.75, "sen": 0.75, "ppv": 0.75,
                     "tp": 12, "pred_count": 16, "ref_count": 16}

    def test_convenience_wrappers_agree_with_report(self):
        pred = cube([(0, slice(0, 3), slice(0, 4))])
        ref = cube([(0, slice(1, 4), slice(0, 4))])
        r = overlap(pred, ref)
        assert dsc(pred, ref) == r.dsc
        assert sen(pred, ref) == r.sen
        assert ppv(pred, ref) == r.ppv


class TestAlgebraicIdentities:
    @given(masks, masks)
    @settings(max_examples=200, deadline=None)
    def test_dice_is_harmonic_mean_of_sen_and_ppv(self, a, b):
        r = overlap(a, b)
        if r.sen + r.ppv > 0:
            harmonic = 2 * r.sen * r.ppv / (r.sen + r.ppv)
            assert abs(r.dsc - harmonic) < 1e-12
        else:
            assert r.dsc == 0.0

    @given(masks, masks)
    @settings(max_examples=200, deadline=None)
    def test_sen_ppv_swap_symmetry_and_dsc_symmetry(self, a, b):
        fwd, rev = overlap(a, b), overlap(b, a)
        assert fwd.dsc == rev.dsc
        assert fwd.sen == rev.ppv
        assert fwd.ppv == rev.sen

    @given(masks, masks)
    @settings(max_examples=200, deadline=None)
    def test_scores_in_unit_interval(self, a, b):
        r = overlap(a, b)
        for v in (r.dsc, r.sen, r.ppv):
            assert 0.0 <= v <= 1.0

    @given(masks, masks)
    @settings(max_examples=200, deadline=None)
    def test_dsc_one_iff_equal(self, a, b):
        assert (dsc(a, b) == 1.0) == np.array_equal(a != 0, b != 0)

    @given(masks)
    @settings(max_examples=100, deadline=None)
    def test_removing_false_positives_never_hurts(self, ref):
        pred = ref.copy()
        pred[0, 0, 0] = 1 - ref[0, 0, 0]  # introduce one disagreement
        cleaned = np.logical_and(pred, ref).astype(np.uint8)
        if cleaned.any() or not ref.any():
            assert ppv(cleaned, ref) >= ppv(pred, ref)
            assert dsc(cleaned, ref) >= dsc(pred, ref)

    def test_counts_drive_scores_exactly(self):
        rng = np.random.default_rng(9)
        for _ in range(50):
            a = rng.integers(0, 2, size=(3, 4, 4), dtype=np.uint8)
            b = rng.integers(0, 2, size=(3, 4, 4), dtype=np.uint8)
            r = overlap(a, b)
            if r.pred_count and r.ref_count:
                assert r.dsc == 2 * r.tp / (r.pred_count + r.ref_count)
                assert r.sen == r.tp / r.ref_count
                assert r.ppv == r.tp / r.pred_count
