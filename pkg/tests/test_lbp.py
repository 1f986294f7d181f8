import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from endotex.lbp import (
    RING8,
    RING12,
    RING16,
    RINGS,
    block_codes,
    lbp1_features,
    lbp1_pair,
    lbp2_features,
    lbp_code,
    rotation_invariant,
)

from oracles import LBP_OFFSETS, lbp1_brute_force, lbp2_brute_force, min_rotation_brute_force


class TestRingGeometry:
    def test_ring_sizes(self):
        assert (RING16.radius, RING16.neighbor_count) == (3, 16)
        assert (RING12.radius, RING12.neighbor_count) == (2, 12)
        assert (RING8.radius, RING8.neighbor_count) == (1, 8)

    def test_decoded_offsets_match_reference(self):
        for ring in RINGS:
            assert list(ring.offsets) == LBP_OFFSETS[ring.neighbor_count]

    def test_first_neighbor_of_inner_ring_is_cell_17(self):
        # cell 17 in 1-based row-major 7x7 numbering = offset (-1, -1)
        assert RING8.offsets[0] == (-1, -1)


class TestLbpCode:
    def test_all_equal_block(self):
        block = np.full((7, 7), 9.0)
        for ring in RINGS:
            assert lbp_code(block, ring) == 2 ** ring.neighbor_count - 1

    def test_center_strictly_greatest(self):
        block = np.zeros((7, 7))
        block[3, 3] = 5.0
        for ring in RINGS:
            assert lbp_code(block, ring) == 0

    def test_single_first_neighbor_set(self):
        block = np.full((7, 7), 10.0)
        block[3, 3] = 50.0
        block[2, 2] = 60.0  # cell 17, first in the 8-neighbor order
        assert lbp_code(block, RING8) == 1

    def test_wrong_size_rejected(self):
        with pytest.raises(ValueError):
            lbp_code(np.zeros((5, 5)), RING8)


class TestRotationInvariant:
    def test_fixed_points(self):
        for p in (8, 12, 16):
            assert rotation_invariant(0, p) == 0
            assert rotation_invariant(2 ** p - 1, p) == 2 ** p - 1

    def test_known_value(self):
        assert rotation_invariant(0b10000001, 8) == 3

    def test_single_bit(self):
        assert rotation_invariant(2, 8) == 1

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            rotation_invariant(256, 8)

    def test_exhaustive_p8_orbits(self):
        # Constant on every rotation orbit, checked for all 256 codes.
        for code in range(256):
            expected = rotation_invariant(code, 8)
            for k in range(8):
                rotated = ((code >> k) | (code << (8 - k))) & 0xFF
                assert rotation_invariant(rotated, 8) == expected

    @given(st.integers(0, 2 ** 12 - 1), st.integers(0, 11))
    @settings(max_examples=150, deadline=None)
    def test_orbit_property_p12(self, code, k):
        rotated = ((code >> k) | (code << (12 - k))) & 0xFFF
        assert rotation_invariant(rotated, 12) == rotation_invariant(code, 12)

    @given(st.integers(0, 2 ** 16 - 1))
    @settings(max_examples=150, deadline=None)
    def test_idempotent_p16(self, code):
        once = rotation_invariant(code, 16)
        assert rotation_invariant(once, 16) == once

    def test_matches_brute_force(self):
        rng = np.random.default_rng(31)
        for p in (8, 12, 16):
            for code in rng.integers(0, 2 ** p, 50):
                assert rotation_invariant(int(code), p) == min_rotation_brute_force(int(code), p)


class TestLbp1:
    def test_length(self):
        rng = np.random.default_rng(32)
        assert lbp1_features(rng.integers(0, 256, (32, 32)).astype(float)).shape == (37,)

    def test_constant_subimage_binning(self):
        feats = lbp1_features(np.full((32, 32), 7.0))
        # All codes are all-ones; they fall in no half-open bin, only in the
        # closed top-of-range intervals of each ring.
        assert np.array_equal(feats[:33], np.zeros(33))
        assert feats[33] == pytest.approx(1.0)  # [32768, 65535] for ring 16
        assert feats[34] == 0.0  # [16383, 32768]
        assert feats[35] == pytest.approx(1.0)  # [2047, 4095] for ring 12
        assert feats[36] == pytest.approx(1.0)  # [127, 255] for ring 8

    def test_bin_fractions_bounded(self):
        rng = np.random.default_rng(33)
        feats = lbp1_features(rng.integers(0, 256, (32, 32)).astype(float))
        assert feats[:15].sum() <= 1.0 + 1e-12
        assert (feats >= 0).all() and (feats <= 1).all()

    def test_matches_two_loop_oracle(self):
        rng = np.random.default_rng(34)
        for _ in range(3):
            img = rng.integers(0, 256, (32, 32)).astype(float)
            assert np.array_equal(lbp1_features(img), lbp1_brute_force(img))

    def test_wrong_size(self):
        with pytest.raises(ValueError):
            lbp1_features(np.zeros((31, 32)))

    def test_constant_shift_invariance_exact(self):
        rng = np.random.default_rng(35)
        img = rng.integers(0, 200, (32, 32)).astype(float)
        assert np.array_equal(lbp1_features(img), lbp1_features(img + 17.0))


class TestLbp2:
    def test_length(self):
        rng = np.random.default_rng(36)
        assert lbp2_features(rng.integers(0, 256, (32, 32)).astype(float)).shape == (36,)

    def test_constant_subimage_all_ones(self):
        assert np.array_equal(lbp2_features(np.full((32, 32), 3.0)), np.ones(36))

    def test_vertical_gradient_matches_oracle(self):
        img = np.tile(np.arange(32, dtype=float)[:, None], (1, 32))
        assert np.array_equal(lbp2_features(img), lbp2_brute_force(img))

    def test_random_matches_oracle(self):
        rng = np.random.default_rng(37)
        img = rng.integers(0, 256, (32, 32)).astype(float)
        assert np.array_equal(lbp2_features(img), lbp2_brute_force(img))

    def test_constant_shift_invariance_exact(self):
        rng = np.random.default_rng(38)
        img = rng.integers(0, 200, (32, 32)).astype(float)
        assert np.array_equal(lbp2_features(img), lbp2_features(img + 31.0))


class TestLbp1Pair:
    def test_length(self):
        rng = np.random.default_rng(39)
        gray = rng.integers(0, 256, (32, 32)).astype(float)
        green = rng.integers(0, 256, (32, 32)).astype(float)
        assert lbp1_pair(gray, green).shape == (74,)

    def test_identical_channels_give_identical_halves(self):
        rng = np.random.default_rng(40)
        img = rng.integers(0, 256, (32, 32)).astype(float)
        vec = lbp1_pair(img, img)
        assert np.array_equal(vec[:37], vec[37:])

    def test_halves_are_independent(self):
        rng = np.random.default_rng(41)
        gray = rng.integers(0, 256, (32, 32)).astype(float)
        green = rng.integers(0, 256, (32, 32)).astype(float)
        before = lbp1_pair(gray, green)
        after = lbp1_pair(gray, rng.integers(0, 256, (32, 32)).astype(float))
        assert np.array_equal(before[:37], after[:37])

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            lbp1_pair(np.zeros((32, 32)), np.zeros((16, 16)))


class TestBlockCodes:
    def test_placement_count(self):
        rng = np.random.default_rng(42)
        codes = block_codes(rng.integers(0, 256, (32, 32)).astype(float))
        assert codes.ring16.size == 676
        assert codes.ring12.size == 676
        assert codes.ring8.size == 676

    def test_code_ranges(self):
        rng = np.random.default_rng(43)
        codes = block_codes(rng.integers(0, 256, (32, 32)).astype(float))
        for grid, p in ((codes.ring16, 16), (codes.ring12, 12), (codes.ring8, 8)):
            assert grid.min() >= 0 and grid.max() < 2 ** p

    def test_codes_match_per_block_function(self):
        rng = np.random.default_rng(44)
        img = rng.integers(0, 256, (32, 32)).astype(float)
        codes = block_codes(img)
        for ring, grid in ((RING16, codes.ring16), (RING8, codes.ring8)):
            for top, left in ((0, 0), (5, 13), (25, 25)):
                block = img[top:top + 7, left:left + 7]
                assert grid[top, left] == lbp_code(block, ring)
