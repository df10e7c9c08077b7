import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from iconix.errors import DimensionMismatch
from iconix.imaging import (
    BinaryMask,
    Connectivity,
    PixelFormat,
    Raster,
    binarize,
    composite_layers,
    connected_components,
    crop,
    decode_mask_png,
    decode_png,
    downsample,
    encode_mask_png,
    encode_png,
    mask_from_runs,
    mask_to_runs,
    reference_perceptual_distance,
    to_grayscale,
)

from conftest import gray, random_gray


class TestRaster:
    def test_data_length_validation(self):
        with pytest.raises(ValueError):
            Raster(width=2, height=2, fmt=PixelFormat.GRAY8, data=b"\x00" * 3)

    def test_dimension_validation(self):
        with pytest.raises(ValueError):
            Raster(width=0, height=2, fmt=PixelFormat.GRAY8, data=b"")

    def test_array_round_trip(self):
        arr = np.arange(16, dtype=np.uint8).reshape(4, 4)
        assert np.array_equal(Raster.from_array(arr).to_array(), arr)

    def test_rgba_round_trip(self):
        rng = np.random.default_rng(7)
        arr = rng.integers(0, 256, size=(3, 5, 4), dtype=np.uint8)
        img = Raster.from_array(arr)
        assert img.fmt is PixelFormat.RGBA8
        assert np.array_equal(img.to_array(), arr)


class TestBinaryMask:
    def test_cached_area_must_match_popcount(self):
        mask = BinaryMask.from_array(np.eye(3, dtype=bool))
        assert mask.area == 3
        with pytest.raises(ValueError):
            BinaryMask(width=3, height=3, bits=mask.bits, area=5)

    def test_first_foreground_index(self):
        arr = np.zeros((2, 3), dtype=bool)
        arr[1, 2] = True
        assert BinaryMask.from_array(arr).first_foreground_index() == 5
        assert BinaryMask.from_array(np.zeros((2, 3), bool)).first_foreground_index() is None


class TestBinarize:
    def test_all_white_has_no_foreground(self, white_4x4):
        assert binarize(white_4x4, 128).area == 0

    def test_all_black_is_full_foreground(self, black_4x4):
        assert binarize(black_4x4, 128).area == 16

    def test_per_pixel_comparison(self):
        mask = binarize(gray([[100, 200]]), 128)
        assert mask.area == 1
        assert mask.to_array().tolist() == [[True, False]]

    def test_rgba_premultiplies_alpha_against_white(self):
        # fully transparent black reads as white -> background
        arr = np.zeros((1, 1, 4), dtype=np.uint8)
        assert binarize(Raster.from_array(arr), 128).area == 0
        arr[..., 3] = 255
        assert binarize(Raster.from_array(arr), 128).area == 1

    @given(st.integers(0, 255), st.integers(0, 255))
    @settings(max_examples=40, deadline=None)
    def test_area_monotone_in_threshold(self, t1, t2):
        rng = np.random.default_rng(42)
        img = random_gray(rng, 8, 8)
        lo, hi = min(t1, t2), max(t1, t2)
        assert binarize(img, lo).area <= binarize(img, hi).area


class TestConnectedComponents:
    def test_fully_connected_square(self):
        mask = BinaryMask.from_array(np.ones((2, 2), dtype=bool))
        count, _ = connected_components(mask, Connectivity.EIGHT)
        assert count == 1

    def test_diagonal_pair_depends_on_connectivity(self):
        arr = np.array([[1, 0], [0, 1]], dtype=bool)
        mask = BinaryMask.from_array(arr)
        assert connected_components(mask, Connectivity.FOUR)[0] == 2
        assert connected_components(mask, Connectivity.EIGHT)[0] == 1

    def test_empty_mask(self):
        mask = BinaryMask.from_array(np.zeros((3, 3), dtype=bool))
        assert connected_components(mask)[0] == 0

    def test_labels_partition_foreground(self):
        rng = np.random.default_rng(3)
        arr = rng.random((16, 16)) < 0.4
        count, labels = connected_components(BinaryMask.from_array(arr))
        assert np.array_equal(labels > 0, arr)
        assert set(np.unique(labels)) == set(range(count + 1)) or count == 0

    def test_translation_invariance(self):
        rng = np.random.default_rng(11)
        core = rng.random((8, 8)) < 0.5
        base = np.zeros((16, 16), dtype=bool)
        base[2:10, 3:11] = core
        shifted = np.zeros((16, 16), dtype=bool)
        shifted[5:13, 4:12] = core
        for conn in Connectivity:
            assert (connected_components(BinaryMask.from_array(base), conn)[0]
                    == connected_components(BinaryMask.from_array(shifted), conn)[0])

    def test_four_count_at_least_eight_count(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            arr = rng.random((12, 12)) < rng.uniform(0.2, 0.7)
            mask = BinaryMask.from_array(arr)
            assert (connected_components(mask, Connectivity.FOUR)[0]
                    >= connected_components(mask, Connectivity.EIGHT)[0])


class TestCompositeLayers:
    def test_white_over_black_at_half_alpha(self, black_4x4):
        full = BinaryMask.from_array(np.ones((4, 4), dtype=bool))
        out = composite_layers(black_4x4, [(full, 255, 0.5)])
        assert np.all(out.to_array() == 128)

    def test_empty_layer_list_is_identity(self):
        rng = np.random.default_rng(1)
        img = random_gray(rng, 5, 5)
        assert composite_layers(img, []).data == img.data

    def test_two_layer_rounding_sequence(self):
        white = Raster.from_array(np.full((4, 4), 255, dtype=np.uint8))
        layer_a = np.zeros((4, 4), dtype=bool)
        layer_a[1:3, 1:3] = True  # area 4
        layer_b = np.zeros((4, 4), dtype=bool)
        layer_b[1, 1] = True      # area 1, inside A
        out = composite_layers(white, [
            (BinaryMask.from_array(layer_a), 0, 0.5),
            (BinaryMask.from_array(layer_b), 0, 0.5),
        ]).to_array()
        assert out[1, 1] == 64
        assert out[1, 2] == out[2, 1] == out[2, 2] == 128
        assert out[0, 0] == 255

    def test_alpha_one_replaces_and_alpha_zero_is_identity(self):
        rng = np.random.default_rng(2)
        img = random_gray(rng, 6, 6)
        patch = np.zeros((6, 6), dtype=bool)
        patch[2:5, 1:4] = True
        mask = BinaryMask.from_array(patch)
        replaced = composite_layers(img, [(mask, 7, 1.0)]).to_array()
        assert np.all(replaced[patch] == 7)
        assert np.array_equal(replaced[~patch], img.to_array()[~patch])
        untouched = composite_layers(img, [(mask, 7, 0.0)])
        assert untouched.data == img.data

    def test_dimension_mismatch(self, black_4x4):
        small = BinaryMask.from_array(np.ones((2, 2), dtype=bool))
        with pytest.raises(DimensionMismatch):
            composite_layers(black_4x4, [(small, 255, 0.5)])

    def test_rgba_fill_defaults_alpha_channel(self):
        bg = Raster.from_array(np.zeros((2, 2, 4), dtype=np.uint8))
        full = BinaryMask.from_array(np.ones((2, 2), dtype=bool))
        out = composite_layers(bg, [(full, (255, 255, 255), 0.5)]).to_array()
        assert np.all(out == 128)


class TestDownsample:
    def test_constant_image(self):
        img = Raster.from_array(np.full((4, 4), 77, dtype=np.uint8))
        assert np.all(downsample(img, 2, 2).to_array() == 77)

    def test_box_filter_mean_rounds_half_up(self):
        img = gray([[0, 0], [255, 255]])
        assert downsample(img, 1, 1).to_array()[0, 0] == 128

    def test_same_size_is_identity(self):
        rng = np.random.default_rng(4)
        img = random_gray(rng, 7, 5)
        assert downsample(img, 7, 5).data == img.data

    def test_non_divisible_sizes(self):
        img = gray([[0, 90, 255]])
        out = downsample(img, 2, 1).to_array()
        # cells: [0, 90*0.5] / 1.5 = 30 -> 30 ; [90*0.5, 255] / 1.5 = 200
        assert out.tolist() == [[30, 200]]


class TestReferenceDistance:
    def test_identity_is_zero(self):
        rng = np.random.default_rng(9)
        img = random_gray(rng, 10, 10)
        assert reference_perceptual_distance(img, img) == 0.0

    def test_black_vs_white_is_one(self, black_4x4, white_4x4):
        assert reference_perceptual_distance(black_4x4, white_4x4) == 1.0

    def test_symmetry_and_range(self):
        rng = np.random.default_rng(10)
        for _ in range(10):
            a = random_gray(rng, 9, 13)
            b = random_gray(rng, 9, 13)
            d_ab = reference_perceptual_distance(a, b)
            assert d_ab == reference_perceptual_distance(b, a)
            assert 0.0 <= d_ab <= 1.0

    def test_dimension_mismatch(self, black_4x4):
        other = Raster.from_array(np.zeros((4, 5), dtype=np.uint8))
        with pytest.raises(DimensionMismatch):
            reference_perceptual_distance(black_4x4, other)


class TestSerialization:
    def test_png_round_trip_gray(self):
        rng = np.random.default_rng(20)
        img = random_gray(rng, 12, 7)
        assert decode_png(encode_png(img)).data == img.data

    def test_png_round_trip_rgba(self):
        rng = np.random.default_rng(21)
        arr = rng.integers(0, 256, size=(6, 8, 4), dtype=np.uint8)
        img = Raster.from_array(arr)
        decoded = decode_png(encode_png(img))
        assert decoded.fmt is PixelFormat.RGBA8
        assert decoded.data == img.data

    def test_mask_png_round_trip(self):
        rng = np.random.default_rng(22)
        arr = rng.random((9, 14)) < 0.5
        mask = BinaryMask.from_array(arr)
        assert decode_mask_png(encode_mask_png(mask)).to_array().tolist() == arr.tolist()

    def test_runs_round_trip(self):
        rng = np.random.default_rng(23)
        arr = rng.random((6, 6)) < 0.5
        mask = BinaryMask.from_array(arr)
        payload = mask_to_runs(mask)
        assert sum(payload["runs"]) == 36
        restored = mask_from_runs(payload)
        assert restored.bits == mask.bits and restored.area == mask.area

    def test_runs_empty_and_full(self):
        empty = BinaryMask.from_array(np.zeros((2, 2), dtype=bool))
        assert mask_to_runs(empty)["runs"] == [4]
        full = BinaryMask.from_array(np.ones((2, 2), dtype=bool))
        assert mask_to_runs(full)["runs"] == [0, 4]


class TestGrayscaleAndCrop:
    def test_to_grayscale_uses_rec601(self):
        arr = np.zeros((1, 1, 4), dtype=np.uint8)
        arr[0, 0] = (255, 0, 0, 255)
        assert to_grayscale(Raster.from_array(arr)).to_array()[0, 0] == 76  # 0.299*255

    def test_crop_bounds(self):
        rng = np.random.default_rng(30)
        img = random_gray(rng, 8, 8)
        sub = crop(img, 2, 3, 4, 2)
        assert np.array_equal(sub.to_array(), img.to_array()[3:5, 2:6])
        with pytest.raises(ValueError):
            crop(img, 6, 6, 4, 4)
