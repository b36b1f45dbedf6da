import struct
import zlib

import numpy as np
import pytest
from hypothesis import given

from irsr import (
    Image,
    FloatImage,
    UnsupportedFormatError,
    ValidationError,
    load_image,
    luma_float,
    png_header,
    quantize,
    save_image,
    to_float,
    to_luma,
)

from helpers import images, png_images, rand_image


def gray(values, bit_depth=8):
    return Image(np.asarray(values)[:, :, None], bit_depth)


class TestImageType:
    def test_properties(self):
        img = gray([[0, 64], [128, 255]])
        assert (img.width, img.height, img.channels) == (2, 2, 1)
        assert img.peak == 255

    def test_two_dim_buffer_is_accepted(self):
        img = Image(np.zeros((3, 4), np.uint8), 8)
        assert img.pixels.shape == (3, 4, 1)

    def test_pixels_are_read_only(self):
        img = gray([[1]])
        with pytest.raises(ValueError):
            img.pixels[0, 0, 0] = 2

    @pytest.mark.parametrize(
        "arr, depth",
        [
            (np.zeros((2, 2, 2), np.uint8), 8),  # bad channel count
            (np.zeros((0, 2, 1), np.uint8), 8),  # zero height
            (np.zeros((2, 2, 1), np.float64), 8),  # non-integer dtype
            (np.full((2, 2, 1), 256, np.int64), 8),  # above peak
            (np.full((2, 2, 1), -1, np.int64), 8),  # negative
            (np.zeros((2, 2, 1), np.uint8), 12),  # bad depth
        ],
    )
    def test_invalid_construction(self, arr, depth):
        with pytest.raises(ValidationError):
            Image(arr, depth)

    def test_float_image_validation(self):
        with pytest.raises(ValidationError):
            FloatImage(np.zeros((2, 2, 1)), 0.0)


class TestPngRoundTrip:
    def test_gray8_example(self, tmp_path):
        img = gray([[0, 64], [128, 255]])
        save_image(img, tmp_path / "a.png")
        assert load_image(tmp_path / "a.png") == img

    def test_gray16_peak_sample(self, tmp_path):
        img = gray([[65535]], bit_depth=16)
        save_image(img, tmp_path / "a.png")
        loaded = load_image(tmp_path / "a.png")
        assert loaded.bit_depth == 16
        assert int(loaded.pixels[0, 0, 0]) == 65535

    def test_rgb8(self, tmp_path, rng):
        img = rand_image(rng, 5, 3, channels=3)
        save_image(img, tmp_path / "a.png")
        assert load_image(tmp_path / "a.png") == img

    def test_native_resolution_file(self, tmp_path, rng):
        img = rand_image(rng, 320, 256)
        save_image(img, tmp_path / "a.png")
        assert png_header(tmp_path / "a.png")[:2] == (320, 256)

    @given(png_images(max_dim=8))
    def test_round_trip_property(self, tmp_path_factory, img):
        path = tmp_path_factory.mktemp("png") / "img.png"
        save_image(img, path)
        assert load_image(path) == img

    def test_single_black_pixel(self, tmp_path):
        save_image(gray([[0]]), tmp_path / "a.png")
        assert int(load_image(tmp_path / "a.png").pixels[0, 0, 0]) == 0

    def test_unwritable_path(self):
        with pytest.raises(OSError):
            save_image(gray([[1]]), "/nonexistent-dir/a.png")

    def test_missing_file(self, tmp_path):
        with pytest.raises(OSError):
            load_image(tmp_path / "nope.png")

    def test_rgb16_export_rejected(self, tmp_path):
        img = Image(np.zeros((2, 2, 3), np.uint16), 16)
        with pytest.raises(UnsupportedFormatError, match="16-bit RGB"):
            save_image(img, tmp_path / "a.png")


def _set_interlaced(path):
    """Flip the IHDR interlace byte of an existing PNG (header-only rewrite)."""
    data = bytearray(path.read_bytes())
    ihdr = bytearray(data[16:29])
    ihdr[12] = 1
    data[16:29] = ihdr
    crc = zlib.crc32(b"IHDR" + bytes(ihdr)) & 0xFFFFFFFF
    data[29:33] = struct.pack(">I", crc)
    path.write_bytes(bytes(data))


class TestPngRejection:
    def test_alpha(self, tmp_path):
        from PIL import Image as PILImage

        PILImage.fromarray(np.zeros((2, 2, 4), np.uint8)).save(tmp_path / "a.png")
        with pytest.raises(UnsupportedFormatError, match="unsupported format: alpha channel"):
            load_image(tmp_path / "a.png")

    def test_palette(self, tmp_path):
        from PIL import Image as PILImage

        PILImage.fromarray(np.zeros((2, 2), np.uint8)).convert("P").save(tmp_path / "a.png")
        with pytest.raises(UnsupportedFormatError, match="unsupported format: palette"):
            load_image(tmp_path / "a.png")

    def test_interlaced(self, tmp_path):
        save_image(gray([[1]]), tmp_path / "a.png")
        _set_interlaced(tmp_path / "a.png")
        with pytest.raises(UnsupportedFormatError, match="unsupported format: interlaced"):
            load_image(tmp_path / "a.png")

    def test_low_bit_depth_gray(self, tmp_path):
        from PIL import Image as PILImage

        PILImage.fromarray(np.zeros((2, 2), bool)).save(tmp_path / "a.png")
        with pytest.raises(UnsupportedFormatError, match="1-bit grayscale"):
            load_image(tmp_path / "a.png")

    def test_not_a_png(self, tmp_path):
        (tmp_path / "a.png").write_bytes(b"definitely not a png")
        with pytest.raises(UnsupportedFormatError, match="not a PNG"):
            png_header(tmp_path / "a.png")


class TestLuma:
    def test_white_maps_to_peak(self):
        img = Image(np.full((1, 1, 3), 255, np.uint8), 8)
        assert int(to_luma(img).pixels[0, 0, 0]) == 255

    def test_pure_red_rounds_down(self):
        # 0.299 * 255 = 76.245 -> 76 under round-half-up
        arr = np.zeros((1, 1, 3), np.uint8)
        arr[0, 0, 0] = 255
        assert int(to_luma(Image(arr, 8)).pixels[0, 0, 0]) == 76

    def test_grayscale_passthrough_is_same_object(self):
        img = gray([[5]])
        assert to_luma(img) is img

    @given(images(max_dim=6, depths=(8,)))
    def test_idempotent(self, img):
        once = to_luma(img)
        assert to_luma(once) == once

    @given(images(max_dim=6, channels=(1,), depths=(8, 16)))
    def test_replicated_channels_equal_gray(self, img):
        replicated = Image(np.repeat(img.pixels, 3, axis=2), img.bit_depth)
        assert to_luma(replicated) == img
        # the unrounded luma must match bit-exactly too (coefficients sum to 1)
        assert np.array_equal(luma_float(replicated).samples, to_float(img).samples)


class TestFloatConversions:
    def test_to_float_preserves_values(self):
        img = gray([[128]])
        f = to_float(img)
        assert f.samples[0, 0, 0] == 128.0 and f.peak == 255.0
        assert quantize(f, 8) == img

    def test_round_half_up(self):
        f = FloatImage(np.array([[[140.25]], [[140.5]]]), 255.0)
        assert list(quantize(f, 8).pixels[:, 0, 0]) == [140, 141]

    def test_clamping(self):
        f = FloatImage(np.array([[[-3.0]], [[300.0]]]), 255.0)
        assert list(quantize(f, 8).pixels[:, 0, 0]) == [0, 255]

    @given(images(max_dim=6))
    def test_quantize_to_float_identity(self, img):
        assert quantize(to_float(img), img.bit_depth) == img

    def test_depth_inferred_from_peak(self):
        f = FloatImage(np.array([[[70000.4]]]), 65535.0)
        img = quantize(f)
        assert img.bit_depth == 16 and int(img.pixels[0, 0, 0]) == 65535
