import numpy as np
import pytest

import roix


def test_lossless_roundtrip_with_embedded_background():
    image, background, truth = roix.make_disk_phantom(96, 80, seed=3)
    assert image.dtype == np.uint8 and image.shape == (80, 96)
    for codec in ("store", "gzip", "zstd"):
        archive = roix.compress(image, codec=codec, error_bound=0.0, background=background, embed_background=True)
        assert archive[:4] == b"ROIX"
        back = roix.decompress(archive)
        np.testing.assert_array_equal(back, image)
        assert roix.ssim(image, back) == 1.0


def test_error_bound_holds_on_the_roi():
    image, background, _ = roix.make_disk_phantom(64, 64, seed=5)
    archive = roix.compress(image, codec="zstd", error_bound=5, background=background)
    info = roix.archive_info(archive)
    assert info["codec"] == "zstd" and info["e_abs"] == 5.0 and not info["has_background"]
    back = roix.decompress(archive, background=background)
    mask = np.zeros(image.shape, dtype=bool)
    for row, x0, x1 in info["geometry"]:
        mask[row, x0:x1] = True
    diff = np.abs(back.astype(int) - image.astype(int))
    assert diff[mask].max() <= 5
    assert (back[~mask] == background[~mask]).all()


def test_segmentation_matches_the_disk():
    image, background, truth = roix.make_disk_phantom(128, 128, background_noise=3.0, seed=7)
    sub = roix.subtract_background(image, background)
    seg = roix.segment(sub)
    scores = roix.overlap_metrics(seg["mask"], truth)
    assert scores["dsc"] >= 0.99
    assert seg["pixels"].size == int((seg["geometry"][:, 2] - seg["geometry"][:, 1]).sum())
    reduction = roix.spatial_reduction(seg["geometry"], 128, 128)
    assert reduction == pytest.approx(128 * 128 / seg["mask"].sum())


def test_quantizer_and_metrics_examples():
    values, groups = roix.quantize_abs(np.array([10, 12, 20], dtype=np.uint8), 2)
    assert values.tolist() == [11, 11, 20] and groups == [0, 2]
    assert roix.verify_bound(np.array([0], dtype=np.uint8), np.array([5], dtype=np.uint8), 1) == [0]
    a = np.zeros((5, 5), dtype=bool)
    b = np.zeros((5, 5), dtype=bool)
    a[0, 0] = True
    b[4, 3] = True
    assert roix.ahd(a, b) == 5.0
    hist = np.zeros(256, dtype=np.uint64)
    hist[10] = hist[200] = 50
    assert roix.multi_otsu(hist, 2) == [10]
    assert roix.compression_ratio(1000, 100) == 10.0


def test_sixteen_bit_images_and_files(tmp_path):
    image, background, _ = roix.make_disk_phantom(48, 48, depth=16, seed=2)
    assert image.dtype == np.uint16
    path = tmp_path / "p.pgm"
    roix.save_image(image, str(path))
    np.testing.assert_array_equal(roix.load_image(str(path)), image)
    norm, i_max = roix.normalize_intensity(image)
    assert norm.dtype == np.uint8 and norm.max() == 255 and i_max == image.max()


def test_errors_carry_codes():
    with pytest.raises(roix.RoixError) as err:
        roix.decompress(b"NOPE" + bytes(40))
    assert err.value.code == "bad_magic"
    image, background, _ = roix.make_disk_phantom(32, 32)
    archive = bytearray(roix.compress(image, background=background))
    archive[-1] ^= 0xFF
    with pytest.raises(roix.RoixError) as err:
        roix.decompress(bytes(archive))
    assert err.value.code == "crc_mismatch"
    with pytest.raises(roix.RoixError) as err:
        roix.compress(image, codec="sz3")
    assert err.value.code == "unimplemented_codec"
    with pytest.raises(roix.RoixError) as err:
        roix.subtract_background(image, background[:-1])
    assert err.value.code == "dimension_mismatch"
