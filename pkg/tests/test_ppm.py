import numpy as np
import pytest

from cropmae.errors import FormatError
from cropmae.views import load_keypoints, load_pgm, load_ppm, save_keypoints, save_pgm, save_ppm


def test_ppm_roundtrip_quantization(tmp_path):
    rng = np.random.default_rng(0)
    img = rng.uniform(0, 1, size=(13, 9, 3)).astype(np.float32)
    path = tmp_path / "img.ppm"
    save_ppm(img, path)
    back = load_ppm(path)
    assert back.shape == img.shape
    assert np.abs(back - img).max() <= 1.0 / 255.0 + 1e-7


def test_ppm_white_black_scaling(tmp_path):
    img = np.array([[[1.0, 1.0, 1.0], [0.0, 0.0, 0.0]]], dtype=np.float32)
    path = tmp_path / "bw.ppm"
    save_ppm(img, path)
    back = load_ppm(path)
    np.testing.assert_allclose(back.reshape(-1), [255, 255, 255, 0, 0, 0] / np.float32(255))


def test_ppm_rejects_p5_for_color(tmp_path):
    path = tmp_path / "gray.pgm"
    save_pgm(np.zeros((2, 2), dtype=np.uint8), path)
    with pytest.raises(FormatError) as err:
        load_ppm(path)
    assert "P6" in str(err.value)


def test_ppm_truncated_payload_reports_offset(tmp_path):
    path = tmp_path / "trunc.ppm"
    save_ppm(np.zeros((4, 4, 3), dtype=np.float32), path)
    data = path.read_bytes()
    path.write_bytes(data[:-10])
    with pytest.raises(FormatError) as err:
        load_ppm(path)
    assert "offset" in str(err.value)


def test_ppm_handles_comments(tmp_path):
    path = tmp_path / "comment.ppm"
    path.write_bytes(b"P6 # a comment\n2 1\n255\n" + bytes([255, 0, 0, 0, 255, 0]))
    img = load_ppm(path)
    assert img.shape == (1, 2, 3)
    np.testing.assert_allclose(img[0, 0], [1.0, 0.0, 0.0])


def test_pgm_roundtrip(tmp_path):
    labels = np.array([[0, 1], [2, 3]], dtype=np.uint8)
    path = tmp_path / "m.pgm"
    save_pgm(labels, path)
    np.testing.assert_array_equal(load_pgm(path), labels)


def test_keypoints_roundtrip(tmp_path):
    pts = [(1, 3.0, 4.5), (2, 10.0, 0.0)]
    path = tmp_path / "kp.txt"
    save_keypoints(pts, path)
    back = load_keypoints(path)
    assert back == [(1, 3.0, 4.5), (2, 10.0, 0.0)]
