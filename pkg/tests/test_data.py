import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dcelm import data
from dcelm.data import ImageFormatError, ManifestError
from dcelm.errors import LoadError


def write(path, text):
    path.write_text(text)
    return path


def test_manifest_three_records(tmp_path):
    m = write(tmp_path / "m.csv", "path,label,split\na.pgm,COVID,train\nb.pgm,normal,train\nc.pgm,pneumonia,test\n")
    recs = data.load_manifest(m)
    assert [r.label for r in recs] == [1, 0, 0]
    assert [r.split for r in recs] == ["train", "train", "test"]
    assert recs[2].raw_label == "pneumonia"
    assert recs[0].path == str((tmp_path / "a.pgm").resolve())


@pytest.mark.parametrize("text,match,line", [
    ("path,label,split\na.pgm,maybe,train\n", "maybe", 2),
    ("", "no records", None),
    ("path,label,split\n", "no records", None),
    ("path,label\na.pgm,1\n", "missing columns: split", 1),
    ("path,label,split\na.pgm,1,train\nb.pgm,0,train\na.pgm,0,test\n", "duplicate", 4),
    ("path,label,split\na.pgm,1,train\nb.pgm,0,valid\n", "split", 3),
    ("path,label,split\na.pgm,1,train\nb.pgm,1,train\n", "both", None),
])
def test_manifest_errors(tmp_path, text, match, line):
    with pytest.raises(ManifestError, match=match) as info:
        data.load_manifest(write(tmp_path / "m.csv", text))
    assert info.value.line == line


def test_pgm_values(tmp_path):
    p = tmp_path / "x.pgm"
    p.write_bytes(b"P5\n2 2\n255\n" + bytes([0, 255, 128, 64]))
    img = data.load_image(p)
    assert img.shape == (1, 2, 2)
    np.testing.assert_allclose(img.ravel(), [0, 1, 128 / 255, 64 / 255])
    assert img[0, 1, 0] == pytest.approx(0.50196, abs=1e-5)


def test_pgm_header_comments(tmp_path):
    p = tmp_path / "c.pgm"
    p.write_bytes(b"P5\n# made by hand\n3 1\n# max\n255\n" + bytes([1, 2, 3]))
    assert data.load_image(p).shape == (1, 1, 3)


@pytest.mark.parametrize("blob,match", [
    (b"P2\n2 2\n255\n0 1 2 3\n", "P5"),
    (b"P5\n2 2\n255\n\x00\x01", "truncated"),
    (b"P5\n2 2\n65535\n" + bytes(8), "maxval"),
    (b"P5\n2", "header"),
])
def test_pgm_errors(tmp_path, blob, match):
    p = tmp_path / "bad.pgm"
    p.write_bytes(blob)
    with pytest.raises(ImageFormatError, match=match):
        data.load_image(p)


def test_pgm_encode_round_trip():
    img = np.random.default_rng(0).integers(0, 256, (1, 5, 7)) / 255.0
    np.testing.assert_allclose(data.decode_pgm(data.encode_pgm(img)), img, atol=1e-15)


def test_resize_examples():
    img = np.random.default_rng(1).random((1, 9, 6))
    np.testing.assert_allclose(data.resize_bilinear(img, 9, 6), img, atol=1e-12)
    np.testing.assert_allclose(data.resize_bilinear(np.full((1, 5, 5), 0.3), 32, 32), 0.3, atol=1e-15)
    checker = np.array([[[0.0, 1.0], [1.0, 0.0]]])
    assert data.resize_bilinear(checker, 1, 1)[0, 0, 0] == pytest.approx(0.5)


def test_resize_half_pixel_upsample_oracle():
    # 1x2 -> 1x4: centres at x = -0.25, 0.25, 0.75, 1.25 in source pixels (clamped)
    out = data.resize_bilinear(np.array([[0.0, 1.0]]), 1, 4)
    np.testing.assert_allclose(out, [[0.0, 0.25, 0.75, 1.0]])


@settings(max_examples=30, deadline=None)
@given(h=st.integers(1, 40), w=st.integers(1, 40), seed=st.integers(0, 1000))
def test_resize_range(h, w, seed):
    img = np.random.default_rng(seed).random((1, 13, 17))
    out = data.resize_bilinear(img, h, w)
    assert out.shape == (1, h, w)
    assert out.min() >= img.min() - 1e-12 and out.max() <= img.max() + 1e-12


def test_augment_five_fold():
    img = np.random.default_rng(2).random((1, 32, 32))
    out = data.augment(img, seed=5)
    assert len(out) == 5
    np.testing.assert_array_equal(out[0], img)
    np.testing.assert_array_equal(data.hflip(out[1]), img)
    for v in out:
        assert v.shape == img.shape and v.min() >= 0 and v.max() <= 1
    again = data.augment(img, seed=5)
    for a, b in zip(out, again):
        np.testing.assert_array_equal(a, b)


def test_translate_zero_fill():
    img = np.arange(9.0).reshape(1, 3, 3)
    out = data.translate(img, 1, -1)
    np.testing.assert_array_equal(out[0], [[0, 0, 0], [1, 2, 0], [4, 5, 0]])


def test_feature_file_round_trip(tmp_path):
    m = np.random.default_rng(3).normal(size=(4, 3))
    m[0, 0] = np.nextafter(1.0, 2.0)
    path = tmp_path / "f.bin"
    data.write_features(path, m)
    raw = path.read_bytes()
    assert raw[:4] == b"DCEF"
    assert int.from_bytes(raw[4:8], "little") == 4
    assert int.from_bytes(raw[8:12], "little") == 3
    assert len(raw) == 12 + 4 * 3 * 8
    np.testing.assert_array_equal(data.read_features(path), m)


def test_feature_file_errors(tmp_path):
    with pytest.raises(LoadError, match="magic"):
        data.decode_features(b"XXXX" + bytes(8))
    with pytest.raises(LoadError, match="payload"):
        data.decode_features(data.encode_features(np.ones((2, 2)))[:-1])
    with pytest.raises(LoadError):
        data.read_features(tmp_path / "missing.bin")


def test_atomic_write_leaves_no_temp(tmp_path):
    data.atomic_write(tmp_path / "sub" / "a.txt", "hello")
    assert (tmp_path / "sub" / "a.txt").read_text() == "hello"
    assert [p.name for p in (tmp_path / "sub").iterdir()] == ["a.txt"]


def test_synthetic_dataset(synth_dir):
    out, manifest = synth_dir
    recs = data.load_manifest(manifest)
    assert len(recs) == 400
    train = [r for r in recs if r.split == "train"]
    assert sum(r.label for r in train) == 100
    assert data.load_image(recs[0].path).shape == (1, 32, 32)
