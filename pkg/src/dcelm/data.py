"""Dataset ingestion and file formats: CSV manifests, binary PGM images,
bilinear resizing, augmentation, the binary feature-matrix file and the
built-in synthetic dataset.
"""

import csv
import os
import struct
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InvalidInputError, LoadError

POSITIVE_LABELS = {"covid", "positive", "1"}
NEGATIVE_LABELS = {"normal", "pneumonia", "negative", "0"}
SPLITS = {"train", "test"}

FEATURE_MAGIC = b"DCEF"
_FEATURE_HEADER = struct.Struct("<4sII")


class ManifestError(LoadError):
    def __init__(self, message, line=None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class ImageFormatError(LoadError):
    pass


@dataclass(frozen=True)
class Record:
    path: str
    label: int  # 1 positive, 0 negative
    split: str
    raw_label: str = ""


def parse_label(text):
    t = text.strip().lower()
    if t in POSITIVE_LABELS:
        return 1
    if t in NEGATIVE_LABELS:
        return 0
    return None


def load_manifest(path):
    """Read a ``path,label,split`` CSV; paths are resolved against the manifest's directory."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ManifestError(f"cannot read manifest {path}: {exc}") from exc
    rows = list(csv.reader(text.splitlines()))
    rows = [r for r in rows if any(cell.strip() for cell in r)]
    if not rows:
        raise ManifestError("no records")
    header = [h.strip().lower() for h in rows[0]]
    missing = {"path", "label", "split"} - set(header)
    if missing:
        raise ManifestError(f"missing columns: {', '.join(sorted(missing))}", line=1)
    col = {name: header.index(name) for name in ("path", "label", "split")}
    records, seen = [], set()
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) < len(header):
            raise ManifestError(f"expected {len(header)} fields, got {len(row)}", line=lineno)
        p = row[col["path"]].strip()
        raw = row[col["label"]].strip()
        split = row[col["split"]].strip().lower()
        label = parse_label(raw)
        if label is None:
            raise ManifestError(f"unknown label {raw!r}", line=lineno)
        if split not in SPLITS:
            raise ManifestError(f"unknown split {split!r}", line=lineno)
        resolved = str((path.parent / p).resolve()) if not os.path.isabs(p) else p
        if resolved in seen:
            raise ManifestError(f"duplicate path {p!r}", line=lineno)
        seen.add(resolved)
        records.append(Record(resolved, label, split, raw.lower()))
    if not records:
        raise ManifestError("no records")
    train_labels = {r.label for r in records if r.split == "train"}
    if train_labels and train_labels != {0, 1}:
        raise ManifestError("train split must contain both positive and negative records")
    return records


def _pgm_tokens(buf, count):
    """Read ``count`` whitespace-separated header tokens, skipping comments."""
    tokens, i = [], 0
    while len(tokens) < count:
        while i < len(buf) and buf[i:i + 1].isspace():
            i += 1
        if i < len(buf) and buf[i:i + 1] == b"#":
            while i < len(buf) and buf[i:i + 1] not in (b"\n", b"\r"):
                i += 1
            continue
        start = i
        while i < len(buf) and not buf[i:i + 1].isspace() and buf[i:i + 1] != b"#":
            i += 1
        if start == i:
            raise ImageFormatError("truncated PGM header")
        tokens.append(buf[start:i])
    return tokens, i + 1  # exactly one whitespace byte ends the header


def decode_pgm(buf):
    if buf[:2] != b"P5":
        raise ImageFormatError(f"unsupported format {buf[:2]!r}: only binary PGM (P5) is read")
    (magic, w, h, maxval), offset = _pgm_tokens(buf, 4)
    try:
        w, h, maxval = int(w), int(h), int(maxval)
    except ValueError as exc:
        raise ImageFormatError(f"bad PGM header: {exc}") from exc
    if w < 1 or h < 1:
        raise ImageFormatError(f"bad PGM size {w}x{h}")
    if maxval != 255:
        raise ImageFormatError(f"maxval must be 255, got {maxval}")
    payload = buf[offset:offset + w * h]
    if len(payload) < w * h:
        raise ImageFormatError(f"truncated PGM payload: {len(payload)} of {w * h} bytes")
    return np.frombuffer(payload, dtype=np.uint8).reshape(1, h, w).astype(np.float64) / 255.0


def load_image(path):
    """1 x H x W tensor with values in [0, 1]."""
    try:
        buf = Path(path).read_bytes()
    except OSError as exc:
        raise ImageFormatError(f"cannot read {path}: {exc}") from exc
    try:
        return decode_pgm(buf)
    except ImageFormatError as exc:
        raise ImageFormatError(f"{path}: {exc}") from exc


def encode_pgm(img):
    img = np.asarray(img)
    if img.ndim == 3:
        img = img[0]
    data = np.clip(np.rint(img * 255.0), 0, 255).astype(np.uint8)
    h, w = data.shape
    return b"P5\n%d %d\n255\n" % (w, h) + data.tobytes()


def resize_bilinear(img, h, w):
    """Bilinear resampling with half-pixel centres; ``img`` is (H, W) or (C, H, W)."""
    img = np.asarray(img, dtype=np.float64)
    squeeze = img.ndim == 2
    x = img[None] if squeeze else img
    H, W = x.shape[-2:]
    if H < 1 or W < 1 or h < 1 or w < 1:
        raise InvalidInputError("sizes must be >= 1")

    def axis(n_out, n_in):
        src = np.clip((np.arange(n_out) + 0.5) * (n_in / n_out) - 0.5, 0.0, n_in - 1)
        i0 = np.floor(src).astype(int)
        i1 = np.minimum(i0 + 1, n_in - 1)
        return i0, i1, src - i0

    y0, y1, fy = axis(h, H)
    x0, x1, fx = axis(w, W)
    top = x[:, y0][:, :, x0] * (1 - fx) + x[:, y0][:, :, x1] * fx
    bot = x[:, y1][:, :, x0] * (1 - fx) + x[:, y1][:, :, x1] * fx
    out = np.clip(top * (1 - fy)[:, None] + bot * fy[:, None], 0.0, 1.0)
    return out[0] if squeeze else out


def hflip(img):
    return np.asarray(img)[..., ::-1].copy()


def translate(img, dy, dx):
    """Integer shift with zero fill."""
    img = np.asarray(img, dtype=np.float64)
    out = np.zeros_like(img)
    H, W = img.shape[-2:]
    ys, yd = (slice(0, H - dy), slice(dy, H)) if dy >= 0 else (slice(-dy, H), slice(0, H + dy))
    xs, xd = (slice(0, W - dx), slice(dx, W)) if dx >= 0 else (slice(-dx, W), slice(0, W + dx))
    out[..., yd, xd] = img[..., ys, xs]
    return out


def augment(img, seed, max_shift=3):
    """Original, horizontal flip and three random non-zero shifts of up to ``max_shift`` px."""
    rng = np.random.default_rng(seed)
    shifts = [(dy, dx) for dy in range(-max_shift, max_shift + 1)
              for dx in range(-max_shift, max_shift + 1) if (dy, dx) != (0, 0)]
    picks = rng.choice(len(shifts), size=3, replace=False)
    img = np.asarray(img, dtype=np.float64)
    return [img.copy(), hflip(img)] + [translate(img, *shifts[k]) for k in picks]


def atomic_write(path, data):
    """Write bytes or text via a temporary file and rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if isinstance(data, str):
        data = data.encode()
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def encode_features(matrix):
    m = np.ascontiguousarray(matrix, dtype="<f8")
    if m.ndim != 2:
        raise InvalidInputError("feature matrix must be 2-D")
    return _FEATURE_HEADER.pack(FEATURE_MAGIC, m.shape[0], m.shape[1]) + m.tobytes()


def decode_features(buf):
    if len(buf) < _FEATURE_HEADER.size:
        raise LoadError("feature file shorter than its header")
    magic, rows, cols = _FEATURE_HEADER.unpack_from(buf)
    if magic != FEATURE_MAGIC:
        raise LoadError(f"bad feature file magic {magic!r}")
    need = rows * cols * 8
    body = buf[_FEATURE_HEADER.size:]
    if len(body) != need:
        raise LoadError(f"feature payload is {len(body)} bytes, expected {need}")
    return np.frombuffer(body, dtype="<f8").reshape(rows, cols).astype(np.float64)


def write_features(path, matrix):
    atomic_write(path, encode_features(matrix))


def read_features(path):
    try:
        buf = Path(path).read_bytes()
    except OSError as exc:
        raise LoadError(f"cannot read feature file {path}: {exc}") from exc
    return decode_features(buf)


def synth_image(rng, center, size=32, sigma=3.0, noise=0.08):
    yy, xx = np.mgrid[0:size, 0:size]
    blob = np.exp(-((yy - center[0]) ** 2 + (xx - center[1]) ** 2) / (2 * sigma**2))
    img = 0.15 + 0.7 * blob + rng.normal(0.0, noise, (size, size))
    return np.clip(img, 0.0, 1.0)


SYNTH_MEANS = {1: (12.0, 12.0), 0: (19.0, 19.0)}
SYNTH_SPREAD = 2.0


def make_synthetic(out_dir, n_train=200, n_test=200, seed=0, size=32):
    """Two-class images whose blob centre is drawn from a class-specific Gaussian.

    The two position clouds are about five standard deviations apart, so a
    good detector gets close to, but not always exactly, 100%. Writes PGM
    files plus ``manifest.csv`` and returns the manifest path.
    """
    out_dir = Path(out_dir)
    rng = np.random.default_rng(seed)
    lines = ["path,label,split"]
    for split, n in (("train", n_train), ("test", n_test)):
        labels = np.array([1] * (n // 2) + [0] * (n - n // 2))
        rng.shuffle(labels)
        for i, label in enumerate(labels):
            center = np.array(SYNTH_MEANS[int(label)]) + rng.normal(0.0, SYNTH_SPREAD, 2)
            img = synth_image(rng, center, size)
            name = f"{split}/{i:04d}.pgm"
            atomic_write(out_dir / name, encode_pgm(img))
            lines.append(f"{name},{'positive' if label else 'negative'},{split}")
    manifest = out_dir / "manifest.csv"
    atomic_write(manifest, "\n".join(lines) + "\n")
    return manifest
