import numpy as np
import pytest

from dcelm import data, features


@pytest.fixture(scope="session")
def synth_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("synth")
    manifest = data.make_synthetic(out, n_train=200, n_test=200, seed=0)
    return out, manifest


@pytest.fixture(scope="session")
def synth_features(synth_dir):
    """CNN features of the synthetic set: (F_train, y_train, F_test, y_test)."""
    _, manifest = synth_dir
    records = data.load_manifest(manifest)
    spec = features.parse_structure("in_6c_2p_12c_2p")
    weights = features.frozen_weights(spec, seed=0)
    imgs = np.stack([data.resize_bilinear(data.load_image(r.path), 32, 32) for r in records])
    F = features.extract_batch(imgs, spec, weights)
    y = np.array([r.label for r in records])
    train = np.array([r.split == "train" for r in records])
    return F[train], y[train], F[~train], y[~train]


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(RESULTS):
        ok, title, detail = RESULTS[n]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {n:2d}. {title}: {detail}")
