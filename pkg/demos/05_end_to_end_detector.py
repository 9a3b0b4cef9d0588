"""Synthetic images -> CNN features -> ELM tuned by ChOA -> thresholds and ROC."""
import tempfile

import numpy as np

from dcelm import data, elm, features, metrics, pipeline
from dcelm.core import OptimizerConfig
from dcelm.elm import ElmConfig

out = tempfile.mkdtemp()
records = data.load_manifest(data.make_synthetic(out, seed=0))
spec = features.parse_structure("in_6c_2p_12c_2p")
weights = features.frozen_weights(spec, seed=0)
F = features.extract_batch(np.stack([data.load_image(r.path) for r in records]), spec, weights)
y = np.array([r.label for r in records])
train = np.array([r.split == "train" for r in records])
print("features", F.shape, "positives in training split", y[train].sum())

T = elm.one_hot(y[train])
cfg = ElmConfig(spec.feature_dim, 10)
for opt in ("none", "choa"):
    det = pipeline.train(F[train], T, opt, cfg, OptimizerConfig(seed=0))
    epg = pipeline.predict_epg(det, F[~train])
    print(f"\n{opt}: training loss {det.training['final_loss']:.4f}  test AUC {metrics.roc_auc(y[~train], epg):.4f}")
    for th in (0.1, 0.2, 0.3, 0.4):
        cm = metrics.confusion(y[~train], pipeline.classify(epg, th))
        r = metrics.rates(cm)
        ci = metrics.confidence_interval(r["sensitivity"], cm.tp + cm.fn)
        print(f"  EPG >= {th}: sens {r['sensitivity']:.3f} +/- {ci:.3f}  spec {r['specificity']:.3f}")

# the trained detector round-trips through JSON
again = pipeline.TrainedDetector.from_dict(det.to_dict())
print("\nround trip identical:", np.array_equal(pipeline.predict_epg(again, F[~train]), epg))
