"""Frozen convolution + pooling stack turning 32x32 images into feature vectors."""
import numpy as np

from dcelm import data, features

spec = features.parse_structure("in_6c_2p_12c_2p")
print("shape chain:", " -> ".join("x".join(map(str, s)) for s in spec.shapes()))
print("feature length:", spec.feature_dim)

weights = features.frozen_weights(spec, seed=0)
rng = np.random.default_rng(0)
# bright spot up-left versus down-right, as in the two synthetic classes
blob = data.synth_image(rng, (12, 12))[None]
plain = data.synth_image(rng, (19, 19))[None]
f_blob = features.extract_features(blob, spec, weights)
f_plain = features.extract_features(plain, spec, weights)
print("features are bounded by tanh:", float(np.abs(f_blob).max()) <= 1.0)
print("distance between the two images:", np.linalg.norm(f_blob - f_plain))

# larger images are resized first; augmentation gives five views of one image
big = rng.random((1, 64, 48))
small = data.resize_bilinear(big, 32, 32)
views = data.augment(small, seed=3)
print("resized", big.shape, "->", small.shape, "; augmented views:", len(views))

# malformed structure strings name the offending token
try:
    features.parse_structure("in_6c_2p_12x_2p")
except ValueError as exc:
    print("error:", exc)
