"""Extreme learning machine: random hidden layer, output weights by pseudoinverse."""
import numpy as np

from dcelm import elm, linalg

rng = np.random.default_rng(0)

# a rank-deficient matrix still gets a pseudoinverse that obeys the four Penrose identities
A = rng.normal(size=(8, 3)) @ rng.normal(size=(3, 6))
P = linalg.pseudoinverse(A)
print("rank", np.linalg.matrix_rank(A), "->", [
    float(np.abs(A @ P @ A - A).max()), float(np.abs(P @ A @ P - P).max()),
    float(np.abs((A @ P).T - A @ P).max()), float(np.abs((P @ A).T - P @ A).max())])

# with as many hidden nodes as samples the ELM interpolates
X = rng.random((30, 4))
y = (X.sum(axis=1) > 2).astype(int)
T = elm.one_hot(y)
cfg = elm.ElmConfig(n_inputs=4, n_hidden=30)
W, b = elm.random_init(cfg, seed=1)
model = elm.fit(X, T, W, b)
print("training RMSE with L = N:", elm.rmse_loss(model, X, T))

# fewer nodes trade fit for generalisation
for L in (2, 5, 10, 20):
    W, b = elm.random_init(elm.ElmConfig(4, L), seed=1)
    m = elm.fit(X, T, W, b)
    acc = np.mean(elm.predict(m, X).argmax(axis=1) == 1 - y)
    print(f"L={L:2d}  rmse {elm.rmse_loss(m, X, T):.4f}  train acc {acc:.2f}")
