"""Learning step: one ridge factorization, then per-query weights.

The system matrix is K + n*lambda*I exactly as written -- lambda multiplies n,
so values are not comparable with the K + lambda*I convention used elsewhere.

The factorization happens once at fit time and is reused (read-only) for every
query; TrainedSurrogate is immutable and safe to share across threads.
"""

import json
from dataclasses import dataclass

import numpy as np

from . import kernels


@dataclass(frozen=True)
class TrainedSurrogate:
    X: np.ndarray
    Y: object  # opaque structured outputs, indexable, len n
    kernel: kernels.KernelSpec
    lam: float
    factor: kernels.SpdFactor

    @property
    def n(self):
        return self.factor.order


@dataclass(frozen=True)
class AlphaWeights:
    x: np.ndarray
    weights: np.ndarray


def fit(X, Y, kernel, lam):
    """Factor K + n*lambda*I for the training set; deterministic."""
    if lam <= 0 or not np.isfinite(lam):
        raise ValueError("lambda must be positive")
    if kernel.kind == "precomputed":
        X = np.asarray(X, dtype=int).ravel()
    else:
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
    n = X.shape[0]
    if n < 1 or len(Y) != n:
        raise ValueError(f"need |X| = |Y| >= 1, got {n} and {len(Y)}")
    K = kernels.gram_matrix(kernel, X)
    factor = kernels.factor_shifted(K, n * lam)
    return TrainedSurrogate(X=X, Y=Y, kernel=kernel, lam=float(lam), factor=factor)


def alpha_weights(model, x):
    """alpha(x) solving (K + n*lambda*I) alpha = K_x through the stored factor."""
    kx = kernels.cross_kernel(model.kernel, model.X, x)
    w = kernels.solve_spd(model.factor, kx)
    return AlphaWeights(x=np.asarray(x), weights=w)


def alpha_weights_batch(model, Xq):
    """(n, Q) weight matrix for a batch of Q queries; one triangular solve pair."""
    KX = kernels.cross_kernel_batch(model.kernel, model.X, Xq)
    return kernels.solve_spd(model.factor, KX)


def explicit_g_hat(model, embedding, x):
    """ghat(x) = sum_i alpha_i(x) psi(y_i) in canonical coordinates."""
    a = alpha_weights(model, x).weights
    return group_alpha(a, model.Y, embedding)


def group_alpha(weights, Y, embedding):
    g = np.zeros(len(embedding.labels))
    for ai, yi in zip(weights, Y):
        g[embedding.index_of(yi)] += ai
    return g


def surrogate_empirical_risk(model, embedding):
    """(1/n) sum_i ||ghat(x_i) - psi(y_i)||^2 over the training set."""
    n = model.n
    total = 0.0
    for i in range(n):
        g = explicit_g_hat(model, embedding, model.X[i])
        g[embedding.index_of(model.Y[i])] -= 1.0
        total += float(g @ g)
    return total / n


# ---------------------------------------------------------------------------
# Model blob: JSON with inputs, outputs, kernel spec and lambda.  The
# factorization is recomputed on load, which keeps the format portable.

FORMAT_NAME = "surrloss-model"
FORMAT_VERSION = 1

OUTPUT_KINDS = ("scalar", "label", "simplex", "ratings")


def _kernel_to_json(spec):
    if spec.kind == "gaussian":
        return {"kind": "gaussian", "sigma": spec.sigma}
    if spec.kind == "linear":
        return {"kind": "linear"}
    raise ValueError("precomputed kernels cannot be serialized")


def _kernel_from_json(obj):
    if obj["kind"] == "gaussian":
        return kernels.gaussian(obj["sigma"])
    if obj["kind"] == "linear":
        return kernels.linear()
    raise ValueError(f"unknown kernel kind {obj['kind']!r}")


def _outputs_to_json(Y, output_kind):
    if output_kind == "scalar":
        return [float(y) for y in Y]
    if output_kind == "label":
        return [y if isinstance(y, str) else int(y) for y in Y]
    return [np.asarray(y, dtype=float).tolist() for y in Y]


def _outputs_from_json(values, output_kind):
    if output_kind == "scalar":
        return np.asarray(values, dtype=float)
    if output_kind == "label":
        return list(values)
    return np.asarray(values, dtype=float)


def save_model(model, path, output_kind):
    if output_kind not in OUTPUT_KINDS:
        raise ValueError(f"output_kind must be one of {OUTPUT_KINDS}")
    blob = {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "kernel": _kernel_to_json(model.kernel),
        "lambda": model.lam,
        "x": np.asarray(model.X, dtype=float).tolist(),
        "y": {"kind": output_kind, "values": _outputs_to_json(model.Y, output_kind)},
    }
    with open(path, "w", encoding="utf-8") as f:
        json.dump(blob, f)


def load_model(path):
    """Returns (model, output_kind); refits the factorization."""
    with open(path, "r", encoding="utf-8") as f:
        blob = json.load(f)
    if blob.get("format") != FORMAT_NAME:
        raise ValueError(f"not a {FORMAT_NAME} blob")
    if blob.get("version") != FORMAT_VERSION:
        raise ValueError(f"unsupported model version {blob.get('version')}")
    kernel = _kernel_from_json(blob["kernel"])
    X = np.asarray(blob["x"], dtype=float)
    kind = blob["y"]["kind"]
    Y = _outputs_from_json(blob["y"]["values"], kind)
    model = fit(X, Y, kernel, blob["lambda"])
    return model, kind
