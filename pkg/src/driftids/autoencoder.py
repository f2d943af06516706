"""Single denoising-autoencoder anomaly detector.

One sigmoid hidden layer, squared-error reconstruction loss trained with
mini-batch gradient descent, RMSE anomaly score. The decision threshold
is the maximum reconstruction error over the training set, so no
training sample is flagged at the default multiplier.

Inputs are min-max normalized to [0, 1]. During :meth:`fit` the bounds
update online, sample by sample, in input order; afterwards they are
frozen, and execution-time values outside them clamp to [0, 1].
"""

import json
import math
from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from ._validation import as_float_matrix
from .exceptions import EmptyDataset

MODEL_FORMAT_VERSION = 1


def minmax_normalize(X, mins, maxs) -> np.ndarray:
    """Scale columns into [0, 1] with frozen bounds; equal bounds map to 0."""
    X = np.asarray(X, dtype=np.float64)
    mins = np.asarray(mins, dtype=np.float64)
    maxs = np.asarray(maxs, dtype=np.float64)
    denom = maxs - mins
    safe = np.where(denom > 0, denom, 1.0)
    out = np.where(denom > 0, (X - mins) / safe, 0.0)
    return np.clip(out, 0.0, 1.0)


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _forward(w_enc, b_enc, w_dec, b_dec, X):
    hidden = _sigmoid(X @ w_enc.T + b_enc)
    recon = _sigmoid(hidden @ w_dec.T + b_dec)
    return hidden, recon


def reconstruction_rmse(X, recon) -> np.ndarray:
    return np.sqrt(((X - recon) ** 2).mean(axis=1))


def _loss_and_grads(w_enc, b_enc, w_dec, b_dec, X_in, X_target):
    """Batch squared-error loss and its gradients.

    Loss is the batch mean of per-sample squared-error sums between the
    reconstruction of ``X_in`` and the clean target ``X_target``.
    """
    hidden, recon = _forward(w_enc, b_enc, w_dec, b_dec, X_in)
    diff = recon - X_target
    loss = float((diff ** 2).sum(axis=1).mean())
    g_recon = 2.0 * diff / len(X_in)
    gz2 = g_recon * recon * (1.0 - recon)
    g_wdec = gz2.T @ hidden
    g_bdec = gz2.sum(axis=0)
    gz1 = (gz2 @ w_dec) * hidden * (1.0 - hidden)
    g_wenc = gz1.T @ X_in
    g_benc = gz1.sum(axis=0)
    return loss, (g_wenc, g_benc, g_wdec, g_bdec)


class DenoisingAutoencoder(BaseEstimator):
    """Anomaly detector scoring inputs by reconstruction RMSE.

    Parameters
    ----------
    learning_rate : gradient-descent step size.
    hidden_ratio : hidden width as a fraction of input width (hidden
        dimension is ``ceil(hidden_ratio * n_features)``).
    noise_sigma : std of the additive Gaussian corruption applied to
        training inputs (targets stay clean); 0 disables denoising.
    epochs, batch_size : mini-batch schedule.
    seed : controls weight init, shuffling and corruption; identical
        data and parameters reproduce the model bit for bit.
    threshold_multiplier : prediction flags a sample anomalous when its
        score exceeds ``threshold_multiplier * threshold_``.
    """

    def __init__(self, learning_rate: float = 0.05, hidden_ratio: float = 0.75,
                 noise_sigma: float = 0.1, epochs: int = 1,
                 batch_size: int = 32, seed: int = 0,
                 threshold_multiplier: float = 1.0):
        self.learning_rate = learning_rate
        self.hidden_ratio = hidden_ratio
        self.noise_sigma = noise_sigma
        self.epochs = epochs
        self.batch_size = batch_size
        self.seed = seed
        self.threshold_multiplier = threshold_multiplier

    def _check_params(self):
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be > 0")
        if not 0 < self.hidden_ratio <= 1:
            raise ValueError("hidden_ratio must be in (0, 1]")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be >= 0")
        if self.epochs < 1 or self.batch_size < 1:
            raise ValueError("epochs and batch_size must be >= 1")

    def fit(self, X, y=None):
        self._check_params()
        X = np.asarray(X, dtype=np.float64)
        if X.size == 0:
            raise EmptyDataset("cannot train on an empty dataset")
        X = as_float_matrix(X)
        n, d = X.shape
        h = math.ceil(self.hidden_ratio * d)
        rng = np.random.default_rng(self.seed)
        limit = 1.0 / math.sqrt(d)
        w_enc = rng.uniform(-limit, limit, (h, d))
        b_enc = np.zeros(h)
        w_dec = rng.uniform(-limit, limit, (d, h))
        b_dec = np.zeros(d)

        # online bounds: each row is normalized with the bounds as of its
        # own arrival, mirroring streaming operation
        run_min = np.minimum.accumulate(X, axis=0)
        run_max = np.maximum.accumulate(X, axis=0)
        denom = run_max - run_min
        Xn = np.where(denom > 0, (X - run_min) / np.where(denom > 0, denom, 1.0), 0.0)

        lr = self.learning_rate
        curve = [self._mean_rmse(w_enc, b_enc, w_dec, b_dec, Xn)]
        for _ in range(self.epochs):
            perm = rng.permutation(n)
            for start in range(0, n, self.batch_size):
                idx = perm[start:start + self.batch_size]
                clean = Xn[idx]
                if self.noise_sigma > 0:
                    corrupted = np.clip(
                        clean + rng.normal(0.0, self.noise_sigma, clean.shape),
                        0.0, 1.0)
                else:
                    corrupted = clean
                _, grads = _loss_and_grads(w_enc, b_enc, w_dec, b_dec,
                                           corrupted, clean)
                w_enc -= lr * grads[0]
                b_enc -= lr * grads[1]
                w_dec -= lr * grads[2]
                b_dec -= lr * grads[3]
            curve.append(self._mean_rmse(w_enc, b_enc, w_dec, b_dec, Xn))

        self.input_dim_ = d
        self.hidden_dim_ = h
        self.w_enc_, self.b_enc_ = w_enc, b_enc
        self.w_dec_, self.b_dec_ = w_dec, b_dec
        self.feature_mins_ = run_min[-1].copy()
        self.feature_maxs_ = run_max[-1].copy()
        self.loss_curve_ = curve
        # threshold under execution-time (frozen-bounds) normalization, so
        # re-scoring the training set can never exceed it
        Xf = minmax_normalize(X, self.feature_mins_, self.feature_maxs_)
        _, recon = _forward(w_enc, b_enc, w_dec, b_dec, Xf)
        self.threshold_ = float(reconstruction_rmse(Xf, recon).max())
        return self

    @staticmethod
    def _mean_rmse(w_enc, b_enc, w_dec, b_dec, Xn) -> float:
        _, recon = _forward(w_enc, b_enc, w_dec, b_dec, Xn)
        return float(reconstruction_rmse(Xn, recon).mean())

    def _check_fitted(self):
        if not hasattr(self, "threshold_"):
            raise NotFittedError(
                "this DenoisingAutoencoder instance is not fitted yet")

    def score_samples(self, X) -> np.ndarray:
        """Reconstruction RMSE per row (higher = more anomalous)."""
        self._check_fitted()
        X = as_float_matrix(X, n_features=self.input_dim_)
        Xn = minmax_normalize(X, self.feature_mins_, self.feature_maxs_)
        _, recon = _forward(self.w_enc_, self.b_enc_, self.w_dec_, self.b_dec_, Xn)
        return reconstruction_rmse(Xn, recon)

    def predict(self, X) -> np.ndarray:
        """0 for normal, 1 for anomalous."""
        scores = self.score_samples(X)
        return (scores > self.threshold_multiplier * self.threshold_).astype(np.int64)

    # -- persistence -------------------------------------------------------

    def save(self, path) -> None:
        """Write the fitted model as a versioned JSON document.

        Fields: ``format_version``; ``params`` (constructor arguments);
        ``input_dim``/``hidden_dim``; weight matrices ``w_enc`` (hidden x
        input) and ``w_dec`` (input x hidden) with bias vectors ``b_enc``
        and ``b_dec``; per-feature normalization bounds ``feature_mins``
        and ``feature_maxs``; the anomaly ``threshold``; the per-epoch
        ``loss_curve``.
        """
        self._check_fitted()
        doc = {
            "format_version": MODEL_FORMAT_VERSION,
            "params": self.get_params(),
            "input_dim": self.input_dim_,
            "hidden_dim": self.hidden_dim_,
            "w_enc": self.w_enc_.tolist(),
            "b_enc": self.b_enc_.tolist(),
            "w_dec": self.w_dec_.tolist(),
            "b_dec": self.b_dec_.tolist(),
            "feature_mins": self.feature_mins_.tolist(),
            "feature_maxs": self.feature_maxs_.tolist(),
            "threshold": self.threshold_,
            "loss_curve": self.loss_curve_,
        }
        Path(path).write_text(json.dumps(doc, indent=1) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path) -> "DenoisingAutoencoder":
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        version = doc.get("format_version")
        if version != MODEL_FORMAT_VERSION:
            raise ValueError(f"unsupported model format_version {version!r}")
        model = cls(**doc["params"])
        model.input_dim_ = int(doc["input_dim"])
        model.hidden_dim_ = int(doc["hidden_dim"])
        model.w_enc_ = np.asarray(doc["w_enc"], dtype=np.float64)
        model.b_enc_ = np.asarray(doc["b_enc"], dtype=np.float64)
        model.w_dec_ = np.asarray(doc["w_dec"], dtype=np.float64)
        model.b_dec_ = np.asarray(doc["b_dec"], dtype=np.float64)
        model.feature_mins_ = np.asarray(doc["feature_mins"], dtype=np.float64)
        model.feature_maxs_ = np.asarray(doc["feature_maxs"], dtype=np.float64)
        model.threshold_ = float(doc["threshold"])
        model.loss_curve_ = [float(x) for x in doc["loss_curve"]]
        return model
