"""Traffic-drift detection and detector hyperparameter adaptation.

Once ground-truth labels for a data chunk are released, a pool of
detectors (each trained with the current hyperparameters on bootstrap
samples of the last training chunk) votes on every chunk sample. The
update index blends the committee's prediction instability with its
prediction error:

    index = weight * PopVar(votes) + (1 - weight) * Mean(|vote - label|)

averaged over the chunk. When the index crosses the configured trigger
relative to the previous chunk's value, new hyperparameters are picked
from a grid and the detector retrains on the fresh normal samples.

Drift events serialize as line-delimited JSON records with keys
``chunk_id``, ``uidx``, ``prev_uidx``, ``updated``, ``selected_hyper``.
"""

from dataclasses import dataclass, field

import numpy as np
from sklearn.exceptions import NotFittedError

from ._validation import as_binary_vector, as_float_matrix
from .autoencoder import DenoisingAutoencoder
from .exceptions import EmptyChunk, NoNormalSamples

TRIGGERS = ("less_than", "greater_than")


@dataclass
class LabeledChunk:
    """A block of feature vectors with released 0/1 ground truth."""

    features: np.ndarray
    labels: np.ndarray
    chunk_id: int = 0

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=np.float64)
        if self.features.size == 0:
            raise EmptyChunk("chunk has no samples")
        self.features = as_float_matrix(self.features, name="features")
        self.labels = as_binary_vector(self.labels, n=len(self.features),
                                       name="labels")

    def __len__(self) -> int:
        return len(self.features)

    @property
    def normal_features(self) -> np.ndarray:
        return self.features[self.labels == 0]


@dataclass
class UpdateIndexParams:
    """Committee configuration for the update index.

    ``samples_per_model=None`` means min(256, chunk size) at pool-build
    time; explicit values are used as-is (bootstrap sampling, so they may
    exceed the normal subset).
    """

    pool_size: int = 10
    committee_size: int = 5
    samples_per_model: int | None = None
    stability_weight: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if not self.pool_size >= self.committee_size >= 2:
            raise ValueError("need pool_size >= committee_size >= 2")
        if self.samples_per_model is not None and self.samples_per_model < 1:
            raise ValueError("samples_per_model must be >= 1")
        if not 0 <= self.stability_weight <= 1:
            raise ValueError("stability_weight must be in [0, 1]")
        if self.seed < 0:
            raise ValueError("seed must be >= 0")


def default_grid() -> list[dict]:
    """Candidate hyperparameter overrides, in tie-break order."""
    return [{"learning_rate": lr, "hidden_ratio": hr}
            for lr in (0.1, 0.05, 0.01, 0.005, 0.001)
            for hr in (0.5, 0.75)]


def build_pool(train_chunk: LabeledChunk, model_params: dict,
               params: UpdateIndexParams) -> list[DenoisingAutoencoder]:
    """Train ``pool_size`` detectors on bootstrap samples of the normal subset."""
    normal = train_chunk.normal_features
    if len(normal) == 0:
        raise NoNormalSamples("training chunk has no normal-labeled samples")
    m = params.samples_per_model
    if m is None:
        m = min(256, len(train_chunk))
    pool = []
    for k in range(params.pool_size):
        rng = np.random.default_rng(np.random.SeedSequence((params.seed, 0, k)))
        idx = rng.integers(0, len(normal), size=m)
        member_seed = int(rng.integers(0, 2**63 - 1))
        member = DenoisingAutoencoder(**{**model_params, "seed": member_seed})
        pool.append(member.fit(normal[idx]))
    return pool


def compute_update_index(pool, chunk: LabeledChunk,
                         params: UpdateIndexParams) -> float:
    """Mean per-sample stability/error blend over the chunk."""
    if len(chunk) == 0:
        raise EmptyChunk("cannot score an empty chunk")
    if params.committee_size > len(pool):
        raise ValueError("committee_size exceeds pool size")
    rng = np.random.default_rng(np.random.SeedSequence((params.seed, 1)))
    members = rng.choice(len(pool), size=params.committee_size, replace=False)
    votes = np.stack([pool[i].predict(chunk.features) for i in members])
    votes = votes.astype(np.float64)
    variance = votes.var(axis=0)  # population variance across the committee
    error = np.abs(votes - chunk.labels[None, :]).mean(axis=0)
    w = params.stability_weight
    return float((w * variance + (1.0 - w) * error).mean())


def select_hyperparameters(grid, chunk: LabeledChunk,
                           train_chunk: LabeledChunk,
                           base_params: dict) -> dict:
    """Pick the grid entry whose retrained detector errs least on the chunk.

    Candidates train on the normal samples of chunk + training chunk and
    are scored by mean 0/1 prediction error against the chunk's labels;
    ties go to the earlier grid entry.
    """
    grid = list(grid)
    if not grid:
        raise ValueError("hyperparameter grid is empty")
    X = np.vstack([chunk.normal_features, train_chunk.normal_features])
    if len(X) == 0:
        raise NoNormalSamples("no normal-labeled samples to retrain on")
    best = None
    best_err = None
    for candidate in grid:
        model = DenoisingAutoencoder(**{**base_params, **candidate})
        model.fit(X)
        err = float(np.abs(model.predict(chunk.features) - chunk.labels).mean())
        if best_err is None or err < best_err:
            best, best_err = candidate, err
    return dict(best)


@dataclass
class DriftDecision:
    chunk_id: int
    update_index: float | None
    previous_index: float | None
    updated: bool
    selected: dict | None

    def to_log_dict(self) -> dict:
        return {
            "chunk_id": self.chunk_id,
            "uidx": self.update_index,
            "prev_uidx": self.previous_index,
            "updated": self.updated,
            "selected_hyper": self.selected,
        }


class DriftAdapter:
    """Stateful controller deciding per chunk whether to retrain.

    The first observed chunk only records an index (bootstrap). The pool
    is rebuilt lazily whenever the training chunk was renewed by an
    update. Single-threaded per instance; ``model`` is replaced, never
    mutated, so a reference taken before an update stays valid.
    """

    def __init__(self, model: DenoisingAutoencoder, train_chunk: LabeledChunk,
                 grid=None, params: UpdateIndexParams | None = None,
                 trigger: str = "less_than"):
        if not hasattr(model, "threshold_"):
            raise NotFittedError("DriftAdapter needs a fitted detector")
        if trigger not in TRIGGERS:
            raise ValueError(f"trigger must be one of {TRIGGERS}")
        self.model = model
        self.train_chunk = train_chunk
        self.grid = list(grid) if grid is not None else default_grid()
        self.params = params if params is not None else UpdateIndexParams()
        self.trigger = trigger
        self.previous_index: float | None = None
        self.history: list[DriftDecision] = []
        self._pool = None

    def _fires(self, index: float, previous: float) -> bool:
        if self.trigger == "less_than":
            return index < previous
        return index > previous

    def observe(self, chunk: LabeledChunk) -> DriftDecision:
        """Score one chunk and retrain when the trigger condition holds."""
        if self._pool is None:
            self._pool = build_pool(self.train_chunk, self.model.get_params(),
                                    self.params)
        index = compute_update_index(self._pool, chunk, self.params)
        previous = self.previous_index
        updated = False
        selected = None
        if previous is not None and self._fires(index, previous):
            selected = select_hyperparameters(self.grid, chunk,
                                              self.train_chunk,
                                              self.model.get_params())
            X = np.vstack([chunk.normal_features,
                           self.train_chunk.normal_features])
            model = DenoisingAutoencoder(
                **{**self.model.get_params(), **selected})
            self.model = model.fit(X)
            self.train_chunk = chunk
            self._pool = None  # renewed training chunk: rebuild next time
            updated = True
        self.previous_index = index
        decision = DriftDecision(chunk.chunk_id, index, previous, updated,
                                 selected)
        self.history.append(decision)
        return decision
