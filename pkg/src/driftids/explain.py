"""Decision-tree surrogates for a blackbox detector, with a trust report.

A student tree imitates the blackbox: each inner iteration trains a CART
on an oracle-labeled sample of the data, then augments the next
iteration's sample with the rows the current student got wrong. The best
tree of each inner loop (by fidelity on the full dataset) is pruned to
its top-k heaviest branches, and the most stable pruned tree across
outer iterations (highest mean pairwise agreement) is reported.

Fidelity is the R-squared between the blackbox's predictions and the
tree's.
"""

import json
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from ._validation import as_float_matrix
from .exceptions import EmptyDataset, LengthMismatch
from .features import FEATURE_COUNT, FEATURE_NAMES
from .tree import DecisionTree, fit_tree, render_tree, top_k_prune

REPORT_FORMAT_VERSION = 1


def fidelity(blackbox_preds, tree_preds) -> float:
    """R-squared of ``tree_preds`` against ``blackbox_preds``.

    A constant blackbox makes the usual denominator 0; that degenerate
    case reports 1.0 for an exact match and 0.0 otherwise.
    """
    b = np.asarray(blackbox_preds, dtype=np.float64)
    d = np.asarray(tree_preds, dtype=np.float64)
    if len(b) != len(d):
        raise LengthMismatch(f"lengths differ: {len(b)} vs {len(d)}")
    if len(b) == 0:
        raise LengthMismatch("need at least one prediction")
    ss_res = float(((b - d) ** 2).sum())
    ss_tot = float(((b - b.mean()) ** 2).sum())
    if ss_tot == 0.0:
        return 1.0 if ss_res == 0.0 else 0.0
    return 1.0 - ss_res / ss_tot


def feature_usage(tree: DecisionTree, X, feature_names=None):
    """(name, routed sample count) per split feature, heaviest first."""
    if feature_names is None:
        feature_names = [f"f{i}" for i in range(tree.n_features)]
    counts = tree.routed_counts(X)
    usage: dict[int, int] = {}
    for i in range(tree.node_count):
        f = int(tree.feature[i])
        if f >= 0:
            usage[f] = usage.get(f, 0) + int(counts[i])
    ranked = sorted(usage.items(), key=lambda kv: (-kv[1], kv[0]))
    return [(feature_names[f], c) for f, c in ranked]


@dataclass
class TrustReport:
    """Summary of a surrogate extraction run."""

    unpruned_size: int
    unpruned_depth: int
    unpruned_leaves: int
    fidelity_unpruned: float
    pruned_size: int
    pruned_depth: int
    pruned_leaves: int
    fidelity_pruned: float
    top_features: list
    sample_frac: float
    top_k: int
    inner_iterations: int
    outer_iterations: int
    seed: int
    evaluation: str = "full_dataset"

    def to_dict(self) -> dict:
        return {
            "format_version": REPORT_FORMAT_VERSION,
            "unpruned": {
                "size": self.unpruned_size,
                "depth": self.unpruned_depth,
                "leaves": self.unpruned_leaves,
                "fidelity": self.fidelity_unpruned,
            },
            "pruned": {
                "size": self.pruned_size,
                "depth": self.pruned_depth,
                "leaves": self.pruned_leaves,
                "fidelity": self.fidelity_pruned,
            },
            "top_features": [{"feature": name, "routed_samples": count}
                             for name, count in self.top_features],
            "params": {
                "sample_frac": self.sample_frac,
                "top_k": self.top_k,
                "inner_iterations": self.inner_iterations,
                "outer_iterations": self.outer_iterations,
                "seed": self.seed,
            },
            "evaluation": self.evaluation,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1) + "\n"


class TreeExplainer(BaseEstimator):
    """Extract an interpretable surrogate tree from a blackbox predictor.

    ``fit`` takes the feature matrix and the blackbox (an estimator with
    ``predict`` or a plain callable); afterwards ``tree_`` holds the
    winning unpruned student, ``pruned_tree_`` the reported explanation
    and ``report_`` the :class:`TrustReport`.
    """

    def __init__(self, inner_iterations: int = 5, outer_iterations: int = 3,
                 sample_frac: float = 0.3, top_k: int = 10,
                 max_depth: int | None = None, min_leaf: int = 1,
                 seed: int = 0, feature_names=None):
        self.inner_iterations = inner_iterations
        self.outer_iterations = outer_iterations
        self.sample_frac = sample_frac
        self.top_k = top_k
        self.max_depth = max_depth
        self.min_leaf = min_leaf
        self.seed = seed
        self.feature_names = feature_names

    def _check_params(self):
        if self.inner_iterations < 1 or self.outer_iterations < 1:
            raise ValueError("iteration counts must be >= 1")
        if not 0 < self.sample_frac <= 1:
            raise ValueError("sample_frac must be in (0, 1]")
        if self.top_k < 1:
            raise ValueError("top_k must be >= 1")

    def _names_for(self, width: int):
        if self.feature_names is not None:
            return list(self.feature_names)
        if width == FEATURE_COUNT:
            return list(FEATURE_NAMES)
        return [f"f{i}" for i in range(width)]

    def fit(self, X, oracle):
        self._check_params()
        X = as_float_matrix(X)
        n = len(X)
        if n == 0:
            raise EmptyDataset("cannot explain an empty dataset")
        predict = oracle.predict if hasattr(oracle, "predict") else oracle
        y_oracle = np.asarray(predict(X)).astype(np.int64)
        if len(y_oracle) != n:
            raise LengthMismatch("oracle returned a wrong-length prediction")

        sample_size = max(1, int(round(self.sample_frac * n)))
        candidates = []
        inner_fidelities = []
        for seq in np.random.SeedSequence(self.seed).spawn(self.outer_iterations):
            rng = np.random.default_rng(seq)
            extra = np.empty(0, dtype=np.int64)
            best_tree = None
            best_fid = -np.inf
            fids = []
            for _ in range(self.inner_iterations):
                sample = rng.choice(n, size=sample_size, replace=False)
                train_idx = np.unique(np.concatenate([sample, extra]))
                student = fit_tree(X[train_idx], y_oracle[train_idx],
                                   max_depth=self.max_depth,
                                   min_leaf=self.min_leaf)
                preds = student.predict(X)
                fid = fidelity(y_oracle, preds)
                fids.append(fid)
                if fid > best_fid:
                    best_tree, best_fid = student, fid
                # disagreement-driven augmentation of the next sample
                extra = np.nonzero(preds != y_oracle)[0]
            pruned = top_k_prune(best_tree, self.top_k, X)
            candidates.append((best_tree, best_fid, pruned))
            inner_fidelities.append(fids)

        pruned_preds = [cand[2].predict(X) for cand in candidates]
        s = self.outer_iterations
        agreements = []
        for i in range(s):
            if s == 1:
                agreements.append(1.0)
                continue
            agreements.append(float(np.mean(
                [(pruned_preds[i] == pruned_preds[j]).mean()
                 for j in range(s) if j != i])))
        winner = int(np.argmax(agreements))

        names = self._names_for(X.shape[1])
        tree, fid_unpruned, pruned = candidates[winner]
        fid_pruned = fidelity(y_oracle, pruned_preds[winner])
        self.tree_ = tree
        self.pruned_tree_ = pruned
        self.inner_fidelities_ = inner_fidelities
        self.agreements_ = agreements
        self.feature_names_ = names
        self.report_ = TrustReport(
            unpruned_size=tree.node_count,
            unpruned_depth=tree.depth(),
            unpruned_leaves=tree.leaf_count,
            fidelity_unpruned=fid_unpruned,
            pruned_size=pruned.node_count,
            pruned_depth=pruned.depth(),
            pruned_leaves=pruned.leaf_count,
            fidelity_pruned=fid_pruned,
            top_features=feature_usage(tree, X, names),
            sample_frac=self.sample_frac,
            top_k=self.top_k,
            inner_iterations=self.inner_iterations,
            outer_iterations=self.outer_iterations,
            seed=self.seed,
        )
        return self

    def _check_fitted(self):
        if not hasattr(self, "pruned_tree_"):
            raise NotFittedError("this TreeExplainer instance is not fitted yet")

    def predict(self, X) -> np.ndarray:
        """Predictions of the reported (pruned) explanation tree."""
        self._check_fitted()
        return self.pruned_tree_.predict(X)

    def render(self, which: str = "pruned", max_layers: int = 3) -> str:
        """Text rendering of the top layers of the chosen tree."""
        self._check_fitted()
        tree = self.pruned_tree_ if which == "pruned" else self.tree_
        return render_tree(tree, feature_names=self.feature_names_,
                           max_layers=max_layers)
