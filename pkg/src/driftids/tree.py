"""Binary CART decision trees on flat node arrays.

Trees are grown greedily by weighted Gini impurity over all midpoints of
consecutive distinct feature values, and stored as parallel arrays in
depth-first preorder (a node's children always have larger indices).
Leaves predict the majority class with ties going to the lower class.
"""

from dataclasses import dataclass

import numpy as np

from ._validation import as_float_matrix
from .exceptions import EmptyDataset, WidthMismatch


@dataclass
class DecisionTree:
    feature: np.ndarray       # split feature per node, -1 for leaves
    threshold: np.ndarray     # split threshold per node, NaN for leaves
    left: np.ndarray          # child indices, -1 for leaves
    right: np.ndarray
    value: np.ndarray         # majority class per node
    sample_count: np.ndarray  # training samples reaching each node
    class_counts: np.ndarray  # (n_nodes, n_classes)
    n_features: int
    root: int = 0

    @property
    def node_count(self) -> int:
        return len(self.feature)

    def is_leaf(self, i: int) -> bool:
        return self.feature[i] < 0

    def leaf_indices(self) -> np.ndarray:
        return np.nonzero(self.feature < 0)[0]

    @property
    def leaf_count(self) -> int:
        return int((self.feature < 0).sum())

    def depth(self) -> int:
        """Maximum number of edges from the root to a leaf."""
        depths = np.zeros(self.node_count, dtype=np.int64)
        best = 0
        for i in range(self.node_count):  # preorder: parents come first
            if self.feature[i] >= 0:
                depths[self.left[i]] = depths[i] + 1
                depths[self.right[i]] = depths[i] + 1
            else:
                best = max(best, int(depths[i]))
        return best

    def _check_width(self, X: np.ndarray):
        if X.shape[1] != self.n_features:
            raise WidthMismatch(
                f"input has {X.shape[1]} features, tree expects {self.n_features}")

    def apply(self, X) -> np.ndarray:
        """Leaf index reached by each row (values at thresholds go left)."""
        X = as_float_matrix(X)
        self._check_width(X)
        node = np.full(len(X), self.root, dtype=np.int64)
        while True:
            feat = self.feature[node]
            active = feat >= 0
            if not active.any():
                return node
            rows = np.nonzero(active)[0]
            cur = node[rows]
            go_left = X[rows, self.feature[cur]] <= self.threshold[cur]
            node[rows] = np.where(go_left, self.left[cur], self.right[cur])

    def predict(self, X) -> np.ndarray:
        return self.value[self.apply(X)]

    def routed_counts(self, X) -> np.ndarray:
        """Number of rows of ``X`` passing through each node."""
        X = as_float_matrix(X)
        self._check_width(X)
        counts = np.zeros(self.node_count, dtype=np.int64)
        node = np.full(len(X), self.root, dtype=np.int64)
        active = np.arange(len(X))
        while len(active):
            np.add.at(counts, node[active], 1)
            cur = node[active]
            internal = self.feature[cur] >= 0
            active = active[internal]
            if not len(active):
                break
            cur = node[active]
            go_left = X[active, self.feature[cur]] <= self.threshold[cur]
            node[active] = np.where(go_left, self.left[cur], self.right[cur])
        return counts

    def subtree_sizes(self) -> np.ndarray:
        sizes = np.ones(self.node_count, dtype=np.int64)
        for i in range(self.node_count - 1, -1, -1):
            if self.feature[i] >= 0:
                sizes[i] += sizes[self.left[i]] + sizes[self.right[i]]
        return sizes


def _best_split(X, y_onehot, min_leaf):
    """(feature, threshold) minimizing weighted Gini, or None."""
    n, n_features = X.shape
    best = None
    for f in range(n_features):
        col = X[:, f]
        order = np.argsort(col, kind="stable")
        sv = col[order]
        cuts = np.nonzero(sv[:-1] != sv[1:])[0]
        if not len(cuts):
            continue
        left_n = cuts + 1
        ok = (left_n >= min_leaf) & (n - left_n >= min_leaf)
        cuts = cuts[ok]
        if not len(cuts):
            continue
        cum = np.cumsum(y_onehot[order], axis=0)
        left_counts = cum[cuts]
        right_counts = cum[-1] - left_counts
        ln = (cuts + 1).astype(np.float64)[:, None]
        rn = n - ln
        gini_l = 1.0 - ((left_counts / ln) ** 2).sum(axis=1)
        gini_r = 1.0 - ((right_counts / rn) ** 2).sum(axis=1)
        weighted = (ln.ravel() * gini_l + rn.ravel() * gini_r) / n
        j = int(np.argmin(weighted))
        if best is None or weighted[j] < best[0]:
            thr = (sv[cuts[j]] + sv[cuts[j] + 1]) / 2.0
            best = (float(weighted[j]), f, thr)
    if best is None:
        return None
    return best[1], best[2]


def fit_tree(X, y, max_depth: int | None = None, min_leaf: int = 1) -> DecisionTree:
    """Grow a CART classifier; stops at purity, ``max_depth`` or ``min_leaf``."""
    X = as_float_matrix(X)
    y = np.asarray(y, dtype=np.int64)
    if len(X) == 0:
        raise EmptyDataset("cannot grow a tree on an empty dataset")
    if len(y) != len(X):
        raise ValueError("X and y lengths differ")
    if min_leaf < 1:
        raise ValueError("min_leaf must be >= 1")
    n_classes = max(2, int(y.max()) + 1)
    onehot = np.zeros((len(y), n_classes), dtype=np.int64)
    onehot[np.arange(len(y)), y] = 1

    nodes = []  # [feature, threshold, left, right, value, count, class_counts]
    stack = [(np.arange(len(X)), 0, -1, 0)]  # rows, depth, parent, side
    while stack:
        rows, depth, parent, side = stack.pop()
        node_id = len(nodes)
        counts = onehot[rows].sum(axis=0)
        value = int(np.argmax(counts))
        split = None
        pure = counts[value] == len(rows)
        depth_ok = max_depth is None or depth < max_depth
        if not pure and depth_ok and len(rows) >= 2 * min_leaf:
            split = _best_split(X[rows], onehot[rows], min_leaf)
        if split is None:
            nodes.append([-1, np.nan, -1, -1, value, len(rows), counts])
        else:
            f, thr = split
            nodes.append([f, thr, -1, -1, value, len(rows), counts])
            mask = X[rows, f] <= thr
            # push right first so the left subtree is numbered first
            stack.append((rows[~mask], depth + 1, node_id, 3))
            stack.append((rows[mask], depth + 1, node_id, 2))
        if parent >= 0:
            nodes[parent][side] = node_id

    return DecisionTree(
        feature=np.array([n[0] for n in nodes], dtype=np.int64),
        threshold=np.array([n[1] for n in nodes], dtype=np.float64),
        left=np.array([n[2] for n in nodes], dtype=np.int64),
        right=np.array([n[3] for n in nodes], dtype=np.int64),
        value=np.array([n[4] for n in nodes], dtype=np.int64),
        sample_count=np.array([n[5] for n in nodes], dtype=np.int64),
        class_counts=np.stack([n[6] for n in nodes]),
        n_features=X.shape[1],
    )


def top_k_prune(tree: DecisionTree, k: int, routing_X) -> DecisionTree:
    """Keep only the paths to the ``k`` leaves that classify the most rows.

    Leaves are ranked by how many rows of ``routing_X`` they receive
    (ties by leaf index). Any subtree off a retained path collapses to a
    single leaf predicting the majority class of the rows routed into it
    (falling back to its training majority when none were).
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    n_nodes = tree.node_count
    counts = tree.routed_counts(routing_X)
    leaves = tree.leaf_indices()
    n_classes = tree.class_counts.shape[1]

    if len(leaves) <= k:
        retained = set(int(l) for l in leaves)
    else:
        order = sorted(leaves, key=lambda l: (-counts[l], l))
        retained = set(int(l) for l in order[:k])

    has_retained = np.zeros(n_nodes, dtype=bool)
    routed_class = np.zeros((n_nodes, n_classes), dtype=np.int64)
    train_class = np.zeros((n_nodes, n_classes), dtype=np.int64)
    for i in range(n_nodes - 1, -1, -1):
        if tree.feature[i] < 0:
            has_retained[i] = i in retained
            routed_class[i, tree.value[i]] = counts[i]
            train_class[i] = tree.class_counts[i]
        else:
            l, r = tree.left[i], tree.right[i]
            has_retained[i] = has_retained[l] or has_retained[r]
            routed_class[i] = routed_class[l] + routed_class[r]
            train_class[i] = train_class[l] + train_class[r]

    nodes = []
    stack = [(tree.root, -1, 0)]
    while stack:
        old_id, parent, side = stack.pop()
        node_id = len(nodes)
        keep_internal = tree.feature[old_id] >= 0 and has_retained[old_id]
        if keep_internal:
            nodes.append([int(tree.feature[old_id]), float(tree.threshold[old_id]),
                          -1, -1, int(tree.value[old_id]),
                          int(tree.sample_count[old_id]),
                          tree.class_counts[old_id].copy()])
            stack.append((int(tree.right[old_id]), node_id, 3))
            stack.append((int(tree.left[old_id]), node_id, 2))
        else:
            if routed_class[old_id].sum() > 0:
                value = int(np.argmax(routed_class[old_id]))
            else:
                value = int(np.argmax(train_class[old_id]))
            nodes.append([-1, np.nan, -1, -1, value,
                          int(train_class[old_id].sum()),
                          train_class[old_id].copy()])
        if parent >= 0:
            nodes[parent][side] = node_id

    return DecisionTree(
        feature=np.array([n[0] for n in nodes], dtype=np.int64),
        threshold=np.array([n[1] for n in nodes], dtype=np.float64),
        left=np.array([n[2] for n in nodes], dtype=np.int64),
        right=np.array([n[3] for n in nodes], dtype=np.int64),
        value=np.array([n[4] for n in nodes], dtype=np.int64),
        sample_count=np.array([n[5] for n in nodes], dtype=np.int64),
        class_counts=np.stack([n[6] for n in nodes]),
        n_features=tree.n_features,
    )


def render_tree(tree: DecisionTree, feature_names=None, max_layers: int = 3,
                class_names=("normal", "anomalous")) -> str:
    """Text rendering of the top ``max_layers`` layers of a tree."""
    if feature_names is None:
        feature_names = [f"f{i}" for i in range(tree.n_features)]

    def label(value):
        if class_names is not None and value < len(class_names):
            return class_names[value]
        return str(value)

    sizes = tree.subtree_sizes()
    lines = []

    def walk(i, depth, indent):
        if tree.feature[i] < 0:
            lines.append(f"{indent}|--- class: {label(tree.value[i])} "
                         f"(samples={tree.sample_count[i]})")
            return
        if depth >= max_layers:
            lines.append(f"{indent}|--- [subtree truncated: {sizes[i]} nodes, "
                         f"majority {label(tree.value[i])}]")
            return
        name = feature_names[tree.feature[i]]
        thr = tree.threshold[i]
        lines.append(f"{indent}|--- {name} <= {thr:.6g}")
        walk(tree.left[i], depth + 1, indent + "|   ")
        lines.append(f"{indent}|--- {name} > {thr:.6g}")
        walk(tree.right[i], depth + 1, indent + "|   ")

    walk(tree.root, 0, "")
    return "\n".join(lines) + "\n"
