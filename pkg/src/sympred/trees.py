"""Decision trees and random forests.

Split semantics used everywhere: a sample routes left iff
``x[feature] < threshold``; candidate thresholds are midpoints between
consecutive distinct sorted values; ties between equally good splits go to
the lowest feature index, then the lowest threshold. Binary symptom columns
fall out of the same machinery (their only midpoint is 0.5 in raw units).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .rng import substream


@dataclass
class TreeNode:
    """Internal node (feature_index/threshold/left/right) or leaf.

    Classification leaves carry class_counts=(negatives, positives) and
    probability = positives / total. Regression leaves (used by boosting)
    carry a real value instead.
    """

    feature_index: int | None = None
    threshold: float | None = None
    left: "TreeNode | None" = None
    right: "TreeNode | None" = None
    class_counts: tuple[int, int] | None = None
    probability: float | None = None
    value: float | None = None

    @property
    def is_leaf(self) -> bool:
        return self.feature_index is None

    def count_nodes(self) -> int:
        if self.is_leaf:
            return 1
        return 1 + self.left.count_nodes() + self.right.count_nodes()

    def count_splits(self) -> int:
        if self.is_leaf:
            return 0
        return 1 + self.left.count_splits() + self.right.count_splits()


@dataclass(frozen=True)
class TreeConfig:
    max_depth: int = 6
    min_samples_leaf: int = 5
    min_samples_split: int = 10
    criterion: str = "gini"

    def validate(self) -> None:
        if self.max_depth < 1:
            raise ValueError("max_depth must be >= 1")
        if self.min_samples_leaf < 1:
            raise ValueError("min_samples_leaf must be >= 1")
        if self.min_samples_split < 2:
            raise ValueError("min_samples_split must be >= 2")
        if self.criterion != "gini":
            raise ValueError(f"unsupported criterion {self.criterion!r}")


@dataclass(frozen=True)
class ForestConfig:
    n_trees: int = 100
    features_per_split: int = 3  # ceil(sqrt(7))
    bootstrap: bool = True
    tree: TreeConfig = field(default_factory=TreeConfig)
    seed: int = 42

    def validate(self, n_features: int) -> None:
        if self.n_trees < 1:
            raise ValueError("n_trees must be >= 1")
        if not 1 <= self.features_per_split <= n_features:
            raise ValueError(
                f"features_per_split must be in [1, {n_features}]"
            )
        self.tree.validate()


def gini_impurity(class_counts: tuple[int, int] | np.ndarray) -> float:
    """1 - sum(p_i^2) over class proportions; 0 for a pure node."""
    counts = np.asarray(class_counts, dtype=np.float64)
    if np.any(counts < 0):
        raise ValueError("class counts must be >= 0")
    total = counts.sum()
    if total <= 0:
        raise ValueError("total count must be > 0")
    p = counts / total
    return float(1.0 - np.sum(p * p))


@dataclass(frozen=True)
class BestSplit:
    feature_index: int
    threshold: float
    impurity_decrease: float


def _scan_feature(
    xs: np.ndarray,
    ys: np.ndarray,
    ws: np.ndarray,
    min_samples_leaf: int,
) -> tuple[float, float] | None:
    """Best (decrease, threshold) along one pre-sorted feature column.

    xs/ys/ws are sorted by xs. Impurity decrease is computed with sample
    weights: parent_gini - (W_L*gini_L + W_R*gini_R) / W.
    """
    n = len(xs)
    if n < 2:
        return None
    cw = np.cumsum(ws)
    cwy = np.cumsum(ws * ys)
    w_total = cw[-1]
    wy_total = cwy[-1]
    if w_total <= 0:
        return None

    w_l = cw[:-1]
    wy_l = cwy[:-1]
    w_r = w_total - w_l
    wy_r = wy_total - wy_l
    counts_l = np.arange(1, n)
    midpoints = (xs[:-1] + xs[1:]) / 2.0
    valid = (xs[:-1] < xs[1:]) & (midpoints > xs[:-1])
    valid &= (counts_l >= min_samples_leaf) & ((n - counts_l) >= min_samples_leaf)
    valid &= (w_l > 0) & (w_r > 0)
    if not valid.any():
        return None

    def gini_term(w, wy):
        p1 = wy / w
        return 1.0 - p1 * p1 - (1.0 - p1) * (1.0 - p1)

    p1_parent = wy_total / w_total
    parent = 1.0 - p1_parent * p1_parent - (1.0 - p1_parent) * (1.0 - p1_parent)
    with np.errstate(invalid="ignore", divide="ignore"):
        decrease = parent - (w_l * gini_term(w_l, wy_l) + w_r * gini_term(w_r, wy_r)) / w_total
    decrease = np.where(valid, decrease, -np.inf)
    best = int(np.argmax(decrease))  # first max: lowest threshold wins ties
    return float(decrease[best]), float(midpoints[best])


def find_best_split(
    x: np.ndarray,
    y: np.ndarray,
    candidate_features: np.ndarray | None = None,
    *,
    min_samples_leaf: int = 1,
    sample_weight: np.ndarray | None = None,
) -> BestSplit | None:
    """Exhaustive best Gini split over candidate features and midpoints.

    Returns None when the node is pure or no threshold satisfies the
    min_samples_leaf constraint.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.ndim != 2:
        raise ValueError("x must be (n, d)")
    n = len(y)
    if n < 2 or y.min() == y.max():
        return None
    w = np.ones(n) if sample_weight is None else np.asarray(sample_weight, dtype=np.float64)
    if candidate_features is None:
        candidate_features = np.arange(x.shape[1])

    best: BestSplit | None = None
    for f in np.sort(np.asarray(candidate_features)):
        order = np.argsort(x[:, f], kind="stable")
        found = _scan_feature(x[order, f], y[order], w[order], min_samples_leaf)
        if found is None:
            continue
        decrease, threshold = found
        if best is None or decrease > best.impurity_decrease:
            best = BestSplit(int(f), threshold, decrease)
    return best


def _leaf_from_labels(y: np.ndarray) -> TreeNode:
    positives = int(np.sum(y == 1))
    negatives = int(len(y) - positives)
    return TreeNode(
        class_counts=(negatives, positives),
        probability=positives / len(y),
    )


def _grow(
    x: np.ndarray,
    y: np.ndarray,
    config: TreeConfig,
    depth: int,
    rng: np.random.Generator | None,
    features_per_split: int | None,
) -> TreeNode:
    n = len(y)
    can_split = (
        depth < config.max_depth
        and n >= config.min_samples_split
        and y.min() != y.max()
    )
    if can_split:
        if features_per_split is not None and rng is not None:
            candidates = rng.choice(x.shape[1], size=features_per_split, replace=False)
        else:
            candidates = None
        split = find_best_split(
            x, y, candidates, min_samples_leaf=config.min_samples_leaf
        )
        if split is not None and split.impurity_decrease > 0.0:
            go_left = x[:, split.feature_index] < split.threshold
            return TreeNode(
                feature_index=split.feature_index,
                threshold=split.threshold,
                left=_grow(x[go_left], y[go_left], config, depth + 1, rng, features_per_split),
                right=_grow(x[~go_left], y[~go_left], config, depth + 1, rng, features_per_split),
            )
    return _leaf_from_labels(y)


def train_decision_tree(x: np.ndarray, y: np.ndarray, config: TreeConfig = TreeConfig()) -> TreeNode:
    """Recursive greedy CART-style growth with Gini impurity."""
    config.validate()
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if len(y) == 0:
        raise ValueError("cannot train a tree on empty data")
    return _grow(x, y, config, depth=0, rng=None, features_per_split=None)


def _route(tree: TreeNode, x: np.ndarray) -> TreeNode:
    node = tree
    while not node.is_leaf:
        node = node.left if x[node.feature_index] < node.threshold else node.right
    return node


def tree_leaf_values(tree: TreeNode, x: np.ndarray, attr: str) -> np.ndarray:
    """Vectorized routing of a matrix of samples; returns the leaf attr."""
    out = np.empty(len(x))

    def descend(node: TreeNode, idx: np.ndarray):
        if idx.size == 0:
            return
        if node.is_leaf:
            out[idx] = getattr(node, attr)
            return
        go_left = x[idx, node.feature_index] < node.threshold
        descend(node.left, idx[go_left])
        descend(node.right, idx[~go_left])

    descend(tree, np.arange(len(x)))
    return out


def predict_tree(tree: TreeNode, x: np.ndarray) -> np.ndarray | float:
    """Leaf probability of the routed leaf; matrix input is vectorized."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        return float(_route(tree, x).probability)
    return tree_leaf_values(tree, x, "probability")


@dataclass
class RandomForest:
    trees: list[TreeNode]
    config: ForestConfig


def train_random_forest(x: np.ndarray, y: np.ndarray, config: ForestConfig = ForestConfig()) -> RandomForest:
    """Bootstrap + per-split random feature subsets; seeded per tree.

    Tree t draws from substream (seed, "rf-tree", t), so the forest is
    identical no matter what order the trees are grown in.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    config.validate(x.shape[1])
    if len(y) == 0:
        raise ValueError("cannot train a forest on empty data")
    trees = []
    for t in range(config.n_trees):
        rng = substream(config.seed, "rf-tree", t)
        if config.bootstrap:
            rows = rng.integers(0, len(y), size=len(y))
            xt, yt = x[rows], y[rows]
        else:
            xt, yt = x, y
        trees.append(
            _grow(xt, yt, config.tree, depth=0, rng=rng, features_per_split=config.features_per_split)
        )
    return RandomForest(trees=trees, config=config)


def predict_forest(forest: RandomForest, x: np.ndarray) -> np.ndarray | float:
    """Mean of member leaf probabilities."""
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    if single:
        x = x[None, :]
    acc = np.zeros(len(x))
    for tree in forest.trees:
        acc += tree_leaf_values(tree, x, "probability")
    mean = acc / len(forest.trees)
    return float(mean[0]) if single else mean


def forest_vote_class(forest: RandomForest, x: np.ndarray) -> np.ndarray | int:
    """Mode of per-tree hard votes (ties go to the positive class)."""
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    if single:
        x = x[None, :]
    votes = np.zeros(len(x))
    for tree in forest.trees:
        votes += tree_leaf_values(tree, x, "probability") >= 0.5
    cls = (votes >= len(forest.trees) / 2.0).astype(int)
    return int(cls[0]) if single else cls
