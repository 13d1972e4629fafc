"""Gradient-boosted trees, AdaBoost, and ordered target statistics.

The boosting objective is the standard second-order one: each round fits a
regression tree to the per-sample gradient/hessian of the logistic loss,
a split is scored by

    gain = 1/2 * [G_L^2/(H_L+lambda) + G_R^2/(H_R+lambda)
                  - (G_L+G_R)^2/(H_L+H_R+lambda)] - gamma

and is accepted only when the gain is positive and both children carry at
least min_child_weight of hessian mass. Leaf values are -G/(H+lambda).
Trees grow either depth-wise (level by level to max_depth) or leaf-wise
(always splitting the highest-gain frontier leaf until max_leaves).

Split search is deterministic and exhaustive over midpoints, sharing one
kernel between the two growth strategies so that depth-wise with
max_depth=1 and leaf-wise with max_leaves=2 build identical trees.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NumericError
from .linear import clip_proba, sigmoid
from .rng import substream
from .trees import TreeNode, find_best_split, tree_leaf_values

HESSIAN_FLOOR = 1e-16


@dataclass(frozen=True)
class GbtConfig:
    n_rounds: int = 100
    learning_rate: float = 0.1
    min_child_weight: float = 1.0
    l2_lambda: float = 1.0
    gamma: float = 0.0
    growth: str = "depth_wise"
    max_depth: int = 3
    max_leaves: int = 8
    seed: int = 42

    def validate(self) -> None:
        if self.n_rounds < 0:
            raise ValueError("n_rounds must be >= 0")
        if not 0.0 < self.learning_rate <= 1.0:
            raise ValueError("learning_rate must be in (0, 1]")
        if self.min_child_weight < 0:
            raise ValueError("min_child_weight must be >= 0")
        if self.l2_lambda < 0 or self.gamma < 0:
            raise ValueError("l2_lambda and gamma must be >= 0")
        if self.growth not in ("depth_wise", "leaf_wise"):
            raise ValueError(f"unknown growth {self.growth!r}")
        if self.max_depth < 1:
            raise ValueError("max_depth must be >= 1")
        if self.max_leaves < 2:
            raise ValueError("max_leaves must be >= 2")


@dataclass
class GbtEnsemble:
    """base_score plus shrunken regression trees; probability = sigmoid(F)."""

    base_score: float
    trees: list[TreeNode]
    learning_rate: float


def logistic_grad_hess(y: np.ndarray, margin: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Gradient and hessian of the logistic loss at the current margins."""
    p = sigmoid(np.asarray(margin, dtype=np.float64))
    g = p - np.asarray(y, dtype=np.float64)
    h = np.maximum(p * (1.0 - p), HESSIAN_FLOOR)
    return g, h


def gbt_split_gain(
    g_left: float,
    h_left: float,
    g_right: float,
    h_right: float,
    l2_lambda: float,
    gamma: float,
) -> float:
    """Second-order gain of a split against keeping the parent leaf."""
    parent_g = g_left + g_right
    parent_h = h_left + h_right
    return 0.5 * (
        g_left * g_left / (h_left + l2_lambda)
        + g_right * g_right / (h_right + l2_lambda)
        - parent_g * parent_g / (parent_h + l2_lambda)
    ) - gamma


def leaf_value(g_sum: float, h_sum: float, l2_lambda: float) -> float:
    """Minimizer of the per-leaf second-order objective."""
    return -g_sum / (h_sum + l2_lambda)


def _node_best_split(
    x: np.ndarray,
    g: np.ndarray,
    h: np.ndarray,
    orders: list[np.ndarray],
    config: GbtConfig,
) -> tuple[float, int, float] | None:
    """Best positive-gain (gain, feature, threshold) for one node.

    `orders` holds the node's row ids sorted by each feature. Running
    G/H sums come from cumsum so both growth strategies see bitwise
    identical gains.
    """
    best_gain = -np.inf
    best: tuple[int, float] | None = None
    lam = config.l2_lambda
    for f, rows in enumerate(orders):
        if len(rows) < 2:
            continue
        xs = x[rows, f]
        cg = np.cumsum(g[rows])
        ch = np.cumsum(h[rows])
        g_total, h_total = cg[-1], ch[-1]
        g_l, h_l = cg[:-1], ch[:-1]
        g_r, h_r = g_total - g_l, h_total - h_l
        midpoints = (xs[:-1] + xs[1:]) / 2.0
        valid = (xs[:-1] < xs[1:]) & (midpoints > xs[:-1])
        valid &= (h_l >= config.min_child_weight) & (h_r >= config.min_child_weight)
        if not valid.any():
            continue
        gains = 0.5 * (
            g_l * g_l / (h_l + lam)
            + g_r * g_r / (h_r + lam)
            - g_total * g_total / (h_total + lam)
        ) - config.gamma
        gains = np.where(valid, gains, -np.inf)
        i = int(np.argmax(gains))  # first max: lowest threshold
        if gains[i] > best_gain:
            best_gain = float(gains[i])
            best = (f, float(midpoints[i]))
    if best is None or best_gain <= 0.0:
        return None
    return best_gain, best[0], best[1]


def _partition_orders(
    orders: list[np.ndarray], mask: np.ndarray
) -> tuple[list[np.ndarray], list[np.ndarray]]:
    lefts, rights = [], []
    for rows in orders:
        m = mask[rows]
        lefts.append(rows[m])
        rights.append(rows[~m])
    return lefts, rights


def _grow_gbt_tree(
    x: np.ndarray,
    g: np.ndarray,
    h: np.ndarray,
    config: GbtConfig,
    root_orders: list[np.ndarray],
    mask: np.ndarray,
    update: np.ndarray,
) -> TreeNode:
    """Grow one regression tree; writes each training row's leaf value
    into `update`."""

    def finalize(node: TreeNode, rows: np.ndarray) -> None:
        v = leaf_value(float(np.sum(g[rows])), float(np.sum(h[rows])), config.l2_lambda)
        node.value = v
        update[rows] = v

    def attach_split(node: TreeNode, orders, feature: int, threshold: float):
        rows = orders[feature]
        mask[rows] = x[rows, feature] < threshold
        node.feature_index = feature
        node.threshold = threshold
        node.left = TreeNode()
        node.right = TreeNode()
        return _partition_orders(orders, mask)

    root = TreeNode()
    if config.growth == "depth_wise":
        frontier = [(root, root_orders, 0)]
        while frontier:
            next_frontier = []
            for node, orders, depth in frontier:
                found = None
                if depth < config.max_depth:
                    found = _node_best_split(x, g, h, orders, config)
                if found is None:
                    finalize(node, orders[0])
                    continue
                _, feature, threshold = found
                left_orders, right_orders = attach_split(node, orders, feature, threshold)
                next_frontier.append((node.left, left_orders, depth + 1))
                next_frontier.append((node.right, right_orders, depth + 1))
            frontier = next_frontier
    else:
        # leaf-wise: split the best frontier leaf until max_leaves
        entries = [(0, root, root_orders, _node_best_split(x, g, h, root_orders, config))]
        next_id = 1
        n_leaves = 1
        while n_leaves < config.max_leaves:
            pick = None
            for e in entries:
                if e[3] is not None and (pick is None or e[3][0] > pick[3][0]):
                    pick = e  # ties keep the earliest-created leaf
            if pick is None:
                break
            entries.remove(pick)
            _, node, orders, (gain, feature, threshold) = pick
            left_orders, right_orders = attach_split(node, orders, feature, threshold)
            for child, child_orders in ((node.left, left_orders), (node.right, right_orders)):
                entries.append(
                    (next_id, child, child_orders, _node_best_split(x, g, h, child_orders, config))
                )
                next_id += 1
            n_leaves += 1
        for _, node, orders, _found in entries:
            finalize(node, orders[0])
    return root


def train_gbt(x: np.ndarray, y: np.ndarray, config: GbtConfig = GbtConfig()) -> GbtEnsemble:
    """Boost regression trees on the logistic loss.

    The base score is the log-odds of the training positive rate, so a
    zero-round ensemble predicts that rate for every input.
    """
    config.validate()
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.ndim != 2 or len(y) == 0:
        raise ValueError("training data must be a nonempty (n, d) matrix")
    rate = min(max(float(np.mean(y)), 1e-12), 1.0 - 1e-12)
    base = math.log(rate / (1.0 - rate))
    n = len(y)
    margins = np.full(n, base)
    root_orders = [np.argsort(x[:, f], kind="stable") for f in range(x.shape[1])]
    mask = np.empty(n, dtype=bool)
    update = np.empty(n)
    trees = []
    for _ in range(config.n_rounds):
        g, h = logistic_grad_hess(y, margins)
        tree = _grow_gbt_tree(x, g, h, config, root_orders, mask, update)
        trees.append(tree)
        margins = margins + config.learning_rate * update
        if not np.all(np.isfinite(margins)):
            raise NumericError("boosting margins are not finite")
    return GbtEnsemble(base_score=base, trees=trees, learning_rate=config.learning_rate)


def gbt_margins(ensemble: GbtEnsemble, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    out = np.full(len(x), ensemble.base_score)
    for tree in ensemble.trees:
        out += ensemble.learning_rate * tree_leaf_values(tree, x, "value")
    return out


def gbt_predict_proba(ensemble: GbtEnsemble, x: np.ndarray) -> np.ndarray | float:
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    p = clip_proba(sigmoid(gbt_margins(ensemble, x[None, :] if single else x)))
    return float(p[0]) if single else p


# ---------------------------------------------------------------------------
# AdaBoost
# ---------------------------------------------------------------------------


@dataclass
class AdaBoostEnsemble:
    """Depth-1 weak learners emitting {-1,+1} with their vote weights."""

    stumps: list[TreeNode]
    alphas: np.ndarray

    def __post_init__(self):
        if len(self.stumps) != len(self.alphas):
            raise ValueError("stumps and alphas must have equal length")


def _side_sign(score: float) -> float:
    return 1.0 if score >= 0.0 else -1.0


def _build_stump(
    x: np.ndarray, y01: np.ndarray, y_pm: np.ndarray, w: np.ndarray, min_samples_leaf: int
) -> TreeNode | None:
    split = find_best_split(x, y01, min_samples_leaf=min_samples_leaf, sample_weight=w)
    if split is None:
        return None
    left = x[:, split.feature_index] < split.threshold
    return TreeNode(
        feature_index=split.feature_index,
        threshold=split.threshold,
        left=TreeNode(value=_side_sign(float(np.sum(w[left] * y_pm[left])))),
        right=TreeNode(value=_side_sign(float(np.sum(w[~left] * y_pm[~left])))),
    )


def train_adaboost(
    x: np.ndarray,
    y: np.ndarray,
    n_rounds: int = 100,
    seed: int = 42,
    min_samples_leaf: int = 1,
) -> AdaBoostEnsemble:
    """Weighted-Gini stumps with exponential reweighting.

    Stops early when a round's weighted error reaches 0.5 (that stump is
    not kept). The procedure is deterministic; seed is accepted for
    interface uniformity only.
    """
    del seed
    x = np.asarray(x, dtype=np.float64)
    y01 = np.asarray(y, dtype=np.float64)
    if x.ndim != 2 or len(y01) == 0:
        raise ValueError("training data must be a nonempty (n, d) matrix")
    y_pm = 2.0 * y01 - 1.0
    n = len(y01)
    w = np.full(n, 1.0 / n)
    stumps: list[TreeNode] = []
    alphas: list[float] = []
    for _ in range(n_rounds):
        stump = _build_stump(x, y01, y_pm, w, min_samples_leaf)
        if stump is None:
            if not stumps:
                # degenerate data (e.g. one class): vote the weighted majority
                stump = TreeNode(value=_side_sign(float(np.sum(w * y_pm))))
            else:
                break
        pred = tree_leaf_values(stump, x, "value") if not stump.is_leaf else np.full(n, stump.value)
        error = float(np.sum(w * (pred != y_pm)))
        if error >= 0.5:
            break
        error = min(max(error, 1e-10), 1.0 - 1e-10)
        alpha = 0.5 * math.log((1.0 - error) / error)
        stumps.append(stump)
        alphas.append(alpha)
        w = w * np.exp(-alpha * y_pm * pred)
        w = w / np.sum(w)
        if error <= 1e-10:
            break  # perfect fit: reweighting cannot change anything
    return AdaBoostEnsemble(stumps=stumps, alphas=np.array(alphas))


def adaboost_score(ensemble: AdaBoostEnsemble, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    out = np.zeros(len(x))
    for stump, alpha in zip(ensemble.stumps, ensemble.alphas):
        if stump.is_leaf:
            out += alpha * stump.value
        else:
            out += alpha * tree_leaf_values(stump, x, "value")
    return out


def adaboost_predict(ensemble: AdaBoostEnsemble, x: np.ndarray) -> np.ndarray | float:
    """Probability sigmoid(2 * weighted vote); class is its sign."""
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    p = clip_proba(sigmoid(2.0 * adaboost_score(ensemble, x[None, :] if single else x)))
    return float(p[0]) if single else p


# ---------------------------------------------------------------------------
# Ordered target statistics
# ---------------------------------------------------------------------------


def ordered_target_encode(
    values: np.ndarray,
    labels: np.ndarray,
    permutation: np.ndarray,
    prior_weight: float = 1.0,
) -> np.ndarray:
    """Leakage-free target encoding of one discrete column.

    Record i is encoded from the label statistics of same-category records
    that precede it in the permutation:

        (positives_before + a * global_rate) / (count_before + a)
    """
    values = np.asarray(values)
    labels = np.asarray(labels, dtype=np.float64)
    permutation = np.asarray(permutation)
    n = len(values)
    if sorted(permutation.tolist()) != list(range(n)):
        raise ValueError("permutation must be a bijection on record indices")
    if prior_weight <= 0:
        raise ValueError("prior_weight must be > 0")
    global_rate = float(labels.mean()) if n else 0.0
    stats: dict = {}
    encoded = np.empty(n)
    for i in permutation.tolist():
        count, positives = stats.get(values[i], (0, 0.0))
        encoded[i] = (positives + prior_weight * global_rate) / (count + prior_weight)
        stats[values[i]] = (count + 1, positives + labels[i])
    return encoded


class OrderedEncoder:
    """Ordered target statistics for a fixed set of columns.

    fit_transform encodes training rows with prefix statistics along one
    seeded permutation; transform encodes new rows with the full training
    statistics.
    """

    def __init__(self, columns: tuple[int, ...], prior_weight: float = 1.0, seed: int = 42):
        self.columns = tuple(columns)
        self.prior_weight = float(prior_weight)
        self.seed = int(seed)
        self.permutation: np.ndarray | None = None
        self.prior: float | None = None
        self.stats: dict[int, dict] = {}

    def fit_transform(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        n = len(y)
        self.permutation = substream(self.seed, "ordered-encoder").permutation(n)
        self.prior = float(y.mean()) if n else 0.0
        out = x.copy()
        self.stats = {}
        for col in self.columns:
            raw = x[:, col]
            out[:, col] = ordered_target_encode(raw, y, self.permutation, self.prior_weight)
            col_stats: dict = {}
            for v, label in zip(raw.tolist(), y.tolist()):
                count, positives = col_stats.get(v, (0, 0.0))
                col_stats[v] = (count + 1, positives + label)
            self.stats[col] = col_stats
        return out

    def transform(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64).copy()
        for col in self.columns:
            col_stats = self.stats[col]
            out = np.empty(len(x))
            for i, v in enumerate(x[:, col]):
                count, positives = col_stats.get(v, (0, 0.0))
                out[i] = (positives + self.prior_weight * self.prior) / (
                    count + self.prior_weight
                )
            x[:, col] = out
        return x
