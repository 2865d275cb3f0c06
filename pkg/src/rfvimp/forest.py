"""CART random forests under three sampling regimes, with OOB bookkeeping.

Trees are stored as flat arrays produced by the kernel backend
(:mod:`rfvimp._kernels`): per node a split feature (-1 for leaves), a
threshold (value <= threshold routes left), child ids, the in-bag class-1
fraction and the recorded Gini impurity decrease (normalized by the in-bag
size, so decreases along any root-to-leaf path sum to at most the root
impurity).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .dataset import DataError, Dataset
from .rng import TAG_BOOTSTRAP, TAG_OVERSAMPLE, SeedSpec, as_seed

SAMPLING_MODES = ("none", "under", "over")

_FORMAT_VERSION = 1
_NODE_KEYS = ("feature", "threshold", "left", "right", "prob1", "n_node", "decrease")


@dataclass(frozen=True)
class ForestConfig:
    ntree: int = 200
    mtry: int | None = None  # None -> floor(sqrt(p)) at fit time
    min_leaf_size: int = 1
    sampling: str = "none"
    seed: SeedSpec = field(default_factory=lambda: SeedSpec(0))

    def __post_init__(self):
        if self.ntree < 1:
            raise ValueError("ntree must be positive")
        if self.mtry is not None and self.mtry < 1:
            raise ValueError("mtry must be positive")
        if self.min_leaf_size < 1:
            raise ValueError("min_leaf_size must be positive")
        if self.sampling not in SAMPLING_MODES:
            raise ValueError(f"sampling must be one of {SAMPLING_MODES}")
        object.__setattr__(self, "seed", as_seed(self.seed))

    def resolve_mtry(self, p: int) -> int:
        mtry = self.mtry if self.mtry is not None else int(math.floor(math.sqrt(p)))
        mtry = max(1, mtry)
        if mtry > p:
            raise ValueError(f"mtry={mtry} exceeds p={p}")
        return mtry


@dataclass(frozen=True)
class Tree:
    nodes: tuple  # flat arrays, see module docstring
    in_bag: np.ndarray  # training-table row indices, with repetition
    oob: np.ndarray     # original-row indices

    @property
    def split_features(self) -> np.ndarray:
        f = self.nodes[0]
        return np.unique(f[f >= 0])

    def predict(self, X: np.ndarray, rows) -> np.ndarray:
        return _kernels.predict_rows(self.nodes, X, np.asarray(rows, dtype=np.int64))


@dataclass(frozen=True)
class Forest:
    trees: tuple[Tree, ...]
    config: ForestConfig
    mtry_used: int
    n_original: int
    p: int
    origin_map: np.ndarray | None = None  # sampling="over" only

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        """Mean class-1 leaf probability over all trees."""
        X = np.ascontiguousarray(X, dtype=np.float64)
        rows = np.arange(X.shape[0], dtype=np.int64)
        total = np.zeros(X.shape[0])
        for tree in self.trees:
            total += tree.predict(X, rows)
        return total / len(self.trees)


def oversample_balance(dataset: Dataset, rng: np.random.Generator):
    """Balance classes by appending minority rows drawn with replacement.

    Original rows are kept once, in order; duplicates are appended until
    the minority count reaches n0. Returns the balanced feature/label
    arrays and the origin map from balanced-table rows to original rows.
    """
    n0, n1 = dataset.n0, dataset.n1
    if n1 > n0:
        raise DataError("oversample_balance expects the minority convention (n1 <= n0)")
    identity = np.arange(dataset.n, dtype=np.int64)
    if n1 == n0:
        return dataset.features, dataset.labels, identity
    minority = np.flatnonzero(dataset.labels == 1)
    extra = minority[rng.integers(0, n1, size=n0 - n1)]
    origin_map = np.concatenate([identity, extra])
    X = np.ascontiguousarray(dataset.features[origin_map])
    y = dataset.labels[origin_map]
    return X, y, origin_map


def draw_training_sample(labels: np.ndarray, sampling: str,
                         rng: np.random.Generator,
                         origin_map: np.ndarray | None = None):
    """Draw one tree's in-bag multiset and its OOB set.

    ``labels`` are the training-table labels (the balanced table for
    sampling="over"); ``origin_map`` maps table rows to original rows
    (identity when None). The in-bag draw is with replacement: all n rows
    for "none", the minority count from each class for "under", and the
    per-class count of the balanced table for "over". OOB is the set of
    original rows with zero in-bag copies.
    """
    labels = np.asarray(labels)
    n = labels.shape[0]
    if sampling == "none":
        in_bag = rng.integers(0, n, size=n, dtype=np.int64)
    else:
        idx0 = np.flatnonzero(labels == 0)
        idx1 = np.flatnonzero(labels == 1)
        k = min(len(idx0), len(idx1)) if sampling == "under" else len(idx0)
        if sampling == "over" and len(idx0) != len(idx1):
            raise ValueError("sampling='over' expects a balanced training table")
        part0 = idx0[rng.integers(0, len(idx0), size=k, dtype=np.int64)]
        part1 = idx1[rng.integers(0, len(idx1), size=k, dtype=np.int64)]
        in_bag = np.concatenate([part0, part1])
    origins = in_bag if origin_map is None else origin_map[in_bag]
    n_original = n if origin_map is None else int(origin_map.max()) + 1
    covered = np.zeros(n_original, dtype=bool)
    covered[origins] = True
    oob = np.flatnonzero(~covered).astype(np.int32)
    return in_bag.astype(np.int32), oob


def fit_forest(dataset: Dataset, config: ForestConfig) -> Forest:
    """Train ``config.ntree`` CART trees; deterministic in ``config.seed``."""
    mtry = config.resolve_mtry(dataset.p)
    seed = config.seed
    origin_map = None
    if config.sampling == "over":
        train_X, train_y, origin_map = oversample_balance(
            dataset, seed.derive(TAG_OVERSAMPLE))
    else:
        train_X, train_y = dataset.features, dataset.labels

    trees = []
    for t in range(config.ntree):
        trees.append(_fit_tree(train_X, train_y, config, mtry, seed, t,
                               origin_map))
    return Forest(tuple(trees), config, mtry, dataset.n, dataset.p, origin_map)


def _fit_tree(train_X, train_y, config: ForestConfig, mtry: int,
              seed: SeedSpec, t: int, origin_map) -> Tree:
    rng = seed.derive(TAG_BOOTSTRAP, t)
    in_bag, oob = draw_training_sample(train_y, config.sampling, rng, origin_map)
    words = rng.integers(0, 1 << 62, size=(2 * len(in_bag) + 1, mtry),
                         dtype=np.int64)
    nodes = _kernels.build_tree(train_X, train_y, in_bag, words, mtry,
                                config.min_leaf_size)
    return Tree(nodes, in_bag, oob)


def oob_predictions(forest: Forest, dataset: Dataset):
    """Aggregate OOB scores: per row, mean leaf probability over the trees
    for which the row is out-of-bag.

    Returns ``(scores, covered)``; uncovered rows (OOB for zero trees)
    carry NaN and ``covered[i] = False``.
    """
    if forest.n_original != dataset.n or forest.p != dataset.p:
        raise ValueError("forest/dataset shape mismatch")
    total = np.zeros(dataset.n)
    count = np.zeros(dataset.n, dtype=np.int64)
    X = dataset.features
    for tree in forest.trees:
        if len(tree.oob) == 0:
            continue
        total[tree.oob] += tree.predict(X, tree.oob)
        count[tree.oob] += 1
    covered = count > 0
    scores = np.full(dataset.n, np.nan)
    scores[covered] = total[covered] / count[covered]
    return scores, covered


def save_forest(forest: Forest, path) -> None:
    """Checkpoint a forest to a version-tagged .npz; round-trips bit-exactly."""
    payload = {
        "version": np.array([_FORMAT_VERSION]),
        "meta": np.frombuffer(json.dumps({
            "ntree": forest.config.ntree,
            "mtry": forest.config.mtry,
            "mtry_used": forest.mtry_used,
            "min_leaf_size": forest.config.min_leaf_size,
            "sampling": forest.config.sampling,
            "master_seed": forest.config.seed.master_seed,
            "n_original": forest.n_original,
            "p": forest.p,
        }).encode(), dtype=np.uint8),
    }
    if forest.origin_map is not None:
        payload["origin_map"] = forest.origin_map
    for t, tree in enumerate(forest.trees):
        for key, arr in zip(_NODE_KEYS, tree.nodes):
            payload[f"t{t}_{key}"] = arr
        payload[f"t{t}_in_bag"] = tree.in_bag
        payload[f"t{t}_oob"] = tree.oob
    np.savez_compressed(path, **payload)


def load_forest(path) -> Forest:
    with np.load(path) as data:
        version = int(data["version"][0])
        if version != _FORMAT_VERSION:
            raise ValueError(f"unsupported forest format version {version}")
        meta = json.loads(bytes(data["meta"]).decode())
        config = ForestConfig(
            ntree=meta["ntree"], mtry=meta["mtry"],
            min_leaf_size=meta["min_leaf_size"], sampling=meta["sampling"],
            seed=SeedSpec(meta["master_seed"]),
        )
        origin_map = data["origin_map"] if "origin_map" in data else None
        trees = tuple(
            Tree(tuple(data[f"t{t}_{key}"] for key in _NODE_KEYS),
                 data[f"t{t}_in_bag"], data[f"t{t}_oob"])
            for t in range(meta["ntree"])
        )
    return Forest(trees, config, meta["mtry_used"], meta["n_original"],
                  meta["p"], origin_map)
