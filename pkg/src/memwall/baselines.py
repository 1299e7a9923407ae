"""Self-contained regression baselines: RBF kernel ridge and a CART tree.

Both consume (cores, frequency-ratio) feature pairs and predict speedups.
They exist to benchmark the analytical models against generic machine
learning under identical train/test splits, so they are deliberately
minimal: numpy only, no scikit-learn.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence, TypeVar

import numpy as np

from .errors import DomainError, EmptyInput, LengthMismatch, SingularSystem, TooFewSamples
from .model import mse

#: Default hyperparameter grids for kernel ridge regression.
KRR_ALPHA_GRID = (1.0, 0.1, 0.01, 0.001)
KRR_GAMMA_GRID = (1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 1.0)


@dataclass(frozen=True)
class RegressorInput:
    """Feature/target pairs for the baselines; features are (p, phi) rows."""

    features: np.ndarray
    targets: np.ndarray

    def __init__(self, features, targets):
        features = np.atleast_2d(np.asarray(features, dtype=float))
        targets = np.asarray(targets, dtype=float)
        if features.shape[0] != targets.shape[0]:
            raise LengthMismatch(
                f"{features.shape[0]} feature rows vs {targets.shape[0]} targets"
            )
        if features.size and not np.isfinite(features).all():
            raise DomainError("features contain NaN or inf")
        if targets.size and not np.isfinite(targets).all():
            raise DomainError("targets contain NaN or inf")
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "targets", targets)

    def __len__(self) -> int:
        return int(self.targets.shape[0])

    def subset(self, indices) -> "RegressorInput":
        return RegressorInput(self.features[indices], self.targets[indices])


@dataclass(frozen=True)
class KrrHyperParams:
    alpha: float
    gamma: float

    def __post_init__(self):
        if not self.alpha > 0.0:
            raise DomainError(f"alpha must be > 0, got {self.alpha}")
        if not self.gamma > 0.0:
            raise DomainError(f"gamma must be > 0, got {self.gamma}")


def default_krr_grid() -> list[KrrHyperParams]:
    """Alpha-major grid over the default alpha/gamma values."""
    return [KrrHyperParams(a, g) for a in KRR_ALPHA_GRID for g in KRR_GAMMA_GRID]


@dataclass(frozen=True)
class KrrModel:
    """Fitted kernel ridge model: standardized support points + dual coefs."""

    support: np.ndarray
    coef: np.ndarray
    gamma: float
    alpha: float
    feature_mean: np.ndarray
    feature_scale: np.ndarray


def _standardize_params(features: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    mean = features.mean(axis=0)
    scale = features.std(axis=0)
    scale = np.where(scale > 0.0, scale, 1.0)  # constant features pass through
    return mean, scale


def _rbf_kernel(a: np.ndarray, b: np.ndarray, gamma: float) -> np.ndarray:
    sq = ((a[:, None, :] - b[None, :, :]) ** 2).sum(axis=2)
    return np.exp(-gamma * sq)


def krr_fit(data: RegressorInput, hp: KrrHyperParams) -> KrrModel:
    """Solve (K + alpha*I) a = y on standardized features.

    Features are shifted/scaled to zero mean and unit variance (the kernel
    is distance based); the scaling constants become part of the model.
    """
    n = len(data)
    if n == 0:
        raise EmptyInput("kernel ridge needs at least one sample")
    mean, scale = _standardize_params(data.features)
    x = (data.features - mean) / scale
    kernel = _rbf_kernel(x, x, hp.gamma)
    try:
        coef = np.linalg.solve(kernel + hp.alpha * np.eye(n), data.targets)
    except np.linalg.LinAlgError as exc:
        raise SingularSystem(f"kernel system solve failed: {exc}") from exc
    if not np.isfinite(coef).all():
        raise SingularSystem("kernel system solve produced non-finite coefficients")
    return KrrModel(
        support=x, coef=coef, gamma=hp.gamma, alpha=hp.alpha,
        feature_mean=mean, feature_scale=scale,
    )


def krr_predict(model: KrrModel, points) -> np.ndarray:
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if points.shape[0] == 0:
        return np.empty(0)
    x = (points - model.feature_mean) / model.feature_scale
    return _rbf_kernel(x, model.support, model.gamma) @ model.coef


@dataclass(frozen=True)
class TreeHyperParams:
    min_samples_leaf: int = 1
    max_depth: int | None = None

    def __post_init__(self):
        if self.min_samples_leaf < 1:
            raise DomainError("min_samples_leaf must be >= 1")
        if self.max_depth is not None and self.max_depth < 1:
            raise DomainError("max_depth must be >= 1 or None")


@dataclass
class TreeNode:
    value: float
    feature: int | None = None
    threshold: float | None = None
    left: "TreeNode | None" = None
    right: "TreeNode | None" = None

    @property
    def is_leaf(self) -> bool:
        return self.feature is None


@dataclass(frozen=True)
class TreeModel:
    root: TreeNode
    n_features: int


# Split improvements below this (relative) level are float noise, not signal.
_SPLIT_EPS = 1e-12


def _best_split(x: np.ndarray, y: np.ndarray, min_leaf: int):
    """Greedy axis-aligned split minimizing summed child SSE.

    Returns (feature, threshold, sse) or None. Thresholds are midpoints
    between consecutive distinct feature values; ties keep the first
    candidate in (feature, position) order.
    """
    n = len(y)
    best = None
    best_sse = np.inf
    for feature in range(x.shape[1]):
        order = np.argsort(x[:, feature], kind="stable")
        xs = x[order, feature]
        ys = y[order]
        csum = np.cumsum(ys)
        csq = np.cumsum(ys * ys)
        total_sum = csum[-1]
        total_sq = csq[-1]
        for i in range(min_leaf, n - min_leaf + 1):
            if i == 0 or i == n or xs[i] == xs[i - 1]:
                continue
            left_sum, left_sq = csum[i - 1], csq[i - 1]
            right_sum, right_sq = total_sum - left_sum, total_sq - left_sq
            sse = (left_sq - left_sum * left_sum / i) + (
                right_sq - right_sum * right_sum / (n - i)
            )
            if sse < best_sse:
                best_sse = sse
                best = (feature, (xs[i] + xs[i - 1]) / 2.0, sse)
    return best


def _grow(x: np.ndarray, y: np.ndarray, hp: TreeHyperParams, depth: int) -> TreeNode:
    node = TreeNode(value=float(y.mean()))
    n = len(y)
    if n < 2 * hp.min_samples_leaf or (y == y[0]).all():
        return node
    if hp.max_depth is not None and depth >= hp.max_depth:
        return node
    found = _best_split(x, y, hp.min_samples_leaf)
    if found is None:
        return node
    feature, threshold, sse = found
    parent_sse = float(((y - y.mean()) ** 2).sum())
    if parent_sse - sse <= _SPLIT_EPS * max(1.0, parent_sse):
        return node
    mask = x[:, feature] <= threshold
    node.feature = feature
    node.threshold = float(threshold)
    node.left = _grow(x[mask], y[mask], hp, depth + 1)
    node.right = _grow(x[~mask], y[~mask], hp, depth + 1)
    return node


def tree_fit(data: RegressorInput, hp: TreeHyperParams | None = None) -> TreeModel:
    """Grow a CART regression tree on raw (unscaled) features."""
    hp = hp or TreeHyperParams()
    if len(data) == 0:
        raise EmptyInput("tree fitting needs at least one sample")
    return TreeModel(root=_grow(data.features, data.targets, hp, depth=0),
                     n_features=data.features.shape[1])


def tree_predict(model: TreeModel, points) -> np.ndarray:
    points = np.atleast_2d(np.asarray(points, dtype=float))
    out = np.empty(points.shape[0])
    for i, row in enumerate(points):
        node = model.root
        while not node.is_leaf:
            node = node.left if row[node.feature] <= node.threshold else node.right
        out[i] = node.value
    return out


ModelT = TypeVar("ModelT")
HyperT = TypeVar("HyperT")


def cv_folds(n: int, k_folds: int, seed: int) -> list[np.ndarray]:
    """Seeded shuffle, then contiguous partition into k folds.

    The n % k remainder samples are spread one per fold from the front, so
    fold sizes differ by at most one.
    """
    if k_folds < 2:
        raise DomainError("cross-validation needs k_folds >= 2")
    if n < k_folds:
        raise TooFewSamples(f"{n} samples cannot fill {k_folds} folds")
    perm = np.random.default_rng(seed).permutation(n)
    base, extra = divmod(n, k_folds)
    folds = []
    start = 0
    for j in range(k_folds):
        size = base + (1 if j < extra else 0)
        folds.append(perm[start:start + size])
        start += size
    return folds


def grid_search_cv(
    fit_fn: Callable[[RegressorInput, HyperT], ModelT],
    predict_fn: Callable[[ModelT, np.ndarray], np.ndarray],
    data: RegressorInput,
    grid: Sequence[HyperT],
    k_folds: int = 3,
    seed: int = 0,
) -> HyperT:
    """Pick the grid element with the lowest mean validation MSE.

    Deterministic given the seed; ties resolve to the earliest grid entry.
    """
    if len(grid) == 0:
        raise EmptyInput("hyperparameter grid is empty")
    folds = cv_folds(len(data), k_folds, seed)
    all_indices = np.arange(len(data))
    best_hp = None
    best_err = np.inf
    for hp in grid:
        fold_errors = []
        for fold in folds:
            train_mask = np.ones(len(data), dtype=bool)
            train_mask[fold] = False
            model = fit_fn(data.subset(all_indices[train_mask]), hp)
            predicted = predict_fn(model, data.features[fold])
            fold_errors.append(mse(predicted, data.targets[fold]))
        mean_err = float(np.mean(fold_errors))
        if mean_err < best_err:
            best_err = mean_err
            best_hp = hp
    return best_hp
