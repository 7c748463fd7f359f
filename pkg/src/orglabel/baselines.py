"""Classical baselines over bag-of-words counts.

Four from-scratch estimators share the fit/predict surface: multinomial
naive Bayes with Laplace smoothing, multinomial logistic regression by
full-batch gradient descent, one-vs-rest linear SVMs by subgradient descent,
and a CART decision tree with Gini impurity. All are deterministic given
their constructor arguments; token order never matters because the features
are counts.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .base import (
    Estimator,
    as_float_matrix,
    as_label_vector,
    check_fitted,
    check_same_length,
    require_all_classes,
)
from .textprep import PAD_ID, Vocab

BASELINE_KINDS = ("nb", "logreg", "svm", "dtree")


@dataclass(frozen=True)
class BowVector:
    """Sparse token-id counts; PAD never appears, OOV counts under UNK."""

    counts: dict[int, int]
    total: int

    def to_dense(self, size: int) -> np.ndarray:
        dense = np.zeros(size, dtype=np.float64)
        for idx, n in self.counts.items():
            dense[idx] = n
        return dense


def featurize_bow(tokens: list[str], vocab: Vocab) -> BowVector:
    counts: dict[int, int] = {}
    for tok in tokens:
        idx = vocab.id_for(tok)
        counts[idx] = counts.get(idx, 0) + 1
    return BowVector(counts=counts, total=len(tokens))


def bow_matrix(corpus: list[list[str]], vocab: Vocab) -> np.ndarray:
    """Dense (n_docs, vocab_size) count matrix."""
    out = np.zeros((len(corpus), len(vocab)), dtype=np.float64)
    for row, tokens in enumerate(corpus):
        for idx, n in featurize_bow(tokens, vocab).counts.items():
            out[row, idx] = n
    return out


def _prepare(X, y, num_classes):
    X = as_float_matrix(X)
    y = as_label_vector(y)
    check_same_length(X, y, "X and y")
    k = num_classes or int(y.max()) + 1
    require_all_classes(y, k)
    return X, y, k


class MultinomialNaiveBayes(Estimator):
    """Multinomial NB with Laplace smoothing over all feature columns."""

    def __init__(self, alpha=1.0, num_classes=None):
        self.alpha = alpha
        self.num_classes = num_classes

    def fit(self, X, y):
        X, y, k = _prepare(X, y, self.num_classes)
        n_features = X.shape[1]
        class_count = np.bincount(y, minlength=k).astype(np.float64)
        feature_count = np.zeros((k, n_features), dtype=np.float64)
        for c in range(k):
            feature_count[c] = X[y == c].sum(axis=0)
        self.class_log_prior_ = np.log(class_count / class_count.sum())
        smoothed = feature_count + self.alpha
        self.feature_log_prob_ = np.log(smoothed) - np.log(
            smoothed.sum(axis=1, keepdims=True)
        )
        self.classes_ = np.arange(k)
        return self

    def predict_scores(self, X):
        check_fitted(self, "feature_log_prob_")
        X = as_float_matrix(X)
        return X @ self.feature_log_prob_.T + self.class_log_prior_

    def predict(self, X):
        return np.argmax(self.predict_scores(X), axis=1)


def logreg_loss_and_grad(w, b, X, y, k, l2):
    """Mean cross-entropy with L2 penalty on weights, and its gradients."""
    n = X.shape[0]
    logits = X @ w + b
    logits -= logits.max(axis=1, keepdims=True)
    e = np.exp(logits)
    probs = e / e.sum(axis=1, keepdims=True)
    picked = np.maximum(probs[np.arange(n), y], 1e-300)
    loss = float(-np.log(picked).mean()) + 0.5 * l2 * float((w * w).sum())
    d_logits = probs
    d_logits[np.arange(n), y] -= 1.0
    d_logits /= n
    grad_w = X.T @ d_logits + l2 * w
    grad_b = d_logits.sum(axis=0)
    return loss, grad_w, grad_b


class SoftmaxRegression(Estimator):
    """Multinomial logistic regression trained by full-batch gradient descent."""

    def __init__(self, l2=1e-4, learning_rate=0.5, epochs=300, seed=0,
                 num_classes=None):
        self.l2 = l2
        self.learning_rate = learning_rate
        self.epochs = epochs
        self.seed = seed
        self.num_classes = num_classes

    def fit(self, X, y):
        X, y, k = _prepare(X, y, self.num_classes)
        w = np.zeros((X.shape[1], k), dtype=np.float64)
        b = np.zeros(k, dtype=np.float64)
        for _ in range(self.epochs):
            _, grad_w, grad_b = logreg_loss_and_grad(w, b, X, y, k, self.l2)
            w -= self.learning_rate * grad_w
            b -= self.learning_rate * grad_b
        self.weights_ = w
        self.bias_ = b
        self.classes_ = np.arange(k)
        return self

    def predict_scores(self, X):
        check_fitted(self, "weights_")
        X = as_float_matrix(X)
        logits = X @ self.weights_ + self.bias_
        logits -= logits.max(axis=1, keepdims=True)
        e = np.exp(logits)
        return e / e.sum(axis=1, keepdims=True)

    def predict(self, X):
        return np.argmax(self.predict_scores(X), axis=1)


class LinearSVM(Estimator):
    """One-vs-rest linear SVMs, primal hinge loss by subgradient descent.

    Objective per class: 0.5*lam*||w||^2 + mean hinge, lam = 1/(C*n), with
    the classic 1/(lam*t) step schedule. The bias rides along as an appended
    constant feature. Scores are raw margins.
    """

    def __init__(self, c=1.0, epochs=200, seed=0, num_classes=None):
        self.c = c
        self.epochs = epochs
        self.seed = seed
        self.num_classes = num_classes

    def fit(self, X, y):
        X, y, k = _prepare(X, y, self.num_classes)
        n = X.shape[0]
        Xb = np.hstack([X, np.ones((n, 1))])
        lam = 1.0 / (self.c * n)
        weights = np.zeros((k, Xb.shape[1]), dtype=np.float64)
        for c in range(k):
            target = np.where(y == c, 1.0, -1.0)
            w = weights[c]
            for t in range(1, self.epochs + 1):
                margins = target * (Xb @ w)
                viol = margins < 1.0
                subgrad = lam * w - (target[viol, None] * Xb[viol]).sum(axis=0) / n
                w -= subgrad / (lam * t)
        self.weights_ = weights
        self.classes_ = np.arange(k)
        return self

    def predict_scores(self, X):
        check_fitted(self, "weights_")
        X = as_float_matrix(X)
        Xb = np.hstack([X, np.ones((X.shape[0], 1))])
        return Xb @ self.weights_.T

    def predict(self, X):
        return np.argmax(self.predict_scores(X), axis=1)


def gini(class_counts: np.ndarray) -> float:
    total = class_counts.sum()
    if total == 0:
        return 0.0
    p = class_counts / total
    return float(1.0 - (p * p).sum())


class DecisionTree(Estimator):
    """CART classifier: Gini impurity, numeric thresholds, majority leaves.

    Nodes are stored as a flat list of dicts (JSON-friendly): internal nodes
    carry (feature, threshold, left, right); leaves carry a class
    distribution. Split ties break on (feature index, threshold) so training
    is deterministic.
    """

    def __init__(self, max_depth=20, min_leaf=2, num_classes=None, seed=0):
        self.max_depth = max_depth
        self.min_leaf = min_leaf
        self.num_classes = num_classes
        self.seed = seed

    def fit(self, X, y):
        X, y, k = _prepare(X, y, self.num_classes)
        self.k_ = k
        self.nodes_: list[dict] = []
        self._build(X, y, np.arange(X.shape[0]), depth=0)
        self.classes_ = np.arange(k)
        return self

    def _leaf(self, y, index) -> int:
        counts = np.bincount(y[index], minlength=self.k_)
        node = {
            "leaf": True,
            "counts": [int(c) for c in counts],
            "label": int(np.argmax(counts)),
        }
        self.nodes_.append(node)
        return len(self.nodes_) - 1

    def _best_split(self, X, y, index):
        """Return (gain, feature, threshold) of the best Gini split or None."""
        n = len(index)
        counts_all = np.bincount(y[index], minlength=self.k_).astype(np.float64)
        parent = gini(counts_all)
        best = None
        for feature in range(X.shape[1]):
            col = X[index, feature]
            order = np.argsort(col, kind="stable")
            sorted_col = col[order]
            sorted_y = y[index][order]
            onehot = np.zeros((n, self.k_), dtype=np.float64)
            onehot[np.arange(n), sorted_y] = 1.0
            left_counts = np.cumsum(onehot, axis=0)
            # Candidate cut after position i (0-based): left = first i+1 rows.
            boundaries = np.flatnonzero(sorted_col[:-1] < sorted_col[1:])
            for i in boundaries:
                n_left = i + 1
                n_right = n - n_left
                if n_left < self.min_leaf or n_right < self.min_leaf:
                    continue
                lc = left_counts[i]
                rc = counts_all - lc
                weighted = (n_left * gini(lc) + n_right * gini(rc)) / n
                gain = parent - weighted
                threshold = 0.5 * (sorted_col[i] + sorted_col[i + 1])
                cand = (gain, -feature, -threshold)
                if gain > 1e-12 and (best is None or cand > best[0]):
                    best = (cand, feature, float(threshold))
        if best is None:
            return None
        return best[0][0], best[1], best[2]

    def _build(self, X, y, index, depth) -> int:
        labels = y[index]
        if (
            depth >= self.max_depth
            or len(index) < 2 * self.min_leaf
            or np.all(labels == labels[0])
        ):
            return self._leaf(y, index)
        split = self._best_split(X, y, index)
        if split is None:
            return self._leaf(y, index)
        _, feature, threshold = split
        goes_left = X[index, feature] <= threshold
        node = {"leaf": False, "feature": feature, "threshold": threshold,
                "left": -1, "right": -1}
        self.nodes_.append(node)
        pos = len(self.nodes_) - 1
        node["left"] = self._build(X, y, index[goes_left], depth + 1)
        node["right"] = self._build(X, y, index[~goes_left], depth + 1)
        return pos

    def predict_scores(self, X):
        check_fitted(self, "nodes_")
        X = as_float_matrix(X)
        out = np.zeros((X.shape[0], self.k_), dtype=np.float64)
        for row in range(X.shape[0]):
            node = self.nodes_[0]
            while not node["leaf"]:
                if X[row, node["feature"]] <= node["threshold"]:
                    node = self.nodes_[node["left"]]
                else:
                    node = self.nodes_[node["right"]]
            counts = np.asarray(node["counts"], dtype=np.float64)
            out[row] = counts / counts.sum()
        return out

    def predict(self, X):
        return np.argmax(self.predict_scores(X), axis=1)


def make_baseline(kind: str, seed: int = 0, num_classes=None, **hyper) -> Estimator:
    """Construct a baseline estimator by kind name."""
    if kind == "nb":
        return MultinomialNaiveBayes(num_classes=num_classes, **hyper)
    if kind == "logreg":
        return SoftmaxRegression(seed=seed, num_classes=num_classes, **hyper)
    if kind == "svm":
        return LinearSVM(seed=seed, num_classes=num_classes, **hyper)
    if kind == "dtree":
        return DecisionTree(seed=seed, num_classes=num_classes, **hyper)
    raise ValueError(f"unknown baseline kind {kind!r}")
