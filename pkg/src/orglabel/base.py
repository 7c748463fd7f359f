"""Estimator plumbing: parameter introspection and input validation helpers.

Classifiers in this package follow the common fit/predict estimator
conventions (constructor keyword hyperparameters, ``get_params`` /
``set_params``, fitted attributes with a trailing underscore) so they can be
cloned and driven by generic tooling without depending on any framework.
"""

from __future__ import annotations

import inspect

import numpy as np


class Estimator:
    """Base class providing ``get_params`` / ``set_params``.

    Subclasses must accept all hyperparameters as explicit keyword arguments
    of ``__init__`` and store each under the same attribute name.
    """

    @classmethod
    def _param_names(cls):
        sig = inspect.signature(cls.__init__)
        return [
            name
            for name, p in sig.parameters.items()
            if name != "self" and p.kind not in (p.VAR_POSITIONAL, p.VAR_KEYWORD)
        ]

    def get_params(self, deep=True):
        return {name: getattr(self, name) for name in self._param_names()}

    def set_params(self, **params):
        valid = set(self._param_names())
        for name, value in params.items():
            if name not in valid:
                raise ValueError(
                    f"invalid parameter {name!r} for {type(self).__name__}"
                )
            setattr(self, name, value)
        return self

    def __repr__(self):
        args = ", ".join(f"{k}={v!r}" for k, v in sorted(self.get_params().items()))
        return f"{type(self).__name__}({args})"


def check_fitted(estimator, attribute):
    if getattr(estimator, attribute, None) is None:
        raise RuntimeError(
            f"{type(estimator).__name__} is not fitted; call fit() first"
        )


def as_float_matrix(X):
    """Validate and return X as a 2-D float64 array."""
    arr = np.asarray(X, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"expected a 2-D feature matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("feature matrix contains non-finite values")
    return arr


def as_id_matrix(X):
    """Validate and return X as a 2-D int64 array of token ids."""
    arr = np.asarray(X)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    if arr.ndim != 2:
        raise ValueError(f"expected a 2-D id matrix, got shape {arr.shape}")
    arr = arr.astype(np.int64, copy=False)
    if arr.size and arr.min() < 0:
        raise ValueError("token ids must be non-negative")
    return arr


def as_label_vector(y, num_classes=None):
    """Validate and return y as a 1-D int64 array of class indices."""
    arr = np.asarray(y)
    if arr.ndim != 1:
        raise ValueError(f"expected a 1-D label vector, got shape {arr.shape}")
    arr = arr.astype(np.int64, copy=False)
    if arr.size == 0:
        raise ValueError("label vector is empty")
    if arr.min() < 0:
        raise ValueError("class indices must be non-negative")
    if num_classes is not None and arr.max() >= num_classes:
        raise ValueError(
            f"class index {arr.max()} out of range for {num_classes} classes"
        )
    return arr


def check_same_length(a, b, what="inputs"):
    if len(a) != len(b):
        raise ValueError(f"{what} have mismatched lengths: {len(a)} vs {len(b)}")


def require_all_classes(y, num_classes):
    """Every class in 0..num_classes-1 must occur at least once in y."""
    present = np.bincount(y, minlength=num_classes) > 0
    if not present.all():
        missing = [int(i) for i in np.flatnonzero(~present)]
        raise ValueError(f"classes missing from training labels: {missing}")
