"""Prediction and accuracy evaluation.

A trained model predicts by decoding the Viterbi path, reading off its visit
vector, and applying the linear response model.  Baseline objects that carry
their own `predict` method (e.g. the mean baseline) are used as-is.
"""

import numpy as np

from ._engine import LatticeEngine
from .errors import DecodeFailureError, InvalidInputError
from .model import path_to_counts
from .regression import predict_mean


def predict(model, x):
    """Point prediction for one sequence."""
    if hasattr(model, "predict"):
        return float(model.predict(x))
    _, v, _ = _decode_batch(model, [x])
    return predict_mean(model.regression, v[0])


def predict_batch(model, sequences):
    """Predictions for many sequences; batches Viterbi decoding by length."""
    if hasattr(model, "predict"):
        return np.array([model.predict(x) for x in sequences])
    _, vs, _ = _decode_batch(model, sequences)
    return np.array([predict_mean(model.regression, v) for v in vs])


def _decode_batch(model, sequences):
    engine = LatticeEngine(model.params, model.caps)
    topo = model.params.topology
    paths = [None] * len(sequences)
    vs = [None] * len(sequences)
    logps = np.empty(len(sequences))
    groups = {}
    for i, x in enumerate(sequences):
        if len(x) == 0:
            raise InvalidInputError(f"sequence {i} is empty")
        groups.setdefault(len(x), []).append(i)
    for length in sorted(groups):
        idx = groups[length]
        xs = engine.encode_batch([sequences[i] for i in idx])
        p, lp, ok = engine.viterbi(xs)
        for j, i in enumerate(idx):
            if not ok[j]:
                raise DecodeFailureError(f"sequence {i}: no positive-probability path")
            paths[i] = p[j]
            vs[i] = path_to_counts(p[j], topo, model.caps)
            logps[i] = lp[j]
    return paths, vs, logps


def evaluate_mae(model, test):
    """Mean absolute prediction error over a dataset."""
    if len(test) == 0:
        raise InvalidInputError("test set must be non-empty")
    preds = predict_batch(model, [ex.sequence for ex in test])
    ys = np.array([ex.response for ex in test])
    return float(np.mean(np.abs(ys - preds)))
