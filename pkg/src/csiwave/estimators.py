"""Scikit-learn style estimator wrappers around the pipeline stages.

These thin adapters expose the functional core through fit/transform/
predict with get_params/set_params, so stages compose with sklearn
pipelines and model-selection tooling. X is a T x N stream matrix for the
fusion transformer, a T x C component matrix for the smoother/segmenter,
and a list of recordings for the classifiers.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, TransformerMixin
from sklearn.exceptions import NotFittedError

from .config import PipelineConfig
from .data import CsiRecording
from .errors import InvalidValue
from .fusion import principal_components
from .neuralnet import TrainConfig
from .pipeline import (
    evaluate_knn,
    knn_classify,
    predict_example,
    preprocess,
    train_wcnn,
)
from .segment import SegmentParams, adaptive_segment
from .sgolay import apply_sg, design_sg_filter
from .validation import as_float_2d
from .wavelet import WaveletSpec, dwt_pyramid


class SubcarrierFusion(BaseEstimator, TransformerMixin):
    """Project a stream matrix onto selected principal components."""

    def __init__(self, indices=(2, 3)):
        self.indices = indices

    def fit(self, X, y=None):
        return self

    def transform(self, X):
        return principal_components(X, tuple(self.indices)).series


class SavitzkyGolaySmoother(BaseEstimator, TransformerMixin):
    """Column-wise Savitzky-Golay smoothing of a T x C matrix."""

    def __init__(self, half_width=7, poly_order=3, edge_mode="mirror"):
        self.half_width = half_width
        self.poly_order = poly_order
        self.edge_mode = edge_mode

    def fit(self, X, y=None):
        return self

    def transform(self, X):
        X = as_float_2d(X, "component matrix")
        sg = design_sg_filter(self.half_width, self.poly_order)
        return np.column_stack(
            [apply_sg(X[:, j], sg, self.edge_mode) for j in range(X.shape[1])]
        )


class ActivitySegmenter(BaseEstimator, TransformerMixin):
    """Crop a component matrix to its detected activity interval.

    The detected segment of the last transform is available as
    ``segment_``.
    """

    def __init__(self, var_window=15, mean_window=8, t1=0.3, t2=0.5,
                 p_init=0.1, p_growth=1.15, max_iters=64):
        self.var_window = var_window
        self.mean_window = mean_window
        self.t1 = t1
        self.t2 = t2
        self.p_init = p_init
        self.p_growth = p_growth
        self.max_iters = max_iters

    def _params(self) -> SegmentParams:
        return SegmentParams(
            var_window=self.var_window,
            mean_window=self.mean_window,
            t1=self.t1,
            t2=self.t2,
            p_init=self.p_init,
            p_growth=self.p_growth,
            max_iters=self.max_iters,
        )

    def fit(self, X, y=None):
        return self

    def transform(self, X):
        X = as_float_2d(X, "component matrix")
        self.segment_ = adaptive_segment(X, self._params())
        return X[self.segment_.start : self.segment_.end]


class WaveletFeatures(BaseEstimator, TransformerMixin):
    """Flatten the deepest DWT approximation of a channels x L window."""

    def __init__(self, family="haar", levels=3):
        self.family = family
        self.levels = levels

    def fit(self, X, y=None):
        return self

    def transform(self, X):
        X = as_float_2d(X, "window")
        spec = WaveletSpec.by_name(self.family)
        return dwt_pyramid(X, self.levels, spec).approx[-1].reshape(-1)


def _as_examples(X, config: PipelineConfig):
    examples = []
    for i, item in enumerate(X):
        if not isinstance(item, CsiRecording):
            raise InvalidValue(f"X[{i}] is not a CsiRecording")
        examples.append(preprocess(item, config, provenance=f"X[{i}]"))
    return examples


class WcnnClassifier(BaseEstimator, ClassifierMixin):
    """End-to-end wavelet-CNN classifier over CSI recordings.

    fit(X, y=None) preprocesses each recording and trains the network on
    the embedded (or explicitly provided) labels.
    """

    def __init__(self, config=None, epochs=None, learning_rate=None):
        self.config = config
        self.epochs = epochs
        self.learning_rate = learning_rate

    def _config(self) -> PipelineConfig:
        cfg = self.config or PipelineConfig()
        train = cfg.train
        if self.epochs is not None or self.learning_rate is not None:
            train = TrainConfig(
                learning_rate=self.learning_rate or train.learning_rate,
                epochs=self.epochs or train.epochs,
                batch_size=train.batch_size,
                seed=train.seed,
                optimizer=train.optimizer,
                momentum=train.momentum,
            )
        from dataclasses import replace

        return replace(cfg, train=train)

    def fit(self, X, y=None):
        cfg = self._config()
        examples = _as_examples(X, cfg)
        if y is not None:
            from .data import ActivityLabel
            from dataclasses import replace as dc_replace

            examples = [
                dc_replace(ex, label=ActivityLabel.from_id(int(label)))
                for ex, label in zip(examples, y)
            ]
        class_count = max(ex.label_id for ex in examples) + 1
        self.model_, self.losses_ = train_wcnn(examples, cfg, class_count)
        return self

    def predict(self, X):
        if not hasattr(self, "model_"):
            raise NotFittedError("fit must run before predict")
        cfg = self._config()
        examples = _as_examples(X, cfg)
        return np.array([predict_example(self.model_, ex).class_id for ex in examples])


class KnnActivityClassifier(BaseEstimator, ClassifierMixin):
    """K-nearest-neighbour baseline over DWT approximation features."""

    def __init__(self, k=3, config=None):
        self.k = k
        self.config = config

    def fit(self, X, y=None):
        cfg = self.config or PipelineConfig()
        self.train_examples_ = _as_examples(X, cfg)
        if y is not None:
            from .data import ActivityLabel
            from dataclasses import replace as dc_replace

            self.train_examples_ = [
                dc_replace(ex, label=ActivityLabel.from_id(int(label)))
                for ex, label in zip(self.train_examples_, y)
            ]
        return self

    def predict(self, X):
        if not hasattr(self, "train_examples_"):
            raise NotFittedError("fit must run before predict")
        cfg = self.config or PipelineConfig()
        examples = _as_examples(X, cfg)
        return np.array(
            [knn_classify(self.train_examples_, ex, self.k).class_id for ex in examples]
        )
