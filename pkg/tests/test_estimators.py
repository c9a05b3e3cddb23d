"""Sklearn-style estimator wrapper tests."""

import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError
from sklearn.pipeline import Pipeline

from csiwave.config import PipelineConfig
from csiwave.estimators import (
    ActivitySegmenter,
    KnnActivityClassifier,
    SavitzkyGolaySmoother,
    SubcarrierFusion,
    WaveletFeatures,
    WcnnClassifier,
)
from csiwave.synth import SynthConfig, default_profiles, generate_dataset


@pytest.fixture(scope="module")
def recordings():
    ds = generate_dataset(
        default_profiles(2), 6, SynthConfig(seed=51, noise_sigma=0.01)
    )
    return ds.recordings


class TestTransformers:
    def test_fusion_transform_shape(self, recordings):
        out = SubcarrierFusion().fit_transform(recordings[0].streams)
        assert out.shape == (recordings[0].n_samples, 2)

    def test_get_set_params(self):
        est = SubcarrierFusion(indices=(1, 2))
        assert est.get_params() == {"indices": (1, 2)}
        est.set_params(indices=(2, 3))
        assert est.indices == (2, 3)
        assert clone(est).get_params() == {"indices": (2, 3)}

    def test_smoother(self):
        rng = np.random.default_rng(0)
        x = rng.normal(size=(100, 2))
        out = SavitzkyGolaySmoother(half_width=3, poly_order=2).fit_transform(x)
        assert out.shape == x.shape
        assert np.var(np.diff(out[:, 0])) < np.var(np.diff(x[:, 0]))

    def test_segmenter_crops_and_records(self, recordings):
        pcs = SubcarrierFusion().fit_transform(recordings[0].streams)
        smooth = SavitzkyGolaySmoother().fit_transform(pcs)
        seg = ActivitySegmenter()
        cropped = seg.fit_transform(smooth)
        assert cropped.shape[0] == seg.segment_.length
        assert 0.3 < seg.segment_.normalized_length_t < 0.5

    def test_wavelet_features_shape(self):
        rng = np.random.default_rng(1)
        window = rng.normal(size=(2, 64))
        feats = WaveletFeatures(levels=3).fit_transform(window)
        assert feats.shape == (2 * 64 // 8,)

    def test_sklearn_pipeline_composition(self, recordings):
        pipe = Pipeline(
            [
                ("fusion", SubcarrierFusion()),
                ("smooth", SavitzkyGolaySmoother()),
                ("segment", ActivitySegmenter()),
            ]
        )
        out = pipe.fit_transform(recordings[0].streams)
        assert out.ndim == 2 and out.shape[1] == 2


class TestClassifiers:
    def test_wcnn_fit_predict(self, recordings):
        from dataclasses import replace
        from csiwave.neuralnet import TrainConfig

        cfg = replace(PipelineConfig(), train=TrainConfig(learning_rate=0.1, epochs=8, batch_size=8, seed=0))
        clf = WcnnClassifier(config=cfg)
        clf.fit(recordings)
        preds = clf.predict(recordings)
        assert preds.shape == (len(recordings),)
        assert set(preds) <= {0, 1}

    def test_predict_before_fit_raises(self, recordings):
        with pytest.raises(NotFittedError):
            WcnnClassifier().predict(recordings)

    def test_knn_fit_predict_training_accuracy(self, recordings):
        clf = KnnActivityClassifier(k=1)
        clf.fit(recordings)
        preds = clf.predict(recordings)
        truth = np.array([r.label.class_id for r in recordings])
        assert (preds == truth).mean() == 1.0  # k=1 memorizes the training set

    def test_explicit_labels_override(self, recordings):
        clf = KnnActivityClassifier(k=1)
        flipped = [1 - r.label.class_id for r in recordings]
        clf.fit(recordings, y=flipped)
        preds = clf.predict(recordings)
        np.testing.assert_array_equal(preds, flipped)
