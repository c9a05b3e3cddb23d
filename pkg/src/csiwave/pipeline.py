"""End-to-end orchestration: preprocessing, splitting, baselines, workflows.

The preprocessing chain follows the system order: subcarrier fusion, per-
component smoothing, adaptive segmentation, fixed-length windowing and the
wavelet pyramid. Workflows tie the stages together for the CLI and the
benchmark; everything is deterministic given the config seeds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .config import PipelineConfig
from .data import ActivityLabel, CsiRecording, Dataset
from .errors import InvalidValue, NoActivity, SegmentationFailed
from .fusion import principal_components
from .metrics import MetricsReport, evaluate
from .neuralnet import BaselineCnn, TrainConfig, WcnnModel, standardize_channels, train
from .segment import Segment, adaptive_segment
from .sgolay import apply_sg, design_sg_filter
from .synth import ActivityProfile, Envelope, default_profiles, generate_dataset
from .wavelet import WaveletPyramid, WaveletSpec, dwt_pyramid


@dataclass(frozen=True)
class FeatureExample:
    """One classifier-ready sample derived from a recording."""

    window: np.ndarray
    pyramid: WaveletPyramid
    flat_384: np.ndarray
    label: ActivityLabel | None
    provenance: str
    segment: Segment

    def __post_init__(self):
        window = np.asarray(self.window, dtype=np.float64)
        flat = np.asarray(self.flat_384, dtype=np.float64)
        if window.ndim != 2:
            raise InvalidValue("window must be channels x length")
        window.setflags(write=False)
        flat.setflags(write=False)
        object.__setattr__(self, "window", window)
        object.__setattr__(self, "flat_384", flat)

    @property
    def label_id(self) -> int:
        if self.label is None:
            raise InvalidValue(f"{self.provenance}: example has no label")
        return self.label.class_id


def resample_to_length(channel: np.ndarray, length: int) -> np.ndarray:
    """Linear interpolation down/up to ``length`` when longer, zero-pad when shorter."""
    if channel.size == length:
        return channel.copy()
    if channel.size > length:
        positions = np.linspace(0.0, channel.size - 1, length)
        return np.interp(positions, np.arange(channel.size), channel)
    out = np.zeros(length)
    out[: channel.size] = channel
    return out


def preprocess(
    recording: CsiRecording, cfg: PipelineConfig, provenance: str = "recording"
) -> FeatureExample:
    """Fusion -> smoothing -> segmentation -> fixed-length features.

    The extracted segment is standardized per component before windowing so
    classifier inputs are scale-free; segmentation failures propagate with
    the recording provenance attached.
    """
    if recording.n_streams < max(cfg.fusion_indices):
        raise InvalidValue(
            f"{provenance}: {recording.n_streams} streams cannot yield "
            f"component {max(cfg.fusion_indices)}"
        )
    pcs = principal_components(recording.streams, cfg.fusion_indices)
    sg_filter = design_sg_filter(cfg.sg_half_width, cfg.sg_poly_order)
    denoised = np.column_stack(
        [
            apply_sg(pcs.series[:, j], sg_filter, cfg.sg_edge_mode)
            for j in range(pcs.series.shape[1])
        ]
    )
    try:
        segment = adaptive_segment(denoised, cfg.seg)
    except NoActivity as exc:
        raise NoActivity(f"{provenance}: {exc}") from exc
    except SegmentationFailed as exc:
        raise SegmentationFailed(
            f"{provenance}: {exc}", best_p=exc.best_p, best_t=exc.best_t
        ) from exc

    cropped = denoised[segment.start : segment.end].T  # channels x segment length
    cropped = standardize_channels(cropped)
    window = np.vstack(
        [resample_to_length(cropped[ch], cfg.window_length) for ch in range(cropped.shape[0])]
    )
    spec = WaveletSpec.by_name(cfg.dwt_family)
    pyramid = dwt_pyramid(window, cfg.dwt_levels, spec)

    flat = np.zeros(cfg.baseline_length)
    concatenated = cropped.reshape(-1)
    flat[: min(concatenated.size, cfg.baseline_length)] = concatenated[: cfg.baseline_length]

    return FeatureExample(
        window=window,
        pyramid=pyramid,
        flat_384=flat,
        label=recording.label,
        provenance=provenance,
        segment=segment,
    )


def preprocess_dataset(
    dataset: Dataset, cfg: PipelineConfig, skip_failures: bool = False
) -> list[FeatureExample]:
    """Preprocess every recording, naming each by its dataset position.

    With ``skip_failures`` recordings whose segmentation fails are dropped
    instead of aborting the batch (the per-recording failure rate of the
    adaptive segmenter is small but not zero).
    """
    examples = []
    for i, rec in enumerate(dataset):
        name = rec.subject_id or f"recording_{i:04d}"
        try:
            examples.append(preprocess(rec, cfg, provenance=name))
        except (NoActivity, SegmentationFailed):
            if not skip_failures:
                raise
    return examples


def stratified_split(items, test_fraction: float = 0.2, seed: int = 0):
    """Label-stratified disjoint (train, test) split with a seeded shuffle.

    Works on any sequence of labeled objects (recordings or feature
    examples). Per-class test counts are round(n_c * fraction), so class
    proportions hold to within one example.
    """
    items = list(items)
    if not 0.0 <= test_fraction <= 1.0:
        raise InvalidValue(f"test_fraction must be in [0, 1], got {test_fraction}")
    by_class: dict[int, list[int]] = {}
    for i, item in enumerate(items):
        if item.label is None:
            raise InvalidValue(f"item {i} has no label; cannot stratify")
        by_class.setdefault(item.label.class_id, []).append(i)
    for class_id, idxs in by_class.items():
        if len(idxs) < 2:
            raise InvalidValue(f"class {class_id} has {len(idxs)} example(s), need >= 2")
    rng = np.random.default_rng(np.random.SeedSequence((seed, 0x59117)))
    test_idx: set[int] = set()
    for class_id in sorted(by_class):
        idxs = np.array(by_class[class_id])
        n_test = int(round(len(idxs) * test_fraction))
        chosen = rng.permutation(len(idxs))[:n_test]
        test_idx.update(int(idxs[c]) for c in chosen)
    train_items = [item for i, item in enumerate(items) if i not in test_idx]
    test_items = [item for i, item in enumerate(items) if i in test_idx]
    return train_items, test_items


def knn_features(example: FeatureExample) -> np.ndarray:
    """KNN feature vector: concatenated deepest-level approximation coefficients."""
    return example.pyramid.approx[-1].reshape(-1)


def knn_classify(train_examples, query: FeatureExample, k: int) -> ActivityLabel:
    """Euclidean k-nearest-neighbour majority vote.

    Vote ties go to the class of the single nearest neighbour among the
    tied classes; distance ties resolve by training order.
    """
    if not train_examples:
        raise InvalidValue("knn needs a non-empty training set")
    if not 1 <= k <= len(train_examples):
        raise InvalidValue(f"k must be in [1, {len(train_examples)}], got {k}")
    q = knn_features(query)
    dists = np.array([np.linalg.norm(knn_features(ex) - q) for ex in train_examples])
    order = np.lexsort((np.arange(len(dists)), dists))[:k]
    votes: dict[int, int] = {}
    for idx in order:
        cid = train_examples[idx].label_id
        votes[cid] = votes.get(cid, 0) + 1
    top = max(votes.values())
    tied = {cid for cid, count in votes.items() if count == top}
    for idx in order:  # nearest neighbour within the tied classes
        cid = train_examples[idx].label_id
        if cid in tied:
            return ActivityLabel.from_id(cid)
    raise AssertionError("unreachable: tied classes came from the neighbour list")


# -- workflows ----------------------------------------------------------------


def profiles_from_config(cfg: PipelineConfig) -> list[ActivityProfile]:
    """Built-in class profiles with any [profile.N] signature overrides applied."""
    profiles = default_profiles(cfg.synth_classes)
    for class_id, (freqs, depths) in cfg.profile_overrides.items():
        if class_id >= len(profiles):
            continue
        base = profiles[class_id]
        window = base.activity_window_s
        f1, d1 = freqs[0], min(1.0, depths[0])
        f2, d2 = (freqs[1], min(1.0, depths[1])) if len(freqs) > 1 else (freqs[0], min(1.0, depths[0]))
        envelopes = iter(
            (
                Envelope(((f1, d1, 0.0),), window),
                Envelope(((f2, d2, math.pi / 3),), window),
                Envelope(((f1, 0.5 * d1, math.pi / 2), (f2, 0.5 * d2, math.pi / 5)), window),
            )
        )
        paths = tuple(
            path if path.modulation is None else replace(path, modulation=next(envelopes))
            for path in base.paths
        )
        profiles[class_id] = ActivityProfile(
            label=base.label, paths=paths, duration_s=base.duration_s
        )
    return profiles


def synthesize_dataset(cfg: PipelineConfig) -> Dataset:
    return generate_dataset(profiles_from_config(cfg), cfg.synth_n_per_class, cfg.synth)


def wcnn_training_examples(examples) -> list[tuple]:
    return [(ex.window, ex.pyramid, ex.label_id) for ex in examples]


def train_wcnn(examples, cfg: PipelineConfig, class_count: int) -> tuple[WcnnModel, list[float]]:
    model = WcnnModel(
        class_count=class_count,
        window_length=cfg.window_length,
        channels=cfg.model_channels,
        seed=cfg.model_seed,
    )
    losses = train(model, wcnn_training_examples(examples), cfg.train)
    return model, losses


def train_baseline(examples, cfg: PipelineConfig, class_count: int) -> tuple[BaselineCnn, list[float]]:
    model = BaselineCnn(
        class_count=class_count,
        input_length=cfg.baseline_length,
        channels=cfg.baseline_channels,
        seed=cfg.model_seed,
    )
    data = [(ex.flat_384, ex.label_id) for ex in examples]
    losses = train(model, data, cfg.train)
    return model, losses


def predict_example(model, example: FeatureExample) -> ActivityLabel:
    if isinstance(model, BaselineCnn):
        probs = model.forward(example.flat_384)
    else:
        probs = model.forward(example.window, example.pyramid)
    return ActivityLabel.from_id(int(np.argmax(probs)))


def evaluate_model(model, examples, class_count: int) -> MetricsReport:
    predictions = [predict_example(model, ex) for ex in examples]
    truths = [ex.label_id for ex in examples]
    return evaluate(predictions, truths, class_count)


def evaluate_knn(train_examples, test_examples, class_count: int, k: int = 3) -> MetricsReport:
    predictions = [knn_classify(train_examples, ex, k) for ex in test_examples]
    truths = [ex.label_id for ex in test_examples]
    return evaluate(predictions, truths, class_count)


@dataclass(frozen=True)
class BenchmarkResult:
    wcnn_report: MetricsReport
    knn_report: MetricsReport
    losses: list[float]
    n_train: int
    n_test: int


def run_benchmark(cfg: PipelineConfig) -> BenchmarkResult:
    """Synthesis -> preprocessing -> split -> WCNN training -> WCNN vs KNN."""
    dataset = synthesize_dataset(cfg)
    examples = preprocess_dataset(dataset, cfg, skip_failures=True)
    train_set, test_set = stratified_split(examples, cfg.test_fraction, cfg.split_seed)
    model, losses = train_wcnn(train_set, cfg, dataset.class_count)
    wcnn_report = evaluate_model(model, test_set, dataset.class_count)
    knn_report = evaluate_knn(train_set, test_set, dataset.class_count)
    return BenchmarkResult(
        wcnn_report=wcnn_report,
        knn_report=knn_report,
        losses=losses,
        n_train=len(train_set),
        n_test=len(test_set),
    )
