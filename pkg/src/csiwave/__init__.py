"""Wi-Fi CSI human-activity recognition.

Ingest or synthesize multi-stream CSI amplitude recordings, fuse
subcarriers with PCA, denoise with a Savitzky-Golay filter, segment the
activity adaptively, extract multi-level DWT features, and classify with a
small wavelet-augmented 1-D CNN.
"""

__version__ = "0.1.0"

from .config import PipelineConfig, parse_config
from .data import (
    ACTIVITY_NAMES,
    ActivityLabel,
    CsiRecording,
    Dataset,
    StreamLayout,
    complex_magnitude,
    load_binary,
    load_csv,
    load_dataset,
    save_binary,
    save_csv,
    save_dataset,
    stream_matrix,
)
from .errors import (
    CsiWaveError,
    FormatError,
    InvalidValue,
    NoActivity,
    NumericalError,
    SegmentationFailed,
    ShapeError,
)
from .estimators import (
    ActivitySegmenter,
    KnnActivityClassifier,
    SavitzkyGolaySmoother,
    SubcarrierFusion,
    WaveletFeatures,
    WcnnClassifier,
)
from .fusion import (
    EigenDecomposition,
    PrincipalComponents,
    center_streams,
    correlation_matrix,
    eigen_decompose,
    principal_components,
)
from .metrics import MetricsReport, confusion_csv, confusion_svg, evaluate
from .neuralnet import (
    BaselineCnn,
    TrainConfig,
    WcnnModel,
    concat_channels,
    cross_entropy,
    global_avg_pool,
    load_model,
    save_model,
    softmax,
    train,
)
from .pipeline import (
    BenchmarkResult,
    FeatureExample,
    knn_classify,
    preprocess,
    preprocess_dataset,
    run_benchmark,
    stratified_split,
    synthesize_dataset,
)
from .segment import Segment, SegmentParams, adaptive_segment, windowed_mean, windowed_variance
from .sgolay import SgFilter, apply_sg, design_sg_filter
from .synth import (
    ActivityProfile,
    Envelope,
    ScattererPath,
    SynthConfig,
    default_profiles,
    friis_received_power,
    generate_dataset,
    synthesize_recording,
)
from .wavelet import WaveletPyramid, WaveletSpec, dwt_pyramid, dwt_step, idwt_step
