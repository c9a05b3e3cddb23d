"""Pipeline configuration: a sectioned key-value file with a strict schema.

Every key is typed and validated before any work runs; unknown sections or
keys are errors so a typo cannot silently fall back to a default. The
``[profile.N]`` sections optionally override the built-in activity
signatures for synthesis.
"""

from __future__ import annotations

import configparser
import math
import re
from dataclasses import dataclass, field, replace

from .data import StreamLayout
from .errors import FormatError
from .neuralnet import TrainConfig
from .segment import SegmentParams
from .synth import SynthConfig

_SCHEMA: dict[str, dict[str, type]] = {
    "synth": {
        "classes": int,
        "n_per_class": int,
        "seed": int,
        "noise_sigma": float,
        "gain_jitter": float,
        "sample_rate_hz": float,
        "ntx": int,
        "nrx": int,
        "nsub": int,
    },
    "fusion": {"indices": "int_list"},
    "sg": {"window_half_width": int, "poly_order": int, "edge_mode": str},
    "seg": {
        "var_window": int,
        "mean_window": int,
        "t1": float,
        "t2": float,
        "p_init": float,
        "p_growth": float,
        "max_iters": int,
    },
    "dwt": {"family": str, "levels": int},
    "model": {"window_length": int, "channels": "int_list", "seed": int,
              "baseline_channels": "int_list", "baseline_length": int},
    "train": {
        "learning_rate": float,
        "epochs": int,
        "batch_size": int,
        "seed": int,
        "optimizer": str,
        "momentum": float,
    },
    "split": {"test_fraction": float, "seed": int},
}

_PROFILE_KEYS = {"freqs_hz": "float_list", "depths": "float_list"}
_PROFILE_RE = re.compile(r"^profile\.(\d+)$")


@dataclass(frozen=True)
class PipelineConfig:
    """Typed bundle of every stage's settings."""

    synth_classes: int = 6
    synth_n_per_class: int = 30
    synth: SynthConfig = field(
        default_factory=lambda: SynthConfig(
            noise_sigma=0.02, per_stream_gain_jitter=0.05, seed=42
        )
    )
    fusion_indices: tuple[int, ...] = (2, 3)
    sg_half_width: int = 7
    sg_poly_order: int = 3
    sg_edge_mode: str = "mirror"
    seg: SegmentParams = field(default_factory=SegmentParams)
    dwt_family: str = "haar"
    dwt_levels: int = 3
    window_length: int = 256
    model_channels: tuple[int, int, int, int] = (16, 32, 64, 128)
    model_seed: int = 7
    baseline_channels: tuple[int, int] = (16, 32)
    baseline_length: int = 384
    train: TrainConfig = field(default_factory=lambda: TrainConfig(seed=7))
    test_fraction: float = 0.2
    split_seed: int = 1234
    profile_overrides: dict[int, tuple[tuple[float, ...], tuple[float, ...]]] = field(
        default_factory=dict
    )


def _convert(section: str, key: str, raw: str, kind):
    try:
        if kind is int:
            return int(raw)
        if kind is float:
            value = float(raw)
            if not math.isfinite(value):
                raise ValueError("not finite")
            return value
        if kind == "int_list":
            return tuple(int(tok.strip()) for tok in raw.split(",") if tok.strip())
        if kind == "float_list":
            return tuple(float(tok.strip()) for tok in raw.split(",") if tok.strip())
        return raw.strip()
    except ValueError as exc:
        raise FormatError(f"[{section}] {key} = {raw!r}: {exc}") from None


def parse_config(path) -> PipelineConfig:
    """Read and validate a config file, applying defaults for absent keys."""
    parser = configparser.ConfigParser(interpolation=None)
    try:
        with open(path, "r", encoding="utf-8") as fh:
            parser.read_file(fh)
    except configparser.Error as exc:
        raise FormatError(f"{path}: {exc}") from None

    values: dict[str, dict[str, object]] = {}
    profiles: dict[int, dict[str, tuple[float, ...]]] = {}
    for section in parser.sections():
        match = _PROFILE_RE.match(section)
        if match:
            class_id = int(match.group(1))
            entry = {}
            for key, raw in parser.items(section):
                if key not in _PROFILE_KEYS:
                    raise FormatError(f"{path}: unknown key {key!r} in [{section}]")
                entry[key] = _convert(section, key, raw, _PROFILE_KEYS[key])
            profiles[class_id] = entry
            continue
        if section not in _SCHEMA:
            raise FormatError(f"{path}: unknown section [{section}]")
        values[section] = {}
        for key, raw in parser.items(section):
            if key not in _SCHEMA[section]:
                raise FormatError(f"{path}: unknown key {key!r} in [{section}]")
            values[section][key] = _convert(section, key, raw, _SCHEMA[section][key])

    return _build_config(values, profiles, path)


def _build_config(values, profiles, path) -> PipelineConfig:
    cfg = PipelineConfig()

    def get(section, key, default):
        return values.get(section, {}).get(key, default)

    synth = SynthConfig(
        sample_rate_hz=get("synth", "sample_rate_hz", cfg.synth.sample_rate_hz),
        layout=StreamLayout(
            get("synth", "ntx", cfg.synth.layout.n_tx),
            get("synth", "nrx", cfg.synth.layout.n_rx),
            get("synth", "nsub", cfg.synth.layout.n_subcarriers),
        ),
        noise_sigma=get("synth", "noise_sigma", cfg.synth.noise_sigma),
        per_stream_gain_jitter=get("synth", "gain_jitter", cfg.synth.per_stream_gain_jitter),
        seed=get("synth", "seed", cfg.synth.seed),
    )
    seg = SegmentParams(
        var_window=get("seg", "var_window", cfg.seg.var_window),
        mean_window=get("seg", "mean_window", cfg.seg.mean_window),
        t1=get("seg", "t1", cfg.seg.t1),
        t2=get("seg", "t2", cfg.seg.t2),
        p_init=get("seg", "p_init", cfg.seg.p_init),
        p_growth=get("seg", "p_growth", cfg.seg.p_growth),
        max_iters=get("seg", "max_iters", cfg.seg.max_iters),
    )
    train = TrainConfig(
        learning_rate=get("train", "learning_rate", cfg.train.learning_rate),
        epochs=get("train", "epochs", cfg.train.epochs),
        batch_size=get("train", "batch_size", cfg.train.batch_size),
        seed=get("train", "seed", cfg.train.seed),
        optimizer=get("train", "optimizer", cfg.train.optimizer),
        momentum=get("train", "momentum", cfg.train.momentum),
    )
    overrides = {}
    for class_id, entry in profiles.items():
        freqs = entry.get("freqs_hz")
        depths = entry.get("depths")
        if freqs is None or depths is None or len(freqs) != len(depths):
            raise FormatError(
                f"{path}: [profile.{class_id}] needs matching freqs_hz and depths lists"
            )
        overrides[class_id] = (freqs, depths)

    fusion_indices = tuple(get("fusion", "indices", cfg.fusion_indices))
    if len(fusion_indices) < 1:
        raise FormatError(f"{path}: [fusion] indices must name at least one component")

    return PipelineConfig(
        synth_classes=get("synth", "classes", cfg.synth_classes),
        synth_n_per_class=get("synth", "n_per_class", cfg.synth_n_per_class),
        synth=synth,
        fusion_indices=fusion_indices,
        sg_half_width=get("sg", "window_half_width", cfg.sg_half_width),
        sg_poly_order=get("sg", "poly_order", cfg.sg_poly_order),
        sg_edge_mode=get("sg", "edge_mode", cfg.sg_edge_mode),
        seg=seg,
        dwt_family=get("dwt", "family", cfg.dwt_family),
        dwt_levels=get("dwt", "levels", cfg.dwt_levels),
        window_length=get("model", "window_length", cfg.window_length),
        model_channels=tuple(get("model", "channels", cfg.model_channels)),
        model_seed=get("model", "seed", cfg.model_seed),
        baseline_channels=tuple(get("model", "baseline_channels", cfg.baseline_channels)),
        baseline_length=get("model", "baseline_length", cfg.baseline_length),
        train=train,
        test_fraction=get("split", "test_fraction", cfg.test_fraction),
        split_seed=get("split", "seed", cfg.split_seed),
        profile_overrides=overrides,
    )


def with_fusion_indices(cfg: PipelineConfig, indices: tuple[int, ...]) -> PipelineConfig:
    return replace(cfg, fusion_indices=tuple(indices))
