"""Command-line interface.

Subcommands: synth, ingest, preprocess, train, eval, predict, compare-pcs.
Exit codes: 0 success, 1 usage error, 2 data/format error, 3 numerical
error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import PipelineConfig, parse_config, with_fusion_indices
from .data import (
    ACTIVITY_NAMES,
    Dataset,
    load_binary,
    load_csv,
    load_dataset,
    save_dataset,
)
from .errors import (
    CsiWaveError,
    FormatError,
    InvalidValue,
    NoActivity,
    NumericalError,
    SegmentationFailed,
)
from .metrics import confusion_csv, confusion_svg
from .neuralnet import load_model, save_model
from .pipeline import (
    evaluate_model,
    predict_example,
    preprocess,
    preprocess_dataset,
    stratified_split,
    synthesize_dataset,
    train_wcnn,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERICAL = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage problems must exit 1, not argparse's 2
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _load_config(path: str | None) -> PipelineConfig:
    if path is None:
        return PipelineConfig()
    return parse_config(path)


def _load_recordings(data_dir: str) -> Dataset:
    return load_dataset(data_dir)


def _class_names(class_count: int) -> list[str]:
    return [f"{i + 1:02d}. {ACTIVITY_NAMES[i]}" for i in range(class_count)]


def _cmd_synth(args) -> int:
    cfg = _load_config(args.config)
    dataset = synthesize_dataset(cfg)
    out = Path(args.out)
    paths = save_dataset(dataset, out)
    manifest = {
        "version": 1,
        "n_recordings": len(paths),
        "class_count": dataset.class_count,
        "recordings": [
            {
                "file": p.name,
                "label": rec.label.class_id if rec.label else None,
                "activity_window_s": list(rec.activity_window_s)
                if rec.activity_window_s
                else None,
            }
            for p, rec in zip(paths, dataset.recordings)
        ],
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True))
    print(f"wrote {len(paths)} recordings to {out}")
    return EXIT_OK


def _cmd_ingest(args) -> int:
    recs = [load_csv(p) for p in args.csv]
    dataset = Dataset(
        recordings=recs,
        class_count=max((r.label.class_id + 1 for r in recs if r.label), default=0),
    )
    paths = save_dataset(dataset, args.out)
    print(f"ingested {len(paths)} recordings into {args.out}")
    return EXIT_OK


def _cmd_preprocess(args) -> int:
    cfg = _load_config(args.config)
    dataset = _load_recordings(args.data)
    examples = preprocess_dataset(dataset, cfg)
    np.savez(
        args.out,
        windows=np.stack([ex.window for ex in examples]),
        flats=np.stack([ex.flat_384 for ex in examples]),
        labels=np.array([ex.label.class_id if ex.label else -1 for ex in examples]),
        segments=np.array([[ex.segment.start, ex.segment.end] for ex in examples]),
        provenance=np.array([ex.provenance for ex in examples]),
    )
    print(f"wrote {len(examples)} feature examples to {args.out}")
    return EXIT_OK


def _cmd_train(args) -> int:
    cfg = _load_config(args.config)
    dataset = _load_recordings(args.data)
    examples = preprocess_dataset(dataset, cfg, skip_failures=True)
    train_set, _ = stratified_split(examples, cfg.test_fraction, cfg.split_seed)
    model, losses = train_wcnn(train_set, cfg, dataset.class_count)
    save_model(model, args.out)
    curve_path = Path(args.out).with_suffix(".loss.csv")
    with open(curve_path, "w", encoding="utf-8") as fh:
        fh.write("epoch,mean_loss\n")
        for epoch, loss in enumerate(losses):
            fh.write(f"{epoch},{loss!r}\n")
    print(f"trained on {len(train_set)} examples; checkpoint {args.out}, loss curve {curve_path}")
    return EXIT_OK


def _cmd_eval(args) -> int:
    cfg = _load_config(args.config)
    model = load_model(args.model)
    dataset = _load_recordings(args.data)
    examples = preprocess_dataset(dataset, cfg, skip_failures=True)
    if args.holdout:
        _, examples = stratified_split(examples, cfg.test_fraction, cfg.split_seed)
    report = evaluate_model(model, examples, model.class_count)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    names = _class_names(model.class_count)
    (out / "metrics.json").write_text(report.to_json(names))
    (out / "confusion.csv").write_text(confusion_csv(report, names))
    (out / "confusion.svg").write_text(confusion_svg(report, names))
    print(report.render_table(names))
    print(f"accuracy {report.accuracy:.4f}; reports in {out}")
    return EXIT_OK


def _cmd_predict(args) -> int:
    cfg = _load_config(args.config)
    model = load_model(args.model)
    path = Path(args.input)
    rec = load_csv(path) if path.suffix == ".csv" else load_binary(path)
    example = preprocess(rec, cfg, provenance=path.name)
    label = predict_example(model, example)
    print(f"{path.name}: class {label.class_id} ({label.name})")
    return EXIT_OK


def _cmd_compare_pcs(args) -> int:
    cfg = _load_config(args.config)
    dataset = _load_recordings(args.data)
    rows = []
    for spec in args.indices:
        indices = tuple(int(tok) for tok in spec.split(","))
        run_cfg = with_fusion_indices(cfg, indices)
        examples = preprocess_dataset(dataset, run_cfg, skip_failures=True)
        train_set, test_set = stratified_split(examples, run_cfg.test_fraction, run_cfg.split_seed)
        model, _ = train_wcnn(train_set, run_cfg, dataset.class_count)
        report = evaluate_model(model, test_set, dataset.class_count)
        rows.append((spec, report.accuracy, report.macro_f1))
    print("components  accuracy  macro_f1")
    for spec, acc, f1 in rows:
        print(f"{spec:<11} {acc:8.4f} {f1:9.4f}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="csiwave", description=__doc__)
    parser.add_argument("--version", action="version", version=f"csiwave {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("synth", help="synthesize a labeled dataset")
    p.add_argument("--config", help="pipeline config file")
    p.add_argument("--out", required=True, help="output dataset directory")
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("ingest", help="convert CSV recordings into a dataset directory")
    p.add_argument("--csv", nargs="+", required=True, help="input CSV recordings")
    p.add_argument("--out", required=True, help="output dataset directory")
    p.set_defaults(func=_cmd_ingest)

    p = sub.add_parser("preprocess", help="extract classifier features from a dataset")
    p.add_argument("--config", help="pipeline config file")
    p.add_argument("--data", required=True, help="dataset directory of .csiw recordings")
    p.add_argument("--out", required=True, help="output .npz feature file")
    p.set_defaults(func=_cmd_preprocess)

    p = sub.add_parser("train", help="train the wavelet CNN")
    p.add_argument("--config", help="pipeline config file")
    p.add_argument("--data", required=True, help="dataset directory")
    p.add_argument("--out", required=True, help="output checkpoint path")
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("eval", help="evaluate a checkpoint and emit reports")
    p.add_argument("--config", help="pipeline config file")
    p.add_argument("--model", required=True, help="checkpoint path")
    p.add_argument("--data", required=True, help="dataset directory")
    p.add_argument("--out", required=True, help="output report directory")
    p.add_argument(
        "--holdout",
        action="store_true",
        help="evaluate only the config's stratified hold-out split",
    )
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("predict", help="classify one recording")
    p.add_argument("--config", help="pipeline config file")
    p.add_argument("--model", required=True, help="checkpoint path")
    p.add_argument("--input", required=True, help="recording (.csiw or .csv)")
    p.set_defaults(func=_cmd_predict)

    p = sub.add_parser("compare-pcs", help="rerun the pipeline over component subsets")
    p.add_argument("--config", help="pipeline config file")
    p.add_argument("--data", required=True, help="dataset directory")
    p.add_argument(
        "--indices",
        action="append",
        required=True,
        help="comma-separated one-based component indices (repeatable)",
    )
    p.set_defaults(func=_cmd_compare_pcs)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except NumericalError as exc:
        print(f"csiwave: numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (FormatError, InvalidValue, NoActivity, SegmentationFailed) as exc:
        print(f"csiwave: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (FileNotFoundError, IsADirectoryError, PermissionError) as exc:
        print(f"csiwave: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except CsiWaveError as exc:
        print(f"csiwave: error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
