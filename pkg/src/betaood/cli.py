"""Command-line pipeline: gen-data, train, score, eval, sweep-lambda.

Config precedence is flags > config file > defaults; the effective config
is echoed into every output directory.  Exit codes: 0 success, 1 usage or
config error, 2 data error, 3 numeric failure.
"""

from __future__ import annotations

import csv
import json
import os
import sys
from pathlib import Path

import click
import numpy as np

from .datagen import (
    OodSpec,
    default_spec,
    generate_ind,
    generate_ood,
    read_jsonl,
    write_jsonl,
)
from .errors import ConfigError, DataError, NumericError
from .metrics import (
    ScoredDataset,
    detection_metrics,
    mean_average_precision,
    roc_curve,
    write_roc_csv,
)
from .model import (
    ArchConfig,
    TrainConfig,
    checkpoint_from_json,
    checkpoint_to_json,
    predict_batch,
    train,
)
from .scores import SCORE_NAMES, score_by_name

_GEN_DEFAULTS = {
    "name": "synth",
    "feature_dim": 8,
    "label_count": 5,
    "train_samples": 2000,
    "val_samples": 500,
    "test_samples": 500,
    "cluster_spread": 1.0,
    "mean_scale": 4.0,
    "seed": 0,
    "ood_mode": "novel_cluster",
    "ood_shift": 5.0,
    "ood_samples": 500,
}

_TRAIN_DEFAULTS = {
    "hidden": [32],
    "learning_rate_backbone": 0.05,
    "learning_rate_head": 10.0,
    "epochs": 20,
    "batch_size": 64,
    "seed": 0,
}

_SCORE_DEFAULTS = {
    "scores": list(SCORE_NAMES),
    "lambda1": 0.5,
    "lambda2": 0.5,
}


def _load_config(path, defaults: dict, overrides: dict) -> dict:
    """Merge defaults < config file < explicit flags; reject unknown keys."""
    merged = dict(defaults)
    if path is not None:
        try:
            with open(path) as fh:
                doc = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
        if not isinstance(doc, dict):
            raise ConfigError(f"config {path} must be a JSON object")
        unknown = sorted(set(doc) - set(defaults))
        if unknown:
            raise ConfigError(f"unknown config keys in {path}: {', '.join(unknown)}")
        merged.update(doc)
    for key, value in overrides.items():
        if value is not None:
            merged[key] = value
    return merged


def _prepare_out(out: str) -> Path:
    out_dir = Path(out)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"cannot create output directory {out}: {exc}") from exc
    if not os.access(out_dir, os.W_OK):
        raise ConfigError(f"output directory {out} is not writable")
    return out_dir


def _echo_config(out_dir: Path, command: str, cfg: dict) -> None:
    with open(out_dir / f"{command}_config.json", "w") as fh:
        json.dump(cfg, fh, sort_keys=True, indent=2)
        fh.write("\n")


@click.group()
def cli():
    """Beta-evidential multi-label OOD detection pipeline."""


@cli.command("gen-data")
@click.option("--config", "config_path", type=click.Path(), default=None)
@click.option("--out", required=True, type=click.Path())
@click.option("--seed", type=int, default=None)
@click.option("--name", type=str, default=None)
def cmd_gen_data(config_path, out, seed, name):
    """Generate the four JSONL dataset files (train/val/test/ood)."""
    cfg = _load_config(config_path, _GEN_DEFAULTS, {"seed": seed, "name": name})
    out_dir = _prepare_out(out)
    spec = default_spec(
        feature_dim=cfg["feature_dim"],
        label_count=cfg["label_count"],
        samples_per_split={
            "train": cfg["train_samples"],
            "val": cfg["val_samples"],
            "test": cfg["test_samples"],
        },
        cluster_spread=cfg["cluster_spread"],
        mean_scale=cfg["mean_scale"],
        seed=cfg["seed"],
    )
    ood_spec = OodSpec(
        mode=cfg["ood_mode"],
        shift_distance=cfg["ood_shift"],
        samples=cfg["ood_samples"],
        seed=cfg["seed"],
    )
    ind = generate_ind(spec)
    ood = generate_ood(spec, ood_spec)
    base = cfg["name"]
    for split in ("train", "val", "test"):
        write_jsonl(
            [s for s in ind if s.split == split],
            out_dir / f"{base}.{split}.jsonl",
        )
    write_jsonl(ood, out_dir / f"{base}.ood.jsonl")
    _echo_config(out_dir, "gen_data", cfg)
    click.echo(f"wrote {base}.{{train,val,test,ood}}.jsonl to {out_dir}")


@cli.command("train")
@click.option("--config", "config_path", type=click.Path(), default=None)
@click.option("--data", required=True, type=str,
              help="Dataset prefix, e.g. outdir/synth")
@click.option("--out", required=True, type=click.Path())
@click.option("--seed", type=int, default=None)
@click.option("--epochs", type=int, default=None)
@click.option("--batch-size", type=int, default=None)
def cmd_train(config_path, data, out, seed, epochs, batch_size):
    """Train the two-head network; writes checkpoint.json, prints loss CSV."""
    cfg = _load_config(
        config_path,
        _TRAIN_DEFAULTS,
        {"seed": seed, "epochs": epochs, "batch_size": batch_size},
    )
    train_path = Path(f"{data}.train.jsonl")
    if not train_path.exists():
        raise DataError(f"training file not found: {train_path}")
    out_dir = _prepare_out(out)
    samples = read_jsonl(train_path)
    if not samples:
        raise DataError(f"training file {train_path} is empty")
    features = np.array([s.features for s in samples])
    labels = np.array([s.y for s in samples])
    arch = ArchConfig(
        input_dim=features.shape[1],
        hidden=tuple(cfg["hidden"]),
        label_count=labels.shape[1],
    )
    tc = TrainConfig(
        learning_rate_backbone=cfg["learning_rate_backbone"],
        learning_rate_head=cfg["learning_rate_head"],
        epochs=cfg["epochs"],
        batch_size=cfg["batch_size"],
        seed=cfg["seed"],
    )
    ckpt = train(features, labels, arch, tc)
    with open(out_dir / "checkpoint.json", "w") as fh:
        fh.write(checkpoint_to_json(ckpt))
        fh.write("\n")
    _echo_config(out_dir, "train", cfg)
    click.echo("epoch,mean_loss")
    for i, loss_value in enumerate(ckpt.loss_trace, start=1):
        click.echo(f"{i},{loss_value!r}")


def _load_checkpoint(path):
    ckpt_path = Path(path)
    if not ckpt_path.exists():
        raise DataError(f"checkpoint not found: {ckpt_path}")
    return checkpoint_from_json(ckpt_path.read_text())


@cli.command("score")
@click.option("--config", "config_path", type=click.Path(), default=None)
@click.option("--checkpoint", required=True, type=click.Path())
@click.option("--data", required=True, type=str)
@click.option("--out", required=True, type=click.Path())
@click.option("--scores", "scores_arg", type=str, default=None,
              help="Comma-separated score names")
@click.option("--lambda1", type=float, default=None)
@click.option("--lambda2", type=float, default=None)
def cmd_score(config_path, checkpoint, data, out, scores_arg, lambda1, lambda2):
    """Score test (IND) and OOD samples; writes scores.csv and preds.csv."""
    overrides = {
        "scores": scores_arg.split(",") if scores_arg else None,
        "lambda1": lambda1,
        "lambda2": lambda2,
    }
    cfg = _load_config(config_path, _SCORE_DEFAULTS, overrides)
    requested = cfg["scores"]
    bad = [s for s in requested if s not in SCORE_NAMES]
    if bad:
        raise ConfigError(
            f"unknown score name(s) {', '.join(bad)}; valid: {', '.join(SCORE_NAMES)}"
        )
    ckpt = _load_checkpoint(checkpoint)
    test_path = Path(f"{data}.test.jsonl")
    ood_path = Path(f"{data}.ood.jsonl")
    for p in (test_path, ood_path):
        if not p.exists():
            raise DataError(f"dataset file not found: {p}")
    test = read_jsonl(test_path)
    ood = read_jsonl(ood_path)
    out_dir = _prepare_out(out)

    rows = []
    preds_rows = []
    sample_id = 0
    for is_ood, group in ((0, test), (1, ood)):
        feats = [s.features for s in group]
        logits_list, ev_list, pred_list = predict_batch(ckpt.params, feats)
        for s, logits, ev, pred in zip(group, logits_list, ev_list, pred_list):
            values = [
                score_by_name(nm, ev, logits, cfg["lambda1"], cfg["lambda2"])
                for nm in requested
            ]
            rows.append([sample_id, is_ood, *values])
            if not is_ood:
                preds_rows.append([sample_id, *pred.p, *s.y])
            sample_id += 1

    with open(out_dir / "scores.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["sample_id", "is_ood", *requested])
        for row in rows:
            writer.writerow([row[0], row[1], *[repr(v) for v in row[2:]]])

    n_labels = ckpt.params.arch.label_count
    with open(out_dir / "preds.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        header = ["sample_id"]
        header += [f"p_{j}" for j in range(n_labels)]
        header += [f"y_{j}" for j in range(n_labels)]
        writer.writerow(header)
        for row in preds_rows:
            writer.writerow(
                [row[0]]
                + [repr(float(v)) for v in row[1 : 1 + n_labels]]
                + [int(v) for v in row[1 + n_labels :]]
            )
    _echo_config(out_dir, "score", cfg)
    click.echo(f"scored {len(rows)} samples ({len(test)} IND, {len(ood)} OOD)")


def _read_scores_csv(path):
    """Returns (is_ood array, {score name: value array})."""
    scores_path = Path(path)
    if not scores_path.exists():
        raise DataError(f"scores CSV not found: {scores_path}")
    with open(scores_path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"scores CSV {path} is empty") from None
        if header[:2] != ["sample_id", "is_ood"]:
            raise DataError(
                f"scores CSV {path} must start with sample_id,is_ood columns"
            )
        names = header[2:]
        is_ood = []
        columns = {nm: [] for nm in names}
        for lineno, row in enumerate(reader, start=2):
            try:
                is_ood.append(int(row[1]))
                for nm, val in zip(names, row[2:]):
                    columns[nm].append(float(val))
            except (IndexError, ValueError) as exc:
                raise DataError(f"{path}:{lineno}: malformed row: {exc}") from exc
    return np.array(is_ood), {nm: np.array(v) for nm, v in columns.items()}


def _read_preds_csv(path):
    preds_path = Path(path)
    if not preds_path.exists():
        raise DataError(f"predictions CSV not found: {preds_path}")
    with open(preds_path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        n_labels = sum(1 for h in header if h.startswith("p_"))
        probs, labels = [], []
        for row in reader:
            probs.append([float(v) for v in row[1 : 1 + n_labels]])
            labels.append([int(v) for v in row[1 + n_labels :]])
    return np.array(probs), np.array(labels)


@cli.command("eval")
@click.option("--scores-csv", "scores_csv", type=click.Path(), default=None)
@click.option("--scores", "scores_arg", type=str, default=None,
              help="Comma-separated score names (default: all columns)")
@click.option("--preds", "preds_csv", type=click.Path(), default=None)
@click.option("--aggregate", type=str, default=None,
              help="Comma-separated metrics.csv paths to aggregate (mean+median)")
@click.option("--out", required=True, type=click.Path())
def cmd_eval(scores_csv, scores_arg, preds_csv, aggregate, out):
    """Detection metrics per score plus ROC export; or aggregate over runs."""
    out_dir = _prepare_out(out)
    if aggregate is not None:
        _aggregate_metrics(aggregate.split(","), out_dir)
        return
    if scores_csv is None:
        raise ConfigError("either --scores-csv or --aggregate is required")
    is_ood, columns = _read_scores_csv(scores_csv)
    requested = scores_arg.split(",") if scores_arg else list(columns)
    missing = [s for s in requested if s not in columns]
    if missing:
        raise ConfigError(
            f"score column(s) not in {scores_csv}: {', '.join(missing)}"
        )
    with open(out_dir / "metrics.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["score", "fpr95", "auroc", "aupr"])
        for nm in requested:
            ds = ScoredDataset(scores=columns[nm], is_ood=is_ood)
            m = detection_metrics(ds)
            writer.writerow([nm, repr(m.fpr95), repr(m.auroc), repr(m.aupr)])
            write_roc_csv(roc_curve(ds), out_dir / f"roc_{nm}.csv")
    if preds_csv is not None:
        probs, labels = _read_preds_csv(preds_csv)
        value = mean_average_precision(probs, labels)
        with open(out_dir / "map.csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["metric", "value"])
            writer.writerow(["map", repr(value)])
    click.echo(f"evaluated {len(requested)} score(s) into {out_dir}")


def _aggregate_metrics(paths, out_dir: Path) -> None:
    """Mean and median of every (score, metric) cell across run metrics files."""
    tables = []
    for p in paths:
        mp = Path(p)
        if not mp.exists():
            raise DataError(f"metrics CSV not found: {mp}")
        with open(mp, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            rows = {row[0]: [float(v) for v in row[1:]] for row in reader}
        tables.append((header[1:], rows))
    metric_names = tables[0][0]
    score_names = list(tables[0][1])
    with open(out_dir / "aggregate.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["score", "metric", "mean", "median"])
        for nm in score_names:
            for j, metric in enumerate(metric_names):
                values = [rows[nm][j] for _, rows in tables]
                writer.writerow(
                    [nm, metric, repr(float(np.mean(values))), repr(float(np.median(values)))]
                )
    click.echo(f"aggregated {len(paths)} run(s) into {out_dir / 'aggregate.csv'}")


@cli.command("sweep-lambda")
@click.option("--scores-csv", "scores_csv", required=True, type=click.Path())
@click.option("--lambda2", "lambda2_arg", type=str, default=None,
              help="Comma-separated grid (default 0.0,0.1,...,1.0)")
@click.option("--out", required=True, type=click.Path())
def cmd_sweep_lambda(scores_csv, lambda2_arg, out):
    """Metrics of the combined sum score over a lambda2 grid; writes sweep.csv."""
    out_dir = _prepare_out(out)
    is_ood, columns = _read_scores_csv(scores_csv)
    for needed in ("u_s_p", "u_s_n"):
        if needed not in columns:
            raise ConfigError(
                f"sweep-lambda needs column {needed!r} in {scores_csv}"
            )
    if lambda2_arg:
        try:
            grid = [float(v) for v in lambda2_arg.split(",")]
        except ValueError as exc:
            raise ConfigError(f"bad --lambda2 grid: {exc}") from exc
    else:
        grid = [k / 10.0 for k in range(11)]
    for lam in grid:
        if not (0.0 <= lam <= 1.0):
            raise ConfigError(f"lambda2 values must be in [0, 1], got {lam}")
    with open(out_dir / "sweep.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["lambda2", "fpr95", "auroc", "aupr"])
        for lam in grid:
            combined = lam * columns["u_s_p"] + (1.0 - lam) * columns["u_s_n"]
            m = detection_metrics(ScoredDataset(scores=combined, is_ood=is_ood))
            writer.writerow([repr(lam), repr(m.fpr95), repr(m.auroc), repr(m.aupr)])
    click.echo(f"swept {len(grid)} lambda2 values into {out_dir / 'sweep.csv'}")


def main(argv=None) -> int:
    try:
        cli.main(args=argv, standalone_mode=False)
        return 0
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        return 1
    except click.UsageError as exc:
        click.echo(f"usage error: {exc.format_message()}", err=True)
        return 1
    except click.ClickException as exc:
        click.echo(f"error: {exc.format_message()}", err=True)
        return 1
    except DataError as exc:
        click.echo(f"data error: {exc}", err=True)
        return 2
    except NumericError as exc:
        click.echo(f"numeric error: {exc}", err=True)
        return 3


if __name__ == "__main__":
    sys.exit(main())
