"""Command-line entry point wiring datasets, models, explanations, and audits.

Every command takes ``--config`` (a JSON file of defaults) plus flags that
override it, and is deterministic for a fixed config and seed. Exit codes:
0 success, 2 configuration/validation error, 1 internal error.
"""

from __future__ import annotations

import functools
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import click
import numpy as np

from . import attribute as attr
from .dataspace import SplitSpec, load_dataset, stratified_split, write_dataset
from .errors import ValidationError, WrapboxError
from .evaluate import classification_metrics, pca2_project, two_proportion_z
from .explain import Policy, explain
from .models import MODEL_KINDS, restore_model, serialize_model
from .synth import make_blobs

_POLICY_NAMES = {"case1": Policy.CASE_I, "case2": Policy.CASE_II, "case3": Policy.CASE_III}


def _fail(message, code):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def guarded(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except WrapboxError as exc:
            _fail(exc, 2)
        except OSError as exc:
            _fail(exc, 2)
        except Exception as exc:  # noqa: BLE001 - last-resort boundary
            click.echo(f"internal error: {exc!r}", err=True)
            sys.exit(1)

    return wrapper


def _load_config(path):
    if path is None:
        return {}
    with open(path, "r", encoding="utf-8") as fh:
        cfg = json.load(fh)
    if not isinstance(cfg, dict):
        raise ValidationError("config file must hold a JSON object")
    return cfg


def _pick(flag, cfg, key, default=None):
    """Flag beats config beats default."""
    if flag is not None:
        return flag
    return cfg.get(key, default)


def _derived_seeds(seed):
    """One root seed fans out to stage-specific streams."""
    children = np.random.SeedSequence(seed).spawn(3)
    return {
        "split": int(children[0].generate_state(1)[0]),
        "model": int(children[1].generate_state(1)[0]),
        "synth": int(children[2].generate_state(1)[0]),
    }


def _dump_json(doc, path):
    payload = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(payload)


def _dump_jsonl(records, path):
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec, sort_keys=True) + "\n")


def _parse_fractions(text):
    parts = [float(v) for v in str(text).split(",")]
    if len(parts) != 3:
        raise ValidationError(f"fractions must be three comma-separated values, got {text!r}")
    return tuple(parts)


def _require_multiclass(ds):
    present = sum(1 for v in ds.class_histogram().values() if v > 0)
    if present < 2:
        raise ValidationError(
            f"dataset has {present} represented class(es); model fitting needs at least 2"
        )


def _build_box(kind, cfg, flags, n_classes, model_seed):
    if kind not in MODEL_KINDS:
        raise ValidationError(f"unknown model kind {kind!r}; choose from {sorted(MODEL_KINDS)}")
    if kind == "knn":
        return MODEL_KINDS[kind](k=int(_pick(flags.get("k"), cfg, "k", 5)), n_classes=n_classes)
    if kind == "tree":
        return MODEL_KINDS[kind](
            max_depth=int(_pick(flags.get("max_depth"), cfg, "max_depth", 3)),
            min_samples_leaf=int(_pick(flags.get("min_samples_leaf"), cfg, "min_samples_leaf", 20)),
            n_classes=n_classes,
        )
    if kind == "lmeans":
        clusters = _pick(flags.get("clusters"), cfg, "clusters")
        return MODEL_KINDS[kind](
            n_clusters=int(clusters) if clusters is not None else None,
            max_iter=int(_pick(None, cfg, "max_iter", 300)),
            tol=float(_pick(None, cfg, "tol", 1e-4)),
            random_state=model_seed,
            n_classes=n_classes,
        )
    return MODEL_KINDS[kind](
        l2=float(_pick(flags.get("l2"), cfg, "l2", 1e-4)),
        lr=float(_pick(flags.get("lr"), cfg, "lr", 0.1)),
        epochs=int(_pick(flags.get("epochs"), cfg, "epochs", 500)),
        tau=float(_pick(flags.get("tau"), cfg, "tau", 0.5)),
        n_classes=n_classes,
    )


def _load_model_file(path):
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    if "split" not in doc:
        raise ValidationError("model document is missing its training split")
    return doc


def _model_space(doc, ds):
    """Dataset features in the space the model was fitted in."""
    features = np.asarray(ds.features, dtype=np.float64)
    if "transform" in doc:
        logreg = restore_model(doc["transform"])
        features = logreg.transform(features)
    return features


def _restore(doc, ds):
    split = SplitSpec.from_dict(doc["split"])
    features = _model_space(doc, ds)
    X = features[split.train_idx]
    y = ds.labels.astype(np.int64)[split.train_idx]
    box = restore_model(doc, X, y)
    return box, split, features


@click.group()
def main():
    """Wrapper boxes: interpretable classifiers over neural embeddings."""


@main.command()
@click.option("--config", type=click.Path(exists=True), default=None)
@click.option("--out", type=click.Path(), default=None)
@click.option("--n-per-class", type=int, default=None)
@click.option("--dims", type=int, default=None)
@click.option("--classes", type=int, default=None)
@click.option("--separation", type=float, default=None)
@click.option("--skew", type=float, default=None)
@click.option("--seed", type=int, default=None)
@guarded
def synth(config, out, n_per_class, dims, classes, separation, skew, seed):
    """Generate a Gaussian-blob benchmark dataset (WBX1)."""
    cfg = _load_config(config)
    out = _pick(out, cfg, "out")
    if out is None:
        raise ValidationError("synth needs --out")
    seeds = _derived_seeds(int(_pick(seed, cfg, "seed", 0)))
    ds = make_blobs(
        n_per_class=int(_pick(n_per_class, cfg, "n_per_class", 100)),
        n_dims=int(_pick(dims, cfg, "dims", 16)),
        n_classes=int(_pick(classes, cfg, "classes", 2)),
        separation=float(_pick(separation, cfg, "separation", 8.0)),
        skew=float(_pick(skew, cfg, "skew", 1.0)),
        seed=seeds["synth"],
    )
    write_dataset(ds, out)
    click.echo(f"wrote {out}: n={ds.n_rows} d={ds.n_dims} classes={ds.n_classes}")


@main.command()
@click.option("--config", type=click.Path(exists=True), default=None)
@click.option("--data", type=click.Path(exists=True), default=None)
@click.option("--kind", type=str, default=None)
@click.option("--out", type=click.Path(), default=None)
@click.option("--fractions", type=str, default=None)
@click.option("--seed", type=int, default=None)
@click.option("--k", type=int, default=None)
@click.option("--max-depth", type=int, default=None)
@click.option("--min-samples-leaf", type=int, default=None)
@click.option("--clusters", type=int, default=None)
@click.option("--l2", type=float, default=None)
@click.option("--lr", type=float, default=None)
@click.option("--epochs", type=int, default=None)
@click.option("--tau", type=float, default=None)
@click.option("--transform-with", type=click.Path(exists=True), default=None)
@guarded
def fit(config, data, kind, out, fractions, seed, k, max_depth, min_samples_leaf,
        clusters, l2, lr, epochs, tau, transform_with):
    """Fit a wrapper box on the train split and serialize it to JSON."""
    cfg = _load_config(config)
    data = _pick(data, cfg, "data")
    kind = _pick(kind, cfg, "kind")
    out = _pick(out, cfg, "out")
    if data is None or kind is None or out is None:
        raise ValidationError("fit needs --data, --kind and --out")
    ds = load_dataset(data)
    _require_multiclass(ds)
    seeds = _derived_seeds(int(_pick(seed, cfg, "seed", 0)))
    split = stratified_split(
        ds, _parse_fractions(_pick(fractions, cfg, "fractions", "0.7,0.2,0.1")), seeds["split"]
    )

    transform_doc = None
    features = np.asarray(ds.features, dtype=np.float64)
    transform_with = _pick(transform_with, cfg, "transform_with")
    if transform_with is not None:
        transform_doc = _load_model_file(transform_with)
        if transform_doc.get("kind") != "logreg":
            raise ValidationError("--transform-with expects a fitted logreg model")
        features = restore_model(transform_doc).transform(features)

    flags = {
        "k": k, "max_depth": max_depth, "min_samples_leaf": min_samples_leaf,
        "clusters": clusters, "l2": l2, "lr": lr, "epochs": epochs, "tau": tau,
    }
    box = _build_box(kind, cfg, flags, ds.n_classes, seeds["model"])
    box.fit(features[split.train_idx], ds.labels.astype(np.int64)[split.train_idx])
    doc = serialize_model(box, split)
    if transform_doc is not None:
        doc["transform"] = {
            key: transform_doc[key] for key in ("format", "kind", "params", "n_classes", "state")
        }
    _dump_json(doc, out)
    click.echo(f"wrote {out}: kind={kind} n_train={split.train_idx.size}")


@main.command()
@click.option("--config", type=click.Path(exists=True), default=None)
@click.option("--data", type=click.Path(exists=True), default=None)
@click.option("--model", type=click.Path(exists=True), default=None)
@click.option("--rows", type=click.Choice(["train", "valid", "test", "all"]), default=None)
@click.option("--out", type=click.Path(), default=None)
@guarded
def predict(config, data, model, rows, out):
    """Predict labels for one split of the dataset (JSONL)."""
    cfg = _load_config(config)
    data = _pick(data, cfg, "data")
    model = _pick(model, cfg, "model")
    out = _pick(out, cfg, "out")
    rows = _pick(rows, cfg, "rows", "test")
    if data is None or model is None or out is None:
        raise ValidationError("predict needs --data, --model and --out")
    ds = load_dataset(data)
    box, split, features = _restore(_load_model_file(model), ds)
    idx = {
        "train": split.train_idx,
        "valid": split.valid_idx,
        "test": split.test_idx,
        "all": np.arange(ds.n_rows, dtype=np.int64),
    }[rows]
    if idx.size == 0:
        raise ValidationError(f"split {rows!r} has no rows")
    preds = box.predict(features[idx])
    records = [
        {
            "row_id": int(ds.row_ids[r]),
            "y_true": int(ds.labels[r]),
            "y_pred": int(preds[j]),
        }
        for j, r in enumerate(idx)
    ]
    _dump_jsonl(records, out)
    click.echo(f"wrote {out}: {len(records)} predictions")


def _explanation_record(exp, ds, split, key, value):
    shown = split.train_idx[exp.shown]
    rows = []
    for j, r in enumerate(shown):
        rec = {
            "row_id": int(ds.row_ids[r]),
            "label": int(ds.labels[r]),
            "relevance": float(exp.relevance[j]),
        }
        if ds.texts is not None:
            rec["text"] = ds.texts[r]
        rows.append(rec)
    return {
        key: value,
        "prediction": int(exp.prediction),
        "policy": exp.policy.value,
        "faithful": bool(exp.faithful),
        "n_used": int(exp.n_used),
        "shown": rows,
    }


@main.command(name="explain")
@click.option("--config", type=click.Path(exists=True), default=None)
@click.option("--data", type=click.Path(exists=True), default=None)
@click.option("--model", type=click.Path(exists=True), default=None)
@click.option("--policy", type=click.Choice(sorted(_POLICY_NAMES)), default=None)
@click.option("--m", type=int, default=None)
@click.option("--queries", type=click.Path(exists=True), default=None,
              help="Dataset file of external query rows (labels ignored).")
@click.option("--out", type=click.Path(), default=None)
@guarded
def explain_cmd(config, data, model, policy, m, queries, out):
    """Explain predictions for the test split or external queries (JSONL)."""
    cfg = _load_config(config)
    data = _pick(data, cfg, "data")
    model = _pick(model, cfg, "model")
    out = _pick(out, cfg, "out")
    policy = _pick(policy, cfg, "policy", "case1")
    m = _pick(m, cfg, "m")
    if data is None or model is None or out is None:
        raise ValidationError("explain needs --data, --model and --out")
    ds = load_dataset(data)
    doc = _load_model_file(model)
    box, split, features = _restore(doc, ds)

    records = []
    if queries is not None:
        qds = load_dataset(queries)
        qf = _model_space(doc, qds)
        for i in range(qds.n_rows):
            exp = explain(box, qf[i], _POLICY_NAMES[policy], m if m is None else int(m))
            records.append(_explanation_record(exp, ds, split, "query_id", int(qds.row_ids[i])))
    else:
        if split.test_idx.size == 0:
            raise ValidationError("model split has no test rows; pass --queries")
        for r in split.test_idx:
            exp = explain(box, features[r], _POLICY_NAMES[policy], m if m is None else int(m))
            records.append(_explanation_record(exp, ds, split, "row_id", int(ds.row_ids[r])))
    _dump_jsonl(records, out)
    click.echo(f"wrote {out}: {len(records)} explanations")


_WORKER = {}


def _init_worker(doc_json, features, labels):
    doc = json.loads(doc_json)
    split = SplitSpec.from_dict(doc["split"])
    X = features[split.train_idx]
    y = labels[split.train_idx]
    _WORKER["box"] = restore_model(doc, X, y)
    _WORKER["X"] = X
    _WORKER["y"] = y
    _WORKER["doc"] = doc


def _attr_task(args):
    position, test_row, x, bins, phi, verify = args
    box = _WORKER["box"]
    X, y = _WORKER["X"], _WORKER["y"]
    if _WORKER["doc"]["kind"] == "knn":
        result = attr.find_subset_knn(box, x, test_row=test_row)
    else:
        result = attr.find_subset_greedy(
            box, X, y, x, attr.AttributionConfig(bins=bins, phi=phi), test_row=test_row
        )
    if verify and result.found:
        result.verified = attr.verify_flip(
            box, X, y, result.subset, x, result.original_prediction
        )
    return position, result


def _subset_record(result, split, ds, timings):
    rec = {
        "test_row": int(result.test_row),
        "original_prediction": int(result.original_prediction),
        "subset_row_ids": [int(ds.row_ids[split.train_idx[p]]) for p in result.subset],
        "size": result.size,
        "found": bool(result.found),
        "verified": bool(result.verified),
        "retrain_count": int(result.retrain_count),
        "diagnostic": result.diagnostic,
    }
    if timings:
        rec["wall_time"] = result.wall_time
    return rec


@main.command(name="attribute")
@click.option("--config", type=click.Path(exists=True), default=None)
@click.option("--data", type=click.Path(exists=True), default=None)
@click.option("--model", type=click.Path(exists=True), default=None)
@click.option("--bins", type=int, default=None)
@click.option("--phi", type=int, default=None)
@click.option("--workers", type=int, default=None)
@click.option("--verify/--no-verify", "verify", default=None)
@click.option("--timings", is_flag=True, default=False,
              help="Include wall-clock time per row (breaks byte-for-byte determinism).")
@click.option("--out", type=click.Path(), default=None)
@guarded
def attribute_cmd(config, data, model, bins, phi, workers, verify, timings, out):
    """Find flip subsets for every test row; JSONL plus a summary record."""
    cfg = _load_config(config)
    data = _pick(data, cfg, "data")
    model = _pick(model, cfg, "model")
    out = _pick(out, cfg, "out")
    bins = int(_pick(bins, cfg, "bins", 10))
    phi = int(_pick(phi, cfg, "phi", 100))
    workers = _pick(workers, cfg, "workers")
    workers = int(workers) if workers is not None else (os.cpu_count() or 1)
    verify = bool(_pick(verify, cfg, "verify", True))
    if data is None or model is None or out is None:
        raise ValidationError("attribute needs --data, --model and --out")
    attr.AttributionConfig(bins=bins, phi=phi)  # validate early

    ds = load_dataset(data)
    doc = _load_model_file(model)
    split = SplitSpec.from_dict(doc["split"])
    if split.test_idx.size == 0:
        raise ValidationError("model split has no test rows")
    features = _model_space(doc, ds)
    labels = ds.labels.astype(np.int64)

    tasks = [
        (j, int(ds.row_ids[r]), features[r], bins, phi, verify)
        for j, r in enumerate(split.test_idx)
    ]
    results = [None] * len(tasks)
    doc_json = json.dumps(doc)
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(
            max_workers=workers, initializer=_init_worker, initargs=(doc_json, features, labels)
        ) as pool:
            for position, result in pool.map(_attr_task, tasks, chunksize=1):
                results[position] = result
    else:
        _init_worker(doc_json, features, labels)
        for task in tasks:
            position, result = _attr_task(task)
            results[position] = result

    records = [_subset_record(res, split, ds, timings) for res in results]
    summary = attr.attribution_metrics(results)
    summary["summary"] = True
    _dump_jsonl(records + [summary], out)
    click.echo(
        "coverage {coverage:.2f}% correctness {correctness:.2f}% median {median}".format(
            coverage=summary["coverage"],
            correctness=summary["correctness"],
            median="absent" if summary["median_size"] is None else summary["median_size"],
        )
    )


def _read_predictions(path):
    y_true, y_pred = [], []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            y_true.append(int(rec["y_true"]))
            y_pred.append(int(rec["y_pred"]))
    if not y_true:
        raise ValidationError(f"no predictions in {path}")
    return np.asarray(y_true), np.asarray(y_pred)


@main.command(name="evaluate")
@click.option("--config", type=click.Path(exists=True), default=None)
@click.option("--pred", "pred_a", type=click.Path(exists=True), default=None)
@click.option("--pred-b", "pred_b", type=click.Path(exists=True), default=None)
@click.option("--classes", type=int, default=None)
@click.option("--out", type=click.Path(), default=None)
@guarded
def evaluate_cmd(config, pred_a, pred_b, classes, out):
    """Score one prediction file; with a second, test per-metric significance."""
    cfg = _load_config(config)
    pred_a = _pick(pred_a, cfg, "pred")
    pred_b = _pick(pred_b, cfg, "pred_b")
    out = _pick(out, cfg, "out")
    classes = _pick(classes, cfg, "classes")
    if pred_a is None or out is None:
        raise ValidationError("evaluate needs --pred and --out")
    ya_true, ya_pred = _read_predictions(pred_a)
    n_classes = int(classes) if classes is not None else None
    if n_classes is None:
        peak = max(ya_true.max(), ya_pred.max())
        if pred_b is not None:
            yb_true, yb_pred = _read_predictions(pred_b)
            peak = max(peak, yb_true.max(), yb_pred.max())
        n_classes = int(peak) + 1
    report_a = classification_metrics(ya_true, ya_pred, n_classes)
    doc = {"system_a": report_a.to_dict()}
    if pred_b is not None:
        yb_true, yb_pred = _read_predictions(pred_b)
        report_b = classification_metrics(yb_true, yb_pred, n_classes)
        doc["system_b"] = report_b.to_dict()
        significance = {}
        for metric in ("accuracy", "macro_precision", "macro_recall", "macro_f1"):
            res = two_proportion_z(
                getattr(report_a, metric) / 100.0, report_a.n,
                getattr(report_b, metric) / 100.0, report_b.n,
            )
            significance[metric] = res.to_dict()
        doc["significance"] = significance
    _dump_json(doc, out)
    click.echo(f"wrote {out}: accuracy {report_a.accuracy:.2f}%")


@main.command()
@click.option("--config", type=click.Path(exists=True), default=None)
@click.option("--data", type=click.Path(exists=True), default=None)
@click.option("--out", type=click.Path(), default=None)
@guarded
def project(config, data, out):
    """Project features to the top-2 principal components (CSV)."""
    cfg = _load_config(config)
    data = _pick(data, cfg, "data")
    out = _pick(out, cfg, "out")
    if data is None or out is None:
        raise ValidationError("project needs --data and --out")
    ds = load_dataset(data)
    coords, fractions, _ = pca2_project(ds.features)
    with open(out, "w", encoding="utf-8") as fh:
        fh.write("id,label,pc1,pc2\n")
        for i in range(ds.n_rows):
            fh.write(
                f"{int(ds.row_ids[i])},{int(ds.labels[i])},"
                f"{float(coords[i, 0])!r},{float(coords[i, 1])!r}\n"
            )
    click.echo(
        f"wrote {out}: explained variance {fractions[0]:.4f} + {fractions[1]:.4f}"
    )


if __name__ == "__main__":
    main()
