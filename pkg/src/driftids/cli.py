"""Command-line pipeline: synth, train, detect, drift-run, explain, eval.

Every subcommand accepts ``--config FILE`` pointing at a flat JSON object
whose keys match the long option names (underscored); explicit flags
override config values, which override built-in defaults. All commands
are deterministic for a fixed seed and inputs (throughput prints aside).
"""

import json
import sys
import time
from pathlib import Path

import numpy as np
from sklearn.exceptions import NotFittedError

from .autoencoder import DenoisingAutoencoder
from .drift import DriftAdapter, LabeledChunk, UpdateIndexParams
from .exceptions import DriftIDSError, LengthMismatch, NoNormalSamples
from .explain import TreeExplainer
from .features import PacketFeatureExtractor, write_features_csv
from .metrics import confusion, prf1, render_metrics_table
from .packets import load_packets, write_csv, write_pcap
from .synth import ScenarioSpec, generate, preset


def _opt(args, name, default):
    value = getattr(args, name, None)
    if value is not None:
        return value
    return args._config.get(name, default)


def _ae_params(args) -> dict:
    return {
        "learning_rate": _opt(args, "learning_rate", 0.05),
        "hidden_ratio": _opt(args, "hidden_ratio", 0.75),
        "noise_sigma": _opt(args, "noise_sigma", 0.1),
        "epochs": _opt(args, "epochs", 1),
        "batch_size": _opt(args, "batch_size", 32),
        "seed": _opt(args, "seed", 0),
        "threshold_multiplier": _opt(args, "threshold_multiplier", 1.0),
    }


def _load_labels(path) -> np.ndarray:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or lines[0].strip() != "label":
        raise DriftIDSError(f"{path}: expected a CSV with a single 'label' column")
    return np.array([int(x) for x in lines[1:] if x.strip() != ""],
                    dtype=np.int64)


def _write_labels(path, labels) -> None:
    Path(path).write_text("label\n" + "\n".join(str(int(x)) for x in labels)
                          + "\n", encoding="utf-8")


def _extract(packets) -> np.ndarray:
    return PacketFeatureExtractor().transform(packets)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_synth(args) -> int:
    seed = _opt(args, "seed", 0)
    if args.scenario:
        spec = ScenarioSpec.from_json(Path(args.scenario).read_text(encoding="utf-8"))
    else:
        spec = preset(_opt(args, "level", "level1"), seed=seed)
    out_dir = Path(_opt(args, "out_dir", "."))
    out_dir.mkdir(parents=True, exist_ok=True)
    records, labels = generate(spec)
    write_csv(out_dir / "trace.csv", records)
    _write_labels(out_dir / "labels.csv", labels)
    (out_dir / "scenario.json").write_text(spec.to_json(), encoding="utf-8")
    if args.pcap:
        write_pcap(out_dir / "trace.pcap", records)
    print(f"wrote {len(records)} packets ({int(labels.sum())} anomalous) "
          f"to {out_dir}")
    return 0


def cmd_train(args) -> int:
    packets = load_packets(args.input, _opt(args, "input_format", "auto"))
    start = _opt(args, "train_start", 0)
    end = _opt(args, "train_end", None)
    end = len(packets) if end is None else min(end, len(packets))
    X = _extract(packets[:end])
    model = DenoisingAutoencoder(**_ae_params(args))
    model.fit(X[start:end])
    model.save(args.model)
    print(f"trained on {end - start} packets "
          f"({model.input_dim_} features, hidden {model.hidden_dim_}); "
          f"mean rmse {model.loss_curve_[0]:.6f} -> {model.loss_curve_[-1]:.6f}")
    print(f"threshold {model.threshold_:.9g}")
    print(f"model written to {args.model}")
    return 0


def cmd_detect(args) -> int:
    packets = load_packets(args.input, _opt(args, "input_format", "auto"))
    model = DenoisingAutoencoder.load(args.model)
    start = _opt(args, "start", 0)
    t0 = time.perf_counter()
    X = _extract(packets)
    scores = model.score_samples(X[start:])
    preds = (scores > model.threshold_multiplier * model.threshold_).astype(int)
    elapsed = max(time.perf_counter() - t0, 1e-9)
    if args.features_out:
        write_features_csv(args.features_out, X)
    lines = [json.dumps({"index": start + i, "score": float(scores[i]),
                         "label": int(preds[i])})
             for i in range(len(scores))]
    if args.labels:
        truth = _load_labels(args.labels)
        if len(truth) != len(packets):
            raise LengthMismatch(
                f"labels file has {len(truth)} rows for {len(packets)} packets")
        c = confusion(preds, truth[start:])
        precision, recall, f1 = prf1(c)
        lines.append(json.dumps({"metrics": {
            "precision": precision, "recall": recall, "f1": f1,
            "tp": c.tp, "fp": c.fp, "fn": c.fn, "tn": c.tn}}))
        print(render_metrics_table(precision, recall, f1), end="")
    Path(args.out).write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"{len(scores)} verdicts written to {args.out} "
          f"({int(preds.sum())} anomalous, {len(packets) / elapsed:.1f} pkt/s)")
    return 0


def cmd_drift_run(args) -> int:
    packets = load_packets(args.input, _opt(args, "input_format", "auto"))
    truth = _load_labels(args.labels)
    if len(truth) != len(packets):
        raise LengthMismatch(
            f"labels file has {len(truth)} rows for {len(packets)} packets")
    chunk_size = _opt(args, "chunk_size", 5000)
    if chunk_size < 1:
        raise DriftIDSError("chunk_size must be >= 1")
    X = _extract(packets)
    chunks = [LabeledChunk(X[i:i + chunk_size], truth[i:i + chunk_size],
                           chunk_id=ci)
              for ci, i in enumerate(range(0, len(X), chunk_size))]

    first_normal = chunks[0].normal_features
    if len(first_normal) == 0:
        raise NoNormalSamples("first chunk has no normal-labeled packets")
    model = DenoisingAutoencoder(**_ae_params(args)).fit(first_normal)

    adapt = not args.no_adapt
    adapter = None
    if adapt:
        params = UpdateIndexParams(
            pool_size=_opt(args, "pool_size", 10),
            committee_size=_opt(args, "committee_size", 5),
            samples_per_model=_opt(args, "samples_per_model", None),
            stability_weight=_opt(args, "stability_weight", 0.5),
            seed=_opt(args, "seed", 0),
        )
        adapter = DriftAdapter(model, chunks[0], grid=args._config.get("grid"),
                               params=params,
                               trigger=_opt(args, "trigger", "less_than"))

    all_preds = []
    all_truth = []
    log_lines = []
    for chunk in chunks:
        if chunk.chunk_id > 0:
            current = adapter.model if adapter else model
            all_preds.append(current.predict(chunk.features))
            all_truth.append(chunk.labels)
        if adapter:
            decision = adapter.observe(chunk)
            log_lines.append(json.dumps(decision.to_log_dict()))
        else:
            log_lines.append(json.dumps({
                "chunk_id": chunk.chunk_id, "uidx": None, "prev_uidx": None,
                "updated": False, "selected_hyper": None}))
    Path(args.log).write_text("\n".join(log_lines) + "\n", encoding="utf-8")
    final = adapter.model if adapter else model
    final.save(args.model_out)

    updates = sum(d.updated for d in adapter.history) if adapter else 0
    print(f"{len(chunks)} chunks, {updates} hyperparameter updates")
    if all_preds:
        c = confusion(np.concatenate(all_preds), np.concatenate(all_truth))
        precision, recall, f1 = prf1(c)
        print(render_metrics_table(precision, recall, f1), end="")
    print(f"final model written to {args.model_out}; log to {args.log}")
    return 0


def cmd_explain(args) -> int:
    packets = load_packets(args.input, _opt(args, "input_format", "auto"))
    model = DenoisingAutoencoder.load(args.model)
    X = _extract(packets)
    explainer = TreeExplainer(
        inner_iterations=_opt(args, "inner_iterations", 5),
        outer_iterations=_opt(args, "outer_iterations", 3),
        sample_frac=_opt(args, "sample_frac", 0.3),
        top_k=_opt(args, "top_k", 10),
        max_depth=_opt(args, "max_depth", None),
        min_leaf=_opt(args, "min_leaf", 1),
        seed=_opt(args, "seed", 0),
    )
    explainer.fit(X, model)
    report = explainer.report_
    Path(args.report).write_text(report.to_json(), encoding="utf-8")
    tree_text = ("# pruned explanation (top 3 layers)\n"
                 + explainer.render("pruned")
                 + "\n# unpruned student (top 3 layers)\n"
                 + explainer.render("unpruned"))
    Path(args.tree_out).write_text(tree_text, encoding="utf-8")
    print(f"fidelity: unpruned {report.fidelity_unpruned:.4f}, "
          f"pruned {report.fidelity_pruned:.4f}")
    print(f"tree size {report.unpruned_size} -> {report.pruned_size} "
          f"(depth {report.unpruned_depth} -> {report.pruned_depth}, "
          f"leaves {report.unpruned_leaves} -> {report.pruned_leaves})")
    top = ", ".join(name for name, _ in report.top_features[:3])
    print(f"top features: {top}")
    print(f"report written to {args.report}; tree text to {args.tree_out}")
    return 0


def cmd_eval(args) -> int:
    truth = _load_labels(args.labels)
    preds = []
    idxs = []
    for line in Path(args.preds).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        doc = json.loads(line)
        if "metrics" in doc:
            continue
        idxs.append(doc["index"])
        preds.append(doc["label"])
    if not preds:
        raise DriftIDSError(f"{args.preds}: no verdict records found")
    idxs = np.asarray(idxs)
    if idxs.max() >= len(truth):
        raise LengthMismatch("verdict index exceeds labels file length")
    c = confusion(np.asarray(preds), truth[idxs])
    precision, recall, f1 = prf1(c)
    doc = {"precision": precision, "recall": recall, "f1": f1,
           "tp": c.tp, "fp": c.fp, "fn": c.fn, "tn": c.tn}
    print(render_metrics_table(precision, recall, f1), end="")
    print(json.dumps(doc))
    if args.json_out:
        Path(args.json_out).write_text(json.dumps(doc, indent=1) + "\n",
                                       encoding="utf-8")
    return 0


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _add_common(p):
    p.add_argument("--config", help="JSON file with default option values")
    p.add_argument("--seed", type=int, help="RNG seed (default 0)")


def _add_ae_args(p):
    p.add_argument("--learning-rate", type=float, dest="learning_rate",
                   help="gradient step size (default 0.05)")
    p.add_argument("--hidden-ratio", type=float, dest="hidden_ratio",
                   help="hidden width fraction (default 0.75)")
    p.add_argument("--noise-sigma", type=float, dest="noise_sigma",
                   help="training corruption std (default 0.1)")
    p.add_argument("--epochs", type=int, help="training epochs (default 1)")
    p.add_argument("--batch-size", type=int, dest="batch_size",
                   help="mini-batch size (default 32)")
    p.add_argument("--threshold-multiplier", type=float,
                   dest="threshold_multiplier",
                   help="anomaly threshold scale (default 1.0)")


def _build_parser():
    import argparse

    parser = argparse.ArgumentParser(
        prog="driftids",
        description="streaming packet anomaly detection with drift "
                    "adaptation and decision-tree explanations")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a labeled synthetic trace")
    p.add_argument("--level", choices=("level1", "level2"),
                   help="built-in scenario (default level1)")
    p.add_argument("--scenario", help="scenario JSON file (overrides --level)")
    p.add_argument("--out-dir", dest="out_dir", help="output directory")
    p.add_argument("--pcap", action="store_true",
                   help="also write trace.pcap")
    _add_common(p)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("train", help="train the detector on a normal window")
    p.add_argument("--input", required=True, help="trace file (pcap or CSV)")
    p.add_argument("--input-format", dest="input_format",
                   choices=("auto", "csv", "pcap"))
    p.add_argument("--train-start", type=int, dest="train_start",
                   help="first packet index of the training window (default 0)")
    p.add_argument("--train-end", type=int, dest="train_end",
                   help="end of the training window, exclusive (default: all)")
    p.add_argument("--model", required=True, help="output model JSON path")
    _add_ae_args(p)
    _add_common(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("detect", help="score packets against a trained model")
    p.add_argument("--input", required=True)
    p.add_argument("--input-format", dest="input_format",
                   choices=("auto", "csv", "pcap"))
    p.add_argument("--model", required=True)
    p.add_argument("--out", required=True,
                   help="line-delimited JSON verdicts {index, score, label}")
    p.add_argument("--start", type=int,
                   help="first packet index to score (default 0)")
    p.add_argument("--labels", help="ground-truth labels CSV for a metrics block")
    p.add_argument("--features-out", dest="features_out",
                   help="optional feature-matrix CSV dump")
    _add_common(p)
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("drift-run",
                       help="chunked detection with drift adaptation")
    p.add_argument("--input", required=True)
    p.add_argument("--input-format", dest="input_format",
                   choices=("auto", "csv", "pcap"))
    p.add_argument("--labels", required=True)
    p.add_argument("--chunk-size", type=int, dest="chunk_size",
                   help="packets per chunk (default 5000)")
    p.add_argument("--model-out", dest="model_out", required=True)
    p.add_argument("--log", required=True,
                   help="line-delimited JSON drift events")
    p.add_argument("--no-adapt", dest="no_adapt", action="store_true",
                   help="disable adaptation (static baseline)")
    p.add_argument("--pool-size", type=int, dest="pool_size")
    p.add_argument("--committee-size", type=int, dest="committee_size")
    p.add_argument("--samples-per-model", type=int, dest="samples_per_model")
    p.add_argument("--stability-weight", type=float, dest="stability_weight")
    p.add_argument("--trigger", choices=("less_than", "greater_than"))
    _add_ae_args(p)
    _add_common(p)
    p.set_defaults(func=cmd_drift_run)

    p = sub.add_parser("explain",
                       help="extract a decision-tree explanation of a model")
    p.add_argument("--input", required=True)
    p.add_argument("--input-format", dest="input_format",
                   choices=("auto", "csv", "pcap"))
    p.add_argument("--model", required=True)
    p.add_argument("--report", required=True, help="trust report JSON path")
    p.add_argument("--tree-out", dest="tree_out", required=True,
                   help="text rendering of the explanation tree")
    p.add_argument("--inner-iterations", type=int, dest="inner_iterations")
    p.add_argument("--outer-iterations", type=int, dest="outer_iterations")
    p.add_argument("--sample-frac", type=float, dest="sample_frac")
    p.add_argument("--top-k", type=int, dest="top_k")
    p.add_argument("--max-depth", type=int, dest="max_depth")
    p.add_argument("--min-leaf", type=int, dest="min_leaf")
    _add_common(p)
    p.set_defaults(func=cmd_explain)

    p = sub.add_parser("eval", help="score a verdict file against ground truth")
    p.add_argument("--preds", required=True, help="verdicts NDJSON from detect")
    p.add_argument("--labels", required=True)
    p.add_argument("--json-out", dest="json_out",
                   help="optional metrics JSON output path")
    _add_common(p)
    p.set_defaults(func=cmd_eval)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    args._config = {}
    if getattr(args, "config", None):
        args._config = json.loads(Path(args.config).read_text(encoding="utf-8"))
        if not isinstance(args._config, dict):
            print("error: config file must hold a JSON object", file=sys.stderr)
            return 1
    try:
        return args.func(args)
    except (DriftIDSError, NotFittedError, FileNotFoundError, OSError,
            json.JSONDecodeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
