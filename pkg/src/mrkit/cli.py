"""Command-line front end: extract, label, stats, train, evaluate, predict.

Exit codes: 0 success, 1 partial success (per-item diagnostics were
emitted), 2 usage or configuration error.  Every stochastic stage draws
its seed from one root seed (``--seed``, or the ``MRKIT_SEED`` environment
variable) expanded per stage with sha256, so identical configurations
produce byte-identical outputs.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import corpus as corpus_io
from .cfg import AnnotatedCfg, emit_dot, parse_dot
from .evaluation import RESULTS_CSV_HEADER, cross_validate, stratified_kfold
from .features import (
    FeatureVector,
    build_design_matrix,
    combine,
    features_to_csv,
    node_features,
    path_features,
)
from .kernels import GkParams, RwkParams, gram_matrix
from .mir import MirError, lower_to_cfg, parse_program
from .oracle import MR_IDS, OracleParams, audit_labels, label_method, labels_to_csv
from .svm import SvmModel, SvmParams, decision_value, train_svm

_MR_CHOICES = [mr.lower() for mr in MR_IDS] + ["all"]


def _root_seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("MRKIT_SEED")
    return int(env) if env else 42


def stage_seed(root: int, stage: str) -> int:
    """Per-stage expansion of the root seed (documented scheme)."""
    digest = hashlib.sha256(f"mrkit:{stage}:{root}".encode()).digest()
    return int.from_bytes(digest[:4], "big")


def _load_method_cfgs(path: Path) -> list[AnnotatedCfg]:
    if path.suffix == ".dot":
        return [parse_dot(path.read_text())]
    if path.suffix == ".mir":
        program = parse_program(path.read_text())
        return [lower_to_cfg(fn) for fn in program.functions]
    raise ValueError(f"{path}: expected a .mir or .dot file")


def _featurize(cfg: AnnotatedCfg, omit_exit: bool) -> tuple[FeatureVector, FeatureVector]:
    return node_features(cfg, omit_exit=omit_exit), path_features(cfg)


def cmd_extract(args) -> int:
    inputs = [Path(p) for p in args.inputs]
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    if not inputs:
        print("warning: no inputs given", file=sys.stderr)
        return 0
    failures = 0
    for path in inputs:
        try:
            for cfg in _load_method_cfgs(path):
                (out_dir / f"{cfg.name}.dot").write_text(emit_dot(cfg))
                nf, pf = _featurize(cfg, args.omit_exit_nf)
                (out_dir / f"{cfg.name}_features.csv").write_text(
                    features_to_csv(cfg.name, [nf, pf]))
        except Exception as exc:
            failures += 1
            print(f"error: {path}: {exc}", file=sys.stderr)
    return 1 if failures else 0


def cmd_label(args) -> int:
    root = _root_seed(args)
    ds = corpus_io.load_manifest(args.manifest)
    params = OracleParams(trials=args.trials, seed=stage_seed(root, "oracle"))
    rows = []
    reports = {}
    attempted = 0
    failures = 0
    for entry in ds.entries:
        if entry.source_kind != "mir":
            continue
        attempted += 1
        try:
            fn = ds.load_function(entry)
        except MirError as exc:
            failures += 1
            print(f"error: {entry.name}: {exc}", file=sys.stderr)
            continue
        report = label_method(fn, params)
        reports[entry.name] = report
        rows.append((str(entry.method_id), report.labels))
        trap_causes = [o.witness.cause for o in report.outcomes.values()
                       if o.witness is not None and o.witness.cause.startswith("trap")]
        if len(trap_causes) == len(MR_IDS):
            print(f"diagnostic: {entry.name}: every relation rejected by a "
                  f"runtime trap ({trap_causes[0]})", file=sys.stderr)
    text = labels_to_csv(rows)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)

    reference = {e.name: e.labels for e in ds.entries
                 if e.labels is not None and e.name in reports}
    if reference:
        audit = audit_labels(reports, reference)
        for d in audit.discrepancies:
            detail = d.category
            if d.witness is not None:
                detail += f"; witness source={list(d.witness.source)}"
            print(f"discrepancy: {d.method} {d.mr}: dynamic={int(d.dynamic)} "
                  f"reference={int(d.reference)} ({detail})", file=sys.stderr)
    # per-method problems are diagnostics; only total failure is an error
    return 1 if attempted and failures == attempted else 0


def cmd_stats(args) -> int:
    ds = corpus_io.load_manifest(args.manifest) if args.manifest \
        else corpus_io.bundled_dataset()
    stats = corpus_io.corpus_stats(ds)
    print("mr,match,non_match")
    for mr in MR_IDS:
        match, non_match = stats.per_mr[mr]
        print(f"{mr},{match},{non_match}")
    print("matching_mrs,methods")
    for k in range(7):
        print(f"{k},{stats.histogram[k]}")
    return 0


def _corpus_features(ds, featurization: str, args, root: int):
    """Featurize every sourced entry; returns (entries, data, context)."""
    entries = [e for e in ds.entries if e.source_kind != "none"]
    graphs = [ds.load_cfg(e) for e in entries]
    if featurization == "nf-pf":
        pairs = [(e.name, combine(node_features(g, omit_exit=args.omit_exit_nf),
                                  path_features(g)))
                 for e, g in zip(entries, graphs)]
        matrix = build_design_matrix(pairs)
        context = {"featurization": "nf-pf", "omit_exit_nf": args.omit_exit_nf,
                   "feature_index": list(matrix.feature_index)}
        return entries, graphs, matrix, context
    if featurization == "rwk":
        params = RwkParams(walk_len=args.walk_len, decay=getattr(args, "lambda"))
        km = gram_matrix(graphs, "rwk", rwk=params)
        context = {"featurization": "rwk", "walk_len": params.walk_len,
                   "decay": params.decay}
        return entries, graphs, km, context
    params = GkParams(k=args.graphlet_k, seed=stage_seed(root, "graphlets"))
    km = gram_matrix(graphs, "gk", gk=params)
    context = {"featurization": "gk", "k": params.k, "mode": params.mode}
    return entries, graphs, km, context


def _selected_mrs(arg: str) -> list[str]:
    return list(MR_IDS) if arg == "all" else [arg.upper()]


def cmd_evaluate(args) -> int:
    if args.k < 2:
        print("error: --k must be at least 2", file=sys.stderr)
        return 2
    root = _root_seed(args)
    ds = corpus_io.load_manifest(args.manifest) if args.manifest \
        else corpus_io.bundled_dataset()
    featurization = args.features
    entries, graphs, data, context = _corpus_features(ds, featurization, args, root)
    unlabelled = [e.name for e in entries if e.labels is None]
    if unlabelled:
        print(f"error: unlabelled methods: {', '.join(unlabelled)}", file=sys.stderr)
        return 2
    svm_params = SvmParams(
        C=args.C, kernel="linear" if featurization == "nf-pf" else "precomputed",
        seed=stage_seed(root, "svm"))

    reports = []
    skipped = []
    for mr in _selected_mrs(args.mr):
        labels = [1 if e.labels[mr] else 0 for e in entries]
        if len(set(labels)) < 2:
            skipped.append(mr)
            print(f"diagnostic: {mr}: single-class corpus, skipped", file=sys.stderr)
            continue
        folds = stratified_kfold(labels, args.k, seed=stage_seed(root, "folds"))
        reports.append(cross_validate(data, labels, folds, svm_params,
                                      mr=mr, featurization=featurization))

    payload = {
        "root_seed": root,
        "featurization": context,
        "k": args.k,
        "skipped": skipped,
        "reports": [json.loads(r.to_json()) for r in reports],
    }
    report_json = json.dumps(payload, sort_keys=True, indent=2) + "\n"
    csv_lines = [RESULTS_CSV_HEADER] + [r.csv_row() for r in reports]
    results_csv = "\n".join(csv_lines) + "\n"
    if args.out:
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "report.json").write_text(report_json)
        (out_dir / "results.csv").write_text(results_csv)
        if args.dump_gram and hasattr(data, "to_csv"):
            (out_dir / "gram.csv").write_text(data.to_csv())
    else:
        sys.stdout.write(results_csv)
    return 1 if skipped else 0


def cmd_train(args) -> int:
    root = _root_seed(args)
    ds = corpus_io.load_manifest(args.manifest) if args.manifest \
        else corpus_io.bundled_dataset()
    featurization = args.features
    entries, graphs, data, context = _corpus_features(ds, featurization, args, root)
    unlabelled = [e.name for e in entries if e.labels is None]
    if unlabelled:
        print(f"error: unlabelled methods: {', '.join(unlabelled)}", file=sys.stderr)
        return 2
    if featurization in ("rwk", "gk"):
        context = dict(context)
        context["training_graphs"] = [emit_dot(g) for g in graphs]
    svm_params = SvmParams(
        C=args.C, kernel="linear" if featurization == "nf-pf" else "precomputed",
        seed=stage_seed(root, "svm"))
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    context_hash = hashlib.sha256(
        json.dumps(context, sort_keys=True).encode()).hexdigest()[:16]
    skipped = []
    for mr in _selected_mrs(args.mr):
        y = [1 if e.labels[mr] else -1 for e in entries]
        if len(set(y)) < 2:
            skipped.append(mr)
            print(f"diagnostic: {mr}: single-class corpus, skipped", file=sys.stderr)
            continue
        model = train_svm(data, y, svm_params)
        payload = {
            "mr": mr,
            "featurization": featurization,
            "context": context,
            "context_hash": context_hash,
            "model": json.loads(model.to_json()),
        }
        (out_dir / f"{mr}.json").write_text(
            json.dumps(payload, sort_keys=True, separators=(",", ":")) + "\n")
    return 1 if skipped else 0


def _predict_decision(bundle: dict, cfg: AnnotatedCfg) -> float:
    featurization = bundle["featurization"]
    context = bundle["context"]
    model = SvmModel.from_json(json.dumps(bundle["model"]))
    if featurization == "nf-pf":
        vec = combine(node_features(cfg, omit_exit=context["omit_exit_nf"]),
                      path_features(cfg))
        index = context["feature_index"]
        lookup = {k: i for i, k in enumerate(index)}
        row = np.zeros(len(index))
        unseen = 0
        for key, count in vec.entries.items():
            if key in lookup:
                row[lookup[key]] = count
            else:
                unseen += 1
        if unseen:
            print(f"warning: {cfg.name}: {unseen} unseen feature keys "
                  "treated as zero columns", file=sys.stderr)
        return decision_value(model, row)
    train_graphs = [parse_dot(text) for text in context["training_graphs"]]
    if featurization == "rwk":
        from .kernels import random_walk_kernel
        p = RwkParams(walk_len=context["walk_len"], decay=context["decay"])
        column = [random_walk_kernel(g, cfg, p) for g in train_graphs]
    else:
        from .kernels import graphlet_kernel
        p = GkParams(k=context["k"])
        column = [graphlet_kernel(g, cfg, p) for g in train_graphs]
    return decision_value(model, np.asarray(column))


def cmd_predict(args) -> int:
    models_dir = Path(args.models)
    bundles = {}
    for mr in MR_IDS:
        path = models_dir / f"{mr}.json"
        if not path.exists():
            print(f"error: missing model file {path}", file=sys.stderr)
            return 2
        bundles[mr] = json.loads(path.read_text())
    feats = {b["featurization"] for b in bundles.values()}
    hashes = {b["context_hash"] for b in bundles.values()}
    if len(feats) != 1 or len(hashes) != 1:
        print("error: model files disagree on featurization context; refusing "
              "to predict", file=sys.stderr)
        return 2
    if args.features and args.features != next(iter(feats)):
        print(f"error: models were trained with featurization "
              f"{next(iter(feats))!r}, not {args.features!r}; refusing to "
              "predict", file=sys.stderr)
        return 2

    lines = ["method," + ",".join(MR_IDS) + ","
             + ",".join(f"decision_{mr}" for mr in MR_IDS)]
    failures = 0
    for raw in args.inputs:
        try:
            for cfg in _load_method_cfgs(Path(raw)):
                decisions = {mr: _predict_decision(bundles[mr], cfg)
                             for mr in MR_IDS}
                bits = ",".join("1" if decisions[mr] >= 0 else "0" for mr in MR_IDS)
                vals = ",".join(repr(decisions[mr]) for mr in MR_IDS)
                lines.append(f"{cfg.name},{bits},{vals}")
        except Exception as exc:
            failures += 1
            print(f"error: {raw}: {exc}", file=sys.stderr)
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 1 if failures else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mrkit",
        description="Predict applicable metamorphic relations from CFG features.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, features=True):
        p.add_argument("--seed", type=int, default=None,
                       help="root seed (default: MRKIT_SEED or 42)")
        if features:
            p.add_argument("--features", choices=["nf-pf", "gk", "rwk"],
                           default="rwk")
            p.add_argument("--C", type=float, default=1.0)
            p.add_argument("--lambda", dest="lambda", type=float, default=0.5,
                           help="random-walk decay")
            p.add_argument("--walk-len", type=int, default=10)
            p.add_argument("--graphlet-k", type=int, default=3)
            p.add_argument("--omit-exit-nf", action="store_true")

    p = sub.add_parser("extract", help="lower methods to DOT + feature CSVs")
    p.add_argument("inputs", nargs="*", help=".mir or .dot files")
    p.add_argument("--out", required=True)
    p.add_argument("--omit-exit-nf", action="store_true")
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("label", help="dynamic MR labelling of a manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--out")
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_label)

    p = sub.add_parser("stats", help="per-MR match counts and histogram")
    p.add_argument("--manifest")
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("train", help="train per-MR models")
    p.add_argument("--manifest")
    p.add_argument("--mr", choices=_MR_CHOICES, default="all")
    p.add_argument("--out", required=True)
    common(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="stratified k-fold cross-validation")
    p.add_argument("--manifest")
    p.add_argument("--mr", choices=_MR_CHOICES, default="all")
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--out")
    p.add_argument("--dump-gram", action="store_true")
    common(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("predict", help="predict MRs for new methods")
    p.add_argument("inputs", nargs="+", help=".mir or .dot files")
    p.add_argument("--models", required=True)
    p.add_argument("--features", choices=["nf-pf", "gk", "rwk"], default=None)
    p.add_argument("--out")
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_predict)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
