"""Command-line entry points for the full train-evaluate-serve loop.

Every command layers flags over ``FACETPATH_*`` env vars over one JSON
config file over built-in defaults, and writes a manifest next to its
outputs. Model artifacts are directories: checkpoint plus the embedding
tables the model was trained against, so ``serve`` and ``predict`` can
reload a prediction function byte-for-byte.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

from .config import AppConfig, ConfigError, resolve_config, write_manifest

__all__ = ["main", "build_parser", "load_predictor"]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="facetpath",
        description="Train, evaluate, and serve session-aware facet-path predictors.",
    )
    parser.add_argument("--config", help="path to the JSON config file")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate-data", help="write a synthetic catalog + clickstream log")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--n-products", type=int, dest="n_products")
    p.add_argument("--n-sessions", type=int, dest="n_sessions")
    p.add_argument("--branching", help="children per level, e.g. 6,4,3")
    p.add_argument("--seed", type=int)

    p = sub.add_parser("train-embeddings", help="train product skip-gram vectors from view sequences")
    p.add_argument("--events", required=True, help="event log (JSON Lines)")
    p.add_argument("--catalog", required=True, help="catalog file (JSON Lines)")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--dim", type=int, dest="embedding_dim")
    p.add_argument("--epochs", type=int, dest="embedding_epochs")
    p.add_argument("--seed", type=int, dest="embedding_seed")

    p = sub.add_parser("train", help="train one predictor")
    p.add_argument("model", choices=["cm", "mlp", "sessionpath"])
    p.add_argument("--events", required=True)
    p.add_argument("--catalog", required=True)
    p.add_argument("--embeddings", help="directory from train-embeddings (mlp/sessionpath)")
    p.add_argument("--out", required=True, help="output directory for the model artifact")
    p.add_argument("--encoder", choices=["s2pv", "w2v"])
    p.add_argument("--train-fraction", type=float, dest="train_fraction")
    p.add_argument("--learning-rate", type=float, dest="learning_rate")
    p.add_argument("--max-epochs", type=int, dest="max_epochs")
    p.add_argument("--patience", type=int)
    p.add_argument("--batch-size", type=int, dest="batch_size")
    p.add_argument("--seed", type=int)
    p.add_argument("--ablate-session", action="store_true", help="zero the session half of the input")

    p = sub.add_parser("evaluate", help="run the replay evaluation grid and print its table")
    p.add_argument("--events", required=True)
    p.add_argument("--catalog", required=True)
    p.add_argument("--out", required=True, help="directory for report.json")
    p.add_argument("--variants", help="comma list, e.g. cm,mlp+s2pv,sessionpath+s2pv")
    p.add_argument("--fractions", help="training-set fractions, e.g. 0.1,0.25,1.0")
    p.add_argument("--seeds", dest="eval_seeds", help="comma list of seeds")
    p.add_argument("--learning-rate", type=float, dest="learning_rate")
    p.add_argument("--max-epochs", type=int, dest="max_epochs")
    p.add_argument("--patience", type=int)

    p = sub.add_parser("sweep", help="precision/recall over decision thresholds")
    p.add_argument("--events", required=True)
    p.add_argument("--catalog", required=True)
    p.add_argument("--model-dir", help="trained model artifact; trains one when omitted")
    p.add_argument("--out", help="directory for sweep.json (defaults to stdout only)")
    p.add_argument("--ct", dest="ct_values", help="thresholds, e.g. 0.98,0.99,0.993,0.996")
    p.add_argument("--learning-rate", type=float, dest="learning_rate")
    p.add_argument("--max-epochs", type=int, dest="max_epochs")
    p.add_argument("--patience", type=int)

    p = sub.add_parser("serve", help="start the augmentation HTTP service")
    p.add_argument("--model-dir", required=True, action="append",
                   help="model artifact directory; repeat to load several")
    p.add_argument("--catalog", required=True)
    p.add_argument("--sweep-file", help="sweep.json to expose on GET /sweep")
    p.add_argument("--host")
    p.add_argument("--port", type=int)
    p.add_argument("--ct", type=float)
    p.add_argument("--default-model", dest="default_model")

    p = sub.add_parser("predict", help="one-shot prediction for a query")
    p.add_argument("--query", required=True)
    p.add_argument("--session", default="", help="comma list of session product ids")
    p.add_argument("--ct", type=float)
    p.add_argument("--model-dir", required=True)
    p.add_argument("--catalog", required=True)

    return parser


def _config_from(args: argparse.Namespace) -> AppConfig:
    flag_fields = {f for f in AppConfig.__dataclass_fields__}
    overrides = {k: v for k, v in vars(args).items() if k in flag_fields and v is not None}
    return resolve_config(args.config, overrides)


def _load_examples(catalog_file: str, events_file: str):
    from .eventlog import build_examples, ingest
    from .taxonomy import load_catalog

    tree = load_catalog(catalog_file)
    result = ingest(events_file, tree)
    return tree, result, build_examples(result, tree)


def _cmd_generate_data(args, config: AppConfig) -> int:
    from .synthetic import SynthConfig, generate_synthetic

    synth = SynthConfig(
        n_products=config.n_products,
        n_sessions=config.n_sessions,
        branching=config.branching,
        session_coherence_rate=config.session_coherence_rate,
        query_noise_rate=config.query_noise_rate,
        leaf_query_rate=config.leaf_query_rate,
        product_depth_weights=config.product_depth_weights,
    )
    t0 = time.time()
    catalog, events, manifest = generate_synthetic(synth, seed=config.seed, out_dir=args.out)
    write_manifest(args.out, "generate-data", config, {"generate": time.time() - t0})
    print(f"catalog  {catalog}")
    print(f"events   {events}")
    print(f"manifest {manifest}")
    return 0


def _cmd_train_embeddings(args, config: AppConfig) -> int:
    from .embeddings import train_skipgram
    from .eventlog import ingest, session_view_sequences
    from .taxonomy import load_catalog

    tree = load_catalog(args.catalog)
    result = ingest(args.events, tree)
    views = session_view_sequences(result.events)
    t0 = time.time()
    table = train_skipgram(
        views,
        dim=config.embedding_dim,
        window=config.embedding_window,
        negatives=config.embedding_negatives,
        epochs=config.embedding_epochs,
        seed=config.embedding_seed,
        kind="product",
    )
    os.makedirs(args.out, exist_ok=True)
    out_path = os.path.join(args.out, "product_vectors.tsv")
    table.save(out_path)
    write_manifest(args.out, "train-embeddings", config, {"train": time.time() - t0})
    print(f"trained {len(table.vectors)} product vectors (dim {table.dim}) -> {out_path}")
    return 0


def _train_one(model_name: str, split, tree, config: AppConfig, product_table, ablate_session: bool):
    """Train a predictor on the split; returns (predictor, history|None, encoder kind)."""
    from .embeddings import build_search2prod2vec, train_skipgram, tokenize
    from .neuralcore import TrainConfig
    from .predictors import build_query_encoder, cm_train, mlp_train, sp_train
    from .taxonomy import node_vocabulary

    if model_name == "cm":
        return cm_train(split.train), None, None

    if config.encoder == "s2pv":
        qtable = build_search2prod2vec(split.train, product_table)
    else:
        corpus = [tokenize(x.query) for x in split.train]
        qtable = train_skipgram(
            corpus,
            dim=config.embedding_dim,
            window=config.embedding_window,
            negatives=config.embedding_negatives,
            epochs=config.embedding_epochs,
            seed=config.embedding_seed,
            kind="token",
        )
    encoder = build_query_encoder(config.encoder, qtable)
    tc = TrainConfig(
        learning_rate=config.learning_rate,
        time_decay=config.time_decay,
        batch_size=config.batch_size,
        max_epochs=config.max_epochs,
        patience=config.patience,
        seed=config.seed,
        validation_fraction=config.validation_fraction,
    )
    if model_name == "mlp":
        predictor, history = mlp_train(
            split.train, encoder, product_table, tc,
            hidden=config.mlp_hidden, ablate_session=ablate_session,
        )
    else:
        predictor, history = sp_train(
            split.train, node_vocabulary(tree), tree.max_depth, encoder, product_table, tc,
            ablate_session=ablate_session,
        )
    return predictor, history, qtable


def _cmd_train(args, config: AppConfig) -> int:
    from .embeddings import EmbeddingTable
    from .eventlog import chronological_split

    tree, _, examples = _load_examples(args.catalog, args.events)
    split = chronological_split(examples, fraction=config.train_fraction)

    product_table = None
    if args.model != "cm":
        if not args.embeddings:
            print("error: --embeddings is required for mlp and sessionpath", file=sys.stderr)
            return 2
        product_table = EmbeddingTable.load(os.path.join(args.embeddings, "product_vectors.tsv"))

    t0 = time.time()
    predictor, history, qtable = _train_one(
        args.model, split, tree, config, product_table, args.ablate_session
    )
    train_seconds = time.time() - t0

    os.makedirs(args.out, exist_ok=True)
    meta = {"model": args.model, "encoder": None if args.model == "cm" else config.encoder,
            "ablate_session": bool(args.ablate_session)}
    if args.model == "cm":
        predictor.save(os.path.join(args.out, "count_model.json"))
    else:
        if args.model == "mlp":
            from .neuralcore import vocabulary_hash
            from .taxonomy import node_vocabulary

            predictor.save(
                os.path.join(args.out, "checkpoint.json"), vocabulary_hash(node_vocabulary(tree))
            )
        else:
            predictor.save(os.path.join(args.out, "checkpoint.json"))
        qtable.save(os.path.join(args.out, "query_vectors.tsv"))
        product_table.save(os.path.join(args.out, "product_vectors.tsv"))
        meta["best_epoch"] = history.best_epoch
        meta["best_val_loss"] = history.best_val_loss
    with open(os.path.join(args.out, "model.json"), "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2)
    write_manifest(args.out, f"train {args.model}", config, {"train": train_seconds})
    if history is not None:
        print(f"{args.model}: best epoch {history.best_epoch}, "
              f"val loss {history.best_val_loss:.4f}, {train_seconds:.1f}s")
    else:
        print(f"{args.model}: {len(predictor.predictions)} qualifying queries, {train_seconds:.1f}s")
    return 0


def load_predictor(model_dir: str, tree):
    """Reload a trained model artifact written by ``facetpath train``.

    The live catalog's node-vocabulary hash is checked against the
    checkpoint so a model is never served over a taxonomy it was not
    trained for.
    """
    from .embeddings import EmbeddingTable
    from .neuralcore import vocabulary_hash
    from .predictors import (
        CountModel, MlpPredictor, SessionPathPredictor, build_query_encoder,
    )
    from .taxonomy import node_vocabulary

    with open(os.path.join(model_dir, "model.json"), encoding="utf-8") as fh:
        meta = json.load(fh)
    if meta["model"] == "cm":
        return meta["model"], CountModel.load(os.path.join(model_dir, "count_model.json")), None
    qtable = EmbeddingTable.load(os.path.join(model_dir, "query_vectors.tsv"))
    ptable = EmbeddingTable.load(os.path.join(model_dir, "product_vectors.tsv"))
    encoder = build_query_encoder(meta["encoder"], qtable)
    ckpt = os.path.join(model_dir, "checkpoint.json")
    live_hash = vocabulary_hash(node_vocabulary(tree))
    if meta["model"] == "mlp":
        predictor = MlpPredictor.load(ckpt, encoder, ptable)
    else:
        predictor = SessionPathPredictor.load(ckpt, encoder, ptable, vocab_hash=live_hash)
    return meta["model"], predictor, ptable


def _cmd_evaluate(args, config: AppConfig) -> int:
    from .evalharness import SuiteConfig, run_experiment_suite
    from .eventlog import chronological_split, session_view_sequences
    from .neuralcore import TrainConfig

    tree, result, examples = _load_examples(args.catalog, args.events)
    split = chronological_split(examples, fraction=config.train_fraction)
    views = session_view_sequences(result.events)
    suite = SuiteConfig(
        variants=tuple(config.variants),
        fractions=tuple(config.fractions),
        seeds=tuple(config.eval_seeds),
        ct_values=tuple(config.ct_values),
        train=TrainConfig(
            learning_rate=config.learning_rate,
            time_decay=config.time_decay,
            batch_size=config.batch_size,
            max_epochs=config.max_epochs,
            patience=config.patience,
            seed=config.seed,
            validation_fraction=config.validation_fraction,
        ),
        embedding_dim=config.embedding_dim,
        embedding_epochs=config.embedding_epochs,
        embedding_seed=config.embedding_seed,
    )
    t0 = time.time()
    report = run_experiment_suite(split, tree, views, suite)
    suite_seconds = time.time() - t0
    os.makedirs(args.out, exist_ok=True)
    report.save(os.path.join(args.out, "report.json"))
    write_manifest(args.out, "evaluate", config, {"suite": suite_seconds})
    print(format_accuracy_table(report))
    validity = "-" if report.validity_rate is None else f"{report.validity_rate:.4f}"
    print(f"\nvalidity rate {validity}   suite {suite_seconds:.0f}s   report -> {args.out}/report.json")
    return 0


def format_accuracy_table(report) -> str:
    """Accuracy-at-depth grid: one block per variant, rows per fraction."""
    lines = []
    header = (
        f"{'variant':<28}{'frac':>6}  {'d1':>12} {'d2':>12} {'dlast':>12} "
        f"{'dlast(seen)':>12} {'dlast(unseen)':>14}"
    )
    lines.append(header)
    lines.append("-" * len(header))
    parsed = []
    for key, cell in report.cells.items():
        variant, _, frac_part = key.partition("|fraction=")
        parsed.append((variant, float(frac_part), cell))
    for variant, fraction, cell in sorted(parsed):
        if cell.get("failed"):
            lines.append(f"{variant:<28}{fraction:>6g}  FAILED: {cell['failed']}")
            continue
        mean, sd = cell.get("mean", {}), cell.get("sd", {})

        def fmt(key, width, mean=mean, sd=sd):
            val = mean.get(key)
            if val is None:
                return " " * (width - 1) + "-"
            text = f"{val:.3f}"
            if sd.get(key) is not None:
                text += f"±{sd[key]:.2f}"
            return f"{text:>{width}}"

        lines.append(
            f"{variant:<28}{fraction:>6g}  "
            f"{fmt('d1', 12)} {fmt('d2', 12)} {fmt('dlast', 12)} "
            f"{fmt('dlast_seen', 12)} {fmt('dlast_unseen', 14)}"
        )
    return "\n".join(lines)


def format_sweep_table(rows) -> str:
    header = f"{'ct':>7}  {'precision':>10} {'recall':>8} {'depth':>7}  {'events':>7} {'excluded':>9} {'no-pred':>8}"
    lines = [header, "-" * len(header)]
    for row in rows:
        p = "-" if row["micro_precision"] is None else f"{row['micro_precision']:.4f}"
        r = "-" if row["micro_recall"] is None else f"{row['micro_recall']:.4f}"
        lines.append(
            f"{row['ct']:>7}  {p:>10} {r:>8} {row['mean_depth']:>7.3f}  "
            f"{row['events']:>7} {row['excluded']:>9} {row['no_filtered']:>8}"
        )
    return "\n".join(lines)


def _cmd_sweep(args, config: AppConfig) -> int:
    from .evalharness import group_events, sweep_rows_for_predictor
    from .eventlog import chronological_split, session_view_sequences

    tree, result, examples = _load_examples(args.catalog, args.events)
    split = chronological_split(examples, fraction=config.train_fraction)

    t0 = time.time()
    if args.model_dir:
        _, predictor, _ = load_predictor(args.model_dir, tree)
    else:
        from .embeddings import train_skipgram

        views = session_view_sequences(result.events)
        ptable = train_skipgram(
            views, dim=config.embedding_dim, epochs=config.embedding_epochs,
            seed=config.embedding_seed, kind="product",
        )
        predictor, _, _ = _train_one("sessionpath", split, tree, config, ptable, False)

    events = group_events(split.test)
    rows, trace = sweep_rows_for_predictor(predictor, events, tree, list(config.ct_values))
    print(format_sweep_table(rows))
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, "sweep.json"), "w", encoding="utf-8") as fh:
            json.dump({"rows": rows, "events": trace}, fh, indent=2)
        write_manifest(args.out, "sweep", config, {"sweep": time.time() - t0})
        print(f"\nsweep -> {args.out}/sweep.json")
    return 0


def _cmd_serve(args, config: AppConfig) -> int:
    import uvicorn

    from .embeddings import EmbeddingTable
    from .service import ServiceArtifacts, create_app
    from .taxonomy import load_catalog

    tree = load_catalog(args.catalog)
    predictors = {}
    session_table = None
    for model_dir in args.model_dir:
        name, predictor, ptable = load_predictor(model_dir, tree)
        predictors[name] = predictor
        if ptable is not None:
            session_table = ptable
    if session_table is None:
        # count-model-only deployment; an empty table means empty session vectors
        session_table = EmbeddingTable(vectors={}, dim=config.embedding_dim, kind="product")

    sweep_rows, trace = [], []
    if args.sweep_file:
        with open(args.sweep_file, encoding="utf-8") as fh:
            payload = json.load(fh)
        sweep_rows, trace = payload.get("rows", []), payload.get("events", [])

    default_model = config.default_model if config.default_model in predictors else sorted(predictors)[0]
    artifacts = ServiceArtifacts(
        tree=tree,
        predictors=predictors,
        default_model=default_model,
        session_table=session_table,
        ct=config.ct,
        max_candidates=config.max_candidates,
        cache_capacity=config.cache_capacity,
        sweep_rows=sweep_rows,
        trace_sample=trace,
    )
    app = create_app(artifacts)
    print(f"serving {sorted(predictors)} (default {default_model}) on {config.host}:{config.port}")
    uvicorn.run(app, host=config.host, port=config.port, log_level="warning")
    return 0


def _cmd_predict(args, config: AppConfig) -> int:
    from .decision import DecisionConfig, truncate_prediction
    from .predictors import PathPrediction
    from .taxonomy import load_catalog

    tree = load_catalog(args.catalog)
    _, predictor, _ = load_predictor(args.model_dir, tree)
    session = [s for s in args.session.split(",") if s.strip()]
    pred = predictor.predict(args.query, session)
    if pred is None:
        print("(no prediction)")
        return 0
    if isinstance(pred, PathPrediction):
        truncated = truncate_prediction(pred, DecisionConfig(ct=config.ct))
        kept = truncated.depth
        print(f"query: {args.query}   ct: {config.ct}")
        for i, node in enumerate(pred.nodes):
            marker = "kept " if i < kept else "cut  "
            print(f"  {marker} {node.label:<20} gini {pred.step_gini[i]:.6f}")
        print(f"path: {'/'.join(truncated.labels) if truncated.depth else '(empty)'}")
    else:
        print(f"query: {args.query}")
        print(f"path: {'/'.join(pred.labels)} (count model, no per-node confidence)")
    return 0


_COMMANDS = {
    "generate-data": _cmd_generate_data,
    "train-embeddings": _cmd_train_embeddings,
    "train": _cmd_train,
    "evaluate": _cmd_evaluate,
    "sweep": _cmd_sweep,
    "serve": _cmd_serve,
    "predict": _cmd_predict,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = _config_from(args)
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        return _COMMANDS[args.command](args, config)
    except (ConfigError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
