"""Command-line pipeline: prepare, train, evaluate, classify, estimate, report.

Every command works inside one run directory so a whole experiment stays
auditable: corpus files and split manifest from prepare, one directory
per trained model, evaluation reports, and emission outputs. A JSON
config file can preset any flag; explicit flags win. Exit codes: 0 on
success, 1 for user errors, 2 for internal errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from datetime import datetime, timezone
from pathlib import Path

from . import corpus as corpus_mod
from . import emission as emission_mod
from . import evaluation as evaluation_mod
from . import taxonomy as taxonomy_mod
from .classifiers import base as base_mod
from .classifiers import classical as classical_mod
from .classifiers import mini as mini_mod
from .classifiers import zeroshot as zeroshot_mod
from .classifiers.finetune import finetune
from .errors import DataValidationError, GreenLedgerError, ParseError
from .features import fit_tfidf, get_sentence_provider, get_word_provider, WordAverageFeaturizer

RUN_MANIFEST = "manifest.json"
FAMILIES = ("zeroshot", "classical", "finetuned")


class _Parser(argparse.ArgumentParser):
    """argparse that treats usage problems as user errors (exit 1)."""

    def error(self, message: str) -> None:  # noqa: D401 - argparse contract
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _utc_now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _read_json(path: Path, what: str) -> dict:
    try:
        with open(path, encoding="utf-8") as f:
            return json.load(f)
    except OSError as exc:
        raise ParseError(f"cannot read {what} {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed {what} {path}: {exc}") from exc


def _write_json(path: Path, payload: dict) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(payload, f, indent=2, sort_keys=True)
        f.write("\n")


def _update_run_manifest(run_dir: Path, command: str, params: dict) -> None:
    """Record what ran with which parameters; timestamps live only in the
    metadata block so everything else is byte-deterministic."""
    path = run_dir / RUN_MANIFEST
    if path.exists():
        payload = _read_json(path, "run manifest")
    else:
        payload = {
            "format": "run-manifest",
            "version": 1,
            "commands": {},
            "metadata": {"created_at": _utc_now()},
        }
    payload["commands"][command] = params
    payload["metadata"]["updated_at"] = _utc_now()
    _write_json(path, payload)


def _load_run_taxonomy(run_dir: Path) -> taxonomy_mod.Taxonomy:
    manifest = _read_json(run_dir / RUN_MANIFEST, "run manifest")
    params = manifest.get("commands", {}).get("prepare")
    if params is None:
        raise DataValidationError(f"run {run_dir} has no prepare step; run prepare first")
    return _load_taxonomy_from_params(params)


def _load_taxonomy_from_params(params: dict) -> taxonomy_mod.Taxonomy:
    classes = params.get("classes") or str(taxonomy_mod.canonical_data_path("useeio_summary_classes.csv"))
    factors = params.get("factors") or str(taxonomy_mod.canonical_data_path("useeio_summary_factors.csv"))
    naics = params.get("naics") or str(taxonomy_mod.canonical_data_path("naics_descriptions.csv"))
    tax = taxonomy_mod.load_taxonomy(classes, factors)
    return taxonomy_mod.compose_all(tax, taxonomy_mod.load_naics_texts(naics))


def _parse_ratios(raw: str) -> tuple[float, float, float]:
    parts = raw.split(",")
    if len(parts) != 3:
        raise DataValidationError(f"ratios must be three comma-separated numbers, got {raw!r}")
    try:
        a, b, c = (float(p) for p in parts)
    except ValueError:
        raise DataValidationError(f"non-numeric ratio in {raw!r}") from None
    return (a, b, c)


def cmd_prepare(args: argparse.Namespace) -> int:
    run_dir = Path(args.out)
    corpus_dir = run_dir / "corpus"
    corpus_dir.mkdir(parents=True, exist_ok=True)
    params = {
        "classes": args.classes,
        "factors": args.factors,
        "naics": args.naics,
        "labeled": args.labeled,
        "n_per_class": args.n_per_class,
        "ratios": args.ratios,
        "seed": args.seed,
    }
    tax = _load_taxonomy_from_params(params)
    if args.labeled:
        examples = corpus_mod.load_labeled(args.labeled, tax)
    else:
        examples = corpus_mod.synth_generate(tax, n_per_class=args.n_per_class, seed=args.seed)
    dataset = corpus_mod.split(examples, ratios=_parse_ratios(args.ratios), seed=args.seed)
    corpus_mod.write_labeled(corpus_dir / "full.csv", examples)
    corpus_mod.write_labeled(corpus_dir / "train.csv", list(dataset.train))
    corpus_mod.write_labeled(corpus_dir / "validation.csv", list(dataset.validation))
    corpus_mod.write_labeled(corpus_dir / "test.csv", list(dataset.test))
    corpus_mod.write_split_manifest(dataset, corpus_dir / "split_manifest.json")
    _update_run_manifest(run_dir, "prepare", params)
    print(
        f"prepared {len(examples)} examples -> train {len(dataset.train)}, "
        f"validation {len(dataset.validation)}, test {len(dataset.test)}"
    )
    return 0


def _load_split_part(run_dir: Path, part: str, tax: taxonomy_mod.Taxonomy) -> list:
    path = run_dir / "corpus" / f"{part}.csv"
    if not path.exists():
        raise DataValidationError(f"missing corpus file {path}; run prepare first")
    return corpus_mod.load_labeled(path, tax)


def _subsample_pair(train: list, validation: list, fraction: float, seed: int) -> tuple[list, list]:
    if fraction >= 1.0:
        return train, validation
    dataset = corpus_mod.DatasetSplit(
        train=tuple(train), validation=tuple(validation), test=(),
        seed=seed, ratios=(0.7, 0.2, 0.1),
    )
    reduced = corpus_mod.subsample(dataset, fraction, seed=seed)
    return list(reduced.train), list(reduced.validation)


def _pretrain_cache_dir(run_dir: Path, texts: list[str], seed: int) -> Path:
    import hashlib

    digest = hashlib.sha256(("\x1e".join(sorted(texts)) + f"|{seed}").encode("utf-8")).hexdigest()[:12]
    return run_dir / "encoders" / f"mini_{digest}"


def _resolve_encoder_id(args: argparse.Namespace, run_dir: Path, train, validation, tax) -> str:
    if args.encoder != "auto":
        return args.encoder
    texts = [ex.text for ex in train] + [ex.text for ex in validation]
    texts += [c.title for c in tax.classes.values()]
    texts += [c.description for c in tax.classes.values() if c.description]
    cache = _pretrain_cache_dir(run_dir, texts, args.pretrain_seed)
    if not mini_mod.is_encoder_checkpoint(cache):
        print(f"pretraining local encoder -> {cache}")
        encoder, vocab, _ = mini_mod.pretrain_encoder(
            texts, epochs=args.pretrain_epochs, seed=args.pretrain_seed
        )
        mini_mod.save_encoder(encoder, vocab, cache)
    return str(cache)


def cmd_train(args: argparse.Namespace) -> int:
    run_dir = Path(args.run)
    tax = _load_run_taxonomy(run_dir)
    name = args.name or args.family
    model_dir = run_dir / "models" / name
    train_examples = _load_split_part(run_dir, "train", tax)
    validation_examples = _load_split_part(run_dir, "validation", tax)
    if not 0.0 < args.fraction <= 1.0:
        raise DataValidationError(f"--fraction must be in (0, 1], got {args.fraction}")
    train_examples, validation_examples = _subsample_pair(
        train_examples, validation_examples, args.fraction, args.seed
    )

    if args.family == "zeroshot":
        provider = get_sentence_provider(args.provider)
        model = zeroshot_mod.build_zeroshot(provider, tax, mode=args.mode)
        model.save(model_dir)
    elif args.family == "classical":
        if args.features == "tfidf":
            featurizer = fit_tfidf([ex.text for ex in train_examples])
        elif args.features.startswith("wordavg:"):
            featurizer = WordAverageFeaturizer(get_word_provider(args.features.split(":", 1)[1]))
        else:
            raise DataValidationError(
                f"unknown --features {args.features!r}; use tfidf or wordavg:<provider>"
            )
        model = classical_mod.train_classical(
            train_examples + validation_examples, featurizer,
            seed=args.seed, n_estimators=args.trees,
        )
        model.save(model_dir)
    else:
        config = base_mod.TrainingConfig(
            max_length=args.max_length, learning_rate=args.lr, epochs=args.epochs,
            batch_size=args.batch_size, seed=args.seed,
            early_stopping_patience=args.patience,
        )
        encoder_id = _resolve_encoder_id(args, run_dir, train_examples, validation_examples, tax)
        model, logs = finetune(encoder_id, train_examples, validation_examples, config)
        model.save(model_dir)
        base_mod.write_epoch_logs(logs, model_dir / "epochs.csv")

    _update_run_manifest(run_dir, f"train:{name}", {
        "family": args.family,
        "name": name,
        "seed": args.seed,
        "fraction": args.fraction,
        "train_examples": len(train_examples),
        "validation_examples": len(validation_examples),
    })
    print(f"trained {args.family} model -> {model_dir}")
    return 0


def cmd_evaluate(args: argparse.Namespace) -> int:
    run_dir = Path(args.run)
    tax = _load_run_taxonomy(run_dir)
    examples = _load_split_part(run_dir, args.split, tax)
    eval_dir = run_dir / "eval"
    eval_dir.mkdir(parents=True, exist_ok=True)
    reports = {}
    for name in args.model:
        model = base_mod.load_model(run_dir / "models" / name)
        report = evaluation_mod.evaluate(model, examples)
        reports[name] = report
        evaluation_mod.save_report(report, eval_dir / f"{name}.report.json")
        (eval_dir / f"{name}.report.txt").write_text(
            evaluation_mod.report_table(report), encoding="utf-8"
        )
        flagged = evaluation_mod.flag_low_performance(report, threshold=args.flag_threshold)
        print(f"{name}: weighted_f1 {report.weighted_f1:.4f} on {report.n_examples} examples")
        for label, f1 in flagged:
            print(f"  low F1 {f1:.4f} for class {label}")
    if len(reports) > 1:
        rows = evaluation_mod.compare(reports)
        table = evaluation_mod.comparison_table(rows)
        (eval_dir / "comparison.txt").write_text(table, encoding="utf-8")
        print(table, end="")
    _update_run_manifest(run_dir, "evaluate", {
        "models": list(args.model), "split": args.split,
        "flag_threshold": args.flag_threshold,
    })
    return 0


def cmd_classify(args: argparse.Namespace) -> int:
    import csv

    run_dir = Path(args.run)
    model = base_mod.load_model(run_dir / "models" / args.model)
    records = corpus_mod.load_ledger(args.ledger)
    out_dir = run_dir / "classify"
    out_dir.mkdir(parents=True, exist_ok=True)
    predictions = model.predict_batch([r.text for r in records])
    out_path = out_dir / "predictions.csv"
    with open(out_path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["record_id", "text", "label", "score"])
        for record, pred in zip(records, predictions):
            w.writerow([record.id, record.text, pred.label, repr(pred.score)])
    _update_run_manifest(run_dir, "classify", {
        "model": args.model, "ledger": str(args.ledger), "records": len(records),
    })
    print(f"classified {len(records)} records -> {out_path}")
    return 0


def cmd_estimate(args: argparse.Namespace) -> int:
    run_dir = Path(args.run)
    tax = _load_run_taxonomy(run_dir)
    model = base_mod.load_model(run_dir / "models" / args.model)
    records = corpus_mod.load_ledger(args.ledger)
    out_dir = run_dir / "estimate"
    out_dir.mkdir(parents=True, exist_ok=True)
    predictions = model.predict_batch([r.text for r in records]) if records else []
    estimates = emission_mod.estimate_ledger(
        records, predictions, tax, confidence_threshold=args.threshold
    )
    report = emission_mod.aggregate(estimates)
    emission_mod.export_line_audit_csv(estimates, out_dir / "line_audit.csv")
    emission_mod.export_report_csv(report, tax, out_dir / "emission_report.csv")
    if report.per_class:
        emission_mod.plot_spend_emission(report, out_dir / "spend_emission.png")
    _update_run_manifest(run_dir, "estimate", {
        "model": args.model, "ledger": str(args.ledger),
        "threshold": args.threshold, "records": len(records),
    })
    print(
        f"estimated {report.mapped_count} mapped lines, {len(report.unmapped)} unmapped; "
        f"total spend {report.total_spend:.2f}, total emission {report.total_emission:.2f} kg"
    )
    return 0


def cmd_report(args: argparse.Namespace) -> int:
    run_dir = Path(args.run)
    eval_dir = run_dir / "eval"
    report_dir = run_dir / "report"
    report_dir.mkdir(parents=True, exist_ok=True)
    reports = {}
    if eval_dir.is_dir():
        for path in sorted(eval_dir.glob("*.report.json")):
            reports[path.name[: -len(".report.json")]] = evaluation_mod.load_report(path)
    if reports:
        table = evaluation_mod.comparison_table(evaluation_mod.compare(reports))
        (report_dir / "comparison.txt").write_text(table, encoding="utf-8")
        print(table, end="")
    models_dir = run_dir / "models"
    curves = 0
    if models_dir.is_dir():
        for epochs_path in sorted(models_dir.glob("*/epochs.csv")):
            logs = base_mod.read_epoch_logs(epochs_path)
            out = report_dir / f"learning_curve_{epochs_path.parent.name}.png"
            evaluation_mod.plot_learning_curve(logs, out)
            curves += 1
    if not reports and not curves:
        raise DataValidationError(f"nothing to report in {run_dir}; evaluate or train first")
    _update_run_manifest(run_dir, "report", {
        "evaluations": sorted(reports), "learning_curves": curves,
    })
    print(f"wrote report artifacts -> {report_dir}")
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="greenledger", description=__doc__)
    common = _Parser(add_help=False)
    common.add_argument("--config", help="JSON file presetting flag values", default=None)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("prepare", help="build corpus files and split manifest", parents=[common])
    p.add_argument("--out", required=True, help="run directory to create")
    p.add_argument("--classes", default=None, help="commodity class CSV (default: built-in)")
    p.add_argument("--factors", default=None, help="emission factor CSV (default: built-in)")
    p.add_argument("--naics", default=None, help="sector description CSV (default: built-in)")
    p.add_argument("--labeled", default=None, help="labeled text,label CSV instead of synthesis")
    p.add_argument("--n-per-class", type=int, default=40, dest="n_per_class")
    p.add_argument("--ratios", default="0.7,0.2,0.1")
    p.add_argument("--seed", type=int, default=7)
    p.set_defaults(func=cmd_prepare)

    p = sub.add_parser("train", help="train or build one classifier", parents=[common])
    p.add_argument("--run", required=True, help="run directory from prepare")
    p.add_argument("--family", required=True, choices=FAMILIES)
    p.add_argument("--name", default=None, help="model directory name (default: family)")
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--fraction", type=float, default=1.0,
                   help="per-class fraction of train/validation to use")
    p.add_argument("--provider", default="hash:256", help="zeroshot sentence provider")
    p.add_argument("--mode", default="description", choices=zeroshot_mod.CLASS_TEXT_MODES)
    p.add_argument("--features", default="tfidf", help="classical features: tfidf or wordavg:<provider>")
    p.add_argument("--trees", type=int, default=classical_mod.DEFAULT_N_ESTIMATORS)
    p.add_argument("--encoder", default="auto",
                   help="finetuned backbone: checkpoint dir, model name, or auto")
    p.add_argument("--lr", type=float, default=5e-5)
    p.add_argument("--max-length", type=int, default=128, dest="max_length")
    p.add_argument("--epochs", type=int, default=60)
    p.add_argument("--batch-size", type=int, default=16, dest="batch_size")
    p.add_argument("--patience", type=int, default=10)
    p.add_argument("--pretrain-epochs", type=int, default=40, dest="pretrain_epochs")
    p.add_argument("--pretrain-seed", type=int, default=1007, dest="pretrain_seed")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="score trained models on a split", parents=[common])
    p.add_argument("--run", required=True)
    p.add_argument("--model", action="append", required=True,
                   help="model name under models/; repeat to compare")
    p.add_argument("--split", default="test", choices=("train", "validation", "test"))
    p.add_argument("--flag-threshold", type=float, default=0.7, dest="flag_threshold")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("classify", help="label ledger lines with a trained model", parents=[common])
    p.add_argument("--run", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--ledger", required=True, help="id,text,amount,currency CSV")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("estimate", help="turn classified spend into emission estimates", parents=[common])
    p.add_argument("--run", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--ledger", required=True)
    p.add_argument("--threshold", type=float, default=emission_mod.DEFAULT_CONFIDENCE_THRESHOLD,
                   help="confidence below this flags the line for review")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("report", help="regenerate comparison tables and learning curves", parents=[common])
    p.add_argument("--run", required=True)
    p.set_defaults(func=cmd_report)

    return parser


def _apply_config_defaults(parser: _Parser, argv: list[str]) -> None:
    """Load --config JSON and install its values as parser defaults so
    explicit flags still win."""
    config_path = None
    for i, token in enumerate(argv):
        if token == "--config" and i + 1 < len(argv):
            config_path = argv[i + 1]
        elif token.startswith("--config="):
            config_path = token.split("=", 1)[1]
    if config_path is None:
        return
    payload = _read_json(Path(config_path), "config file")
    if not isinstance(payload, dict):
        raise ParseError(f"config file {config_path} must hold a JSON object")
    command = next((t for t in argv if not t.startswith("-") and t != config_path), None)
    subparsers = next(
        a for a in parser._actions if isinstance(a, argparse._SubParsersAction)
    )
    for section, values in payload.items():
        if section == "common":
            targets = list(subparsers.choices.values())
        elif section in subparsers.choices:
            if command is not None and section != command:
                continue
            targets = [subparsers.choices[section]]
        else:
            raise DataValidationError(f"unknown config section {section!r}")
        if not isinstance(values, dict):
            raise DataValidationError(f"config section {section!r} must be an object")
        applied: set[str] = set()
        for target in targets:
            known = {a.dest for a in target._actions}
            hits = {k: v for k, v in values.items() if k in known}
            applied.update(hits)
            target.set_defaults(**hits)
        unknown = set(values) - applied
        if unknown:
            raise DataValidationError(f"unknown config keys in {section!r}: {sorted(unknown)}")


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        _apply_config_defaults(parser, argv)
        args = parser.parse_args(argv)
        return args.func(args)
    except SystemExit as exc:
        code = exc.code if isinstance(exc.code, int) else 1
        return code
    except GreenLedgerError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # pragma: no cover - defensive
        print(f"error: internal: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
