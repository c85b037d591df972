"""Command-line surface: fetch, preprocess, train, evaluate, predict, compare.

Exit codes: 0 success, 1 internal error, 2 bad input/config, 3 external
service failure.  Configuration is a flat ``key = value`` file (# comments)
with command-line flags taking precedence; the fully resolved config is
echoed into the output directory before any long-running work.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import baselines, evaluation, ingest, nn, svgplot, youtube
from .preprocess import (PreprocessConfig, read_slang_tsv, read_wordlist,
                         run_pipeline)
from .train import (EncodedDataset, TrainConfig, save_history_csv,
                    train as train_model)
from .vocab import build_vocab, encode, load_vocab, save_vocab, suggest_max_len

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_BAD_INPUT = 2
EXIT_EXTERNAL = 3


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_BAD_INPUT):
        super().__init__(message)
        self.code = code


# --- configuration -----------------------------------------------------------

DEFAULTS = {
    "seed": "0",
    "epochs": "20",
    "batch_size": "16",
    "learning_rate": "0.0005",
    "embed_dim": "128",
    "hidden_dim": "128",
    "lstm_dropout": "0.0",
    "fc_dropout": "0.5",
    "min_freq": "1",
    "max_len": "",            # empty -> 95th percentile of train lengths
    "train_fraction": "0.70",
    "val_fraction": "0.15",
    "test_fraction": "0.15",
    "class_weights": "",      # e.g. "1.0,4.0"; empty -> unweighted
    "shuffle": "true",
    "dtype": "float32",
    "baselines": "majority,naive_bayes,logistic_regression,linear_svm",
}


def parse_config_file(path: Path) -> dict[str, str]:
    values: dict[str, str] = {}
    for ln, raw in enumerate(path.read_text("utf-8").splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise CliError(f"{path}:{ln}: expected 'key = value'")
        key, value = line.split("=", 1)
        values[key.strip()] = value.strip()
    return values


def resolve_config(args: argparse.Namespace) -> dict[str, str]:
    cfg = dict(DEFAULTS)
    if args.config:
        path = Path(args.config)
        if not path.exists():
            raise CliError(f"config file not found: {path}")
        file_values = parse_config_file(path)
        unknown = set(file_values) - set(DEFAULTS)
        if unknown:
            raise CliError(f"unknown config keys: {sorted(unknown)}")
        cfg.update(file_values)
    if args.seed is not None:
        cfg["seed"] = str(args.seed)
    for key in ("epochs", "batch_size", "learning_rate", "max_len"):
        value = getattr(args, key, None)
        if value is not None:
            cfg[key] = str(value)
    return cfg


def echo_config(cfg: dict[str, str], out_dir: Path) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    lines = [f"{k} = {cfg[k]}" for k in sorted(cfg)]
    (out_dir / "config.resolved.txt").write_text("\n".join(lines) + "\n", "utf-8")


def _as_bool(value: str) -> bool:
    return value.strip().lower() in ("1", "true", "yes", "on")


def _class_weights(cfg: dict[str, str]) -> tuple[float, ...] | None:
    raw = cfg["class_weights"].strip()
    if not raw:
        return None
    weights = tuple(float(p) for p in raw.split(","))
    if len(weights) != 2:
        raise CliError("class_weights needs exactly two comma-separated values")
    return weights


def preprocess_config(args: argparse.Namespace) -> PreprocessConfig:
    """Bundled dictionaries unless a file override was given."""
    overrides = {}
    try:
        if getattr(args, "roots", None):
            overrides["roots"] = read_wordlist(args.roots)
        if getattr(args, "stopwords", None):
            overrides["stopwords"] = read_wordlist(args.stopwords)
        if getattr(args, "slang", None):
            overrides["slang"] = read_slang_tsv(args.slang)
    except FileNotFoundError as exc:
        raise CliError(f"dictionary file not found: {exc.filename}") from None
    return PreprocessConfig.default(**overrides)


# --- shared pipeline pieces ----------------------------------------------------

def _load_corpus(path: str, strict: bool = True) -> ingest.Dataset:
    try:
        return ingest.load_csv(path, strict=strict)
    except FileNotFoundError as exc:
        raise CliError(str(exc)) from None
    except ingest.CorpusError as exc:
        raise CliError(str(exc)) from None


def _tokens_column(path: Path) -> list[list[str]] | None:
    """Use a precomputed ``tokens`` column when the CSV carries one."""
    import csv as _csv
    with open(path, newline="", encoding="utf-8") as fh:
        reader = _csv.DictReader(fh)
        if not reader.fieldnames or "tokens" not in reader.fieldnames:
            return None
        return [(row["tokens"] or "").split() for row in reader]


def _tokenized(ds: ingest.Dataset, path: Path, pp: PreprocessConfig,
               quiet: bool) -> list[list[str]]:
    cached = _tokens_column(path)
    if cached is not None and len(cached) == len(ds):
        return cached
    if not quiet:
        print(f"preprocessing {len(ds)} comments...", file=sys.stderr)
    return [run_pipeline(r.text, pp) for r in ds.records]


# --- commands ------------------------------------------------------------------

def cmd_fetch(args, cfg) -> int:
    try:
        comments = youtube.fetch_comments(
            args.video_id, max_pages=args.max_pages, base_url=args.base_url)
    except youtube.FetchError as exc:
        raise CliError(f"fetch failed: {exc}", code=EXIT_EXTERNAL) from None
    ingest.save_csv(comments, args.out)
    if not args.quiet:
        print(f"wrote {len(comments)} comments to {args.out}")
    return EXIT_OK


def cmd_preprocess(args, cfg) -> int:
    ds = _load_corpus(args.input, strict=not args.lenient)
    pp = preprocess_config(args)
    tokens = [run_pipeline(r.text, pp) for r in ds.records]
    ingest.save_csv(ds, args.out,
                    extra_columns={"tokens": [" ".join(t) for t in tokens]})
    if not args.quiet:
        print(f"wrote {len(ds)} tokenized rows to {args.out}")
    return EXIT_OK


def _split_and_encode(args, cfg, pp):
    ds = _load_corpus(args.corpus).labeled_only()
    if len(ds) == 0:
        raise CliError("corpus has no labeled records")
    docs = _tokenized(ds, Path(args.corpus), pp, args.quiet)
    spec = ingest.SplitSpec(float(cfg["train_fraction"]),
                            float(cfg["val_fraction"]),
                            float(cfg["test_fraction"]),
                            seed=int(cfg["seed"]))
    by_id = {id(r): toks for r, toks in zip(ds.records, docs)}
    train_ds, val_ds, test_ds = ingest.stratified_split(ds, spec)

    def part(split: ingest.Dataset):
        toks = [by_id[id(r)] for r in split.records]
        labels = [int(r.label) for r in split.records]
        return toks, labels

    return part(train_ds), part(val_ds), part(test_ds)


def cmd_train(args, cfg) -> int:
    out_dir = Path(args.out_dir)
    echo_config(cfg, out_dir)
    pp = preprocess_config(args)
    (train_docs, train_labels), (val_docs, val_labels), _ = \
        _split_and_encode(args, cfg, pp)
    if not train_docs:
        raise CliError("train split is empty")

    vocab = build_vocab(train_docs, min_freq=int(cfg["min_freq"]))
    max_len = (int(cfg["max_len"]) if cfg["max_len"]
               else suggest_max_len(train_docs))
    save_vocab(vocab, out_dir / "vocab.txt", max_len,
               min_freq=int(cfg["min_freq"]))

    dtype = np.float64 if cfg["dtype"] == "float64" else np.float32
    model_cfg = nn.ModelConfig(
        vocab_size=vocab.size, embed_dim=int(cfg["embed_dim"]),
        hidden_dim=int(cfg["hidden_dim"]), max_len=max_len,
        lstm_dropout=float(cfg["lstm_dropout"]),
        fc_dropout=float(cfg["fc_dropout"]))
    params = nn.init_params(model_cfg, seed=int(cfg["seed"]), dtype=dtype)

    def enc(docs, labels):
        return EncodedDataset.from_sequences(
            [encode(d, vocab, max_len) for d in docs], labels)

    train_cfg = TrainConfig(
        batch_size=int(cfg["batch_size"]),
        learning_rate=float(cfg["learning_rate"]),
        epochs=int(cfg["epochs"]), seed=int(cfg["seed"]),
        class_weights=_class_weights(cfg), shuffle=_as_bool(cfg["shuffle"]))
    if train_cfg.epochs == 0:
        print("warning: epochs = 0, nothing to train", file=sys.stderr)
    val_set = enc(val_docs, val_labels) if val_docs else None
    result = train_model(params, enc(train_docs, train_labels), val_set,
                         train_cfg, log=None if args.quiet else sys.stderr)

    save_history_csv(result.history, out_dir / "history.csv")
    nn.save_checkpoint(out_dir / "checkpoint.bin", result.final_params)
    if result.best_params is not None:
        nn.save_checkpoint(out_dir / "checkpoint_best.bin", result.best_params)
    if result.history:
        (out_dir / "loss.svg").write_text(svgplot.line_plot(
            {"train": [s.train_loss for s in result.history],
             "val": [s.val_loss for s in result.history]},
            "training and validation loss", "loss"), "utf-8")
        (out_dir / "accuracy.svg").write_text(svgplot.line_plot(
            {"train": [s.train_accuracy for s in result.history],
             "val": [s.val_accuracy for s in result.history]},
            "training and validation accuracy", "accuracy"), "utf-8")
    if not args.quiet:
        print(f"trained {train_cfg.epochs} epochs; artifacts in {out_dir}")
    return EXIT_OK


def _load_model(args):
    ckpt = Path(args.checkpoint)
    if not ckpt.exists():
        raise CliError(f"checkpoint not found: {ckpt}")
    try:
        params, _ = nn.load_checkpoint(ckpt)
    except nn.CheckpointError as exc:
        raise CliError(f"bad checkpoint: {exc}") from None
    vocab_path = Path(args.vocab) if args.vocab else ckpt.parent / "vocab.txt"
    if not vocab_path.exists():
        raise CliError(f"vocabulary file not found: {vocab_path}")
    vocab, max_len, _ = load_vocab(vocab_path)
    if vocab.size != params.config.vocab_size:
        raise CliError(f"vocabulary size {vocab.size} does not match "
                       f"checkpoint ({params.config.vocab_size})")
    return params, vocab, max_len


def cmd_evaluate(args, cfg) -> int:
    out_dir = Path(args.out_dir)
    echo_config(cfg, out_dir)
    params, vocab, max_len = _load_model(args)
    ds = _load_corpus(args.test_csv).labeled_only()
    if len(ds) == 0:
        raise CliError("test file has no labeled records")
    pp = preprocess_config(args)
    docs = _tokenized(ds, Path(args.test_csv), pp, args.quiet)

    preds = []
    for tokens in docs:
        seq = encode(tokens, vocab, max_len)
        preds.append(int(nn.predict_encoded(params, seq).label))
    truth = [int(r.label) for r in ds.records]

    cm = evaluation.confusion(preds, truth)
    rep = evaluation.report_from_confusion(cm)
    text = evaluation.render_text(rep)
    (out_dir / "report.txt").write_text(text + "\n", "utf-8")
    (out_dir / "report.csv").write_text(evaluation.report_to_csv(rep), "utf-8")
    (out_dir / "confusion.csv").write_text(evaluation.confusion_to_csv(cm), "utf-8")
    (out_dir / "confusion.svg").write_text(evaluation.confusion_svg(cm), "utf-8")
    if not args.quiet:
        print(text)
    return EXIT_OK


def cmd_predict(args, cfg) -> int:
    params, vocab, max_len = _load_model(args)
    pp = preprocess_config(args)
    lines = args.text if args.text else [l.rstrip("\n") for l in sys.stdin]
    for line in lines:
        pred = nn.predict(line, params, vocab, pp, max_len=max_len)
        name = ingest.LABEL_NAMES[pred.label]
        prob = float(pred.probabilities[int(pred.label)])
        if pred.low_confidence:
            print(f"{name} (low-confidence: empty after preprocessing)"
                  f"\t{prob:.4f}")
        else:
            print(f"{name}\t{prob:.4f}")
    return EXIT_OK


def cmd_compare(args, cfg) -> int:
    out_dir = Path(args.out_dir)
    echo_config(cfg, out_dir)
    pp = preprocess_config(args)
    (train_docs, train_labels), (val_docs, val_labels), \
        (test_docs, test_labels) = _split_and_encode(args, cfg, pp)
    if not test_docs:
        raise CliError("test split is empty; adjust split fractions")

    vocab = build_vocab(train_docs, min_freq=int(cfg["min_freq"]))
    include = [p.strip() for p in cfg["baselines"].split(",") if p.strip()]
    rows = baselines.run_comparison(train_docs, train_labels, test_docs,
                                    test_labels, vocab, seed=int(cfg["seed"]),
                                    include=include)

    # the LSTM row is always present, baselines config notwithstanding
    max_len = (int(cfg["max_len"]) if cfg["max_len"]
               else suggest_max_len(train_docs))
    model_cfg = nn.ModelConfig(
        vocab_size=vocab.size, embed_dim=int(cfg["embed_dim"]),
        hidden_dim=int(cfg["hidden_dim"]), max_len=max_len,
        lstm_dropout=float(cfg["lstm_dropout"]),
        fc_dropout=float(cfg["fc_dropout"]))
    dtype = np.float64 if cfg["dtype"] == "float64" else np.float32
    params = nn.init_params(model_cfg, seed=int(cfg["seed"]), dtype=dtype)

    def enc(docs, labels):
        return EncodedDataset.from_sequences(
            [encode(d, vocab, max_len) for d in docs], labels)

    train_cfg = TrainConfig(
        batch_size=int(cfg["batch_size"]),
        learning_rate=float(cfg["learning_rate"]),
        epochs=int(cfg["epochs"]), seed=int(cfg["seed"]),
        class_weights=_class_weights(cfg), shuffle=_as_bool(cfg["shuffle"]))
    result = train_model(params, enc(train_docs, train_labels),
                         enc(val_docs, val_labels) if val_docs else None,
                         train_cfg, log=None if args.quiet else sys.stderr)
    model = result.final_params
    lstm_preds = [int(nn.predict_encoded(model, encode(d, vocab, max_len)).label)
                  for d in test_docs]
    lstm_rep = evaluation.report(lstm_preds, test_labels)
    rows.append(baselines.ComparisonRow("lstm", lstm_rep.accuracy,
                                        lstm_rep.macro_f1))

    table = baselines.compare_models(rows)
    csv_lines = ["model,accuracy,macro_f1"] + [
        f"{r.model},{r.accuracy:.4f},{r.macro_f1:.4f}" for r in rows]
    (out_dir / "comparison.csv").write_text("\n".join(csv_lines) + "\n", "utf-8")
    (out_dir / "comparison.txt").write_text(table + "\n", "utf-8")
    if not args.quiet:
        print(table)
    return EXIT_OK


# --- entry point -----------------------------------------------------------------

GLOBAL_DEFAULTS = {"config": None, "seed": None, "out_dir": "out",
                   "quiet": False}


def _global_flags() -> argparse.ArgumentParser:
    # SUPPRESS defaults let these appear before or after the subcommand
    # without the subparser clobbering root-level values
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=argparse.SUPPRESS,
                        help="flat key = value config file")
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    common.add_argument("--out-dir", dest="out_dir",
                        default=argparse.SUPPRESS,
                        help="artifact directory for train/evaluate/compare")
    common.add_argument("--quiet", action="store_true",
                        default=argparse.SUPPRESS)
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _global_flags()
    parser = argparse.ArgumentParser(
        prog="sentimen",
        description="Indonesian sentiment classification toolkit",
        parents=[common])
    sub = parser.add_subparsers(dest="command", required=True,
                                parser_class=lambda **kw: argparse.ArgumentParser(
                                    parents=[common], **kw))

    def add_dict_flags(p):
        p.add_argument("--roots", help="root-word dictionary file override")
        p.add_argument("--stopwords", help="stopword list file override")
        p.add_argument("--slang", help="slang map TSV override")

    p = sub.add_parser("fetch", help="fetch comments into a corpus CSV")
    p.add_argument("video_id")
    p.add_argument("--max-pages", type=int, default=1)
    p.add_argument("--out", required=True)
    p.add_argument("--base-url", default=youtube.DEFAULT_BASE_URL)
    p.set_defaults(func=cmd_fetch)

    p = sub.add_parser("preprocess", help="tokenize a corpus CSV")
    p.add_argument("input")
    p.add_argument("--out", required=True)
    p.add_argument("--lenient", action="store_true",
                   help="skip bad rows instead of aborting")
    add_dict_flags(p)
    p.set_defaults(func=cmd_preprocess)

    p = sub.add_parser("train", help="train the LSTM classifier")
    p.add_argument("corpus")
    p.add_argument("--epochs", type=int, default=None)
    p.add_argument("--batch-size", dest="batch_size", type=int, default=None)
    p.add_argument("--learning-rate", dest="learning_rate", type=float,
                   default=None)
    p.add_argument("--max-len", dest="max_len", type=int, default=None)
    add_dict_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="score a checkpoint on a test CSV")
    p.add_argument("checkpoint")
    p.add_argument("test_csv")
    p.add_argument("--vocab", help="vocabulary file (default: next to checkpoint)")
    add_dict_flags(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("predict", help="classify text lines")
    p.add_argument("checkpoint")
    p.add_argument("text", nargs="*", help="texts; stdin lines when omitted")
    p.add_argument("--vocab")
    add_dict_flags(p)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("compare", help="baseline/LSTM comparison table")
    p.add_argument("corpus")
    p.add_argument("--epochs", type=int, default=None)
    add_dict_flags(p)
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    for key, value in GLOBAL_DEFAULTS.items():
        if not hasattr(args, key):
            setattr(args, key, value)
    try:
        cfg = resolve_config(args)
        return args.func(args, cfg)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except (FloatingPointError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    raise SystemExit(main())
