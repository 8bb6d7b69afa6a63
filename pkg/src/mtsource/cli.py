"""Command-line interface.

Subcommands::

    mtsource ingest   --corpus DIR [--manifest FILE] [--strict-counts]
    mtsource sample   --corpus DIR --size S --max-docs 1000 --seed 42 --out docs.tsv
    mtsource train    --docs docs.tsv --features 13 --classifier svm --out model.json
    mtsource predict  --model model.json (--text TEXT | --file FILE)
    mtsource evaluate --docs docs.tsv --features 13 --out-dir results/
    mtsource report   --experiment {lengths,subsets,features,combinations} --corpus DIR --out-dir results/

Every subcommand accepts ``--config FILE`` (JSON object keyed by option
name); explicit flags win over the file.  Data goes to stdout or files,
human summaries to stderr.  Runs that write files also write the resolved
configuration next to them as ``*.config.json``.

Exit codes: 0 success, 2 usage error, 3 data error, 4 numeric error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import __version__, serialize
from .classifier import CLASSIFIERS, ClassifierError, NumericError, TrainConfig
from .corpus import SIZE_CLASSES, TRANSLATED_ENGINES, CorpusError, CorpusManifest, DocumentSet, \
    load_corpus, sample_documents
from .experiments import (DEFAULT_COMBINATIONS, LENGTH_FEATURES, SUBSET_FEATURES, ExperimentError,
                          cross_validate, feature_combination_sweep, language_subset_experiment,
                          length_experiment, random_baseline, single_feature_sweep, ReportRow,
                          ExperimentReport)
from .features import ALL_FEATURE_IDS, FeatureError
from .pipeline import ModelFileError, TrainedModel, train_model, verdict
from .postagger import TaggerError
from .rng import derive_seed

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_NUMERIC = 4

log = logging.getLogger("mtsource")


class UsageError(Exception):
    pass


def _feature_list(text: str) -> list[int]:
    try:
        return [int(x) for x in str(text).replace("+", ",").split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"feature ids must be integers, got {text!r}") from None


def _combinations(text: str) -> list[list[int]]:
    return [_feature_list(c) for c in str(text).split(";") if c.strip()]


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="JSON file with option defaults")
    p.add_argument("--jobs", type=int, default=1, help="worker threads (results do not depend on it)")
    p.add_argument("-v", "--verbose", action="store_true")


def _add_corpus(p: argparse.ArgumentParser, required: bool = True) -> None:
    p.add_argument("--corpus", type=Path, required=required, help="corpus root directory")
    p.add_argument("--manifest", type=Path, help="corpus manifest (default: <corpus>/manifest.txt if present)")
    p.add_argument("--strict-counts", action="store_true", help="fail if a cell's sentence count differs from the manifest")


def _add_training(p: argparse.ArgumentParser) -> None:
    p.add_argument("--features", type=_feature_list, default=[13], help="feature id(s), e.g. 13 or 13,8")
    p.add_argument("--classifier", default="svm", help=f"one of {', '.join(CLASSIFIERS)}")
    p.add_argument("--C", type=float, default=1.0, dest="C")
    p.add_argument("--tolerance", type=float, default=1e-4)
    p.add_argument("--max-epochs", type=int, default=1000)
    p.add_argument("--k-neighbors", type=int, default=5)
    p.add_argument("--alpha", type=float, default=1.0, help="Naive Bayes smoothing")
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mtsource",
                                     description="Detect machine translation and predict the source language of English text.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="read a corpus and print per-cell sentence counts")
    _add_common(p)
    _add_corpus(p)

    p = sub.add_parser("sample", help="sample documents of one size class")
    _add_common(p)
    _add_corpus(p)
    p.add_argument("--size", required=True, choices=sorted(SIZE_CLASSES))
    p.add_argument("--max-docs", type=int, default=1000)
    p.add_argument("--engine", choices=TRANSLATED_ENGINES)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=Path, required=True)

    p = sub.add_parser("train", help="train a model on a document set")
    _add_common(p)
    p.add_argument("--docs", type=Path, required=True)
    _add_training(p)
    p.add_argument("--out", type=Path, required=True)

    p = sub.add_parser("predict", help="predict the source language of texts")
    _add_common(p)
    p.add_argument("--model", type=Path, required=True)
    p.add_argument("--text", help="one document")
    p.add_argument("--file", type=Path, help="one document per line")

    p = sub.add_parser("evaluate", help="cross-validate one feature set and classifier")
    _add_common(p)
    p.add_argument("--docs", type=Path, required=True)
    _add_training(p)
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--out-dir", type=Path)

    p = sub.add_parser("report", help="run an experiment sweep and write CSV reports")
    _add_common(p)
    _add_corpus(p, required=False)
    p.add_argument("--docs", type=Path, action="append", help="pre-sampled document set(s), instead of --corpus")
    p.add_argument("--experiment", required=True, choices=("lengths", "subsets", "features", "combinations"))
    _add_training(p)
    p.set_defaults(features=None)
    p.add_argument("--combinations", type=_combinations, help="e.g. '13;13,23;13,8'")
    p.add_argument("--sizes", default="S,M,L,XL")
    p.add_argument("--subset-sizes", default="2,3,4,10")
    p.add_argument("--max-docs", type=int, default=1000)
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--out-dir", type=Path, required=True)
    return parser


def _parse(parser: argparse.ArgumentParser, argv) -> argparse.Namespace:
    args = parser.parse_args(argv)
    if getattr(args, "config", None):
        try:
            values = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, ValueError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(values, dict):
            raise UsageError("config file must hold a JSON object")
        subparser = parser._subparsers._group_actions[0].choices[args.command]
        known = {a.dest: a for a in subparser._actions}
        defaults = {}
        for key, value in values.items():
            dest = key.replace("-", "_")
            if dest not in known or dest in ("config", "help"):
                raise UsageError(f"config: unknown option {key!r} for {args.command}")
            action = known[dest]
            if action.type is not None and isinstance(value, (str, int, float)) and not isinstance(value, bool):
                value = action.type(str(value)) if action.type in (_feature_list, _combinations) else action.type(value)
            defaults[dest] = value
        subparser.set_defaults(**defaults)
        args = parser.parse_args(argv)
    return args


def _resolved(args: argparse.Namespace) -> dict:
    out = {}
    for k, v in sorted(vars(args).items()):
        if k in ("config", "verbose"):
            continue
        if isinstance(v, Path):
            v = str(v)
        elif isinstance(v, list):
            v = [str(x) if isinstance(x, Path) else x for x in v]
        out[k] = v
    return out


def _write_config(args: argparse.Namespace, path: Path) -> None:
    path.write_text(serialize.dumps(_resolved(args)), encoding="utf-8")


def _manifest(args) -> CorpusManifest | None:
    if args.manifest:
        return CorpusManifest.read(args.manifest)
    default = args.corpus / "manifest.txt"
    return CorpusManifest.read(default) if default.is_file() else None


def _train_config(args) -> TrainConfig:
    return TrainConfig(C=args.C, tolerance=args.tolerance, max_epochs=args.max_epochs,
                       seed=derive_seed(args.seed, "classifier"))


def _classifier_options(args) -> dict:
    if args.classifier not in CLASSIFIERS:
        raise UsageError(f"unknown classifier {args.classifier!r}; valid names: {', '.join(CLASSIFIERS)}")
    if args.classifier == "knn":
        return {"k": args.k_neighbors}
    if args.classifier == "nb":
        return {"alpha": args.alpha}
    return {}


def cmd_ingest(args) -> int:
    corpus = load_corpus(args.corpus, _manifest(args), strict_counts=args.strict_counts, jobs=args.jobs)
    print("engine,language,sentences")
    for (engine, lang), n in corpus.counts().items():
        print(f"{engine},{lang},{n}")
    print(f"{len(corpus.languages)} languages, engines: {', '.join(corpus.engines) or '-'}", file=sys.stderr)
    return EXIT_OK


def cmd_sample(args) -> int:
    corpus = load_corpus(args.corpus, _manifest(args), strict_counts=args.strict_counts, jobs=args.jobs)
    doc_set = sample_documents(corpus, args.size, args.max_docs, args.seed, engine=args.engine, jobs=args.jobs)
    doc_set.write(args.out)
    _write_config(args, args.out.with_name(args.out.name + ".config.json"))
    print(f"{len(doc_set)} {args.size} documents for {doc_set.engine} -> {args.out}", file=sys.stderr)
    return EXIT_OK


def cmd_train(args) -> int:
    options = _classifier_options(args)
    doc_set = DocumentSet.read(args.docs)
    model = train_model(doc_set.documents, doc_set.labels, args.features, args.classifier,
                        _train_config(args), jobs=args.jobs, **options)
    model.save(args.out)
    _write_config(args, args.out.with_name(args.out.name + ".config.json"))
    print(f"trained {args.classifier} on {len(doc_set)} documents, {len(model.classes)} classes -> {args.out}",
          file=sys.stderr)
    return EXIT_OK


def cmd_predict(args) -> int:
    if (args.text is None) == (args.file is None):
        raise UsageError("give exactly one of --text or --file")
    if args.text is not None:
        texts = [args.text]
    else:
        texts = [line.rstrip("\r") for line in args.file.read_text(encoding="utf-8").split("\n")]
        if texts and texts[-1] == "":
            texts.pop()
    if not texts or any(not t.strip() for t in texts):
        raise CorpusError("input text is empty")
    model = TrainedModel.load(args.model)
    scores = model.decision_scores(texts)
    labels = model.classifier.predict(model.featurize(texts))
    out = sys.stdout
    out.write(",".join(["doc", "label", "verdict", *model.classes]) + "\n")
    for i, (label, row) in enumerate(zip(labels, scores)):
        out.write(",".join([str(i), label, verdict(label), *(format(float(v), ".17g") for v in row)]) + "\n")
    for label in labels:
        print(verdict(label), file=sys.stderr)
    return EXIT_OK


def cmd_evaluate(args) -> int:
    options = _classifier_options(args)
    doc_set = DocumentSet.read(args.docs)
    res = cross_validate(doc_set, args.features, args.classifier, _train_config(args), args.folds,
                         args.seed, **options)
    feature = "+".join(map(str, args.features))
    report = ExperimentReport([ReportRow(doc_set.engine, feature, doc_set.size_class, res.accuracy,
                                         random_baseline(len(doc_set.languages)), res.n_docs,
                                         f"cv{args.folds}", args.seed)])
    csv_text = report.to_csv()
    if args.out_dir:
        args.out_dir.mkdir(parents=True, exist_ok=True)
        (args.out_dir / "evaluation.csv").write_text(csv_text, encoding="utf-8")
        (args.out_dir / "confusion.csv").write_text(res.confusion.to_csv(), encoding="utf-8")
        _write_config(args, args.out_dir / "evaluation.config.json")
    else:
        sys.stdout.write(csv_text)
    print(f"accuracy {res.accuracy:.4f} over {res.n_docs} documents ({args.folds}-fold)", file=sys.stderr)
    return EXIT_OK


def _report_source(args, size: str | None = None):
    if args.docs:
        sets = [DocumentSet.read(p) for p in args.docs]
        return sets if size is None else [d for d in sets if d.size_class == size]
    if args.corpus is None:
        raise UsageError("report needs --corpus or --docs")
    return load_corpus(args.corpus, _manifest(args), strict_counts=args.strict_counts, jobs=args.jobs)


def cmd_report(args) -> int:
    options = _classifier_options(args)
    config = _train_config(args)
    common = dict(classifier=args.classifier, config=config, k=args.folds, seed=args.seed,
                  jobs=args.jobs, **options)
    exp = args.experiment
    if exp == "lengths":
        sizes = [s.strip() for s in args.sizes.split(",") if s.strip()]
        source = _report_source(args)
        if isinstance(source, list):
            source = {s: [d for d in source if d.size_class == s] for s in sizes}
        report = length_experiment(source, sizes, args.features or LENGTH_FEATURES,
                                   max_docs=args.max_docs, **common)
    elif exp == "subsets":
        sizes = [int(s) for s in args.subset_sizes.split(",") if s.strip()]
        report = language_subset_experiment(_report_source(args), sizes, args.features or SUBSET_FEATURES,
                                            max_docs=args.max_docs, **common)
    elif exp == "features":
        report = single_feature_sweep(_report_source(args), args.features or ALL_FEATURE_IDS,
                                      max_docs=args.max_docs, **common)
    else:
        report = feature_combination_sweep(_report_source(args), args.combinations or DEFAULT_COMBINATIONS,
                                           max_docs=args.max_docs, **common)

    out = args.out_dir
    (out / "confusion").mkdir(parents=True, exist_ok=True)
    (out / f"{exp}.csv").write_text(report.to_csv(), encoding="utf-8")
    for (engine, feature, xaxis), cm in sorted(report.confusions.items()):
        name = f"{engine}_{feature}_{xaxis}".replace(":", "_").replace("+", "-")
        (out / "confusion" / f"{exp}_{name}.csv").write_text(cm.to_csv(), encoding="utf-8")
    _write_config(args, out / f"{exp}.config.json")
    for engine, feature in sorted(report.best.items()):
        print(f"best feature for {engine}: {feature}", file=sys.stderr)
    print(f"{len(report.rows)} rows -> {out / (exp + '.csv')}", file=sys.stderr)
    return EXIT_OK


COMMANDS = {
    "ingest": cmd_ingest,
    "sample": cmd_sample,
    "train": cmd_train,
    "predict": cmd_predict,
    "evaluate": cmd_evaluate,
    "report": cmd_report,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = _parse(parser, argv)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s", stream=sys.stderr)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (CorpusError, FeatureError, TaggerError, ClassifierError, ExperimentError, ModelFileError,
            OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
