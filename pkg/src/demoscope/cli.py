"""Command-line interface: the extraction/vector toolchain and the sweeps.

Subcommands: extract, stats, sitevec, aggregate, train, predict, evaluate,
sweep-schemes, sweep-aggregation, sweep-tags, gen-synthetic. The shared
flags (--config, --seed, --scheme, --aggregate, --tags) go after the
subcommand; anything a flag does not cover is a config-file key.
"""

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .aggregation import METHODS
from .config import ConfigError, resolve_config
from .embeddings import EmbeddingLoadError, load_word2vec_binary
from .html_extract import FetchError, TagMask, experiment_masks, fetch_many
from .learn import (
    Dataset,
    LearnError,
    evaluate,
    grid_search_cv,
    load_model,
    predict_batch,
    save_model,
    train_model,
)
from .pipeline import (
    ATTRIBUTES,
    PipelineError,
    apply_filters,
    build_user_vectors,
    embedding_fingerprint,
    extract_site_documents,
    load_browsing_log,
    load_corpus_stats,
    load_tendency,
    load_token_docs,
    read_html_dir,
    run_demography_experiment,
    run_tag_experiment,
    save_corpus_stats,
    save_token_docs,
    compute_site_vectors,
)
from .representation import load_vectors, save_vectors
from .synth import SynthConfig, generate_corpora
from .weighting import ALL_SCHEMES, WeightingError, WeightingScheme, build_corpus_stats

logger = logging.getLogger(__name__)

_USER_ERRORS = (
    ConfigError,
    PipelineError,
    LearnError,
    WeightingError,
    EmbeddingLoadError,
    FetchError,
    ValueError,
    OSError,
)


def _shared_flags():
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--config", metavar="FILE", help="key=value config file")
    shared.add_argument("--seed", type=int, help="RNG seed for splits and folds")
    shared.add_argument("--scheme", metavar="CODE", help="two-letter weighting scheme, e.g. ad")
    shared.add_argument("--aggregate", choices=METHODS, help="user aggregation method")
    shared.add_argument("--tags", metavar="MASK", help="tag mask over hpaiv (title implicit)")
    shared.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    return shared


def build_parser():
    shared = _shared_flags()
    parser = argparse.ArgumentParser(
        prog="demoscope",
        description="Demographic prediction from browsing histories.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", parents=[shared], help="extract token streams from HTML")
    p.add_argument("--html-dir", metavar="DIR", help="directory of <site_id>.html files")
    p.add_argument("--urls", metavar="FILE", help="TSV of site_id<TAB>url to fetch")
    p.add_argument("--out", required=True, metavar="FILE", help="token-docs JSONL output")

    p = sub.add_parser("stats", parents=[shared], help="corpus document frequencies")
    p.add_argument("--docs", required=True, metavar="FILE", help="token-docs JSONL")
    p.add_argument("--out", required=True, metavar="FILE", help="stats JSON output")

    p = sub.add_parser("sitevec", parents=[shared], help="compose site vectors")
    p.add_argument("--docs", required=True, metavar="FILE", help="token-docs JSONL")
    p.add_argument("--stats", required=True, metavar="FILE", help="corpus stats JSON")
    p.add_argument("--embedding", required=True, metavar="FILE", help="binary word vectors")
    p.add_argument("--l2-normalize", action="store_true", help="unit-normalize site vectors")
    p.add_argument("--out", required=True, metavar="FILE", help="site-vector store output")

    p = sub.add_parser("aggregate", parents=[shared], help="aggregate user vectors")
    p.add_argument("--log", required=True, metavar="FILE", help="browsing-log TSV")
    p.add_argument("--site-vectors", required=True, metavar="FILE", help="site-vector store")
    p.add_argument("--docs", metavar="FILE", help="token-docs JSONL (enables the content filter)")
    p.add_argument("--no-filters", action="store_true", help="skip the filtering cascade")
    p.add_argument("--out", required=True, metavar="FILE", help="user-vector store output")

    p = sub.add_parser("train", parents=[shared], help="train a classifier on user vectors")
    p.add_argument("--user-vectors", required=True, metavar="FILE")
    p.add_argument("--log", required=True, metavar="FILE", help="browsing-log TSV (labels)")
    p.add_argument("--attribute", required=True, choices=ATTRIBUTES)
    p.add_argument("--classifier", default="svm", choices=("svm", "logistic"))
    p.add_argument("--c", type=float, help="fix C instead of cross-validating")
    p.add_argument("--standardize", action="store_true", help="train-set mean/variance scaling")
    p.add_argument("--out", required=True, metavar="FILE", help="model JSON output")

    p = sub.add_parser("predict", parents=[shared], help="predict labels for user vectors")
    p.add_argument("--model", required=True, metavar="FILE")
    p.add_argument("--user-vectors", required=True, metavar="FILE")
    p.add_argument("--out", required=True, metavar="FILE", help="TSV of user_id, prediction")

    p = sub.add_parser("evaluate", parents=[shared], help="evaluate a model against labels")
    p.add_argument("--model", required=True, metavar="FILE")
    p.add_argument("--user-vectors", required=True, metavar="FILE")
    p.add_argument("--log", required=True, metavar="FILE")
    p.add_argument("--attribute", required=True, choices=ATTRIBUTES)
    p.add_argument("--out", metavar="FILE", help="metrics JSON output")

    p = sub.add_parser("sweep-schemes", parents=[shared], help="accuracy per weighting scheme")
    _sweep_inputs(p)
    p.add_argument("--schemes", default="all", metavar="LIST", help="comma list or 'all'")
    p.add_argument("--classifiers", default="svm", metavar="LIST", help="comma list of svm,logistic")

    p = sub.add_parser("sweep-aggregation", parents=[shared], help="accuracy per aggregation method")
    _sweep_inputs(p)
    p.add_argument("--methods", default="all", metavar="LIST", help="comma list or 'all'")
    p.add_argument("--classifiers", default="svm", metavar="LIST", help="comma list of svm,logistic")

    p = sub.add_parser("sweep-tags", parents=[shared], help="SVR RMSE per tag mask")
    p.add_argument("--tendency", required=True, metavar="FILE", help="tendency TSV")
    p.add_argument("--html-dir", required=True, metavar="DIR")
    p.add_argument("--embedding", required=True, metavar="FILE")
    p.add_argument("--masks", default="all", metavar="LIST",
                   help="comma list of mask codes ('title' for title-only) or 'all'")
    p.add_argument("--out", required=True, metavar="FILE", help="report JSON output")

    p = sub.add_parser("gen-synthetic", parents=[shared], help="write synthetic corpora")
    p.add_argument("--out-dir", required=True, metavar="DIR")
    p.add_argument("--users", type=int, default=500)
    p.add_argument("--sites", type=int, default=300)
    p.add_argument("--tag-sites", type=int, default=120)
    p.add_argument("--dim", type=int, default=32)

    return parser


def _sweep_inputs(p):
    p.add_argument("--log", required=True, metavar="FILE", help="browsing-log TSV")
    p.add_argument("--html-dir", required=True, metavar="DIR")
    p.add_argument("--embedding", required=True, metavar="FILE")
    p.add_argument("--attribute", default="gender", choices=ATTRIBUTES)
    p.add_argument("--cache-dir", metavar="DIR", help="site-vector cache directory")
    p.add_argument("--out", required=True, metavar="FILE", help="report JSON output")


def _config_of(args):
    return resolve_config(
        config_path=args.config,
        seed=args.seed,
        scheme=args.scheme,
        aggregate=args.aggregate,
        tags=args.tags,
    )


def _load_pages(args, cfg):
    if args.html_dir and args.urls:
        raise PipelineError("give either --html-dir or --urls, not both")
    if args.html_dir:
        return read_html_dir(args.html_dir)
    if not args.urls:
        raise PipelineError("one of --html-dir or --urls is required")
    url_of = {}
    for lineno, line in enumerate(Path(args.urls).read_text(encoding="utf-8").splitlines(), 1):
        line = line.strip()
        if not line:
            continue
        fields = line.split("\t")
        if len(fields) != 2:
            raise PipelineError(f"{args.urls}: line {lineno}: expected site_id<TAB>url")
        url_of[fields[0]] = fields[1]
    fetched = fetch_many(url_of.values(), timeout=cfg.fetch_timeout, max_workers=cfg.fetch_workers)
    pages = {}
    for site_id, url in url_of.items():
        body = fetched[url]
        if isinstance(body, FetchError):
            logger.warning("skipping %s: %s", site_id, body)
            continue
        pages[site_id] = body
    return pages


def _labels_for(users, labels, attribute):
    missing = [u for u in users if u not in labels]
    if missing:
        raise PipelineError(f"no labels for users: {missing[:5]}")
    if attribute == "gender":
        return [labels[u].gender for u in users]
    return [labels[u].age_band for u in users]


def _parse_masks(text):
    if text == "all":
        return experiment_masks()
    masks = []
    for code in text.split(","):
        code = code.strip()
        masks.append(TagMask() if code in ("title", "t") else TagMask.parse(code))
    return masks


def _print_cells(report):
    for cell in report.cells:
        if report.kind == "tags":
            print(f"mask={cell['mask'] or 'title'}\trmse={cell['rmse']:.4f}\tbest_c={cell['best_c']:g}")
        else:
            print(
                f"scheme={cell['scheme']}\tmethod={cell['method']}\t"
                f"classifier={cell['classifier']}\taccuracy={cell['test_accuracy']:.4f}\t"
                f"best_c={cell['best_c']:g}"
            )


# ---------------------------------------------------------------------------
# Handlers


def cmd_extract(args, cfg):
    mask = TagMask.parse(cfg.tags)
    pages = _load_pages(args, cfg)
    docs, _ = extract_site_documents(pages, mask)
    save_token_docs(args.out, docs)
    print(f"extracted {len(docs)} site(s) with mask '{mask.code or 'title'}' -> {args.out}")
    return 0


def cmd_stats(args, cfg):
    docs = load_token_docs(args.docs)
    stats = build_corpus_stats(docs.values())
    save_corpus_stats(args.out, stats)
    print(f"{stats.n_docs} documents, {len(stats.doc_freq)} distinct terms -> {args.out}")
    return 0


def cmd_sitevec(args, cfg):
    docs = load_token_docs(args.docs)
    stats = load_corpus_stats(args.stats)
    emb = load_word2vec_binary(args.embedding)
    scheme = WeightingScheme.parse(cfg.scheme)
    vectors = compute_site_vectors(
        docs, stats, scheme, emb, l2_normalize=args.l2_normalize or cfg.l2_normalize
    )
    save_vectors(args.out, vectors)
    zero = sum(1 for v in vectors.values() if v.contributing_terms == 0)
    print(f"{len(vectors)} site vector(s) (scheme {scheme.code}, {zero} all-OOV) -> {args.out}")
    return 0


def cmd_aggregate(args, cfg):
    matrix, _ = load_browsing_log(args.log)
    site_vectors = load_vectors(args.site_vectors)
    if not args.no_filters:
        token_counts = None
        if args.docs:
            docs = load_token_docs(args.docs)
            token_counts = {s: d.total_terms for s, d in docs.items()}
        matrix = apply_filters(matrix, token_counts, cfg.filters).matrix
    ids, features, skipped = build_user_vectors(matrix, site_vectors, cfg.aggregate)
    if not ids:
        raise PipelineError("no users with representable sites")
    save_vectors(args.out, dict(zip(ids, features)))
    print(
        f"{len(ids)} user vector(s) via {cfg.aggregate}"
        + (f", {len(skipped)} skipped" if skipped else "")
        + f" -> {args.out}"
    )
    return 0


def _user_dataset(vector_path, log_path, attribute):
    vectors = load_vectors(vector_path)
    _, labels = load_browsing_log(log_path)
    users = sorted(set(vectors) & set(labels))
    if not users:
        raise PipelineError("no overlap between user vectors and labeled users")
    features = np.vstack([vectors[u] for u in users]).astype(np.float64)
    return users, Dataset(features, np.asarray(_labels_for(users, labels, attribute)))


def cmd_train(args, cfg):
    users, data = _user_dataset(args.user_vectors, args.log, args.attribute)
    standardize = args.standardize or cfg.standardize
    if args.c is not None:
        best_c = float(args.c)
    else:
        search = grid_search_cv(
            data,
            cfg.c_grid,
            k=cfg.cv_folds,
            seed=cfg.seed,
            kind=args.classifier,
            max_epochs=cfg.max_epochs,
            tol=cfg.tol,
            standardize=standardize,
        )
        best_c = search.best_c
    model = train_model(
        args.classifier,
        data,
        best_c,
        seed=cfg.seed,
        max_epochs=cfg.max_epochs,
        tol=cfg.tol,
        standardize=standardize,
    )
    save_model(args.out, model)
    metrics = evaluate(model, data)
    print(
        f"trained {args.classifier} on {len(users)} user(s), C={best_c:g}, "
        f"training accuracy {metrics.accuracy:.4f} -> {args.out}"
    )
    return 0


def cmd_predict(args, cfg):
    model = load_model(args.model)
    vectors = load_vectors(args.user_vectors)
    users = sorted(vectors)
    if not users:
        raise PipelineError("empty user-vector store")
    features = np.vstack([vectors[u] for u in users]).astype(np.float64)
    preds = predict_batch(model, features)
    with Path(args.out).open("w", encoding="utf-8") as fh:
        fh.write("user_id\tprediction\n")
        for user, pred in zip(users, preds):
            fh.write(f"{user}\t{pred}\n")
    print(f"predicted {len(users)} user(s) -> {args.out}")
    return 0


def cmd_evaluate(args, cfg):
    model = load_model(args.model)
    users, data = _user_dataset(args.user_vectors, args.log, args.attribute)
    metrics = evaluate(model, data)
    payload = {
        "attribute": args.attribute,
        "n_users": len(users),
        "accuracy": metrics.accuracy,
        "classes": metrics.classes,
        "confusion": metrics.confusion.tolist(),
    }
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    print(f"accuracy {metrics.accuracy:.4f} over {len(users)} user(s)")
    return 0


def _run_demography(args, cfg, schemes, methods):
    matrix, labels = load_browsing_log(args.log)
    pages = read_html_dir(args.html_dir)
    mask = TagMask.parse(cfg.tags)
    docs, _ = extract_site_documents(pages, mask)
    emb = load_word2vec_binary(args.embedding)
    classifiers = [c.strip() for c in args.classifiers.split(",") if c.strip()]
    report = run_demography_experiment(
        matrix,
        labels,
        docs,
        emb,
        schemes,
        methods,
        args.attribute,
        seed=cfg.seed,
        classifiers=classifiers,
        filter_config=cfg.filters,
        c_grid=cfg.c_grid,
        cv_folds=cfg.cv_folds,
        stats_scope=cfg.stats_scope,
        l2_normalize=cfg.l2_normalize,
        standardize=cfg.standardize,
        max_epochs=cfg.max_epochs,
        tol=cfg.tol,
        cache_dir=args.cache_dir,
        emb_fingerprint=embedding_fingerprint(args.embedding),
    )
    report.save(args.out)
    _print_cells(report)
    print(f"report -> {args.out}")
    return 0


def cmd_sweep_schemes(args, cfg):
    if args.schemes == "all":
        schemes = [s.code for s in ALL_SCHEMES]
    else:
        schemes = [s.strip() for s in args.schemes.split(",") if s.strip()]
    return _run_demography(args, cfg, schemes, [cfg.aggregate])


def cmd_sweep_aggregation(args, cfg):
    if args.methods == "all":
        methods = list(METHODS)
    else:
        methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    return _run_demography(args, cfg, [cfg.scheme], methods)


def cmd_sweep_tags(args, cfg):
    tendency = load_tendency(args.tendency)
    pages = read_html_dir(args.html_dir)
    emb = load_word2vec_binary(args.embedding)
    report = run_tag_experiment(
        tendency,
        pages,
        emb,
        _parse_masks(args.masks),
        cfg.scheme,
        seed=cfg.seed,
        c_grid=cfg.c_grid,
        cv_folds=cfg.cv_folds,
        epsilon=cfg.epsilon,
        stats_scope=cfg.stats_scope,
        l2_normalize=cfg.l2_normalize,
        standardize=cfg.standardize,
        max_epochs=cfg.max_epochs,
        tol=cfg.tol,
    )
    report.save(args.out)
    _print_cells(report)
    print(f"report -> {args.out}")
    return 0


def cmd_gen_synthetic(args, cfg):
    summary = generate_corpora(
        args.out_dir,
        SynthConfig(
            n_users=args.users,
            n_sites=args.sites,
            n_tag_sites=args.tag_sites,
            dim=args.dim,
            seed=cfg.seed,
        ),
    )
    for key in ("embedding", "html_dir", "browsing_log", "tag_html_dir", "tendency"):
        print(f"{key}: {summary[key]}")
    print(f"{summary['n_users']} users, {summary['n_sites']} sites, seed {summary['seed']}")
    return 0


_HANDLERS = {
    "extract": cmd_extract,
    "stats": cmd_stats,
    "sitevec": cmd_sitevec,
    "aggregate": cmd_aggregate,
    "train": cmd_train,
    "predict": cmd_predict,
    "evaluate": cmd_evaluate,
    "sweep-schemes": cmd_sweep_schemes,
    "sweep-aggregation": cmd_sweep_aggregation,
    "sweep-tags": cmd_sweep_tags,
    "gen-synthetic": cmd_gen_synthetic,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        cfg = _config_of(args)
        return _HANDLERS[args.command](args, cfg)
    except _USER_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
