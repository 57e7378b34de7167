"""Browsing-log ingestion, the filtering cascade, and experiment harnesses.

File formats (all tab-separated, header row required):

* browsing log: ``user_id  site_id  frequency  gender  age_band`` with
  gender in {m, f}, age_band in {teen, young, mid, elder}, frequency a
  positive integer; duplicate (user, site) rows sum their frequencies.
* tendency table: ``site_id  male_tendency`` with the tendency in [0, 1].

Experiment reports serialize to JSON deterministically (sorted keys), so
identical inputs and seeds give byte-identical reports.
"""

import hashlib
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .aggregation import AggregationError, BrowsingMatrix, aggregate
from .html_extract import extract
from .learn import (
    DEFAULT_C_GRID,
    Dataset,
    LearnError,
    evaluate,
    grid_search_cv,
    train_model,
    train_test_split,
)
from .representation import compose_site_vector, save_vectors
from .weighting import CorpusStats, SiteDocument, WeightingScheme, build_corpus_stats, term_weights

logger = logging.getLogger(__name__)

GENDERS = ("f", "m")
AGE_BANDS = ("elder", "mid", "teen", "young")
ATTRIBUTES = ("gender", "age")

LOG_HEADER = ("user_id", "site_id", "frequency", "gender", "age_band")
TENDENCY_HEADER = ("site_id", "male_tendency")
_LOG_HEADER_LINE = "\t".join(LOG_HEADER)
_TENDENCY_HEADER_LINE = "\t".join(TENDENCY_HEADER)


class PipelineError(Exception):
    pass


@dataclass(frozen=True)
class Labels:
    gender: str
    age_band: str


@dataclass(frozen=True)
class FilterConfig:
    """Thresholds of the ingestion filtering cascade, applied in order:

    1. drop sites whose summed visit frequency is below `min_site_traffic`;
    2. drop (user, site) entries with frequency below `min_user_site_freq`;
    3. drop sites without extractable content or with fewer than
       `min_content_words` tokens;
    4. drop users left with fewer than `min_sites_per_user` sites.
    """

    min_site_traffic: int = 100
    min_user_site_freq: int = 5
    min_content_words: int = 10
    min_sites_per_user: int = 20

    def __post_init__(self):
        for name in ("min_site_traffic", "min_user_site_freq", "min_content_words", "min_sites_per_user"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")


# ---------------------------------------------------------------------------
# Ingestion


def load_browsing_log(path):
    """Parse a browsing-log TSV into (BrowsingMatrix, {user: Labels})."""
    path = Path(path)
    entries = {}
    labels = {}
    sites = set()
    with path.open("r", encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n")
        if header != _LOG_HEADER_LINE:
            raise PipelineError(f"{path}: expected header {_LOG_HEADER_LINE!r}")
        for lineno, line in enumerate(fh, start=2):
            line = line.rstrip("\n")
            if not line:
                continue
            fields = line.split("\t")
            if len(fields) != 5:
                raise PipelineError(f"{path}: line {lineno}: expected 5 fields, got {len(fields)}")
            user, site, freq_text, gender, age_band = fields
            if not user or not site:
                raise PipelineError(f"{path}: line {lineno}: empty user or site id")
            try:
                freq = int(freq_text)
            except ValueError:
                raise PipelineError(f"{path}: line {lineno}: bad frequency {freq_text!r}") from None
            if freq <= 0:
                raise PipelineError(f"{path}: line {lineno}: frequency must be positive")
            if gender not in GENDERS:
                raise PipelineError(f"{path}: line {lineno}: unknown gender label {gender!r}")
            if age_band not in AGE_BANDS:
                raise PipelineError(f"{path}: line {lineno}: unknown age band {age_band!r}")
            known = labels.get(user)
            if known is None:
                labels[user] = Labels(gender=gender, age_band=age_band)
            elif known != Labels(gender=gender, age_band=age_band):
                raise PipelineError(f"{path}: line {lineno}: conflicting labels for user {user!r}")
            row = entries.setdefault(user, {})
            row[site] = row.get(site, 0) + freq
            sites.add(site)
    matrix = BrowsingMatrix(users=sorted(entries), sites=sorted(sites), entries=entries)
    return matrix, labels


def load_tendency(path):
    """Parse a tendency TSV into {site_id: male_tendency in [0, 1]}."""
    path = Path(path)
    scores = {}
    with path.open("r", encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n")
        if header != _TENDENCY_HEADER_LINE:
            raise PipelineError(f"{path}: expected header {_TENDENCY_HEADER_LINE!r}")
        for lineno, line in enumerate(fh, start=2):
            line = line.rstrip("\n")
            if not line:
                continue
            fields = line.split("\t")
            if len(fields) != 2:
                raise PipelineError(f"{path}: line {lineno}: expected 2 fields, got {len(fields)}")
            site, score_text = fields
            try:
                score = float(score_text)
            except ValueError:
                raise PipelineError(f"{path}: line {lineno}: bad tendency {score_text!r}") from None
            if not 0.0 <= score <= 1.0:
                raise PipelineError(f"{path}: line {lineno}: tendency must be in [0, 1]")
            if site in scores:
                raise PipelineError(f"{path}: line {lineno}: duplicate site {site!r}")
            scores[site] = score
    return scores


def read_html_dir(path):
    """Read every *.html file of a directory as {site_id: bytes}.

    The file name without suffix is the site id.
    """
    path = Path(path)
    if not path.is_dir():
        raise PipelineError(f"{path}: not a directory")
    pages = {}
    for entry in sorted(path.glob("*.html")):
        pages[entry.stem] = entry.read_bytes()
    return pages


def extract_site_documents(pages, mask):
    """Extract token streams per site and build term-count documents.

    Returns ({site: SiteDocument}, {site: token_count}). Zero-token sites
    get a document with empty counts.
    """
    docs = {}
    token_counts = {}
    for site_id in sorted(pages):
        extracted = extract(pages[site_id], mask=mask, site_id=site_id)
        docs[site_id] = SiteDocument.from_tokens(site_id, extracted.tokens)
        token_counts[site_id] = extracted.token_count
    return docs, token_counts


def save_token_docs(path, docs):
    """Write site documents as JSONL: site_id, token_count, term_counts."""
    with Path(path).open("w", encoding="utf-8") as fh:
        for site_id in sorted(docs):
            doc = docs[site_id]
            fh.write(
                json.dumps(
                    {
                        "site_id": site_id,
                        "token_count": doc.total_terms,
                        "term_counts": doc.term_counts,
                    },
                    sort_keys=True,
                )
            )
            fh.write("\n")


def save_corpus_stats(path, stats):
    """Write corpus stats as JSON: n_docs plus the doc-frequency table."""
    payload = {"n_docs": stats.n_docs, "doc_freq": stats.doc_freq}
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def load_corpus_stats(path):
    """Read save_corpus_stats output back into CorpusStats."""
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
        n_docs = int(payload["n_docs"])
        doc_freq = {str(t): int(c) for t, c in payload["doc_freq"].items()}
    except (json.JSONDecodeError, KeyError, TypeError, ValueError):
        raise PipelineError(f"{path}: malformed corpus-stats file") from None
    return CorpusStats(n_docs=n_docs, doc_freq=dict(sorted(doc_freq.items())))


def load_token_docs(path):
    """Read save_token_docs output back into {site: SiteDocument}."""
    docs = {}
    with Path(path).open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
                counts = {str(t): int(c) for t, c in record["term_counts"].items()}
                site_id = record["site_id"]
            except (json.JSONDecodeError, KeyError, TypeError, ValueError):
                raise PipelineError(f"{path}: line {lineno}: malformed token-doc record") from None
            if site_id in docs:
                raise PipelineError(f"{path}: line {lineno}: duplicate site {site_id!r}")
            docs[site_id] = SiteDocument(
                site_id=site_id,
                term_counts=dict(sorted(counts.items())),
                max_count=max(counts.values()) if counts else 0,
                total_terms=sum(counts.values()),
            )
    return docs


# ---------------------------------------------------------------------------
# Filtering cascade


@dataclass
class FilterResult:
    matrix: BrowsingMatrix
    users: list
    stage_counts: dict = field(repr=False)


def _entry_counts(entries):
    users = sum(1 for row in entries.values() if row)
    sites = len({site for row in entries.values() for site in row})
    pairs = sum(len(row) for row in entries.values())
    return {"users": users, "sites": sites, "entries": pairs}


def apply_filters(matrix, token_counts, config):
    """Run the four-stage filtering cascade over a browsing matrix.

    `token_counts` maps site to extracted token count; sites missing from
    it count as uncrawlable at stage 3. Passing None skips stage 3 (no
    content information available). Raises PipelineError when no user
    survives, embedding the per-stage counts.
    """
    entries = {user: dict(row) for user, row in matrix.entries.items()}
    stage_counts = {"input": _entry_counts(entries)}

    traffic = {}
    for row in entries.values():
        for site, freq in row.items():
            traffic[site] = traffic.get(site, 0) + freq
    alive = {site for site, total in traffic.items() if total >= config.min_site_traffic}
    entries = {
        user: {site: freq for site, freq in row.items() if site in alive}
        for user, row in entries.items()
    }
    stage_counts["site_traffic"] = _entry_counts(entries)

    entries = {
        user: {site: freq for site, freq in row.items() if freq >= config.min_user_site_freq}
        for user, row in entries.items()
    }
    stage_counts["user_site_frequency"] = _entry_counts(entries)

    if token_counts is None:
        logger.warning("no site content information; skipping the content-words filter")
    else:
        readable = {
            site
            for site in alive
            if token_counts.get(site, 0) >= max(1, config.min_content_words)
        }
        entries = {
            user: {site: freq for site, freq in row.items() if site in readable}
            for user, row in entries.items()
        }
    stage_counts["site_content"] = _entry_counts(entries)

    entries = {
        user: row for user, row in entries.items() if len(row) >= config.min_sites_per_user
    }
    stage_counts["sites_per_user"] = _entry_counts(entries)

    users = sorted(entries)
    if not users:
        raise PipelineError(f"all users filtered out; stage counts: {stage_counts}")
    sites = sorted({site for row in entries.values() for site in row})
    filtered = BrowsingMatrix(users=users, sites=sites, entries=entries)
    return FilterResult(matrix=filtered, users=users, stage_counts=stage_counts)


# ---------------------------------------------------------------------------
# Site and user vectors


def compute_site_vectors(docs, stats, scheme, emb, corpus_sites=None, l2_normalize=False):
    """Compose a vector per site document against frozen corpus stats.

    Sites outside `corpus_sites` (those not backing the stats) use the
    prediction-time policy for unseen terms.
    """
    vectors = {}
    for site_id in sorted(docs):
        in_corpus = corpus_sites is None or site_id in corpus_sites
        weights = term_weights(
            docs[site_id], stats, scheme, unseen="error" if in_corpus else "skip"
        )
        vectors[site_id] = compose_site_vector(docs[site_id], weights, emb, l2_normalize=l2_normalize)
    return vectors


def build_user_vectors(matrix, site_vectors, method):
    """Aggregate per-user vectors; returns (user_ids, features, skipped)."""
    user_ids = []
    rows = []
    skipped = []
    for user in matrix.users:
        try:
            uv = aggregate(method, matrix.row(user), site_vectors, user_id=user)
        except AggregationError:
            skipped.append(user)
            continue
        user_ids.append(user)
        rows.append(uv.vec)
    features = np.vstack(rows) if rows else np.zeros((0, 0))
    return user_ids, features, skipped


def site_vector_cache_key(scheme, mask, emb_fingerprint, stats_scope, split_seed, filters):
    """Cache key for a site-vector store file.

    Includes the stats scope, split seed and filter thresholds on top of
    (scheme, mask, embedding) because train-scoped stats depend on them.
    """
    parts = [
        scheme.code if isinstance(scheme, WeightingScheme) else str(scheme),
        getattr(mask, "code", str(mask)),
        emb_fingerprint,
        stats_scope,
        str(split_seed if stats_scope == "train" else ""),
        repr(
            (
                filters.min_site_traffic,
                filters.min_user_site_freq,
                filters.min_content_words,
                filters.min_sites_per_user,
            )
        ),
    ]
    return hashlib.sha256("|".join(parts).encode("utf-8")).hexdigest()[:24]


def embedding_fingerprint(path):
    digest = hashlib.sha256(Path(path).read_bytes()).hexdigest()
    return digest[:16]


# ---------------------------------------------------------------------------
# Experiment reports


@dataclass
class ExperimentReport:
    """Per-cell metrics plus the configuration that produced them."""

    kind: str
    config: dict
    dataset_summary: dict
    cells: list
    warnings: list = field(default_factory=list)

    def to_dict(self):
        return {
            "kind": self.kind,
            "config": self.config,
            "dataset_summary": self.dataset_summary,
            "cells": self.cells,
            "warnings": self.warnings,
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def save(self, path):
        Path(path).write_text(self.to_json(), encoding="utf-8")


def _jsonable(value):
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_jsonable(v) for v in value.tolist()]
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    return value


def _label_distribution(labels, users):
    dist = {"gender": {}, "age": {}}
    for user in users:
        lab = labels[user]
        dist["gender"][lab.gender] = dist["gender"].get(lab.gender, 0) + 1
        dist["age"][lab.age_band] = dist["age"].get(lab.age_band, 0) + 1
    return dist


def _attribute_labels(labels, users, attribute):
    if attribute == "gender":
        return [labels[u].gender for u in users]
    if attribute == "age":
        return [labels[u].age_band for u in users]
    raise PipelineError(f"unknown attribute {attribute!r}; expected one of {ATTRIBUTES}")


# ---------------------------------------------------------------------------
# Demography experiment (scheme / aggregation / classifier sweeps)


def run_demography_experiment(
    matrix,
    labels,
    docs,
    emb,
    schemes,
    methods,
    attribute,
    seed=0,
    classifiers=("svm",),
    filter_config=None,
    c_grid=DEFAULT_C_GRID,
    cv_folds=5,
    stats_scope="train",
    l2_normalize=False,
    standardize=False,
    max_epochs=1000,
    tol=1e-3,
    cache_dir=None,
    emb_fingerprint="",
):
    """Grid of (scheme x aggregation x classifier) accuracy cells.

    For each scheme: corpus stats are frozen (over sites seen by training
    users with `stats_scope` "train", over all surviving sites with
    "all"), site vectors composed once, then per aggregation method user
    vectors are built, C picked by cross-validation on the training side
    of a stratified 3:2 user split, and accuracy reported on the test side.
    """
    schemes = [WeightingScheme.parse(s) if isinstance(s, str) else s for s in schemes]
    if not schemes:
        raise PipelineError("at least one weighting scheme is required")
    if not methods:
        raise PipelineError("at least one aggregation method is required")
    if not classifiers:
        raise PipelineError("at least one classifier is required")
    if attribute not in ATTRIBUTES:
        raise PipelineError(f"unknown attribute {attribute!r}; expected one of {ATTRIBUTES}")
    if stats_scope not in ("train", "all"):
        raise PipelineError("stats_scope must be 'train' or 'all'")
    filter_config = filter_config or FilterConfig()

    token_counts = {site: doc.total_terms for site, doc in docs.items()}
    filtered = apply_filters(matrix, token_counts, filter_config)
    matrix = filtered.matrix
    missing = [u for u in matrix.users if u not in labels]
    if missing:
        raise PipelineError(f"users without labels: {missing[:5]}")

    user_labels = _attribute_labels(labels, matrix.users, attribute)
    train_pos, test_pos = train_test_split(user_labels, train_fraction=0.6, seed=seed)
    train_users = [matrix.users[i] for i in train_pos]
    test_users = [matrix.users[i] for i in test_pos]

    if stats_scope == "train":
        corpus_sites = sorted({site for u in train_users for site in matrix.row(u)})
    else:
        corpus_sites = list(matrix.sites)

    warnings = []
    cells = []
    for scheme in schemes:
        stats = build_corpus_stats(docs[s] for s in corpus_sites)
        site_vectors = compute_site_vectors(
            {s: docs[s] for s in matrix.sites},
            stats,
            scheme,
            emb,
            corpus_sites=set(corpus_sites),
            l2_normalize=l2_normalize,
        )
        if cache_dir is not None:
            key = site_vector_cache_key(
                scheme, "", emb_fingerprint, stats_scope, seed, filter_config
            )
            cache_path = Path(cache_dir) / f"sitevec-{key}.vec"
            if not cache_path.exists():
                tmp = cache_path.with_suffix(".tmp")
                save_vectors(tmp, site_vectors)
                tmp.replace(cache_path)  # atomic publish
        for method in methods:
            ids, features, skipped = build_user_vectors(matrix, site_vectors, method)
            if skipped:
                warnings.append(
                    f"scheme {scheme.code} method {method}: "
                    f"{len(skipped)} user(s) without representable sites"
                )
            keep = set(ids)
            row_of = {u: i for i, u in enumerate(ids)}
            tr_users = [u for u in train_users if u in keep]
            te_users = [u for u in test_users if u in keep]
            if not tr_users or not te_users:
                raise PipelineError(
                    f"scheme {scheme.code} method {method}: empty train or test side"
                )
            train_data = Dataset(
                features[[row_of[u] for u in tr_users]],
                np.asarray(_attribute_labels(labels, tr_users, attribute)),
            )
            test_data = Dataset(
                features[[row_of[u] for u in te_users]],
                np.asarray(_attribute_labels(labels, te_users, attribute)),
            )
            for classifier in classifiers:
                try:
                    search = grid_search_cv(
                        train_data,
                        c_grid,
                        k=cv_folds,
                        seed=seed,
                        kind=classifier,
                        max_epochs=max_epochs,
                        tol=tol,
                        standardize=standardize,
                    )
                    model = train_model(
                        classifier,
                        train_data,
                        search.best_c,
                        seed=seed,
                        max_epochs=max_epochs,
                        tol=tol,
                        standardize=standardize,
                    )
                    metrics = evaluate(model, test_data)
                except (LearnError, PipelineError) as exc:
                    raise PipelineError(
                        f"cell scheme={scheme.code} method={method} classifier={classifier}: {exc}"
                    ) from exc
                cells.append(
                    _jsonable(
                        {
                            "scheme": scheme.code,
                            "method": method,
                            "classifier": classifier,
                            "attribute": attribute,
                            "best_c": search.best_c,
                            "cv_scores": {f"{c:g}": v for c, v in sorted(search.scores.items())},
                            "test_accuracy": metrics.accuracy,
                            "confusion": metrics.confusion,
                            "classes": metrics.classes,
                            "n_train": len(tr_users),
                            "n_test": len(te_users),
                            "n_skipped_users": len(skipped),
                        }
                    )
                )

    summary = _jsonable(
        {
            "stage_counts": filtered.stage_counts,
            "n_users": len(matrix.users),
            "n_sites": len(matrix.sites),
            "n_train_users": len(train_users),
            "n_test_users": len(test_users),
            "n_corpus_sites": len(corpus_sites),
            "label_distribution": _label_distribution(labels, matrix.users),
        }
    )
    config = _jsonable(
        {
            "schemes": [s.code for s in schemes],
            "methods": list(methods),
            "classifiers": list(classifiers),
            "attribute": attribute,
            "seed": seed,
            "c_grid": list(c_grid),
            "cv_folds": cv_folds,
            "stats_scope": stats_scope,
            "l2_normalize": l2_normalize,
            "standardize": standardize,
            "max_epochs": max_epochs,
            "tol": tol,
            "filters": {
                "min_site_traffic": filter_config.min_site_traffic,
                "min_user_site_freq": filter_config.min_user_site_freq,
                "min_content_words": filter_config.min_content_words,
                "min_sites_per_user": filter_config.min_sites_per_user,
            },
            "embedding_fingerprint": emb_fingerprint,
        }
    )
    return ExperimentReport(
        kind="demography",
        config=config,
        dataset_summary=summary,
        cells=cells,
        warnings=warnings,
    )


# ---------------------------------------------------------------------------
# Tag-combination experiment


def run_tag_experiment(
    tendency,
    pages,
    emb,
    masks,
    scheme,
    seed=0,
    c_grid=DEFAULT_C_GRID,
    cv_folds=5,
    epsilon=0.1,
    stats_scope="train",
    l2_normalize=False,
    standardize=False,
    max_epochs=1000,
    tol=1e-3,
):
    """Per-mask epsilon-SVR RMSE on site demography-tendency scores.

    Each mask re-extracts the corpus, composes site vectors under
    `scheme`, fits an SVR with cross-validated C on the 3:2 training
    side, and reports held-out RMSE. Cells are sorted by ascending RMSE.
    """
    scheme = WeightingScheme.parse(scheme) if isinstance(scheme, str) else scheme
    if not masks:
        raise PipelineError("at least one tag mask is required")
    sites = sorted(set(tendency) & set(pages))
    missing = sorted(set(tendency) - set(pages))
    warnings = []
    if missing:
        warnings.append(f"{len(missing)} tendency site(s) without stored HTML, e.g. {missing[:3]}")
    if len(sites) < 2:
        raise PipelineError("tendency dataset needs at least two sites with stored HTML")
    scores = np.asarray([tendency[s] for s in sites], dtype=np.float64)
    if np.any(scores < 0.0) or np.any(scores > 1.0):
        raise PipelineError("tendency scores must lie in [0, 1]")

    train_pos, test_pos = train_test_split(scores, train_fraction=0.6, seed=seed, stratify=False)

    cells = []
    for mask in masks:
        docs, _ = extract_site_documents({s: pages[s] for s in sites}, mask)
        usable = [s for s in sites if docs[s].total_terms > 0]
        n_zero = len(sites) - len(usable)
        if n_zero > len(sites) / 2:
            warnings.append(
                f"mask {mask.code!r}: {n_zero}/{len(sites)} sites extract zero tokens"
            )
        usable_set = set(usable)
        tr_sites = [sites[i] for i in train_pos if sites[i] in usable_set]
        te_sites = [sites[i] for i in test_pos if sites[i] in usable_set]
        if len(tr_sites) < cv_folds or not te_sites:
            raise PipelineError(
                f"mask {mask.code!r}: not enough usable sites for {cv_folds}-fold CV"
            )
        corpus_sites = tr_sites if stats_scope == "train" else usable
        stats = build_corpus_stats(docs[s] for s in corpus_sites)
        site_vectors = compute_site_vectors(
            {s: docs[s] for s in usable},
            stats,
            scheme,
            emb,
            corpus_sites=set(corpus_sites),
            l2_normalize=l2_normalize,
        )
        features = np.vstack([site_vectors[s].vec for s in tr_sites + te_sites]).astype(np.float64)
        targets = np.asarray([tendency[s] for s in tr_sites + te_sites])
        n_train = len(tr_sites)
        train_data = Dataset(features[:n_train], targets[:n_train])
        test_data = Dataset(features[n_train:], targets[n_train:])
        search = grid_search_cv(
            train_data,
            c_grid,
            k=cv_folds,
            seed=seed,
            kind="svr",
            epsilon=epsilon,
            max_epochs=max_epochs,
            tol=tol,
            standardize=standardize,
        )
        model = train_model(
            "svr",
            train_data,
            search.best_c,
            seed=seed,
            epsilon=epsilon,
            max_epochs=max_epochs,
            tol=tol,
            standardize=standardize,
        )
        metrics = evaluate(model, test_data)
        cells.append(
            _jsonable(
                {
                    "mask": mask.code,
                    "rmse": metrics.rmse,
                    "best_c": search.best_c,
                    "cv_scores": {f"{c:g}": v for c, v in sorted(search.scores.items())},
                    "n_train_sites": len(tr_sites),
                    "n_test_sites": len(te_sites),
                    "n_zero_token_sites": n_zero,
                }
            )
        )

    cells.sort(key=lambda cell: (cell["rmse"], cell["mask"]))
    config = _jsonable(
        {
            "scheme": scheme.code,
            "masks": [m.code for m in masks],
            "seed": seed,
            "c_grid": list(c_grid),
            "cv_folds": cv_folds,
            "epsilon": epsilon,
            "stats_scope": stats_scope,
            "l2_normalize": l2_normalize,
            "standardize": standardize,
            "max_epochs": max_epochs,
            "tol": tol,
        }
    )
    summary = _jsonable(
        {
            "n_sites": len(sites),
            "n_train_sites": len(train_pos),
            "n_test_sites": len(test_pos),
            "tendency_mean": float(scores.mean()),
            "tendency_std": float(scores.std()),
        }
    )
    return ExperimentReport(
        kind="tags", config=config, dataset_summary=summary, cells=cells, warnings=warnings
    )
