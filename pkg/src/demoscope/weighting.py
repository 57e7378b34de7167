"""Corpus statistics and the twelve tf-idf weighting variants.

Term-frequency variants: default (d) raw count, binary (b), logarithm (l)
1+ln f, augmented (a) 0.5 + 0.5 f/max. Inverse-document-frequency
variants: unary (u) 1, default (d) ln(N/n_t), smoothed (s) 1+ln(N/(1+n_t)).
A scheme is named by its two-letter code, tf letter first ("ad" etc.).
All logarithms are natural.
"""

import logging
import math
from collections import Counter
from dataclasses import dataclass, field

logger = logging.getLogger(__name__)

TF_VARIANTS = "dbla"
IDF_VARIANTS = "uds"


class WeightingError(ValueError):
    pass


@dataclass(frozen=True)
class WeightingScheme:
    tf_variant: str
    idf_variant: str

    def __post_init__(self):
        if self.tf_variant not in TF_VARIANTS:
            raise WeightingError(f"unknown tf variant {self.tf_variant!r}")
        if self.idf_variant not in IDF_VARIANTS:
            raise WeightingError(f"unknown idf variant {self.idf_variant!r}")

    @classmethod
    def parse(cls, code):
        if len(code) != 2:
            raise WeightingError(f"scheme code must be two letters, got {code!r}")
        return cls(code[0], code[1])

    @property
    def code(self):
        return self.tf_variant + self.idf_variant

    def __str__(self):
        return self.code


ALL_SCHEMES = tuple(WeightingScheme(t, i) for t in TF_VARIANTS for i in IDF_VARIANTS)


@dataclass
class SiteDocument:
    """Raw term counts of one site's extracted text."""

    site_id: str
    term_counts: dict
    max_count: int
    total_terms: int

    def __post_init__(self):
        if any(c < 1 for c in self.term_counts.values()):
            raise ValueError("term counts must be >= 1")
        if self.max_count != (max(self.term_counts.values()) if self.term_counts else 0):
            raise ValueError("max_count inconsistent with term_counts")
        if self.total_terms != sum(self.term_counts.values()):
            raise ValueError("total_terms inconsistent with term_counts")

    @classmethod
    def from_tokens(cls, site_id, tokens):
        counts = dict(sorted(Counter(tokens).items()))
        return cls(
            site_id=site_id,
            term_counts=counts,
            max_count=max(counts.values()) if counts else 0,
            total_terms=sum(counts.values()),
        )


@dataclass
class CorpusStats:
    """Document count and per-term document frequencies of a site corpus."""

    n_docs: int
    doc_freq: dict = field(repr=False)


def build_corpus_stats(docs):
    """Count documents and per-term document frequencies over `docs`."""
    doc_freq = Counter()
    seen = set()
    n_docs = 0
    for doc in docs:
        if doc.site_id in seen:
            raise ValueError(f"duplicate site_id {doc.site_id!r}")
        seen.add(doc.site_id)
        n_docs += 1
        doc_freq.update(doc.term_counts.keys())
    return CorpusStats(n_docs=n_docs, doc_freq=dict(sorted(doc_freq.items())))


def tf_weight(variant, f_td, max_in_doc):
    """Term-frequency factor of `variant` for a raw count `f_td`.

    `max_in_doc` is the largest raw count in the document (used by the
    augmented variant only).
    """
    if f_td < 0:
        raise ValueError("f_td must be >= 0")
    if variant == "d":
        return float(f_td)
    if variant == "b":
        return 1.0 if f_td > 0 else 0.0
    if variant == "l":
        # 1 + ln f only makes sense for f >= 1; an absent term weighs nothing.
        return 1.0 + math.log(f_td) if f_td >= 1 else 0.0
    if variant == "a":
        if max_in_doc < f_td or max_in_doc < 1:
            raise ValueError("max_in_doc must be >= max(f_td, 1)")
        return 0.5 + 0.5 * f_td / max_in_doc
    raise WeightingError(f"unknown tf variant {variant!r}")


def idf_weight(variant, n_docs, doc_freq):
    """Inverse-document-frequency factor of `variant` for n_t = `doc_freq`."""
    if variant == "u":
        return 1.0
    if doc_freq < 0:
        raise ValueError("doc_freq must be >= 0")
    if n_docs < 1:
        raise ValueError("n_docs must be >= 1 for idf variants d and s")
    if variant == "d":
        if doc_freq == 0:
            raise WeightingError("default idf undefined for a term unseen in the corpus")
        return math.log(n_docs / doc_freq)
    if variant == "s":
        return 1.0 + math.log(n_docs / (1.0 + doc_freq))
    raise WeightingError(f"unknown idf variant {variant!r}")


def term_weights(doc, stats, scheme, unseen="error"):
    """Per-term tf-idf weights of `doc` against frozen corpus `stats`.

    `unseen` controls terms absent from `stats` under the default idf:
    "error" raises (the training-corpus contract), "skip" drops them with
    a debug log (the prediction-time policy). The unary and smoothed idf
    variants handle unseen terms by construction.
    """
    if unseen not in ("error", "skip"):
        raise ValueError("unseen must be 'error' or 'skip'")
    weights = {}
    for term, count in doc.term_counts.items():
        n_t = stats.doc_freq.get(term, 0)
        if n_t == 0 and scheme.idf_variant == "d":
            if unseen == "error":
                raise WeightingError(
                    f"term {term!r} of {doc.site_id!r} is unseen in the corpus"
                )
            logger.debug("skipping unseen term %r of site %r", term, doc.site_id)
            continue
        weights[term] = tf_weight(scheme.tf_variant, count, doc.max_count) * idf_weight(
            scheme.idf_variant, stats.n_docs, n_t
        )
    return weights
