"""Synthetic corpora with planted linear structure, runnable fully offline.

Two corpora share one embedding file whose first three axes are reserved:
axis 0 separates the gender word pools, axis 1 spreads four age-band word
pools, axis 2 encodes site demography-tendency levels. "Filler" words
appear in every demography page with heavy counts and carry random
components on all axes, so schemes without a document-frequency factor
(unary idf) drown in them while the default idf cancels them exactly.
"Vnoise" words sit outside any extracted tag and only enter through the
visible-text mask.

The generated labels are causal (label -> site affinity -> page words),
not derived through the library's own pipeline, so experiments on this
data are an honest recovery test.
"""

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .embeddings import EmbeddingMatrix, write_word2vec_binary
from .pipeline import AGE_BANDS, _LOG_HEADER_LINE, _TENDENCY_HEADER_LINE

logger = logging.getLogger(__name__)

_AGE_LEVELS = (-3.0, -1.0, 1.0, 3.0)


@dataclass(frozen=True)
class SynthConfig:
    n_users: int = 500
    n_sites: int = 300
    n_tag_sites: int = 120
    dim: int = 32
    seed: int = 0
    gender_affinity: float = 4.0  # odds of picking an own-gender site
    age_affinity: float = 3.0
    n_chaff_users: int = 5  # visit too few sites; dropped by the cascade
    n_cold_sites: int = 4  # total traffic below the site threshold
    n_thin_sites: int = 3  # fewer than ten words of content

    def __post_init__(self):
        if self.dim < 8:
            raise ValueError("dim must be >= 8 (three planted axes plus noise)")
        if self.n_users < 40 or self.n_sites < 40 or self.n_tag_sites < 20:
            raise ValueError("corpus too small for the planted structure")
        if self.n_chaff_users + 10 > self.n_users:
            raise ValueError("too many chaff users")
        if self.n_cold_sites + self.n_thin_sites + 20 > self.n_sites:
            raise ValueError("too many chaff sites")


def _build_embedding(cfg, rng):
    words = {}

    def off_axis_noise(scale):
        v = rng.normal(0.0, scale, size=cfg.dim)
        v[:3] = 0.0
        return v

    pools = {"male": [], "fem": [], "age": [[] for _ in _AGE_LEVELS], "tend": [],
             "topic": [], "filler": [], "vnoise": []}
    for i in range(6):
        v = off_axis_noise(0.15)
        v[0] = 2.0
        words[f"maleword{i}"] = v
        pools["male"].append(f"maleword{i}")
        v = off_axis_noise(0.15)
        v[0] = -2.0
        words[f"femword{i}"] = v
        pools["fem"].append(f"femword{i}")
    for band, level in enumerate(_AGE_LEVELS):
        for i in range(4):
            v = off_axis_noise(0.15)
            v[1] = 1.2 * level
            words[f"age{band}word{i}"] = v
            pools["age"][band].append(f"age{band}word{i}")
    for lv in range(10):
        v = off_axis_noise(0.1)
        v[2] = (lv / 4.5 - 1.0) * 2.0
        words[f"tendword{lv}"] = v
        pools["tend"].append(f"tendword{lv}")
    for i in range(150):
        words[f"topic{i:03d}"] = off_axis_noise(1.0)
        pools["topic"].append(f"topic{i:03d}")
    # more filler directions than dimensions: no noise-free separator exists
    for i in range(cfg.dim + 16):
        v = rng.normal(0.0, 0.6, size=cfg.dim)
        v[:3] = rng.uniform(-0.8, 0.8, size=3)  # fillers pollute the planted axes
        words[f"filler{i:02d}"] = v
        pools["filler"].append(f"filler{i:02d}")
    for i in range(30):
        v = rng.normal(0.0, 1.2, size=cfg.dim)
        v[:2] = 0.0
        v[2] = rng.uniform(-0.35, 0.35)  # visible-only noise leaks onto the tendency axis
        words[f"vnoise{i:02d}"] = v
        pools["vnoise"].append(f"vnoise{i:02d}")

    vocab = {w: row for row, w in enumerate(sorted(words))}
    vectors = np.vstack([words[w] for w in sorted(words)]).astype(np.float32)
    return EmbeddingMatrix(dim=cfg.dim, vocab=vocab, vectors=vectors), pools


def _page(title_words, h_words=(), p_words=(), a_words=(), img_words=(), body_words=()):
    def joined(ws):
        return " ".join(str(w) for w in ws)

    parts = [f"<html><head><title>{joined(title_words)}</title></head><body>"]
    if body_words:
        parts.append(joined(body_words))  # bare text: reachable only via visible mode
    if h_words:
        parts.append(f"<h2>{joined(h_words)}</h2>")
    if p_words:
        parts.append(f"<p>{joined(p_words)}</p>")
    if a_words:
        parts.append(f'<a href="#">{joined(a_words)}</a>')
    if img_words:
        parts.append(f'<img alt="{joined(img_words)}">')
    parts.append("</body></html>")
    return "\n".join(parts).encode("utf-8")


def _repeat_words(rng, pool, n_words, low, high):
    out = []
    picks = rng.choice(len(pool), size=min(n_words, len(pool)), replace=False)
    for p in picks:
        out.extend([pool[int(p)]] * int(rng.integers(low, high)))
    return out


def _demography_pages(cfg, rng, pools, site_ids, site_gender, site_age):
    pages = {}
    thin_cutoff = cfg.n_sites - cfg.n_thin_sites - cfg.n_cold_sites
    for j, site in enumerate(site_ids):
        topics = pools["topic"]
        if thin_cutoff <= j < thin_cutoff + cfg.n_thin_sites:
            # under ten words of content: removed by the content filter
            pages[site] = _page([site, "stub"], p_words=_repeat_words(rng, topics, 2, 1, 3))
            continue
        gender_pool = pools["male"] if site_gender[j] == "m" else pools["fem"]
        p_words = _repeat_words(rng, gender_pool, 3, 3, 9)
        p_words += _repeat_words(rng, pools["age"][site_age[j]], 2, 3, 9)
        p_words += _repeat_words(rng, topics, 8, 1, 5)
        for filler in pools["filler"]:
            # heavy-tailed counts: raw-tf schemes drown in these, idf cancels them
            p_words.extend([filler] * (20 + int(min(rng.lognormal(3.2, 1.6), 2000.0))))
        pages[site] = _page(
            [site, str(topics[int(rng.integers(len(topics)))])],
            h_words=_repeat_words(rng, topics, 2, 1, 3),
            p_words=p_words,
            a_words=_repeat_words(rng, topics, 2, 1, 3),
            img_words=[topics[int(rng.integers(len(topics)))]],
        )
    return pages


def _tendency_pages(cfg, rng, pools, tag_ids):
    pages = {}
    tendency = {}
    for site in tag_ids:
        score = float(rng.uniform(0.05, 0.95))
        tendency[site] = round(score, 4)
        level = int(round(tendency[site] * 9))
        p_words = [pools["tend"][level]] * int(rng.integers(7, 13))
        p_words += _repeat_words(rng, pools["topic"], 3, 1, 4)
        pages[site] = _page(
            [site] + _repeat_words(rng, pools["topic"], 2, 1, 2),
            h_words=_repeat_words(rng, pools["topic"], 2, 1, 3),
            p_words=p_words,
            a_words=_repeat_words(rng, pools["topic"], 2, 1, 3),
            img_words=[pools["topic"][int(rng.integers(len(pools["topic"])))]],
            body_words=_repeat_words(rng, pools["vnoise"], 6, 3, 9),
        )
    return pages, tendency


def _visits(cfg, rng, site_ids, site_gender, site_age, user_gender, user_age):
    """Sample per-user visited sites with gender/age affinity, plus chaff."""
    pool_size = cfg.n_sites - cfg.n_cold_sites  # cold sites live off the main pool
    rows = {}
    n_regular = cfg.n_users - cfg.n_chaff_users
    for i in range(cfg.n_users):
        user = f"user{i:03d}"
        weights = np.ones(pool_size)
        for j in range(pool_size):
            if site_gender[j] == user_gender[i]:
                weights[j] *= cfg.gender_affinity
            if site_age[j] == user_age[i]:
                weights[j] *= cfg.age_affinity
        weights /= weights.sum()
        n_visits = int(rng.integers(28, 37)) if i < n_regular else 10
        picks = rng.choice(pool_size, size=n_visits, replace=False, p=weights)
        row = {}
        for p in picks:
            freq = 5 + int(rng.lognormal(1.2, 1.1))
            if rng.random() < 0.02:  # a sprinkle of casual visits under the threshold
                freq = int(rng.integers(1, 5))
            row[site_ids[int(p)]] = freq
        rows[user] = row
    for ci in range(cfg.n_cold_sites):
        site = site_ids[pool_size + ci]
        for visitor in (2 * ci, 2 * ci + 1):
            rows[f"user{visitor:03d}"][site] = 10
    return rows


def generate_corpora(out_dir, config=None):
    """Write embedding.bin, html/, browsing.tsv, tag_html/ and tendency.tsv.

    Returns a summary dict of what was written. Fully deterministic in
    `config.seed`.
    """
    cfg = config or SynthConfig()
    out_dir = Path(out_dir)
    rng = np.random.default_rng(cfg.seed)

    emb, pools = _build_embedding(cfg, rng)

    site_ids = [f"site{j:03d}" for j in range(cfg.n_sites)]
    tag_ids = [f"tag{j:03d}" for j in range(cfg.n_tag_sites)]

    half = cfg.n_sites // 2
    site_gender = ["m"] * half + ["f"] * (cfg.n_sites - half)
    site_age = [j % len(AGE_BANDS) for j in range(cfg.n_sites)]
    rng.shuffle(site_gender)
    site_age = [int(v) for v in rng.permutation(site_age)]

    uhalf = cfg.n_users // 2
    user_gender = ["m"] * uhalf + ["f"] * (cfg.n_users - uhalf)
    user_age_idx = [i % len(AGE_BANDS) for i in range(cfg.n_users)]
    rng.shuffle(user_gender)
    user_age_idx = [int(v) for v in rng.permutation(user_age_idx)]
    user_age = [AGE_BANDS[i] for i in user_age_idx]

    pages = _demography_pages(cfg, rng, pools, site_ids, site_gender, site_age)
    tag_pages, tendency = _tendency_pages(cfg, rng, pools, tag_ids)
    rows = _visits(cfg, rng, site_ids, site_gender,
                   [AGE_BANDS[a] for a in site_age], user_gender, user_age)

    out_dir.mkdir(parents=True, exist_ok=True)
    html_dir = out_dir / "html"
    tag_dir = out_dir / "tag_html"
    html_dir.mkdir(exist_ok=True)
    tag_dir.mkdir(exist_ok=True)
    for site, blob in pages.items():
        (html_dir / f"{site}.html").write_bytes(blob)
    for site, blob in tag_pages.items():
        (tag_dir / f"{site}.html").write_bytes(blob)

    emb_path = out_dir / "embedding.bin"
    write_word2vec_binary(emb_path, emb)

    log_path = out_dir / "browsing.tsv"
    with log_path.open("w", encoding="utf-8") as fh:
        fh.write(_LOG_HEADER_LINE + "\n")
        for i in range(cfg.n_users):
            user = f"user{i:03d}"
            for site in sorted(rows[user]):
                fh.write(
                    f"{user}\t{site}\t{rows[user][site]}\t{user_gender[i]}\t{user_age[i]}\n"
                )

    tendency_path = out_dir / "tendency.tsv"
    with tendency_path.open("w", encoding="utf-8") as fh:
        fh.write(_TENDENCY_HEADER_LINE + "\n")
        for site in tag_ids:
            fh.write(f"{site}\t{tendency[site]}\n")

    summary = {
        "out_dir": str(out_dir),
        "embedding": str(emb_path),
        "html_dir": str(html_dir),
        "tag_html_dir": str(tag_dir),
        "browsing_log": str(log_path),
        "tendency": str(tendency_path),
        "n_users": cfg.n_users,
        "n_sites": cfg.n_sites,
        "n_tag_sites": cfg.n_tag_sites,
        "dim": cfg.dim,
        "vocab_size": len(emb),
        "seed": cfg.seed,
    }
    logger.info("synthetic corpora written to %s", out_dir)
    return summary
