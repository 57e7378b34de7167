"""Site vectors: tf-idf weighted sums of word embeddings, plus their store.

Store layout: 4-byte magic ``SVEC``, u16 LE version, then per record a u32
LE byte length, the id's UTF-8 bytes, a u32 LE dimension, and that many
little-endian float32 values. Records are written sorted by id.
"""

import struct
from dataclasses import dataclass, field

import numpy as np

STORE_MAGIC = b"SVEC"
STORE_VERSION = 1


@dataclass
class SiteVector:
    """Dense representation of one site; zero vector when nothing matched."""

    site_id: str
    vec: np.ndarray = field(repr=False)
    contributing_terms: int = 0

    def __post_init__(self):
        if self.contributing_terms < 0:
            raise ValueError("contributing_terms must be >= 0")
        if self.contributing_terms == 0 and np.any(self.vec):
            raise ValueError("a vector with no contributing terms must be zero")


def compose_site_vector(doc, weights, emb, l2_normalize=False):
    """Weighted sum of embeddings over the unique weighted terms of `doc`.

    Each unique term contributes once with its weight (term frequency is
    already inside the weight); out-of-vocabulary terms are skipped.
    Accumulation runs in sorted-term order, in float64, and the result is
    stored as float32 for reproducible binary output.
    """
    acc = np.zeros(emb.dim, dtype=np.float64)
    contributing = 0
    for term in sorted(weights):
        row = emb.vocab.get(term)
        if row is None:
            continue
        acc += weights[term] * emb.vectors[row].astype(np.float64)
        contributing += 1
    if l2_normalize and contributing:
        norm = float(np.linalg.norm(acc))
        if norm > 0.0:
            acc /= norm
    return SiteVector(
        site_id=doc.site_id,
        vec=acc.astype(np.float32),
        contributing_terms=contributing,
    )


def _vector_items(vectors):
    if hasattr(vectors, "items"):
        pairs = vectors.items()
    else:
        pairs = ((sv.site_id, sv) for sv in vectors)
    out = {}
    for key, value in pairs:
        vec = value.vec if isinstance(value, SiteVector) else value
        out[key] = np.ascontiguousarray(np.asarray(vec), dtype="<f4")
    return out


def save_vectors(path, vectors):
    """Write id->vector records (dict of arrays or SiteVector iterable)."""
    items = _vector_items(vectors)
    with open(path, "wb") as fh:
        fh.write(STORE_MAGIC)
        fh.write(struct.pack("<H", STORE_VERSION))
        for key in sorted(items):
            raw = key.encode("utf-8")
            vec = items[key]
            fh.write(struct.pack("<I", len(raw)))
            fh.write(raw)
            fh.write(struct.pack("<I", vec.shape[0]))
            fh.write(vec.tobytes())


def load_vectors(path):
    """Read a vector store back into {id: float32 array}, in file order."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:4] != STORE_MAGIC:
        raise ValueError(f"{path}: not a vector store (bad magic)")
    (version,) = struct.unpack_from("<H", blob, 4)
    if version != STORE_VERSION:
        raise ValueError(f"{path}: unsupported store version {version}")
    out = {}
    pos = 6
    total = len(blob)
    while pos < total:
        if pos + 4 > total:
            raise ValueError(f"{path}: truncated record header at byte {pos}")
        (key_len,) = struct.unpack_from("<I", blob, pos)
        pos += 4
        if pos + key_len + 4 > total:
            raise ValueError(f"{path}: truncated record at byte {pos}")
        key = blob[pos : pos + key_len].decode("utf-8")
        pos += key_len
        (dim,) = struct.unpack_from("<I", blob, pos)
        pos += 4
        if pos + 4 * dim > total:
            raise ValueError(f"{path}: truncated vector payload at byte {pos}")
        if key in out:
            raise ValueError(f"{path}: duplicate id {key!r}")
        out[key] = np.frombuffer(blob, dtype="<f4", count=dim, offset=pos).copy()
        pos += 4 * dim
    return out
