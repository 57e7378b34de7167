"""Pre-trained word-vector store: binary-format loader and exact lookups.

File layout (bit-exact contract): an ASCII header line ``"<vocab> <dim>\\n"``
followed by one record per term: the term's UTF-8 bytes, a single space,
then `dim` little-endian IEEE-754 32-bit floats, optionally followed by a
single newline. Both the with-newline and without-newline layouts are
accepted and written.
"""

import logging
from dataclasses import dataclass, field

import numpy as np

logger = logging.getLogger(__name__)

_CHUNK = 1 << 16


class EmbeddingLoadError(Exception):
    """Malformed embedding file; `offset` is the absolute byte offset."""

    def __init__(self, message, offset):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


@dataclass
class EmbeddingMatrix:
    """Vocabulary mapped to rows of a dense float32 matrix."""

    dim: int
    vocab: dict = field(repr=False)
    vectors: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.dim <= 0:
            raise ValueError("dim must be positive")
        if self.vectors.shape != (len(self.vocab), self.dim):
            raise ValueError("vectors shape must be (len(vocab), dim)")

    def __len__(self):
        return len(self.vocab)

    def __contains__(self, term):
        return term in self.vocab

    def lookup(self, term):
        """The stored vector for `term`, or None when out of vocabulary.

        Lookup is exact-match on the stored (possibly case-folded) form.
        """
        row = self.vocab.get(term)
        if row is None:
            return None
        return self.vectors[row]


class _RecordReader:
    """Buffered reader tracking absolute offsets for error reporting."""

    def __init__(self, fh, start_offset):
        self.fh = fh
        self.buf = b""
        self.pos = start_offset  # offset of buf[0] in the file

    def _fill(self):
        chunk = self.fh.read(_CHUNK)
        if not chunk:
            return False
        self.buf += chunk
        return True

    def read_until_space(self):
        while True:
            i = self.buf.find(b" ")
            if i >= 0:
                out = self.buf[:i]
                self.buf = self.buf[i + 1 :]
                self.pos += i + 1
                return out
            if not self._fill():
                raise EmbeddingLoadError("truncated file inside a term", self.pos + len(self.buf))

    def read_exact(self, n):
        while len(self.buf) < n:
            if not self._fill():
                raise EmbeddingLoadError("truncated file inside a vector", self.pos + len(self.buf))
        out = self.buf[:n]
        self.buf = self.buf[n:]
        self.pos += n
        return out

    def skip_newline(self):
        if not self.buf:
            self._fill()
        if self.buf[:1] == b"\n":
            self.buf = self.buf[1:]
            self.pos += 1

    def at_eof(self):
        return not self.buf and not self._fill()


def load_word2vec_binary(path, limit=None, lowercase=True):
    """Load a binary embedding file into an :class:`EmbeddingMatrix`.

    The first min(vocab, limit) entries are read in file order and kept
    bit-exact (no normalization). With `lowercase` (the default, matching
    the lowercase tokenizer) terms are case-folded at load time and
    collisions keep the first occurrence; exact duplicate terms in the
    file are an error either way.
    """
    with open(path, "rb") as fh:
        header = fh.readline(128)
        if not header.endswith(b"\n"):
            raise EmbeddingLoadError("missing or overlong header line", 0)
        try:
            vocab_size, dim = (int(f) for f in header.split())
        except ValueError:
            raise EmbeddingLoadError(f"malformed header {header!r}", 0) from None
        if vocab_size < 0 or dim <= 0:
            raise EmbeddingLoadError(f"invalid header counts {header!r}", 0)

        take = vocab_size if limit is None else min(vocab_size, int(limit))
        reader = _RecordReader(fh, len(header))
        vec_bytes = 4 * dim
        vectors = np.empty((take, dim), dtype="<f4")
        vocab = {}
        raw_seen = set()
        rows = 0
        for _ in range(take):
            entry_offset = reader.pos
            raw_term = reader.read_until_space()
            if not raw_term:
                raise EmbeddingLoadError("empty term", entry_offset)
            if raw_term in raw_seen:
                raise EmbeddingLoadError(f"duplicate term {raw_term!r}", entry_offset)
            raw_seen.add(raw_term)
            payload = reader.read_exact(vec_bytes)
            reader.skip_newline()
            term = raw_term.decode("utf-8", errors="replace")
            if lowercase:
                term = term.lower()
            if term in vocab:
                logger.debug("case-fold collision for %r, keeping first occurrence", term)
                continue
            vectors[rows] = np.frombuffer(payload, dtype="<f4")
            vocab[term] = rows
            rows += 1
        if limit is None and not reader.at_eof():
            raise EmbeddingLoadError("trailing data after last entry", reader.pos)

    return EmbeddingMatrix(dim=dim, vocab=vocab, vectors=np.ascontiguousarray(vectors[:rows]))


def write_word2vec_binary(path, matrix, newline_after_vector=False):
    """Write `matrix` in the binary layout; inverse of the loader.

    `newline_after_vector` selects the layout variant with a newline after
    each float payload.
    """
    terms = sorted(matrix.vocab, key=matrix.vocab.get)
    tail = b"\n" if newline_after_vector else b""
    with open(path, "wb") as fh:
        fh.write(f"{len(terms)} {matrix.dim}\n".encode("ascii"))
        for term in terms:
            raw = term.encode("utf-8")
            if b" " in raw or b"\n" in raw:
                raise ValueError(f"term {term!r} contains a space or newline")
            fh.write(raw)
            fh.write(b" ")
            fh.write(np.ascontiguousarray(matrix.vectors[matrix.vocab[term]], dtype="<f4").tobytes())
            fh.write(tail)
