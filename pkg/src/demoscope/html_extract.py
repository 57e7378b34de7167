"""Tag-mask driven text extraction from HTML, tokenization, and a small fetcher.

Extraction is tolerant by construction: it is built on the recovering
stdlib HTML tokenizer, decodes bytes with replacement, and never raises on
malformed markup. The title always contributes; the other tag classes
(headlines h1-h6, paragraphs, link anchors, image descriptions, full
visible text) are switched by a :class:`TagMask`.
"""

import logging
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from html.parser import HTMLParser

import requests

logger = logging.getLogger(__name__)

MASK_ALPHABET = "hpaiv"
_HEADLINE_TAGS = frozenset({"h1", "h2", "h3", "h4", "h5", "h6"})
_SKIP_TAGS = frozenset({"script", "style", "noscript", "template"})

# Unicode letters and digits; underscore is a separator, not a word character.
_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)


def tokenize(text):
    """Lowercase `text` and split it on runs of non-alphanumeric characters.

    Empty fragments are dropped; purely numeric fragments are kept.
    """
    return _TOKEN_RE.findall(text.lower())


@dataclass(frozen=True)
class TagMask:
    """Which HTML tag classes contribute text. The title always contributes.

    Serialized as a compact string over "hpaiv" (title implicit), e.g.
    "hpai" enables headlines, paragraphs, link anchors and image text.
    """

    title: bool = True
    headlines: bool = False
    paragraphs: bool = False
    links: bool = False
    images: bool = False
    visible_text: bool = False

    _FLAG_FIELDS = {
        "h": "headlines",
        "p": "paragraphs",
        "a": "links",
        "i": "images",
        "v": "visible_text",
    }

    def __post_init__(self):
        if not self.title:
            raise ValueError("the title flag cannot be disabled")

    @classmethod
    def parse(cls, code):
        """Parse a mask string such as "hpai"; "" means title only."""
        seen = set()
        for ch in code:
            if ch not in cls._FLAG_FIELDS:
                raise ValueError(f"unknown tag flag {ch!r} in mask {code!r}")
            if ch in seen:
                raise ValueError(f"duplicate tag flag {ch!r} in mask {code!r}")
            seen.add(ch)
        return cls(**{cls._FLAG_FIELDS[ch]: True for ch in seen})

    @property
    def code(self):
        return "".join(ch for ch in MASK_ALPHABET if getattr(self, self._FLAG_FIELDS[ch]))

    def __str__(self):
        return self.code


DEFAULT_MASK = TagMask.parse("hpai")


def all_tag_combinations():
    """The 16 masks over {h, p, a, i} (title implicit), in mask-code order."""
    masks = []
    for bits in range(16):
        flags = {
            "headlines": bool(bits & 8),
            "paragraphs": bool(bits & 4),
            "links": bool(bits & 2),
            "images": bool(bits & 1),
        }
        masks.append(TagMask(**flags))
    return sorted(masks, key=lambda m: m.code)


def experiment_masks():
    """The 16 {h,p,a,i} combinations plus the full visible-text variant."""
    return all_tag_combinations() + [TagMask.parse("hpaiv")]


@dataclass
class ExtractedDocument:
    """Token stream pulled out of one stored HTML page."""

    site_id: str
    tokens: list
    token_count: int

    def __post_init__(self):
        if self.token_count != len(self.tokens):
            raise ValueError("token_count must equal len(tokens)")


class _TagStreamParser(HTMLParser):
    """Streams text fragments annotated with the tag classes they sit in.

    Fragments are (kind, payload) tuples in document order: ("title", text),
    ("image", text) for img alt/title attributes, or ("text", (text, classes))
    where classes is the subset of {"h","p","a"} of enclosing tags. Script,
    style and (non-title) head content never produce fragments.
    """

    def __init__(self):
        super().__init__(convert_charrefs=True)
        self.fragments = []
        self._skip = 0
        self._head = 0
        self._title = 0
        self._counts = {"h": 0, "p": 0, "a": 0}

    @staticmethod
    def _class_of(tag):
        if tag in _HEADLINE_TAGS:
            return "h"
        if tag == "p":
            return "p"
        if tag == "a":
            return "a"
        return None

    def handle_starttag(self, tag, attrs):
        if tag in _SKIP_TAGS:
            self._skip += 1
        elif tag == "head":
            self._head += 1
        elif tag == "title":
            self._title += 1
        elif tag == "img":
            self._handle_img(attrs)
        else:
            cls = self._class_of(tag)
            if cls:
                self._counts[cls] += 1

    def handle_endtag(self, tag):
        if tag in _SKIP_TAGS:
            self._skip = max(0, self._skip - 1)
        elif tag == "head":
            self._head = max(0, self._head - 1)
        elif tag == "title":
            self._title = max(0, self._title - 1)
        else:
            cls = self._class_of(tag)
            if cls:
                self._counts[cls] = max(0, self._counts[cls] - 1)

    def _handle_img(self, attrs):
        if self._skip or self._head:
            return
        alt = title = None
        for name, value in attrs:
            if name == "alt" and alt is None:
                alt = value
            elif name == "title" and title is None:
                title = value
        text = alt or title
        if text:
            self.fragments.append(("image", text))

    def handle_data(self, data):
        if self._skip:
            return
        if self._title:
            self.fragments.append(("title", data))
            return
        if self._head:
            return
        classes = frozenset(c for c, depth in self._counts.items() if depth)
        self.fragments.append(("text", (data, classes)))


def extract(html, mask=DEFAULT_MASK, site_id=""):
    """Extract the token stream of `html` (raw bytes) under `mask`.

    Title tokens come first, then the remaining fragments in document
    order. A text fragment is emitted once per enabled tag class it sits
    in; with visible text enabled every fragment is emitted at least once
    (so the result is a superset of any narrower mask). Never raises on
    malformed or undecodable input.
    """
    if isinstance(html, str):
        text = html
    else:
        text = bytes(html).decode("utf-8", errors="replace")
    parser = _TagStreamParser()
    parser.feed(text)
    parser.close()

    title_tokens = []
    body_tokens = []
    for kind, payload in parser.fragments:
        if kind == "title":
            title_tokens.extend(tokenize(payload))
            continue
        if kind == "image":
            matches = 1 if mask.images else 0
        else:
            payload, classes = payload
            matches = (
                ("h" in classes and mask.headlines)
                + ("p" in classes and mask.paragraphs)
                + ("a" in classes and mask.links)
            )
        emissions = max(1, matches) if mask.visible_text else matches
        if emissions:
            body_tokens.extend(tokenize(payload) * emissions)

    tokens = title_tokens + body_tokens
    return ExtractedDocument(site_id=site_id, tokens=tokens, token_count=len(tokens))


class FetchError(Exception):
    """A URL could not be retrieved; carries the URL and HTTP status if any."""

    def __init__(self, url, reason, status=None):
        super().__init__(f"fetch failed for {url}: {reason}")
        self.url = url
        self.reason = reason
        self.status = status


def fetch(url, timeout=10.0):
    """Return the body bytes of `url` on HTTP 2xx; raise FetchError otherwise."""
    try:
        response = requests.get(url, timeout=timeout)
    except requests.RequestException as exc:
        raise FetchError(url, str(exc)) from exc
    if not 200 <= response.status_code < 300:
        raise FetchError(url, f"HTTP {response.status_code}", status=response.status_code)
    return response.content


def fetch_many(urls, timeout=10.0, max_workers=8):
    """Fetch several URLs concurrently.

    Returns {url: bytes or FetchError}; per-URL failures are reported
    in-band so the caller decides between skipping and aborting.
    """

    def one(url):
        try:
            return fetch(url, timeout=timeout)
        except FetchError as exc:
            return exc

    urls = list(urls)
    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        results = pool.map(one, urls)
    return dict(zip(urls, results))
