"""User vectors from visited-site vectors: weighted, log, or simple average.

Weights per user always form a simplex (non-negative, sum 1): "wa" uses
raw visit frequencies, "la" their natural logs (falling back to "sa" when
every visited frequency is 1), and "sa" a uniform 1/n.
"""

from dataclasses import dataclass, field

import numpy as np

from .representation import SiteVector

METHODS = ("wa", "la", "sa")


class AggregationError(Exception):
    pass


@dataclass
class BrowsingMatrix:
    """Sparse user-by-site visit-frequency matrix; absent entries are 0."""

    users: list
    sites: list
    entries: dict = field(repr=False)  # user -> {site: frequency >= 1}

    def __post_init__(self):
        user_set = set(self.users)
        site_set = set(self.sites)
        if len(user_set) != len(self.users) or len(site_set) != len(self.sites):
            raise ValueError("user and site ids must be unique")
        for user, row in self.entries.items():
            if user not in user_set:
                raise ValueError(f"entry for unknown user {user!r}")
            for site, freq in row.items():
                if site not in site_set:
                    raise ValueError(f"entry for unknown site {site!r}")
                if freq < 1:
                    raise ValueError(f"frequency for ({user!r}, {site!r}) must be >= 1")

    @property
    def n_entries(self):
        return sum(len(row) for row in self.entries.values())

    def row(self, user):
        return self.entries.get(user, {})


@dataclass
class UserVector:
    user_id: str
    vec: np.ndarray = field(repr=False)
    n_sites: int = 0

    def __post_init__(self):
        if self.n_sites < 1:
            raise ValueError("an emitted user must aggregate at least one site")


def aggregate(method, row, site_vectors, user_id=""):
    """Combine the site vectors a user visited into one user vector.

    `row` maps site id to visit frequency; sites without a (non-zero)
    vector are dropped first. Raises AggregationError when nothing
    representable remains.
    """
    if method not in METHODS:
        raise ValueError(f"unknown aggregation method {method!r}; expected one of {METHODS}")
    freqs = []
    vecs = []
    for site in sorted(row):
        freq = row[site]
        if freq <= 0:
            continue
        value = site_vectors.get(site)
        if value is None:
            continue
        vec = value.vec if isinstance(value, SiteVector) else np.asarray(value)
        if not np.any(vec):
            continue
        freqs.append(float(freq))
        vecs.append(np.asarray(vec, dtype=np.float64))
    if not vecs:
        raise AggregationError(f"no representable sites for user {user_id or '<anonymous>'}")

    weights = aggregation_weights(method, freqs)
    vec = weights @ np.stack(vecs)
    return UserVector(user_id=user_id, vec=vec, n_sites=len(vecs))


def aggregation_weights(method, frequencies):
    """The simplex weights `aggregate` assigns to visit `frequencies`."""
    if method not in METHODS:
        raise ValueError(f"unknown aggregation method {method!r}; expected one of {METHODS}")
    freqs = np.asarray(list(frequencies), dtype=np.float64)
    if freqs.size == 0 or np.any(freqs <= 0):
        raise ValueError("frequencies must be a non-empty sequence of positive numbers")
    if method == "wa":
        raw = freqs
    elif method == "la":
        raw = np.log(freqs)
        if raw.sum() == 0.0:  # every frequency is 1; degrade to the simple average
            raw = np.ones_like(freqs)
    else:
        raw = np.ones_like(freqs)
    return raw / raw.sum()
