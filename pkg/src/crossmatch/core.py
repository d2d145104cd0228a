"""Labeled point sets, distance metrics and the pooled distance matrix."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.spatial.distance import pdist, squareform


class ParseError(ValueError):
    """Input file or field could not be parsed."""


class Metric(str, enum.Enum):
    EUCLIDEAN = "euclidean"
    SQUARED_EUCLIDEAN = "squared_euclidean"
    COSINE = "cosine_distance"
    MANHATTAN = "manhattan"

    @classmethod
    def parse(cls, value: "str | Metric") -> "Metric":
        """Accept enum values as well as the short CLI spellings."""
        if isinstance(value, Metric):
            return value
        key = str(value).strip().lower()
        try:
            return _METRIC_ALIASES[key]
        except KeyError:
            raise ValueError(
                f"unknown metric {value!r}; expected one of {sorted(_METRIC_ALIASES)}"
            ) from None

    @property
    def cli_name(self) -> str:
        return _CLI_NAMES[self]


_METRIC_ALIASES = {
    "euclidean": Metric.EUCLIDEAN,
    "squared_euclidean": Metric.SQUARED_EUCLIDEAN,
    "sqeuclidean": Metric.SQUARED_EUCLIDEAN,
    "cosine_distance": Metric.COSINE,
    "cosine": Metric.COSINE,
    "manhattan": Metric.MANHATTAN,
    "cityblock": Metric.MANHATTAN,
}
_CLI_NAMES = {
    Metric.EUCLIDEAN: "euclidean",
    Metric.SQUARED_EUCLIDEAN: "sqeuclidean",
    Metric.COSINE: "cosine",
    Metric.MANHATTAN: "manhattan",
}
_SCIPY_NAMES = {
    Metric.EUCLIDEAN: "euclidean",
    Metric.SQUARED_EUCLIDEAN: "sqeuclidean",
    Metric.COSINE: "cosine",
    Metric.MANHATTAN: "cityblock",
}

DEFAULT_METRIC = Metric.EUCLIDEAN


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class LabeledPoint:
    coords: tuple[float, ...]
    label: int

    def __post_init__(self) -> None:
        coords = tuple(float(c) for c in self.coords)
        if not coords:
            raise ValueError("point has no coordinates")
        if not all(np.isfinite(coords)):
            raise ValueError("point has a non-finite coordinate")
        if self.label not in (0, 1):
            raise ValueError(f"label must be 0 or 1, got {self.label!r}")
        object.__setattr__(self, "coords", coords)


@dataclass(frozen=True, eq=False)
class PooledSample:
    """Both groups stacked into one ``(N, d)`` array, with a 0/1 label per row.

    Build one with :func:`pooled_from_groups` or :meth:`from_points`; the
    arrays are read-only after construction.
    """

    coords: np.ndarray
    labels: np.ndarray

    def __post_init__(self) -> None:
        coords = np.array(self.coords, dtype=np.float64)
        labels = np.array(self.labels, dtype=np.int64)
        if coords.ndim != 2 or coords.shape[1] == 0:
            raise ValueError("coords must be a non-empty (N, d) array")
        if labels.shape != (coords.shape[0],):
            raise ValueError("need exactly one label per point")
        if not np.isin(labels, (0, 1)).all():
            raise ValueError("labels must be 0 or 1")
        if not np.isfinite(coords).all():
            raise ValueError("non-finite coordinate in sample")
        if not (labels == 0).any() or not (labels == 1).any():
            raise ValueError("each group needs at least one point")
        object.__setattr__(self, "coords", _frozen(coords))
        object.__setattr__(self, "labels", _frozen(labels))

    @classmethod
    def from_points(cls, points: Sequence[LabeledPoint]) -> "PooledSample":
        dims = {len(p.coords) for p in points}
        if len(dims) > 1:
            raise ValueError(f"points have mixed dimensions {sorted(dims)}")
        return cls(np.array([p.coords for p in points]), np.array([p.label for p in points]))

    @property
    def points(self) -> list[LabeledPoint]:
        return [LabeledPoint(tuple(c), int(g)) for c, g in zip(self.coords, self.labels)]

    @property
    def n(self) -> int:
        return int((self.labels == 0).sum())

    @property
    def m(self) -> int:
        return int((self.labels == 1).sum())

    @property
    def N(self) -> int:
        return int(self.labels.shape[0])

    @property
    def dim(self) -> int:
        return int(self.coords.shape[1])


@dataclass(frozen=True, eq=False)
class DistanceMatrix:
    """Symmetric, zero-diagonal matrix of pairwise distances.

    ``pseudo_index`` is set only on matrices produced by ``pad_odd``: it marks
    the appended zero-distance row whose pair is discarded after matching.
    """

    entries: np.ndarray
    metric: Metric | None = None
    pseudo_index: int | None = field(default=None)

    def __post_init__(self) -> None:
        e = np.array(self.entries, dtype=np.float64)
        if e.ndim != 2 or e.shape[0] != e.shape[1]:
            raise ValueError("distance matrix must be square")
        if not np.isfinite(e).all():
            raise ValueError("distance matrix has non-finite entries")
        if (e < 0).any():
            raise ValueError("distance matrix has negative entries")
        if not np.array_equal(e, e.T):
            raise ValueError("distance matrix is not symmetric")
        if np.diagonal(e).any():
            raise ValueError("distance matrix diagonal must be zero")
        object.__setattr__(self, "entries", _frozen(e))

    @property
    def size(self) -> int:
        return int(self.entries.shape[0])

    def __getitem__(self, idx):
        return self.entries[idx]


def _as_2d(vectors, name: str) -> np.ndarray:
    arr = np.asarray(vectors, dtype=np.float64)
    if arr.ndim == 1:
        # a flat list is read as scalar (1-d) points
        arr = arr.reshape(-1, 1)
    if arr.size == 0:
        raise ValueError(f"group {name} is empty")
    if arr.ndim != 2:
        raise ValueError(f"group {name} must be a list of equal-length vectors")
    return arr


def pooled_from_groups(a, b) -> PooledSample:
    """Pool two groups of vectors: ``a`` gets label 0, ``b`` gets label 1.

    Row order is preserved with all of ``a`` first.
    """
    try:
        xa = _as_2d(a, "a")
        xb = _as_2d(b, "b")
    except ValueError as exc:
        if "inhomogeneous" in str(exc):
            raise ValueError("dimension mismatch within a group") from None
        raise
    if xa.shape[1] != xb.shape[1]:
        raise ValueError(f"dimension mismatch: {xa.shape[1]} vs {xb.shape[1]}")
    labels = np.concatenate([np.zeros(len(xa), np.int64), np.ones(len(xb), np.int64)])
    return PooledSample(np.vstack([xa, xb]), labels)


def build_distance_matrix(sample: PooledSample | np.ndarray, metric: Metric | str = DEFAULT_METRIC) -> DistanceMatrix:
    """Dense N x N distances between all pooled points under ``metric``."""
    metric = Metric.parse(metric)
    coords = sample.coords if isinstance(sample, PooledSample) else np.asarray(sample, dtype=np.float64)
    if coords.ndim != 2:
        raise ValueError("expected an (N, d) array of points")
    if not np.isfinite(coords).all():
        raise ValueError("non-finite coordinate in sample")
    if metric is Metric.COSINE and (np.abs(coords).sum(axis=1) == 0).any():
        raise ValueError("cosine distance is undefined for a zero vector")
    if coords.shape[0] < 2:
        return DistanceMatrix(np.zeros((coords.shape[0], coords.shape[0])), metric)
    # pdist evaluates each unordered pair once, so symmetry is exact
    condensed = pdist(coords, _SCIPY_NAMES[metric])
    if metric is Metric.COSINE:
        np.clip(condensed, 0.0, None, out=condensed)
    return DistanceMatrix(squareform(condensed, checks=False), metric)
