"""Readers for fastText ``.vec`` text files and plain numeric point lists."""

from __future__ import annotations

import logging
import math
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .core import ParseError

log = logging.getLogger(__name__)

_INT_RE = re.compile(r"^[+-]?\d+$")
_SPLIT_RE = re.compile(r"[,\s]+")
# ASCII whitespace only: fastText tokens may contain U+00A0 and friends
_ASCII_WS = " \t\r\n\f\v"
_VEC_SPLIT_RE = re.compile(r"[ \t\r\n\f\v]+")


@dataclass(frozen=True, eq=False)
class EmbeddingCollection:
    """Vectors with optional tokens; ``words`` is empty for anonymous points."""

    words: tuple[str, ...]
    vectors: np.ndarray
    dropped: int = field(default=0)

    def __post_init__(self) -> None:
        vecs = np.asarray(self.vectors, dtype=np.float64)
        if vecs.ndim != 2 or vecs.shape[0] == 0:
            raise ValueError("empty collection")
        if self.words and len(self.words) != vecs.shape[0]:
            raise ValueError("words and vectors differ in length")
        if not np.isfinite(vecs).all():
            raise ValueError("collection has non-finite values")
        vecs.setflags(write=False)
        object.__setattr__(self, "words", tuple(self.words))
        object.__setattr__(self, "vectors", vecs)

    @property
    def dim(self) -> int:
        return int(self.vectors.shape[1])

    def __len__(self) -> int:
        return int(self.vectors.shape[0])


def _parse_floats(fields: list[str], where: str) -> list[float]:
    try:
        vals = [float(f) for f in fields]
    except ValueError:
        raise ParseError(f"{where}: non-numeric coordinate") from None
    if any("_" in f for f in fields) or not all(math.isfinite(v) for v in vals):
        raise ParseError(f"{where}: coordinate is not a finite decimal number")
    return vals


def _read_lines(path):
    try:
        with open(path, encoding="utf-8", newline=None) as fh:
            yield from fh
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror or exc}") from exc
    except UnicodeDecodeError as exc:
        raise ParseError(f"{path}: not valid UTF-8 ({exc.reason})") from exc


def load_vec_file(path, skip_malformed: bool = False, limit: int | None = None) -> EmbeddingCollection:
    """Load a fastText-style ``.vec`` file.

    An optional first line ``<count> <dim>`` is recognised when it holds
    exactly two integer fields. Every other line is a token followed by
    ``dim`` coordinates; without a header, ``dim`` comes from the first row.
    Malformed rows raise :class:`ParseError` unless ``skip_malformed`` is set,
    in which case they are dropped and counted in ``dropped``.
    """
    if limit is not None and limit < 1:
        raise ValueError("limit must be positive")
    words: list[str] = []
    rows: list[list[float]] = []
    dim = None
    dropped = 0
    first = True
    for lineno, line in enumerate(_read_lines(path), start=1):
        text = line.strip(_ASCII_WS)
        if not text:
            continue
        fields = _VEC_SPLIT_RE.split(text)
        if first:
            first = False
            if len(fields) == 2 and all(_INT_RE.match(f) for f in fields):
                dim = int(fields[1])
                if dim < 1:
                    raise ParseError(f"{path}:{lineno}: header dimension must be positive")
                continue
        where = f"{path}:{lineno}"
        if dim is None:
            dim = len(fields) - 1
            if dim < 1:
                raise ParseError(f"{where}: row has a token but no coordinates")
        try:
            if len(fields) - 1 != dim:
                raise ParseError(f"{where}: expected {dim} coordinates, found {len(fields) - 1}")
            vals = _parse_floats(fields[1:], where)
        except ParseError:
            if not skip_malformed:
                raise
            dropped += 1
            continue
        words.append(fields[0])
        rows.append(vals)
        if limit is not None and len(rows) >= limit:
            break
    if not rows:
        raise ParseError(f"{path}: empty collection")
    if dropped:
        log.warning("%s: dropped %d malformed line(s)", path, dropped)
    return EmbeddingCollection(tuple(words), np.array(rows, dtype=np.float64), dropped)


def load_points_file(path) -> EmbeddingCollection:
    """Load one point per line, fields separated by commas and/or whitespace."""
    rows: list[list[float]] = []
    for lineno, line in enumerate(_read_lines(path), start=1):
        text = line.strip()
        if not text:
            continue
        fields = [f for f in _SPLIT_RE.split(text) if f]
        vals = _parse_floats(fields, f"{path}:{lineno}")
        if rows and len(vals) != len(rows[0]):
            raise ParseError(f"{path}:{lineno}: ragged row ({len(vals)} fields, expected {len(rows[0])})")
        rows.append(vals)
    if not rows:
        raise ParseError(f"{path}: empty collection")
    return EmbeddingCollection((), np.array(rows, dtype=np.float64))


def sniff_format(path) -> str:
    """``"vec"`` for ``.vec`` files or a non-numeric leading field, else ``"points"``."""
    if Path(path).suffix.lower() == ".vec":
        return "vec"
    for line in _read_lines(path):
        text = line.strip()
        if text:
            head = _SPLIT_RE.split(text)[0]
            try:
                float(head)
            except ValueError:
                return "vec"
            return "points"
    return "points"


def load_collection(path, fmt: str = "auto", skip_malformed: bool = False,
                    limit: int | None = None) -> EmbeddingCollection:
    """Load ``path`` as ``fmt`` (``vec``, ``points`` or ``auto`` to sniff)."""
    if fmt == "auto":
        fmt = sniff_format(path)
    if fmt == "vec":
        return load_vec_file(path, skip_malformed=skip_malformed, limit=limit)
    if fmt != "points":
        raise ValueError(f"unknown input format {fmt!r}")
    coll = load_points_file(path)
    if limit is not None and limit < len(coll):
        coll = EmbeddingCollection((), coll.vectors[:limit])
    return coll


def write_vec_file(collection: EmbeddingCollection, path, header: bool = True) -> None:
    """Write ``collection`` in ``.vec`` layout; floats use shortest round-trip repr."""
    words = collection.words or tuple(f"p{i}" for i in range(len(collection)))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        if header:
            fh.write(f"{len(collection)} {collection.dim}\n")
        for word, vec in zip(words, collection.vectors):
            fh.write(word + " " + " ".join(repr(float(v)) for v in vec) + "\n")
